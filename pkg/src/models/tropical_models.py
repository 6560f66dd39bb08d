from fractions import Fraction
from math import gcd, lcm
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, model_validator
from sympy import Expr, Integer, Symbol, symbols

from src.models.common import FROZEN, Rational
from src.models.form_models import BIDEGREES, GraphForm
from src.models.graph_models import GraphCorrespondence, WeightedMetricGraph
from src.models.map_models import HarmonicFunction
from src.utils.errors import ReferentialError
from src.utils.polynomial import Scalar, as_fraction

Point = Tuple[Rational, ...]


class GammaGroup(BaseModel):
    """Additive subgroup of the reals generated by finitely many positive rationals."""
    model_config = FROZEN

    generators: Tuple[Rational, ...] = ()
    saturated: bool = False

    @classmethod
    def integers(cls) -> "GammaGroup":
        return cls(generators=(Fraction(1),))

    @classmethod
    def generated_by(cls, values) -> "GammaGroup":
        return cls(generators=tuple(sorted({as_fraction(v) for v in values if as_fraction(v) != 0})))

    @property
    def step(self) -> Fraction:
        """Positive generator of the (cyclic) group; 0 for the trivial group."""
        if not self.generators:
            return Fraction(0)
        common = lcm(*(g.denominator for g in self.generators))
        return Fraction(gcd(*(int(g * common) for g in self.generators)), common)

    def contains(self, value: Scalar) -> bool:
        value = as_fraction(value)
        if value == 0:
            return True
        step = self.step
        if step == 0:
            return False
        if self.saturated:
            return True
        return (value / step).denominator == 1

    def saturation(self) -> "GammaGroup":
        """Rational points of the divisible hull; all of Q once the group is nontrivial."""
        return GammaGroup(generators=self.generators, saturated=True)


class HarmonicTropicalization(BaseModel):
    """Tuple of harmonic functions on a graph, one per ambient coordinate."""
    model_config = FROZEN

    graph: str
    components: Tuple[HarmonicFunction, ...]

    @property
    def dimension(self) -> int:
        return len(self.components)

    def point(self, vertex_id: str) -> Tuple[Fraction, ...]:
        try:
            return tuple(c.vertex_values[vertex_id] for c in self.components)
        except KeyError:
            raise ReferentialError(f"tropicalization of {self.graph!r} has no value at {vertex_id!r}") from None

    def slope_vector(self, edge_id: str) -> Tuple[Fraction, ...]:
        try:
            return tuple(c.slopes[edge_id] for c in self.components)
        except KeyError:
            raise ReferentialError(f"tropicalization of {self.graph!r} has no slope on {edge_id!r}") from None


class TropHarmonicityReport(BaseModel):
    model_config = FROZEN

    harmonic: bool
    integral: bool
    gamma_harmonic: bool
    witnesses: List[str] = []


def coordinate_symbols(dimension: int) -> Tuple[Symbol, ...]:
    """The coordinates x1, ..., xn of the ambient space."""
    if dimension == 0:
        return ()
    return tuple(symbols(f"x1:{dimension + 1}"))


class LagerbergPolyForm(BaseModel):
    """
    Polynomial Lagerberg form on Q^n.

    A coefficient may also be a sympy Piecewise of polynomials; on dimension 1
    this carries forms that are only C^K across a point of the line.

    Coefficients are keyed by 1-based index tuples: () for (0,0), (i,) for
    d'x_i or d''x_i, and (i, j) for d'x_i ^ d''x_j. Missing keys are zero.
    """
    model_config = FROZEN

    dimension: int
    bidegree: Tuple[int, int]
    coefficients: Dict[Tuple[int, ...], Expr] = {}

    @model_validator(mode="after")
    def _check_keys(self) -> "LagerbergPolyForm":
        if self.bidegree not in BIDEGREES:
            raise ValueError(f"bidegree {self.bidegree} is not in {{0,1}}^2")
        arity = sum(self.bidegree)
        allowed = set(coordinate_symbols(self.dimension))
        for key, expr in self.coefficients.items():
            if len(key) != arity or any(not 1 <= i <= self.dimension for i in key):
                raise ValueError(f"coefficient index {key} does not fit bidegree {self.bidegree} in dimension {self.dimension}")
            stray = expr.free_symbols - allowed
            if stray:
                raise ValueError(f"coefficient {key} uses unknown symbols {sorted(map(str, stray))}")
        return self

    @property
    def symbols(self) -> Tuple[Symbol, ...]:
        return coordinate_symbols(self.dimension)

    def coefficient(self, *key: int) -> Expr:
        return self.coefficients.get(tuple(key), Integer(0))


class TropSegment(BaseModel):
    """Segment start + [0, lattice_length] * direction with a primitive integer direction."""
    model_config = FROZEN

    start: Point
    end: Point
    direction: Tuple[int, ...]
    lattice_length: Rational
    multiplicity: int


class TropCycle(BaseModel):
    """Weighted one-dimensional rational complex with the images of boundary points marked."""
    model_config = FROZEN

    dimension: int
    segments: Tuple[TropSegment, ...] = ()
    excluded: Tuple[Point, ...] = ()


class UnbalancedPoint(BaseModel):
    model_config = FROZEN

    point: Point
    defect: Tuple[int, ...]


class BalancingReport(BaseModel):
    model_config = FROZEN

    violations: List[UnbalancedPoint] = []

    @property
    def balanced(self) -> bool:
        return not self.violations


class IntegrationComparison(BaseModel):
    """Graph-side and tropical-side values of one integral type."""
    model_config = FROZEN

    kind: str
    graph_side: Rational
    trop_side: Rational

    @property
    def equal(self) -> bool:
        return self.graph_side == self.trop_side


class GraphPoint(BaseModel):
    """A vertex, or a point at a position along an edge."""
    model_config = FROZEN

    vertex: Optional[str] = None
    edge: Optional[str] = None
    position: Optional[Rational] = None

    @model_validator(mode="after")
    def _one_kind(self) -> "GraphPoint":
        if (self.vertex is None) == (self.edge is None):
            raise ValueError("a graph point is either a vertex or an edge position")
        if self.edge is not None and self.position is None:
            raise ValueError("an edge point needs a position")
        return self


class LocalCertificate(BaseModel):
    """Neighbourhood U of a point with h and eta such that h*eta is the form restricted to U."""
    model_config = FROZEN

    case: str
    point: GraphPoint
    neighbourhood: WeightedMetricGraph
    correspondence: GraphCorrespondence
    tropicalization: HarmonicTropicalization
    form: LagerbergPolyForm
    restricted: GraphForm
    verified: bool
