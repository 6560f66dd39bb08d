from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel

from src.models.common import FROZEN, Rational
from src.models.graph_models import GraphCorrespondence, WeightedMetricGraph
from src.utils.errors import ReferentialError


class EdgeImage(BaseModel):
    """Image of a source edge: a target edge (possibly traversed backwards) or a target vertex."""
    model_config = FROZEN

    edge: Optional[str] = None
    vertex: Optional[str] = None
    reversed: bool = False

    @property
    def crushed(self) -> bool:
        return self.edge is None


class PLMap(BaseModel):
    """Piecewise linear map of graphs, simplicial with respect to the stored graphs."""
    model_config = FROZEN

    name: str = "map"
    source: WeightedMetricGraph
    target: WeightedMetricGraph
    vertex_map: Dict[str, str]
    edge_map: Dict[str, EdgeImage]
    target_subdivision: Optional[GraphCorrespondence] = None

    def image_of_vertex(self, vertex_id: str) -> str:
        try:
            return self.vertex_map[vertex_id]
        except KeyError:
            raise ReferentialError(f"map {self.name!r} does not send vertex {vertex_id!r} anywhere") from None

    def image_of_edge(self, edge_id: str) -> EdgeImage:
        try:
            return self.edge_map[edge_id]
        except KeyError:
            raise ReferentialError(f"map {self.name!r} does not send edge {edge_id!r} anywhere") from None

    def expansion_factor(self, edge_id: str) -> Fraction:
        """d_{e'} = length(image) / length(e'), or 0 for a crushed edge."""
        image = self.image_of_edge(edge_id)
        if image.crushed:
            return Fraction(0)
        return self.target.edge(image.edge).length / self.source.edge(edge_id).length


class HarmonicityFailure(BaseModel):
    model_config = FROZEN

    vertex: str
    target_vertex: str
    edges: Tuple[str, str]
    values: Tuple[Rational, Rational]

    def describe(self) -> str:
        return (
            f"local degree at {self.vertex} depends on the target edge: "
            f"{self.values[0]} over {self.edges[0]} but {self.values[1]} over {self.edges[1]}"
        )


class HarmonicCertificate(BaseModel):
    """Outcome of the harmonicity test with local, per-edge and global degrees."""
    model_config = FROZEN

    map_name: str
    harmonic: bool
    local_degrees: Dict[str, Rational] = {}
    edge_degrees: Dict[str, Rational] = {}
    degree: Optional[Rational] = None
    failure: Optional[HarmonicityFailure] = None


class HarmonicFunction(BaseModel):
    model_config = FROZEN

    vertex_values: Dict[str, Rational]
    slopes: Dict[str, Rational]


class HarmonicFunctionReport(BaseModel):
    model_config = FROZEN

    harmonic: bool
    slopes: Dict[str, Rational] = {}
    integral_slopes: bool = False
    gamma_harmonic: Optional[bool] = None
    reasons: List[str] = []


class GroupAction(BaseModel):
    """Finite group acting on a graph by harmonic self-maps."""
    model_config = FROZEN

    graph: WeightedMetricGraph
    elements: Tuple[PLMap, ...]

    @property
    def order(self) -> int:
        return len(self.elements)


class QuotientResult(BaseModel):
    model_config = FROZEN

    subdivided: WeightedMetricGraph
    action: GroupAction
    quotient: WeightedMetricGraph
    projection: PLMap
    certificate: HarmonicCertificate


class InvariantCohomologyReport(BaseModel):
    model_config = FROZEN

    invariant_ranks: Dict[str, int]
    quotient_dimensions: Dict[str, int]

    @property
    def agree(self) -> bool:
        return self.invariant_ranks == self.quotient_dimensions
