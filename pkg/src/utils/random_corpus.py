"""Seeded random graphs, forms, tropicalizations and Lagerberg forms for the property suites."""
from fractions import Fraction
from math import lcm
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sympy import Integer, Rational

from src.models.form_models import GraphForm
from src.models.graph_models import Edge, Vertex, WeightedMetricGraph
from src.models.map_models import HarmonicFunction
from src.models.tropical_models import GraphPoint, HarmonicTropicalization, LagerbergPolyForm, coordinate_symbols
from src.services.harmonic_service import HarmonicService
from src.utils.linalg import nullspace
from src.utils.polynomial import PiecewisePolynomial, Polynomial


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_rational(rng: np.random.Generator, max_numerator: int = 8, max_denominator: int = 4) -> Fraction:
    """Positive rational with bounded numerator and denominator."""
    return Fraction(int(rng.integers(1, max_numerator + 1)), int(rng.integers(1, max_denominator + 1)))


def random_graph(
    rng: np.random.Generator,
    max_vertices: int = 8,
    max_edges: int = 16,
    max_weight: int = 4,
    boundary_probability: float = 0.3,
    min_vertices: int = 1,
    name: str = "random",
) -> WeightedMetricGraph:
    """
    Connected graph without loop edges.

    A random spanning tree is grown first, then extra edges (possibly parallel)
    are added between distinct vertices.

    Args:
        rng: Generator from make_rng.
        max_vertices: Upper bound on the number of vertices.
        max_edges: Upper bound on the number of edges.
        max_weight: Upper bound on the edge weights.
        boundary_probability: Chance that a vertex is marked boundary.
        min_vertices: Lower bound on the number of vertices.
        name: Graph name.
    """
    n = int(rng.integers(min_vertices, max_vertices + 1))
    vertices = tuple(Vertex(id=f"v{i}", is_boundary=bool(rng.random() < boundary_probability)) for i in range(n))
    ends: List[Tuple[int, int]] = [(int(rng.integers(0, i)), i) for i in range(1, n)]
    if n > 1:
        extra = int(rng.integers(0, max(max_edges - len(ends), 0) + 1))
        for _ in range(extra):
            a, b = (int(x) for x in rng.choice(n, size=2, replace=False))
            ends.append((a, b))
    edges = tuple(
        Edge(
            id=f"e{k}",
            tail=f"v{a}",
            head=f"v{b}",
            length=random_rational(rng),
            weight=int(rng.integers(1, max_weight + 1)),
        )
        for k, (a, b) in enumerate(ends)
    )
    return WeightedMetricGraph(name=name, vertices=vertices, edges=edges)


def random_boundaryless_graph(rng: np.random.Generator, **kwargs) -> WeightedMetricGraph:
    return random_graph(rng, boundary_probability=0.0, **kwargs)


# forms


def _falling(k: int, d: int) -> int:
    out = 1
    for i in range(d):
        out *= k - i
    return out


class _EdgeBasis:
    """Monomials x^k plus truncated powers (x - b)_+^m, m > K, for each interior breakpoint b."""

    def __init__(self, e: Edge, breakpoints: Sequence[Fraction], degree: int, order: int) -> None:
        self.edge = e
        self.breakpoints = list(breakpoints)
        self.terms: List[Tuple[Optional[Fraction], int]] = [(None, k) for k in range(degree + 1)]
        for b in self.breakpoints:
            self.terms += [(b, m) for m in range(order + 1, degree + 1)]

    def derivative_at_end(self, term: Tuple[Optional[Fraction], int], d: int, at_head: bool) -> Fraction:
        shift, power = term
        x = self.edge.length if at_head else Fraction(0)
        if shift is not None:
            if not at_head:
                return Fraction(0)
            x -= shift
        if power < d:
            return Fraction(0)
        return _falling(power, d) * x ** (power - d)

    def build(self, coefficients: Sequence[Fraction], order: int) -> PiecewisePolynomial:
        base = Polynomial(c for (shift, _), c in zip(self.terms, coefficients) if shift is None)
        points = [Fraction(0)] + self.breakpoints + [self.edge.length]
        pieces = []
        current = base
        for i in range(len(points) - 1):
            if i > 0:
                b = points[i]
                for (shift, power), c in zip(self.terms, coefficients):
                    if shift == b and c:
                        current = current + Polynomial((-b, 1)) ** power * c
            pieces.append(current)
        return PiecewisePolynomial(self.edge.length, points, pieces, order)


def random_form(
    rng: np.random.Generator,
    g: WeightedMetricGraph,
    bidegree: Tuple[int, int],
    order: int = 3,
    max_degree: int = 5,
    max_pieces: int = 3,
    coefficient_range: int = 3,
) -> GraphForm:
    """
    Random valid form with piecewise polynomial coefficients.

    Every edge carries a polynomial of degree at most max_degree plus C^K
    corrections at up to max_pieces - 1 random breakpoints. The vertex
    conditions of the bidegree are linear in these coefficients; the form is a
    random integer combination of a basis of their solution space.
    """
    sign = -1 if sum(bidegree) % 2 else 1
    bases: Dict[str, _EdgeBasis] = {}
    offsets: Dict[str, int] = {}
    width = 0
    for e in g.edges:
        cuts = 0 if order + 1 > max_degree else int(rng.integers(0, max_pieces))
        grid = 4 * (cuts + 1)
        positions = sorted(int(x) for x in rng.choice(np.arange(1, grid), size=cuts, replace=False))
        bases[e.id] = _EdgeBasis(e, [e.length * Fraction(p, grid) for p in positions], max_degree, order)
        offsets[e.id] = width
        width += len(bases[e.id].terms)

    def oriented_row(e: Edge, forward: bool, d: int, factor: Fraction) -> List[Fraction]:
        row = [Fraction(0)] * width
        basis = bases[e.id]
        for j, term in enumerate(basis.terms):
            value = basis.derivative_at_end(term, d, at_head=not forward)
            if not forward:
                value *= sign * (-1) ** d
            row[offsets[e.id] + j] = factor * value
        return row

    def combine(*rows: List[Fraction]) -> List[Fraction]:
        return [sum(column, Fraction(0)) for column in zip(*rows)]

    rows: List[List[Fraction]] = []
    for v in g.vertices:
        arms = g.outgoing(v.id)
        if not arms:
            continue
        if bidegree == (0, 0):
            first = oriented_row(arms[0][0], arms[0][1], 0, Fraction(1))
            rows += [combine(oriented_row(e, fw, 0, Fraction(1)), [-x for x in first]) for e, fw in arms[1:]]
        if v.is_boundary:
            continue
        if len(arms) == 1:
            e, fw = arms[0]
            start = 1 if bidegree == (0, 0) else 0
            rows += [oriented_row(e, fw, d, Fraction(1)) for d in range(start, max_degree + 1)]
        elif len(arms) == 2:
            (e1, fw1), (e2, fw2) = arms
            shift = {(0, 0): 0, (1, 0): 1, (0, 1): 1, (1, 1): 2}[bidegree]
            twist = -1 if bidegree in ((1, 0), (0, 1)) else 1
            for d in range(order + 1):
                rows.append(combine(
                    oriented_row(e1, fw1, d, Fraction(e1.weight) ** (d + shift)),
                    oriented_row(e2, fw2, d, -twist * (-1) ** d * Fraction(e2.weight) ** (d + shift)),
                ))
        elif bidegree == (0, 0):
            rows.append(combine(*(oriented_row(e, fw, 1, Fraction(e.weight)) for e, fw in arms)))
        elif bidegree != (1, 1):
            rows.append(combine(*(oriented_row(e, fw, 0, Fraction(e.weight)) for e, fw in arms)))

    solution = [Fraction(0)] * width
    for vector in nullspace(rows, width):
        factor = int(rng.integers(-coefficient_range, coefficient_range + 1))
        if factor:
            solution = [s + factor * x for s, x in zip(solution, vector)]
    coefficients = {
        e.id: bases[e.id].build(solution[offsets[e.id]:offsets[e.id] + len(bases[e.id].terms)], order) for e in g.edges
    }
    values = {}
    if bidegree == (0, 0):
        values = {vid: Fraction(int(rng.integers(-5, 6))) for vid in g.isolated_vertices()}
    return GraphForm(graph=g.name, bidegree=bidegree, coefficients=coefficients, vertex_values=values, order=order)


def random_interior_point(rng: np.random.Generator, g: WeightedMetricGraph, form: GraphForm) -> GraphPoint:
    """A point strictly inside one polynomial piece of the form on a random edge."""
    e = g.edges[int(rng.integers(0, len(g.edges)))]
    intervals = form.coefficient(e.id).intervals()
    a, b, _ = intervals[int(rng.integers(0, len(intervals)))]
    q = int(rng.integers(2, 7))
    return GraphPoint(edge=e.id, position=a + (b - a) * Fraction(int(rng.integers(1, q)), q))


# tropical data


def random_tropicalization(
    rng: np.random.Generator,
    g: WeightedMetricGraph,
    dimension: int,
    harmonic_service: Optional[HarmonicService] = None,
    value_range: int = 3,
) -> HarmonicTropicalization:
    """Z-harmonic map to Q^dimension: integer combinations of harmonic basis functions with integral slopes."""
    harmonic_service = harmonic_service or HarmonicService()
    basis = []
    for f in harmonic_service.harmonic_function_space(g):
        scale = lcm(*(s.denominator for s in f.slopes.values())) if f.slopes else 1
        basis.append({vid: x * scale for vid, x in f.vertex_values.items()})
    components = []
    for _ in range(dimension):
        values = {vid: Fraction(0) for vid in g.vertex_ids}
        for vector in basis:
            factor = int(rng.integers(-value_range, value_range + 1))
            for vid in values:
                values[vid] += factor * vector[vid]
        slopes = {e.id: (values[e.head] - values[e.tail]) / e.length for e in g.edges}
        components.append(HarmonicFunction(vertex_values=values, slopes=slopes))
    return HarmonicTropicalization(graph=g.name, components=tuple(components))


def random_lagerberg(
    rng: np.random.Generator, dimension: int, bidegree: Tuple[int, int], max_degree: int = 2, coefficient_range: int = 3
) -> LagerbergPolyForm:
    """Random polynomial coefficients with small integer (sometimes halved) coefficients."""
    xs = coordinate_symbols(dimension)
    arity = sum(bidegree)
    keys: List[Tuple[int, ...]] = [()]
    for _ in range(arity):
        keys = [key + (i,) for key in keys for i in range(1, dimension + 1)]
    coefficients = {}
    for key in keys:
        expr = Integer(0)
        for _ in range(int(rng.integers(0, 4))):
            monomial = Integer(1)
            for _ in range(int(rng.integers(0, max_degree + 1))):
                monomial *= xs[int(rng.integers(0, dimension))]
            expr += Rational(int(rng.integers(-coefficient_range, coefficient_range + 1)), int(rng.integers(1, 3))) * monomial
        expr = expr.expand()
        if expr != 0:
            coefficients[key] = expr
    return LagerbergPolyForm(dimension=dimension, bidegree=bidegree, coefficients=coefficients)
