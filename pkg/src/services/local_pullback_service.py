"""Local certificates writing a form near a point as the pullback of a polynomial Lagerberg form."""
import logging
from fractions import Fraction
from math import lcm
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from sympy import Expr, Integer, Piecewise

from src.models.form_models import GraphForm
from src.models.graph_models import Edge, EdgeSegment, GraphCorrespondence, InteriorPoint, Vertex, WeightedMetricGraph
from src.models.map_models import HarmonicFunction
from src.models.tropical_models import (
    GammaGroup,
    GraphPoint,
    HarmonicTropicalization,
    LagerbergPolyForm,
    LocalCertificate,
    coordinate_symbols,
)
from src.services.form_service import FormService
from src.services.tropical_service import TropicalService
from src.utils.errors import CertificateError, DomainError, PreconditionError
from src.utils.polynomial import Polynomial
from src.utils.symbolic import polynomial_to_expr, rational

logger = logging.getLogger(__name__)


class Arm(NamedTuple):
    """A short sub-edge of U leaving the centre vertex."""
    sub_edge: str
    edge: Edge
    forward: bool
    piece: Polynomial
    radius: Fraction


class LocalPullbackService:
    """
    Builds (U, h, eta) with h*eta equal to a form restricted to a neighbourhood U of a point.

    Points inside an edge use the edge coordinate. At a vertex, U is a star of
    short sub-edges, each inside the first polynomial piece of the form on its
    edge. The vertex type selects the construction: valence 2, interior leaf or
    isolated vertex, boundary vertex, or interior vertex of valence at least 3.
    """

    def __init__(
        self,
        order: Optional[int] = None,
        form_service: Optional[FormService] = None,
        tropical_service: Optional[TropicalService] = None,
    ) -> None:
        self.form_service = form_service or FormService(order)
        self.tropical_service = tropical_service or TropicalService(form_service=self.form_service)

    def value_group(self, g: WeightedMetricGraph, gamma: Optional[GammaGroup] = None) -> GammaGroup:
        """The group generated by the edge lengths, or a supplied group that contains them."""
        if gamma is None:
            return GammaGroup.generated_by(e.length for e in g.edges)
        missing = [e.id for e in g.edges if not gamma.contains(e.length)]
        if missing:
            raise PreconditionError(f"value group does not contain the lengths of edges {missing}")
        return gamma

    def local_pullback_certificate(
        self,
        g: WeightedMetricGraph,
        form: GraphForm,
        point: GraphPoint,
        gamma: Optional[GammaGroup] = None,
    ) -> LocalCertificate:
        """
        Certify that a form is locally a pullback of a polynomial Lagerberg form.

        Args:
            g: Graph.
            form: Valid form on g.
            point: Vertex, or position along an edge.
            gamma: Value group for (Z, gamma)-harmonicity; generated by the edge lengths when omitted.

        Returns:
            Certificate whose pullback has been re-computed and compared exactly.
        """
        self.form_service.require_valid(g, form)
        gamma = self.value_group(g, gamma)
        point = self._normalise_point(g, point)
        if point.vertex is None:
            case, u, corr, h, eta = self._edge_interior(g, form, point)
        else:
            v = g.vertex(point.vertex)
            valence = g.valence(v.id)
            if valence == 0 or (valence == 1 and not v.is_boundary):
                case, u, corr, h, eta = self._leaf(g, form, v.id)
            elif v.is_boundary:
                case, u, corr, h, eta = self._boundary_vertex(g, form, v.id)
            elif valence == 2:
                case, u, corr, h, eta = self._valence_two(g, form, v.id)
            else:
                case, u, corr, h, eta = self._branch_vertex(g, form, v.id)

        restricted = self.form_service.restrict_form(g, form, u, corr)
        report = self.tropical_service.check_harmonic_trop(u, h, gamma, parent=g, correspondence=corr)
        if not report.gamma_harmonic:
            raise CertificateError(f"local tropicalization fails: {'; '.join(report.witnesses)}")
        pulled = self.tropical_service.pullback_lagerberg(u, h, eta)
        if not pulled.same_as(restricted):
            raise CertificateError(f"pullback of the local Lagerberg form differs from the form near {self._label(point)}")
        logger.info("certified %s-form on %s near %s (%s)", form.bidegree, g.name, self._label(point), case)
        return LocalCertificate(
            case=case,
            point=point,
            neighbourhood=u,
            correspondence=corr,
            tropicalization=h,
            form=eta,
            restricted=restricted,
            verified=True,
        )

    @staticmethod
    def _label(point: GraphPoint) -> str:
        return point.vertex if point.vertex is not None else f"{point.edge}@{point.position}"

    def _normalise_point(self, g: WeightedMetricGraph, point: GraphPoint) -> GraphPoint:
        if point.vertex is not None:
            g.vertex(point.vertex)
            return point
        e = g.edge(point.edge)
        if not 0 <= point.position <= e.length:
            raise DomainError(f"position {point.position} is not on edge {e.id!r} of length {e.length}")
        if point.position == 0:
            return GraphPoint(vertex=e.tail)
        if point.position == e.length:
            return GraphPoint(vertex=e.head)
        return point

    # neighbourhoods

    def _arms(self, g: WeightedMetricGraph, form: GraphForm, vertex_id: str) -> List[Arm]:
        arms = []
        for e, forward in sorted(g.outgoing(vertex_id), key=lambda item: item[0].id):
            oriented = self.form_service.oriented_coefficient(form, e.id, forward)
            radius = min(oriented.breakpoints[1], e.length / 2)
            arms.append(Arm(e.id, e, forward, oriented.first_piece, radius))
        return arms

    @staticmethod
    def _star(g: WeightedMetricGraph, vertex_id: str, arms: Sequence[Arm], centre_boundary: bool):
        vertices = [Vertex(id=vertex_id, is_boundary=centre_boundary)]
        edges = []
        edge_map: Dict[str, EdgeSegment] = {}
        interior: Dict[str, InteriorPoint] = {}
        for arm in arms:
            position = arm.radius if arm.forward else arm.edge.length - arm.radius
            end = f"{arm.edge.id}@{position}"
            vertices.append(Vertex(id=end, is_boundary=True))
            edges.append(Edge(id=arm.sub_edge, tail=vertex_id, head=end, length=arm.radius, weight=arm.edge.weight))
            if arm.forward:
                edge_map[arm.sub_edge] = EdgeSegment(edge=arm.edge.id, start=0, end=arm.radius)
            else:
                edge_map[arm.sub_edge] = EdgeSegment(
                    edge=arm.edge.id, start=arm.edge.length - arm.radius, end=arm.edge.length, reversed=True
                )
            interior[end] = InteriorPoint(edge=arm.edge.id, position=position)
        u = WeightedMetricGraph(name=f"{g.name}.near.{vertex_id}", vertices=tuple(vertices), edges=tuple(edges))
        corr = GraphCorrespondence(
            source=u.name, target=g.name, vertex_map={vertex_id: vertex_id}, interior_points=interior, edge_map=edge_map
        )
        return u, corr

    @staticmethod
    def _star_tropicalization(
        u: WeightedMetricGraph, vertex_id: str, arms: Sequence[Arm], slopes: Sequence[Sequence[Fraction]]
    ) -> HarmonicTropicalization:
        """Tropicalization sending the centre to 0 and each arm along its slope vector."""
        dimension = len(slopes[0]) if slopes else 1
        components = []
        for i in range(dimension):
            values = {vertex_id: Fraction(0)}
            edge_slopes = {}
            for arm, vector in zip(arms, slopes):
                edge_slopes[arm.sub_edge] = Fraction(vector[i])
                values[u.edge(arm.sub_edge).head] = arm.radius * vector[i]
            components.append(HarmonicFunction(vertex_values=values, slopes=edge_slopes))
        return HarmonicTropicalization(graph=u.name, components=tuple(components))

    # the five constructions

    def _edge_interior(self, g: WeightedMetricGraph, form: GraphForm, point: GraphPoint):
        e = g.edge(point.edge)
        p = point.position
        f = form.coefficient(e.id)
        if p in f.breakpoints:
            raise CertificateError(
                f"{form.bidegree}-form on {e.id!r} changes polynomial at {p}; no single polynomial covers a neighbourhood"
            )
        a, b, piece = next((a, b, piece) for a, b, piece in f.intervals() if a < p < b)
        lo, hi = (a + p) / 2, (p + b) / 2
        tail, head = f"{e.id}@{lo}", f"{e.id}@{hi}"
        u = WeightedMetricGraph(
            name=f"{g.name}.near.{e.id}@{p}",
            vertices=(Vertex(id=tail, is_boundary=True), Vertex(id=head, is_boundary=True)),
            edges=(Edge(id=e.id, tail=tail, head=head, length=hi - lo, weight=e.weight),),
        )
        corr = GraphCorrespondence(
            source=u.name,
            target=g.name,
            interior_points={tail: InteriorPoint(edge=e.id, position=lo), head: InteriorPoint(edge=e.id, position=hi)},
            edge_map={e.id: EdgeSegment(edge=e.id, start=lo, end=hi)},
        )
        h = self.tropical_service.tropicalization_from_values(u, [{tail: lo, head: hi}])
        (x1,) = coordinate_symbols(1)
        eta = LagerbergPolyForm(
            dimension=1,
            bidegree=form.bidegree,
            coefficients=self._single(form.bidegree, 1, polynomial_to_expr(piece, x1)),
        )
        return "edge interior", u, corr, h, eta

    def _leaf(self, g: WeightedMetricGraph, form: GraphForm, vertex_id: str):
        arms = self._arms(g, form, vertex_id)
        u, corr = self._star(g, vertex_id, arms, g.is_boundary(vertex_id))
        h = self._star_tropicalization(u, vertex_id, arms, [(Fraction(0),) for _ in arms])
        if not arms:
            h = HarmonicTropicalization(
                graph=u.name, components=(HarmonicFunction(vertex_values={vertex_id: Fraction(0)}, slopes={}),)
            )
        coefficients: Dict[Tuple[int, ...], Expr] = {}
        if form.bidegree == (0, 0):
            value = self.form_service.vertex_value(g, form, vertex_id)
            coefficients = self._single(form.bidegree, 1, rational(value))
        eta = LagerbergPolyForm(dimension=1, bidegree=form.bidegree, coefficients=coefficients)
        return ("isolated vertex" if not arms else "interior leaf"), u, corr, h, eta

    def _boundary_vertex(self, g: WeightedMetricGraph, form: GraphForm, vertex_id: str):
        arms = self._arms(g, form, vertex_id)
        n = len(arms)
        u, corr = self._star(g, vertex_id, arms, True)
        unit = [tuple(Fraction(int(i == j)) for i in range(n)) for j in range(n)]
        h = self._star_tropicalization(u, vertex_id, arms, unit)
        xs = coordinate_symbols(n)
        rays = [polynomial_to_expr(arm.piece, x) for arm, x in zip(arms, xs)]
        if form.bidegree == (0, 0):
            value = self.form_service.vertex_value(g, form, vertex_id)
            centre = rational(value)
            coefficients = {(): sum((r - centre for r in rays), Integer(0)) + centre}
        elif form.bidegree == (1, 1):
            coefficients = {(i, i): rays[i - 1] for i in range(1, n + 1)}
        else:
            coefficients = {(i,): rays[i - 1] for i in range(1, n + 1)}
        eta = LagerbergPolyForm(dimension=n, bidegree=form.bidegree, coefficients=self._nonzero(coefficients))
        return "boundary vertex", u, corr, h, eta

    @staticmethod
    def _weights_to_slopes(arms: Sequence[Arm]) -> List[int]:
        top = lcm(*(arm.edge.weight for arm in arms))
        return [top // arm.edge.weight for arm in arms]

    def _valence_two(self, g: WeightedMetricGraph, form: GraphForm, vertex_id: str):
        arms = self._arms(g, form, vertex_id)
        u, corr = self._star(g, vertex_id, arms, False)
        c1, c2 = self._weights_to_slopes(arms)
        h = self._star_tropicalization(u, vertex_id, arms, [(Fraction(c1),), (Fraction(-c2),)])
        f1, f2 = arms[0].piece, arms[1].piece
        left = f1.compose_affine(Fraction(1, c1), 0)
        right = f2.compose_affine(Fraction(-1, c2), 0)
        if form.bidegree in ((1, 0), (0, 1)):
            left, right = left * Fraction(1, c1), right * Fraction(-1, c2)
        elif form.bidegree == (1, 1):
            left, right = left * Fraction(1, c1 * c1), right * Fraction(1, c2 * c2)
        (x1,) = coordinate_symbols(1)
        expr = polynomial_to_expr(left, x1)
        if left != right:
            # arm 0 covers x1 >= 0, arm 1 covers x1 <= 0; the vertex conditions make the branches C^K at 0
            expr = Piecewise((expr, x1 >= 0), (polynomial_to_expr(right, x1), True))
        eta = LagerbergPolyForm(dimension=1, bidegree=form.bidegree, coefficients=self._single(form.bidegree, 1, expr))
        return "valence two", u, corr, h, eta

    def _branch_vertex(self, g: WeightedMetricGraph, form: GraphForm, vertex_id: str):
        """Star map: arm 0 along -(e_1 + ... + e_n), arm i along e_i."""
        arms = self._arms(g, form, vertex_id)
        n = len(arms) - 1
        u, corr = self._star(g, vertex_id, arms, False)
        c = self._weights_to_slopes(arms)
        slopes = [tuple(Fraction(-c[0]) for _ in range(n))]
        slopes += [tuple(Fraction(c[j] if i == j else 0) for i in range(1, n + 1)) for j in range(1, n + 1)]
        h = self._star_tropicalization(u, vertex_id, arms, slopes)
        # along ray j the parameter is c_j times the distance from the centre
        along = [arm.piece.compose_affine(Fraction(1, cj), 0) for arm, cj in zip(arms, c)]
        star = self.tropical_service.polynomial_star_extension
        xs = coordinate_symbols(n)

        if form.bidegree == (0, 0):
            coefficients = {(): star(along)}
        elif form.bidegree in ((1, 0), (0, 1)):
            a = [along[0] * Fraction(-1, c[0])] + [along[j] * Fraction(1, c[j]) for j in range(1, n + 1)]
            coefficients = {}
            for i in range(2, n + 1):
                a_i = a[i](0)
                rays = [Polynomial.constant(a_i) for _ in range(n + 1)]
                rays[i] = a[i]
                rays[1] = Polynomial((a_i, -a[i].derivative_at(0, 1)))
                coefficients[(i,)] = star(rays)
            rest = sum((a[i](0) for i in range(2, n + 1)), Fraction(0))
            rays = [Polynomial.constant(a[1](0)) for _ in range(n + 1)]
            rays[1] = a[1]
            rays[0] = a[0] - rest
            rays[2] = Polynomial((a[1](0), -(a[1].derivative_at(0, 1) + a[0].derivative_at(0, 1))))
            coefficients[(1,)] = star(rays)
        else:
            b = [along[j] * Fraction(1, c[j] * c[j]) for j in range(n + 1)]
            coefficients: Dict[Tuple[int, ...], Expr] = {}
            for j in range(1, n + 1):
                k = 1 if j != 1 else 2
                b_j = b[j](0)
                rays = [Polynomial.constant(b_j) for _ in range(n + 1)]
                rays[j] = b[j]
                rays[k] = Polynomial((b_j, -b[j].derivative_at(0, 1)))
                coefficients[(j, j)] = coefficients.get((j, j), Integer(0)) + star(rays)
                coefficients[(j, k)] = coefficients.get((j, k), Integer(0)) - rational(b_j)
            coefficients[(1, 2)] = coefficients.get((1, 2), Integer(0)) + polynomial_to_expr(b[0].compose_affine(-1, 0), xs[0])
        eta = LagerbergPolyForm(dimension=n, bidegree=form.bidegree, coefficients=self._nonzero(coefficients))
        return "branch vertex", u, corr, h, eta

    @staticmethod
    def _single(bidegree: Tuple[int, int], index: int, expr: Expr) -> Dict[Tuple[int, ...], Expr]:
        key = {0: (), 1: (index,), 2: (index, index)}[sum(bidegree)]
        return {} if expr == 0 else {key: expr}

    @staticmethod
    def _nonzero(coefficients: Dict[Tuple[int, ...], Expr]) -> Dict[Tuple[int, ...], Expr]:
        return {key: expr.expand() for key, expr in coefficients.items() if expr.expand() != 0}
