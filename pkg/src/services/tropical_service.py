"""Harmonic tropicalizations, pullback of polynomial Lagerberg forms, tropical cycles and integration."""
import logging
from fractions import Fraction
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import Integer, Matrix, Symbol, diff, expand, integrate

from src.models.form_models import GraphForm
from src.models.graph_models import GraphCorrespondence, WeightedMetricGraph
from src.models.map_models import HarmonicFunction, PLMap
from src.models.tropical_models import (
    BalancingReport,
    GammaGroup,
    HarmonicTropicalization,
    IntegrationComparison,
    LagerbergPolyForm,
    TropCycle,
    TropHarmonicityReport,
    TropSegment,
    UnbalancedPoint,
)
from src.services.form_service import FormService
from src.services.harmonic_service import HarmonicService
from src.utils.errors import PreconditionError, ReferentialError, TropicalizationError
from src.utils.linalg import solve, to_fraction
from src.utils.polynomial import Polynomial, Scalar, as_fraction
from src.utils.symbolic import expr_to_polynomial, polynomial_to_expr, rational, resolve_branches, substitute_affine

logger = logging.getLogger(__name__)

Point = Tuple[Fraction, ...]

_T = Symbol("t")


class TropicalService:
    """Maps of graphs to Q^n by harmonic functions and the tropical cycles they define."""

    def __init__(
        self,
        order: Optional[int] = None,
        form_service: Optional[FormService] = None,
        harmonic_service: Optional[HarmonicService] = None,
    ) -> None:
        self.form_service = form_service or FormService(order)
        self.harmonic_service = harmonic_service or HarmonicService(form_service=self.form_service)
        self.order = self.form_service.order

    # tropicalizations

    def tropicalization_from_values(
        self, g: WeightedMetricGraph, components: Sequence[Dict[str, Scalar]]
    ) -> HarmonicTropicalization:
        """Edge-linear tropicalization with the given vertex values, one dict per coordinate."""
        functions = []
        for values in components:
            values = {vid: as_fraction(values[vid]) for vid in g.vertex_ids}
            slopes = {e.id: (values[e.head] - values[e.tail]) / e.length for e in g.edges}
            functions.append(HarmonicFunction(vertex_values=values, slopes=slopes))
        return HarmonicTropicalization(graph=g.name, components=tuple(functions))

    def _check_consistency(self, g: WeightedMetricGraph, h: HarmonicTropicalization) -> None:
        if h.graph != g.name:
            raise ReferentialError(f"tropicalization lives on {h.graph!r}, not on {g.name!r}")
        for i, component in enumerate(h.components, start=1):
            for vid in g.vertex_ids:
                if vid not in component.vertex_values:
                    raise ReferentialError(f"coordinate {i} has no value at vertex {vid!r}")
            for e in g.edges:
                if e.id not in component.slopes:
                    raise ReferentialError(f"coordinate {i} has no slope on edge {e.id!r}")
                rise = component.vertex_values[e.head] - component.vertex_values[e.tail]
                if component.slopes[e.id] * e.length != rise:
                    raise TropicalizationError(
                        f"coordinate {i} on edge {e.id!r}: slope {component.slopes[e.id]} over length {e.length} "
                        f"does not match the rise {rise}"
                    )
            for vid in component.vertex_values:
                g.vertex(vid)
            for eid in component.slopes:
                g.edge(eid)

    def check_harmonic_trop(
        self,
        g: WeightedMetricGraph,
        h: HarmonicTropicalization,
        gamma: Optional[GammaGroup] = None,
        parent: Optional[WeightedMetricGraph] = None,
        correspondence: Optional[GraphCorrespondence] = None,
    ) -> TropHarmonicityReport:
        """
        Harmonicity, integrality and (Z, gamma)-harmonicity of a tropicalization.

        Args:
            g: Graph (possibly a subgraph of a subdivision of parent).
            h: Tropicalization of g.
            gamma: Value group; the trivial group when omitted.
            parent: Ambient graph whose edges carry g's edges.
            correspondence: Segments of g's edges inside parent's edges.

        Returns:
            Flags with human-readable witnesses for every failure.
        """
        self._check_consistency(g, h)
        gamma = gamma or GammaGroup()
        witnesses: List[str] = []
        for i, component in enumerate(h.components, start=1):
            for v in g.vertices:
                if v.is_boundary or not g.outgoing(v.id):
                    continue
                flux = sum(
                    (e.weight * (component.slopes[e.id] if forward else -component.slopes[e.id])
                     for e, forward in g.outgoing(v.id)),
                    Fraction(0),
                )
                if flux:
                    witnesses.append(f"coordinate {i} is unbalanced at {v.id!r} (weighted slopes sum to {flux})")
        harmonic = not witnesses
        non_integral = [
            f"coordinate {i} has slope {s} on {eid!r}"
            for i, component in enumerate(h.components, start=1)
            for eid, s in component.slopes.items()
            if s.denominator != 1
        ]
        integral = harmonic and not non_integral
        witnesses.extend(non_integral)

        outside = []
        for i, component in enumerate(h.components, start=1):
            for label, value in self._endpoint_values(g, component, parent, correspondence):
                if not gamma.contains(value):
                    outside.append(f"coordinate {i} takes value {value} outside the value group at {label}")
        witnesses.extend(outside)
        return TropHarmonicityReport(
            harmonic=harmonic, integral=integral, gamma_harmonic=integral and not outside, witnesses=witnesses
        )

    def _endpoint_values(
        self,
        g: WeightedMetricGraph,
        component: HarmonicFunction,
        parent: Optional[WeightedMetricGraph],
        correspondence: Optional[GraphCorrespondence],
    ) -> List[Tuple[str, Fraction]]:
        """Values at vertices, or at the ends of the ambient edges when g sits inside a parent graph."""
        if parent is None or correspondence is None:
            return [(repr(vid), value) for vid, value in component.vertex_values.items()]
        out = []
        for e in g.edges:
            segment = correspondence.segment(e.id)
            ambient = parent.edge(segment.edge)
            start_value = component.vertex_values[e.tail]
            slope = component.slopes[e.id]
            if segment.reversed:
                at_tail = start_value + slope * segment.end
                at_head = start_value + slope * (segment.end - ambient.length)
            else:
                at_tail = start_value - slope * segment.start
                at_head = start_value + slope * (ambient.length - segment.start)
            out.append((f"the tail of ambient edge {ambient.id!r}", at_tail))
            out.append((f"the head of ambient edge {ambient.id!r}", at_head))
        for vid in g.isolated_vertices():
            out.append((repr(vid), component.vertex_values[vid]))
        return out

    def compose_tropicalization(self, h: HarmonicTropicalization, m: PLMap) -> HarmonicTropicalization:
        """h o m on the source of a map of graphs."""
        self._check_consistency(m.target, h)
        functions = []
        for component in h.components:
            values = {vid: component.vertex_values[m.vertex_map[vid]] for vid in m.source.vertex_ids}
            slopes = {}
            for e in m.source.edges:
                image = m.edge_map[e.id]
                if image.crushed:
                    slopes[e.id] = Fraction(0)
                else:
                    s = m.expansion_factor(e.id) * component.slopes[image.edge]
                    slopes[e.id] = -s if image.reversed else s
            functions.append(HarmonicFunction(vertex_values=values, slopes=slopes))
        return HarmonicTropicalization(graph=m.source.name, components=tuple(functions))

    # Lagerberg forms

    def pullback_lagerberg(self, g: WeightedMetricGraph, h: HarmonicTropicalization, eta: LagerbergPolyForm) -> GraphForm:
        """
        Pull a polynomial Lagerberg form back along a harmonic tropicalization.

        Args:
            g: Graph.
            h: Harmonic tropicalization of g.
            eta: Form on Q^n with n = h.dimension. Piecewise coefficients must keep one
                branch along the image of each edge.

        Returns:
            The (p,q)-form on g; coefficients are polynomials on every edge.
        """
        if eta.dimension != h.dimension:
            raise PreconditionError(f"form lives on Q^{eta.dimension} but the tropicalization maps to Q^{h.dimension}")
        report = self.check_harmonic_trop(g, h)
        if not report.harmonic:
            raise PreconditionError(f"tropicalization is not harmonic: {'; '.join(report.witnesses)}")
        xs = eta.symbols
        n = eta.dimension
        polynomials = {}
        for e in g.edges:
            base = h.point(e.tail)
            slopes = h.slope_vector(e.id)
            if eta.bidegree == (0, 0):
                expr = eta.coefficient()
            elif eta.bidegree == (1, 1):
                expr = sum(
                    (rational(slopes[i - 1] * slopes[j - 1]) * eta.coefficient(i, j)
                     for i in range(1, n + 1) for j in range(1, n + 1)),
                    Integer(0),
                )
            else:
                expr = sum((rational(slopes[i - 1]) * eta.coefficient(i) for i in range(1, n + 1)), Integer(0))
            expr = resolve_branches(expr, xs, base, h.point(e.head))
            polynomials[e.id] = expr_to_polynomial(substitute_affine(expr, xs, base, slopes, _T), _T)
        values = {}
        if eta.bidegree == (0, 0):
            for vid in g.isolated_vertices():
                values[vid] = self.evaluate(eta.coefficient(), xs, h.point(vid))
        return self.form_service.from_polynomials(g, eta.bidegree, polynomials, values)

    @staticmethod
    def evaluate(expr, coordinates, point: Sequence[Fraction]) -> Fraction:
        return to_fraction(expr.xreplace({x: rational(p) for x, p in zip(coordinates, point)}))

    def lagerberg_d_first(self, eta: LagerbergPolyForm) -> LagerbergPolyForm:
        """d' on (0,0) and (0,1) forms."""
        xs, n = eta.symbols, eta.dimension
        if eta.bidegree == (0, 0):
            coefficients = {(i,): diff(eta.coefficient(), xs[i - 1]) for i in range(1, n + 1)}
            return self._lagerberg(eta, (1, 0), coefficients)
        if eta.bidegree == (0, 1):
            coefficients = {
                (i, j): diff(eta.coefficient(j), xs[i - 1]) for i in range(1, n + 1) for j in range(1, n + 1)
            }
            return self._lagerberg(eta, (1, 1), coefficients)
        raise PreconditionError(f"d' takes a (0,q)-form, got {eta.bidegree}")

    def lagerberg_d_second(self, eta: LagerbergPolyForm) -> LagerbergPolyForm:
        """d'' on (0,0) and (1,0) forms; d''(g d'x_i) = -sum_j dg/dx_j d'x_i ^ d''x_j."""
        xs, n = eta.symbols, eta.dimension
        if eta.bidegree == (0, 0):
            coefficients = {(j,): diff(eta.coefficient(), xs[j - 1]) for j in range(1, n + 1)}
            return self._lagerberg(eta, (0, 1), coefficients)
        if eta.bidegree == (1, 0):
            coefficients = {
                (i, j): -diff(eta.coefficient(i), xs[j - 1]) for i in range(1, n + 1) for j in range(1, n + 1)
            }
            return self._lagerberg(eta, (1, 1), coefficients)
        raise PreconditionError(f"d'' takes a (p,0)-form, got {eta.bidegree}")

    def lagerberg_wedge(self, alpha: LagerbergPolyForm, beta: LagerbergPolyForm) -> LagerbergPolyForm:
        """Exterior product up to bidegree (1,1)."""
        if alpha.dimension != beta.dimension:
            raise PreconditionError("wedge of forms on spaces of different dimension")
        n = alpha.dimension
        bidegree = (alpha.bidegree[0] + beta.bidegree[0], alpha.bidegree[1] + beta.bidegree[1])
        pair = (alpha.bidegree, beta.bidegree)
        if alpha.bidegree == (0, 0) or beta.bidegree == (0, 0):
            scalar, other = (alpha, beta) if alpha.bidegree == (0, 0) else (beta, alpha)
            coefficients = {key: scalar.coefficient() * c for key, c in other.coefficients.items()}
            if other.bidegree == (0, 0):
                coefficients = {(): scalar.coefficient() * other.coefficient()}
        elif pair == ((1, 0), (0, 1)):
            coefficients = {
                (i, j): alpha.coefficient(i) * beta.coefficient(j) for i in range(1, n + 1) for j in range(1, n + 1)
            }
        elif pair == ((0, 1), (1, 0)):
            coefficients = {
                (i, j): -beta.coefficient(i) * alpha.coefficient(j) for i in range(1, n + 1) for j in range(1, n + 1)
            }
        else:
            raise PreconditionError(f"wedge of {alpha.bidegree} and {beta.bidegree} exceeds bidegree (1,1)")
        return self._lagerberg(alpha, bidegree, coefficients)

    @staticmethod
    def _lagerberg(template: LagerbergPolyForm, bidegree, coefficients) -> LagerbergPolyForm:
        cleaned = {key: expand(c) for key, c in coefficients.items() if expand(c) != 0}
        return LagerbergPolyForm(dimension=template.dimension, bidegree=bidegree, coefficients=cleaned)

    # tropical cycles

    @staticmethod
    def primitive(vector: Sequence[Fraction]) -> Tuple[Tuple[int, ...], int]:
        """Split an integer vector into its primitive direction and gcd; the zero vector has gcd 0."""
        ints = [int(x) for x in vector]
        k = gcd(*ints) if ints else 0
        if k == 0:
            return tuple(0 for _ in ints), 0
        return tuple(x // k for x in ints), k

    def trop_cycle(self, g: WeightedMetricGraph, h: HarmonicTropicalization) -> TropCycle:
        """
        Image complex of a Z-harmonic tropicalization with multiplicities w(e) * gcd(slopes).

        Args:
            g: Graph.
            h: Tropicalization with integral slopes.

        Returns:
            The refined cycle; boundary vertex images are marked excluded.
        """
        report = self.check_harmonic_trop(g, h)
        if not report.integral:
            raise TropicalizationError(f"tropicalization is not Z-harmonic: {'; '.join(report.witnesses)}")
        raw: List[Tuple[Point, Point, Tuple[int, ...], Fraction, int]] = []
        for e in g.edges:
            direction, k = self.primitive(h.slope_vector(e.id))
            if k == 0:
                continue
            start, end = h.point(e.tail), h.point(e.head)
            raw.append((start, end, direction, k * e.length, e.weight * k))
        excluded = sorted({h.point(vid) for vid in g.boundary()})
        cycle = self.refine(h.dimension, raw, excluded)
        logger.debug("tropical cycle of %s: %d segments", g.name, len(cycle.segments))
        return cycle

    @staticmethod
    def _canonical(start: Point, end: Point, direction: Tuple[int, ...]):
        first = next(x for x in direction if x != 0)
        if first < 0:
            return end, start, tuple(-x for x in direction)
        return start, end, direction

    @staticmethod
    def _parameter(point: Point, start: Point, direction: Tuple[int, ...]) -> Optional[Fraction]:
        """lambda with point = start + lambda * direction, if any."""
        lam = None
        for p, s, u in zip(point, start, direction):
            if u == 0:
                if p != s:
                    return None
                continue
            candidate = (p - s) / u
            if lam is None:
                lam = candidate
            elif candidate != lam:
                return None
        return lam

    def _crossing(self, a, b) -> Optional[Point]:
        start_a, _, u, length_a = a
        start_b, _, v, length_b = b
        rows = [[Fraction(x), Fraction(-y)] for x, y in zip(u, v)]
        rhs = [q - p for p, q in zip(start_a, start_b)]
        solution = solve(rows, rhs, 2)
        if solution is None:
            return None
        lam, mu = solution
        if any(x * lam - y * mu != r for x, y, r in zip(u, v, rhs)):
            return None
        if 0 <= lam <= length_a and 0 <= mu <= length_b:
            return tuple(p + lam * x for p, x in zip(start_a, u))
        return None

    def refine(
        self,
        dimension: int,
        raw: Sequence[Tuple[Point, Point, Tuple[int, ...], Fraction, int]],
        excluded: Sequence[Point] = (),
    ) -> TropCycle:
        """
        Subdivide segments at endpoints, crossings and excluded points, then merge overlaps.

        Args:
            dimension: Ambient dimension.
            raw: (start, end, primitive direction, lattice length, multiplicity) per edge image.
            excluded: Points where balancing is not required.

        Returns:
            Cycle whose segments meet only at endpoints.
        """
        lines = []
        for start, end, direction, length, m in raw:
            start, end, direction = self._canonical(start, end, direction)
            lines.append((start, end, direction, length, m))
        marks: List[Point] = [p for line in lines for p in (line[0], line[1])] + list(excluded)
        for i, a in enumerate(lines):
            for b in lines[i + 1:]:
                if a[2] != b[2]:
                    point = self._crossing((a[0], a[1], a[2], a[3]), (b[0], b[1], b[2], b[3]))
                    if point is not None:
                        marks.append(point)

        pieces: Dict[Tuple[Point, Point], Tuple[Tuple[int, ...], Fraction, int]] = {}
        for start, end, direction, length, m in lines:
            cuts = {Fraction(0), length}
            for point in marks:
                lam = self._parameter(point, start, direction)
                if lam is not None and 0 < lam < length:
                    cuts.add(lam)
            stops = sorted(cuts)
            for lo, hi in zip(stops, stops[1:]):
                a = tuple(s + lo * u for s, u in zip(start, direction))
                b = tuple(s + hi * u for s, u in zip(start, direction))
                _, _, total = pieces.get((a, b), (direction, hi - lo, 0))
                pieces[(a, b)] = (direction, hi - lo, total + m)
        segments = tuple(
            TropSegment(start=a, end=b, direction=direction, lattice_length=length, multiplicity=m)
            for (a, b), (direction, length, m) in sorted(pieces.items())
        )
        return TropCycle(dimension=dimension, segments=segments, excluded=tuple(sorted(set(excluded))))

    def check_balancing(self, cycle: TropCycle) -> BalancingReport:
        """Sum of m * outgoing primitive direction at every endpoint that is not excluded."""
        defects: Dict[Point, List[int]] = {}
        for segment in cycle.segments:
            for point, sign in ((segment.start, 1), (segment.end, -1)):
                total = defects.setdefault(tuple(point), [0] * cycle.dimension)
                for i, u in enumerate(segment.direction):
                    total[i] += sign * segment.multiplicity * u
        excluded = {tuple(p) for p in cycle.excluded}
        violations = [
            UnbalancedPoint(point=point, defect=tuple(total))
            for point, total in sorted(defects.items())
            if point not in excluded and any(total)
        ]
        if violations:
            logger.info("tropical cycle unbalanced at %d points", len(violations))
        return BalancingReport(violations=violations)

    # integration

    def trop_integrate(self, cycle: TropCycle, eta: LagerbergPolyForm) -> Fraction:
        """Integral of a (1,1)-form over a weighted cycle, segments parametrised by lattice length."""
        if eta.bidegree != (1, 1):
            raise PreconditionError(f"cycle integrals take (1,1)-forms, got {eta.bidegree}")
        self._check_dimension(cycle, eta)
        xs, n = eta.symbols, eta.dimension
        total = Fraction(0)
        for segment in cycle.segments:
            u = segment.direction
            expr = sum(
                (u[i - 1] * u[j - 1] * eta.coefficient(i, j) for i in range(1, n + 1) for j in range(1, n + 1)),
                Integer(0),
            )
            expr = resolve_branches(expr, xs, segment.start, segment.end)
            restricted = substitute_affine(expr, xs, segment.start, [Fraction(x) for x in u], _T)
            total += segment.multiplicity * to_fraction(integrate(restricted, (_T, 0, rational(segment.lattice_length))))
        return total

    def trop_boundary_integrate(self, cycle: TropCycle, eta: LagerbergPolyForm) -> Fraction:
        """
        Boundary integral of a (1,0)- or (0,1)-form: sum of m * u_i (g_i(start) - g_i(end)).

        The (0,1) convention exchanges the endpoints.
        """
        if eta.bidegree not in ((1, 0), (0, 1)):
            raise PreconditionError(f"boundary integrals take (1,0)- or (0,1)-forms, got {eta.bidegree}")
        self._check_dimension(cycle, eta)
        xs, n = eta.symbols, eta.dimension
        total = Fraction(0)
        for segment in cycle.segments:
            for i in range(1, n + 1):
                u = segment.direction[i - 1]
                if u == 0:
                    continue
                g = eta.coefficient(i)
                jump = self.evaluate(g, xs, segment.start) - self.evaluate(g, xs, segment.end)
                total += segment.multiplicity * u * jump
        return -total if eta.bidegree == (0, 1) else total

    @staticmethod
    def _check_dimension(cycle: TropCycle, eta: LagerbergPolyForm) -> None:
        if cycle.dimension != eta.dimension:
            raise PreconditionError(f"cycle lives in Q^{cycle.dimension}, form on Q^{eta.dimension}")

    def integration_compat_check(
        self, g: WeightedMetricGraph, h: HarmonicTropicalization, eta: LagerbergPolyForm
    ) -> IntegrationComparison:
        """
        Integrate h*eta on the graph and eta on the tropical cycle.

        Args:
            g: Graph.
            h: Z-harmonic tropicalization.
            eta: (1,1)-form for the graph integral, (1,0)/(0,1) for boundary integrals.

        Returns:
            Both values; they agree for every valid input.
        """
        pulled = self.pullback_lagerberg(g, h, eta)
        cycle = self.trop_cycle(g, h)
        if eta.bidegree == (1, 1):
            return IntegrationComparison(
                kind="graph", graph_side=self.form_service.integrate_graph(g, pulled), trop_side=self.trop_integrate(cycle, eta)
            )
        if eta.bidegree in ((1, 0), (0, 1)):
            return IntegrationComparison(
                kind=f"boundary {eta.bidegree[0]},{eta.bidegree[1]}",
                graph_side=self.form_service.integrate_boundary(g, pulled),
                trop_side=self.trop_boundary_integrate(cycle, eta),
            )
        raise PreconditionError("functions have no integral; pass a form of bidegree (1,1), (1,0) or (0,1)")

    # star extension

    def polynomial_star_extension(
        self, polynomials: Sequence[Polynomial], rays: Optional[Sequence[Sequence[Scalar]]] = None
    ):
        """
        Polynomial F on Q^n with F(t v_i) = f_i(t) for i >= 1 and F(t v0) = f_0(t), v0 = -(v_1 + ... + v_n).

        Args:
            polynomials: f_0, f_1, ..., f_n with n >= 2, equal values at 0 and
                first derivatives at 0 summing to zero.
            rays: Linearly independent v_1, ..., v_n; the standard basis when omitted.

        Returns:
            The sympy expression F in x1, ..., xn.
        """
        n = len(polynomials) - 1
        if n < 2:
            raise PreconditionError(f"star extension needs at least three rays, got {n + 1}")
        values = {p(0) for p in polynomials}
        if len(values) != 1:
            raise PreconditionError(f"ray polynomials disagree at the centre: {sorted(values)}")
        balance = sum((p.derivative_at(0, 1) for p in polynomials), Fraction(0))
        if balance:
            raise PreconditionError(f"first derivatives along the rays sum to {balance}, not 0")
        xs = tuple(Symbol(f"x{i}") for i in range(1, n + 1))
        top = max(p.degree for p in polynomials)

        def alpha(i: int, j: int) -> Fraction:
            coefficients = polynomials[i].coefficients
            return coefficients[j] if j < len(coefficients) else Fraction(0)

        expr = rational(values.pop())
        for j in range(1, top + 1):
            expr += sum((rational(alpha(i, j)) * xs[i - 1] ** j for i in range(1, n + 1)), Integer(0))
            if j >= 2:
                beta = (-1) ** j * alpha(0, j) - sum((alpha(i, j) for i in range(1, n + 1)), Fraction(0))
                expr += rational(beta) * xs[0] ** (j - 1) * xs[1]
        if rays is None:
            return expand(expr)
        # F = F_std o M^-1 where M has columns v_1, ..., v_n
        inverse = self._ray_matrix(rays, n).inv()
        standard = inverse * Matrix(xs)
        return expand(expr.xreplace(dict(zip(xs, standard))))

    @staticmethod
    def _ray_matrix(rays: Sequence[Sequence[Scalar]], n: int) -> Matrix:
        if len(rays) != n or any(len(v) != n for v in rays):
            raise PreconditionError(f"expected {n} rays in Q^{n}, got {[len(v) for v in rays]}")
        matrix = Matrix([[rational(as_fraction(v[i])) for v in rays] for i in range(n)])
        if matrix.det() == 0:
            raise PreconditionError("rays are linearly dependent")
        return matrix

    def restrict_to_ray(
        self, expr, dimension: int, ray: int, rays: Optional[Sequence[Sequence[Scalar]]] = None
    ) -> Polynomial:
        """t -> F(t v_ray) for ray >= 1, t -> F(t v0) for ray 0; v_i = e_i unless rays are given."""
        xs = tuple(Symbol(f"x{i}") for i in range(1, dimension + 1))
        vectors = [[as_fraction(x) for x in v] for v in rays] if rays is not None else [
            [Fraction(int(i == j)) for i in range(1, dimension + 1)] for j in range(1, dimension + 1)
        ]
        if ray == 0:
            direction = [-sum(column, Fraction(0)) for column in zip(*vectors)]
        else:
            direction = vectors[ray - 1]
        return expr_to_polynomial(substitute_affine(expr, xs, [Fraction(0)] * dimension, direction, _T), _T)
