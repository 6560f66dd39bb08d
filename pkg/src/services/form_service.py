"""(p,q)-forms on weighted metric graphs: validation, calculus, transport and integration."""
import logging
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from config.settings import Config
from src.models.form_models import BIDEGREES, GraphForm, IntegralComparison
from src.models.graph_models import Edge, GraphCorrespondence, ValidationReport, WeightedMetricGraph
from src.utils.errors import PreconditionError, ReferentialError
from src.utils.polynomial import PiecewisePolynomial, Polynomial, Scalar, as_fraction, check_vertex_glue

logger = logging.getLogger(__name__)


class FormService:
    """Differential bigraded algebra of forms on a graph, with integration."""

    def __init__(self, order: Optional[int] = None) -> None:
        """
        Args:
            order: Smoothness order K for forms built here; defaults to Config.
        """
        self.order = Config.smoothness_order(order)

    # construction

    def zero_form(self, g: WeightedMetricGraph, bidegree: Tuple[int, int], order: Optional[int] = None) -> GraphForm:
        k = self.order if order is None else order
        return GraphForm(
            graph=g.name,
            bidegree=bidegree,
            coefficients={e.id: PiecewisePolynomial.zero(e.length, k) for e in g.edges},
            vertex_values={vid: Fraction(0) for vid in g.isolated_vertices()} if bidegree == (0, 0) else {},
            order=k,
        )

    def constant_function(self, g: WeightedMetricGraph, value: Scalar) -> GraphForm:
        value = as_fraction(value)
        return GraphForm(
            graph=g.name,
            bidegree=(0, 0),
            coefficients={e.id: PiecewisePolynomial.constant(value, e.length, self.order) for e in g.edges},
            vertex_values={vid: value for vid in g.isolated_vertices()},
            order=self.order,
        )

    def from_polynomials(
        self,
        g: WeightedMetricGraph,
        bidegree: Tuple[int, int],
        polynomials: Dict[str, Polynomial],
        vertex_values: Optional[Dict[str, Scalar]] = None,
    ) -> GraphForm:
        """
        Form whose coefficient on each listed edge is a single polynomial; other edges get 0.

        Args:
            g: Graph.
            bidegree: (p, q).
            polynomials: Edge id to polynomial in the canonical coordinate.
            vertex_values: Isolated-vertex values for (0,0)-forms.

        Returns:
            The form at the service's order.
        """
        for eid in polynomials:
            g.edge(eid)
        coefficients = {
            e.id: PiecewisePolynomial.polynomial(polynomials.get(e.id, Polynomial()), e.length, self.order)
            for e in g.edges
        }
        values = {vid: as_fraction(x) for vid, x in (vertex_values or {}).items()}
        if bidegree == (0, 0):
            for vid in g.isolated_vertices():
                values.setdefault(vid, Fraction(0))
        return GraphForm(graph=g.name, bidegree=bidegree, coefficients=coefficients, vertex_values=values, order=self.order)

    def with_coefficients(
        self, template: GraphForm, coefficients: Dict[str, PiecewisePolynomial], **changes
    ) -> GraphForm:
        """Copy of a form with new coefficients; the order becomes the smallest coefficient order."""
        orders = [f.order for f in coefficients.values()]
        fields = dict(
            graph=template.graph,
            bidegree=template.bidegree,
            coefficients=coefficients,
            vertex_values=template.vertex_values,
            order=min(orders) if orders else template.order,
        )
        fields.update(changes)
        return GraphForm(**fields)

    # orientation

    @staticmethod
    def reversal_sign(bidegree: Tuple[int, int]) -> int:
        return -1 if sum(bidegree) % 2 else 1

    def oriented_coefficient(self, form: GraphForm, edge_id: str, forward: bool) -> PiecewisePolynomial:
        """Coefficient on the stored orientation (forward) or on the reversed edge."""
        f = form.coefficient(edge_id)
        if forward:
            return f
        return f.reverse().scale(self.reversal_sign(form.bidegree))

    def outgoing_data(self, g: WeightedMetricGraph, form: GraphForm, vertex_id: str) -> List[Tuple[Edge, PiecewisePolynomial]]:
        """Coefficients on the edges at a vertex, each oriented so the vertex sits at 0."""
        return [(e, self.oriented_coefficient(form, e.id, forward)) for e, forward in g.outgoing(vertex_id)]

    def vertex_value(self, g: WeightedMetricGraph, f: GraphForm, vertex_id: str) -> Fraction:
        """Value of a (0,0)-form at a vertex."""
        if f.bidegree != (0, 0):
            raise PreconditionError("vertex values exist for (0,0)-forms only")
        data = self.outgoing_data(g, f, vertex_id)
        if data:
            return data[0][1].evaluate(0)
        try:
            return f.vertex_values[vertex_id]
        except KeyError:
            raise ReferentialError(f"no value for isolated vertex {vertex_id!r}") from None

    # validation

    def validate_form(self, g: WeightedMetricGraph, form: GraphForm) -> ValidationReport:
        """
        Check the vertex conditions of the form's bidegree at the interior vertices of g.

        Args:
            g: Graph the form lives on.
            form: Form to check.

        Returns:
            Report listing every violated condition.
        """
        self._check_references(g, form)
        problems: List[str] = []
        if form.bidegree not in BIDEGREES:
            return ValidationReport(subject=form.graph, violations=[f"bidegree {form.bidegree} is not in {{0,1}}^2"])
        for e in g.edges:
            f = form.coefficients[e.id]
            if f.length != e.length:
                problems.append(f"coefficient on {e.id!r} lives on [0, {f.length}] but the edge has length {e.length}")
                continue
            if f.order < form.order:
                problems.append(f"coefficient on {e.id!r} has smoothness order {f.order} below {form.order}")
            problems.extend(f"edge {e.id!r}: {msg}" for msg in f.junction_violations())
        if problems:
            return ValidationReport(subject=form.graph, violations=problems)

        if form.bidegree == (0, 0):
            for vid in g.isolated_vertices():
                if vid not in form.vertex_values:
                    problems.append(f"isolated vertex {vid!r} has no value")
        elif form.vertex_values:
            problems.append("vertex values are only carried by (0,0)-forms")

        for v in g.vertices:
            data = self.outgoing_data(g, form, v.id)
            if not data:
                continue
            if form.bidegree == (0, 0):
                values = {f.evaluate(0) for _, f in data}
                if len(values) > 1:
                    problems.append(f"function is discontinuous at {v.id!r}")
                    continue
            if v.is_boundary:
                continue
            problems.extend(self._interior_conditions(v.id, data, form))
        return ValidationReport(subject=form.graph, violations=problems)

    def _check_references(self, g: WeightedMetricGraph, form: GraphForm) -> None:
        if form.graph != g.name:
            raise ReferentialError(f"form lives on {form.graph!r}, not on {g.name!r}")
        for eid in form.coefficients:
            g.edge(eid)
        missing = [eid for eid in g.edge_ids if eid not in form.coefficients]
        if missing:
            raise ReferentialError(f"form has no coefficient on edges {missing}")
        for vid in form.vertex_values:
            g.vertex(vid)

    def _interior_conditions(
        self, vertex_id: str, data: List[Tuple[Edge, PiecewisePolynomial]], form: GraphForm
    ) -> List[str]:
        k = form.order
        valence = len(data)
        if form.bidegree == (0, 0):
            if valence == 1:
                return [] if data[0][1].first_piece.degree <= 0 else [
                    f"function is not constant near interior leaf {vertex_id!r}"
                ]
            if valence == 2:
                (e1, f1), (e2, f2) = data
                return [] if check_vertex_glue(f1, f2, e1.weight, e2.weight, k) else [
                    f"function is not smooth through interior vertex {vertex_id!r}"
                ]
            flux = sum((e.weight * f.first_piece.derivative_at(0, 1) for e, f in data), Fraction(0))
            return [] if flux == 0 else [f"weighted outgoing slopes at {vertex_id!r} sum to {flux}, not 0"]

        if valence == 1:
            return [] if data[0][1].first_piece.is_zero else [
                f"{form.bidegree}-form is not zero near interior leaf {vertex_id!r}"
            ]
        if form.bidegree == (1, 1):
            if valence == 2:
                (e1, f1), (e2, f2) = data
                glued = check_vertex_glue(f1.scale(e1.weight ** 2), f2.scale(e2.weight ** 2), e1.weight, e2.weight, k)
                return [] if glued else [f"(1,1)-form is not smooth through interior vertex {vertex_id!r}"]
            return []
        if valence == 2:
            (e1, f1), (e2, f2) = data
            glued = check_vertex_glue(f1.scale(e1.weight), f2.scale(-e2.weight), e1.weight, e2.weight, k)
            return [] if glued else [f"{form.bidegree}-form is not smooth through interior vertex {vertex_id!r}"]
        total = sum((e.weight * f.evaluate(0) for e, f in data), Fraction(0))
        return [] if total == 0 else [f"weighted outgoing values at {vertex_id!r} sum to {total}, not 0"]

    def require_valid(self, g: WeightedMetricGraph, form: GraphForm) -> None:
        report = self.validate_form(g, form)
        if not report.valid:
            raise PreconditionError(f"invalid {form.bidegree}-form on {g.name!r}: {'; '.join(report.violations)}")

    # differential algebra

    def d_second(self, form: GraphForm) -> GraphForm:
        """d'': (0,0) -> (0,1) with f', (1,0) -> (1,1) with -f'."""
        if form.bidegree not in ((0, 0), (1, 0)):
            raise PreconditionError(f"d'' takes a (p,0)-form, got bidegree {form.bidegree}")
        sign = 1 if form.bidegree == (0, 0) else -1
        coefficients = {eid: f.differentiate().scale(sign) for eid, f in form.coefficients.items()}
        return self.with_coefficients(
            form, coefficients, bidegree=(form.bidegree[0], 1), vertex_values={}, order=form.order - 1
        )

    def d_first(self, form: GraphForm) -> GraphForm:
        """d': (0,0) -> (1,0) and (0,1) -> (1,1), both with f'."""
        if form.bidegree not in ((0, 0), (0, 1)):
            raise PreconditionError(f"d' takes a (0,q)-form, got bidegree {form.bidegree}")
        coefficients = {eid: f.differentiate() for eid, f in form.coefficients.items()}
        return self.with_coefficients(
            form, coefficients, bidegree=(1, form.bidegree[1]), vertex_values={}, order=form.order - 1
        )

    def wedge(self, alpha: GraphForm, beta: GraphForm) -> GraphForm:
        """
        Exterior product with the alternating sign convention.

        Args:
            alpha: Left factor.
            beta: Right factor on the same graph.

        Returns:
            alpha ^ beta; (0,1) ^ (1,0) carries a minus sign.
        """
        if alpha.graph != beta.graph:
            raise ReferentialError(f"forms live on different graphs {alpha.graph!r} and {beta.graph!r}")
        bidegree = (alpha.bidegree[0] + beta.bidegree[0], alpha.bidegree[1] + beta.bidegree[1])
        if bidegree not in BIDEGREES:
            raise PreconditionError(f"wedge of {alpha.bidegree} and {beta.bidegree} exceeds bidegree (1,1)")
        sign = -1 if (alpha.bidegree, beta.bidegree) == ((0, 1), (1, 0)) else 1
        coefficients = {eid: (f * beta.coefficient(eid)).scale(sign) for eid, f in alpha.coefficients.items()}
        values = {}
        if bidegree == (0, 0):
            values = {vid: x * beta.vertex_values.get(vid, Fraction(0)) for vid, x in alpha.vertex_values.items()}
        return self.with_coefficients(
            alpha, coefficients, bidegree=bidegree, vertex_values=values, order=min(alpha.order, beta.order)
        )

    def lagerberg_involution(self, form: GraphForm) -> GraphForm:
        """J: swaps (p,q) -> (q,p); negates (1,1)-coefficients."""
        sign = -1 if form.bidegree == (1, 1) else 1
        coefficients = {eid: f.scale(sign) for eid, f in form.coefficients.items()}
        return self.with_coefficients(form, coefficients, bidegree=(form.bidegree[1], form.bidegree[0]))

    # linear structure

    def add(self, alpha: GraphForm, beta: GraphForm) -> GraphForm:
        return self.linear_combination([alpha, beta], [1, 1])

    def subtract(self, alpha: GraphForm, beta: GraphForm) -> GraphForm:
        return self.linear_combination([alpha, beta], [1, -1])

    def scale(self, form: GraphForm, factor: Scalar) -> GraphForm:
        return self.linear_combination([form], [factor])

    def linear_combination(self, forms: Sequence[GraphForm], factors: Sequence[Scalar]) -> GraphForm:
        """Sum of factor * form over forms sharing graph and bidegree."""
        if not forms:
            raise PreconditionError("empty linear combination")
        head = forms[0]
        for form in forms[1:]:
            if form.graph != head.graph or form.bidegree != head.bidegree:
                raise PreconditionError("linear combinations need forms of one bidegree on one graph")
        factors = [as_fraction(c) for c in factors]
        coefficients = {}
        for eid in head.coefficients:
            total = head.coefficients[eid].scale(factors[0])
            for form, c in zip(forms[1:], factors[1:]):
                total = total + form.coefficient(eid).scale(c)
            coefficients[eid] = total
        values = {
            vid: sum((c * form.vertex_values.get(vid, Fraction(0)) for form, c in zip(forms, factors)), Fraction(0))
            for vid in head.vertex_values
        }
        return self.with_coefficients(head, coefficients, vertex_values=values, order=min(f.order for f in forms))

    def is_zero(self, form: GraphForm) -> bool:
        return all(f.is_zero for f in form.coefficients.values()) and not any(form.vertex_values.values())

    # transport

    def transport_to_unweighting(self, g: WeightedMetricGraph, form: GraphForm) -> GraphForm:
        """
        Pull a form back to the unweighting: f0(x) = w^(p+q) f(w x) on [0, length/w].

        Args:
            g: Weighted graph the form lives on.
            form: Form on g.

        Returns:
            The transported form on the unweighted graph.
        """
        self._check_references(g, form)
        coefficients = {}
        for e in g.edges:
            coefficients[e.id] = form.coefficients[e.id].rescale(e.weight).scale(Fraction(e.weight) ** form.degree)
        return self.with_coefficients(form, coefficients, graph=f"{g.name}.unweighted", order=form.order)

    def transport_from_unweighting(self, g: WeightedMetricGraph, form: GraphForm) -> GraphForm:
        """Inverse of transport_to_unweighting; g is the weighted graph."""
        if form.graph != f"{g.name}.unweighted":
            raise ReferentialError(f"form lives on {form.graph!r}, not on the unweighting of {g.name!r}")
        coefficients = {}
        for e in g.edges:
            f0 = form.coefficient(e.id)
            coefficients[e.id] = f0.rescale(Fraction(1, e.weight)).scale(Fraction(1, e.weight) ** form.degree)
        return self.with_coefficients(form, coefficients, graph=g.name, order=form.order)

    def restrict_form(
        self,
        g: WeightedMetricGraph,
        form: GraphForm,
        sub: WeightedMetricGraph,
        correspondence: GraphCorrespondence,
    ) -> GraphForm:
        """
        Transport a form on g to a subdivision of g or to a subgraph of one.

        Args:
            g: Parent graph.
            form: Form on g.
            sub: Graph whose edges are segments of edges of g.
            correspondence: Segments of sub's edges, possibly reversed.

        Returns:
            The restricted form on sub.
        """
        self._check_references(g, form)
        coefficients = {}
        for e in sub.edges:
            segment = correspondence.segment(e.id)
            piece = form.coefficient(segment.edge).restrict(segment.start, segment.end)
            if segment.reversed:
                piece = piece.reverse().scale(self.reversal_sign(form.bidegree))
            coefficients[e.id] = piece
        values = {}
        if form.bidegree == (0, 0):
            for vid in sub.isolated_vertices():
                values[vid] = self._point_value(g, form, correspondence, vid)
        return self.with_coefficients(form, coefficients, graph=sub.name, vertex_values=values, order=form.order)

    def refine_form(
        self,
        g: WeightedMetricGraph,
        form: GraphForm,
        sub: WeightedMetricGraph,
        correspondence: GraphCorrespondence,
    ) -> GraphForm:
        """Transport a form to a subdivision of its graph."""
        return self.restrict_form(g, form, sub, correspondence)

    def _point_value(
        self, g: WeightedMetricGraph, form: GraphForm, correspondence: GraphCorrespondence, vertex_id: str
    ) -> Fraction:
        parent = correspondence.parent_vertex(vertex_id)
        if parent is not None:
            return self.vertex_value(g, form, parent)
        point = correspondence.interior_points.get(vertex_id)
        if point is None:
            raise ReferentialError(f"vertex {vertex_id!r} has no parent point in {g.name!r}")
        return form.coefficient(point.edge).evaluate(point.position)

    # integration

    def integrate_graph(self, g: WeightedMetricGraph, form: GraphForm) -> Fraction:
        """Sum over edges of w(e) * integral of the (1,1)-coefficient."""
        if form.bidegree != (1, 1):
            raise PreconditionError(f"graph integrals take (1,1)-forms, got {form.bidegree}")
        self._check_references(g, form)
        return sum(
            (e.weight * form.coefficients[e.id].integrate_definite(0, e.length) for e in g.edges), Fraction(0)
        )

    def integrate_boundary(self, g: WeightedMetricGraph, form: GraphForm) -> Fraction:
        """
        Boundary integral of a (1,0)- or (0,1)-form.

        (1,0) sums w(e) f_e(v) over edges leaving boundary vertices, (0,1) over
        edges entering them. The same value is recomputed as a sum over all
        edges; the two agree for every valid form.

        Args:
            g: Graph.
            form: Valid (1,0)- or (0,1)-form.

        Returns:
            The boundary integral.
        """
        if form.bidegree not in ((1, 0), (0, 1)):
            raise PreconditionError(f"boundary integrals take (1,0)- or (0,1)-forms, got {form.bidegree}")
        self._check_references(g, form)
        incoming = form.bidegree == (0, 1)
        boundary_sum = Fraction(0)
        for vid in sorted(g.boundary(), key=g.vertex_ids.index):
            for e, forward in g.outgoing(vid):
                if incoming:
                    boundary_sum += e.weight * self.oriented_coefficient(form, e.id, not forward).evaluate(e.length)
                else:
                    boundary_sum += e.weight * self.oriented_coefficient(form, e.id, forward).evaluate(0)

        edge_sum = Fraction(0)
        for e in g.edges:
            f = form.coefficients[e.id]
            jump = f.evaluate(0) - f.evaluate(e.length)
            edge_sum += e.weight * (-jump if incoming else jump)
        if edge_sum != boundary_sum:
            raise PreconditionError(
                f"boundary sum {boundary_sum} differs from the all-vertex sum {edge_sum}; the form violates its vertex conditions"
            )
        return boundary_sum

    def stokes_check(self, g: WeightedMetricGraph, form: GraphForm) -> IntegralComparison:
        """Compare the graph integral of d''form (resp. d'form) with the boundary integral."""
        if form.bidegree == (1, 0):
            lhs = self.integrate_graph(g, self.d_second(form))
        elif form.bidegree == (0, 1):
            lhs = self.integrate_graph(g, self.d_first(form))
        else:
            raise PreconditionError(f"Stokes compares (1,0)- or (0,1)-forms, got {form.bidegree}")
        result = IntegralComparison(lhs=lhs, rhs=self.integrate_boundary(g, form))
        logger.debug("stokes on %s: %s vs %s", g.name, result.lhs, result.rhs)
        return result

    def is_harmonic_via_ddbar(self, g: WeightedMetricGraph, f: GraphForm) -> bool:
        """A valid (0,0)-form is harmonic iff d'd''f vanishes."""
        self.require_valid(g, f)
        return self.is_zero(self.d_first(self.d_second(f)))
