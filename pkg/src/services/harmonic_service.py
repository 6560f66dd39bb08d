"""Harmonic functions, piecewise linear maps, harmonicity certificates and pullback of forms."""
import logging
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from src.models.form_models import GraphForm, IntegralComparison
from src.models.graph_models import GraphCorrespondence, ValidationReport, WeightedMetricGraph
from src.models.map_models import (
    EdgeImage,
    HarmonicCertificate,
    HarmonicFunction,
    HarmonicFunctionReport,
    HarmonicityFailure,
    PLMap,
)
from src.models.tropical_models import GammaGroup
from src.services.form_service import FormService
from src.services.graph_service import GraphService
from src.utils.errors import IncompatibleMapsError, NotHarmonicError, PreconditionError
from src.utils.linalg import nullspace
from src.utils.polynomial import PiecewisePolynomial, Polynomial, Scalar, as_fraction

logger = logging.getLogger(__name__)


class HarmonicService:
    """Harmonic functions on graphs and harmonic morphisms between them."""

    def __init__(
        self,
        order: Optional[int] = None,
        graph_service: Optional[GraphService] = None,
        form_service: Optional[FormService] = None,
    ) -> None:
        self.graph_service = graph_service or GraphService()
        self.form_service = form_service or FormService(order)
        self.order = self.form_service.order

    # harmonic functions

    def is_harmonic_function(
        self, g: WeightedMetricGraph, f: GraphForm, gamma: Optional[GammaGroup] = None
    ) -> HarmonicFunctionReport:
        """
        Decide whether a valid (0,0)-form is linear on every edge.

        Args:
            g: Graph.
            f: Valid (0,0)-form on g.
            gamma: Optional value group for (Z, gamma)-harmonicity.

        Returns:
            Report with per-edge slopes and the integrality flags.
        """
        if f.bidegree != (0, 0):
            raise PreconditionError(f"harmonic functions are (0,0)-forms, got {f.bidegree}")
        self.form_service.require_valid(g, f)
        reasons = []
        slopes: Dict[str, Fraction] = {}
        for e in g.edges:
            coefficient = f.coefficients[e.id]
            if not coefficient.is_polynomial or coefficient.first_piece.degree > 1:
                reasons.append(f"not linear on edge {e.id!r}")
                continue
            slopes[e.id] = coefficient.first_piece.derivative_at(0, 1)
        harmonic = not reasons
        integral = harmonic and all(s.denominator == 1 for s in slopes.values())
        gamma_harmonic = None
        if gamma is not None:
            values = [self.form_service.vertex_value(g, f, vid) for vid in g.vertex_ids]
            gamma_harmonic = integral and all(gamma.contains(x) for x in values)
        return HarmonicFunctionReport(
            harmonic=harmonic,
            slopes=slopes if harmonic else {},
            integral_slopes=integral,
            gamma_harmonic=gamma_harmonic,
            reasons=reasons,
        )

    def harmonic_function_space(self, g: WeightedMetricGraph) -> List[HarmonicFunction]:
        """
        Exact basis of the harmonic functions on g.

        Unknowns are the vertex values; every interior vertex with an edge
        contributes the weighted slope balance of its outgoing edges.

        Args:
            g: Valid graph.

        Returns:
            Basis vectors as vertex values with their canonical edge slopes.
        """
        self.graph_service.require_valid(g)
        column = {vid: i for i, vid in enumerate(g.vertex_ids)}
        rows = []
        for v in g.vertices:
            edges = g.outgoing(v.id)
            if v.is_boundary or not edges:
                continue
            row = [Fraction(0)] * len(column)
            for e, _ in edges:
                row[column[e.other_end(v.id)]] += Fraction(e.weight) / e.length
                row[column[v.id]] -= Fraction(e.weight) / e.length
            rows.append(row)
        basis = []
        for vector in nullspace(rows, len(column)):
            values = {vid: vector[column[vid]] for vid in g.vertex_ids}
            basis.append(HarmonicFunction(vertex_values=values, slopes=self._slopes(g, values)))
        logger.debug("harmonic functions on %s: dimension %d", g.name, len(basis))
        return basis

    @staticmethod
    def _slopes(g: WeightedMetricGraph, values: Dict[str, Fraction]) -> Dict[str, Fraction]:
        return {e.id: (values[e.head] - values[e.tail]) / e.length for e in g.edges}

    def harmonic_function_form(self, g: WeightedMetricGraph, values: Dict[str, Scalar]) -> GraphForm:
        """Edge-linear (0,0)-form interpolating the given vertex values."""
        values = {vid: as_fraction(values[vid]) for vid in g.vertex_ids}
        slopes = self._slopes(g, values)
        polynomials = {e.id: Polynomial((values[e.tail], slopes[e.id])) for e in g.edges}
        isolated = {vid: values[vid] for vid in g.isolated_vertices()}
        return self.form_service.from_polynomials(g, (0, 0), polynomials, isolated)

    # maps

    def identity_map(self, g: WeightedMetricGraph) -> PLMap:
        return PLMap(
            name=f"id:{g.name}",
            source=g,
            target=g,
            vertex_map={vid: vid for vid in g.vertex_ids},
            edge_map={eid: EdgeImage(edge=eid) for eid in g.edge_ids},
        )

    def unweighting_map(self, g: WeightedMetricGraph) -> PLMap:
        """The canonical map from the unweighting onto g."""
        g0, _ = self.graph_service.unweight(g)
        return PLMap(
            name=f"nu:{g.name}",
            source=g0,
            target=g,
            vertex_map={vid: vid for vid in g.vertex_ids},
            edge_map={eid: EdgeImage(edge=eid) for eid in g.edge_ids},
        )

    def inclusion_map(self, sub: WeightedMetricGraph, g: WeightedMetricGraph) -> PLMap:
        """Inclusion of a subgraph, the identity on ids."""
        for v in sub.vertices:
            g.vertex(v.id)
        for e in sub.edges:
            g.edge(e.id)
        return PLMap(
            name=f"incl:{sub.name}",
            source=sub,
            target=g,
            vertex_map={vid: vid for vid in sub.vertex_ids},
            edge_map={eid: EdgeImage(edge=eid) for eid in sub.edge_ids},
        )

    def validate_plmap(self, m: PLMap) -> ValidationReport:
        """
        Check that a map is a well-defined piecewise linear map of graphs with boundary.

        Args:
            m: Candidate map.

        Returns:
            Report of unknown ids, endpoint mismatches and boundary violations.
        """
        source, target = m.source, m.target
        problems = []
        for vid in source.vertex_ids:
            image = m.vertex_map.get(vid)
            if image is None:
                problems.append(f"vertex {vid!r} has no image")
            elif not target.has_vertex(image):
                problems.append(f"vertex {vid!r} maps to unknown vertex {image!r}")
        for vid in m.vertex_map:
            if not source.has_vertex(vid):
                problems.append(f"map sends unknown source vertex {vid!r}")
        for eid in m.edge_map:
            if not source.has_edge(eid):
                problems.append(f"map sends unknown source edge {eid!r}")
        if problems:
            return ValidationReport(subject=m.name, violations=problems)

        for e in source.edges:
            image = m.edge_map.get(e.id)
            if image is None:
                problems.append(f"edge {e.id!r} has no image")
                continue
            ends = (m.vertex_map[e.tail], m.vertex_map[e.head])
            if image.crushed:
                if image.vertex is None or not target.has_vertex(image.vertex):
                    problems.append(f"edge {e.id!r} is crushed onto an unknown vertex {image.vertex!r}")
                elif ends != (image.vertex, image.vertex):
                    problems.append(f"edge {e.id!r} is crushed to {image.vertex!r} but its ends map to {ends}")
                continue
            if not target.has_edge(image.edge):
                problems.append(f"edge {e.id!r} maps to unknown edge {image.edge!r}")
                continue
            t = target.edge(image.edge)
            expected = (t.head, t.tail) if image.reversed else (t.tail, t.head)
            if ends != expected:
                problems.append(f"edge {e.id!r} maps onto {t.id!r} but its ends go to {ends}, not {expected}")

        if not problems:
            for v in source.vertices:
                if v.is_boundary or not target.is_boundary(m.vertex_map[v.id]):
                    continue
                if any(not m.edge_map[e.id].crushed for e, _ in source.outgoing(v.id)):
                    problems.append(
                        f"interior vertex {v.id!r} maps non-constantly onto boundary vertex {m.vertex_map[v.id]!r}"
                    )
        return ValidationReport(subject=m.name, violations=problems)

    def require_valid_map(self, m: PLMap) -> None:
        report = self.validate_plmap(m)
        if not report.valid:
            raise PreconditionError(f"invalid map {m.name!r}: {'; '.join(report.violations)}")

    def _preimage_sums(self, m: PLMap, vertex_id: str) -> Dict[str, Fraction]:
        """For each target edge at phi(v'), l0(e) times the sum of 1/l0 over edges at v' mapping onto it."""
        image = m.vertex_map[vertex_id]
        sums = {e.id: Fraction(0) for e, _ in m.target.outgoing(image)}
        for e, _ in m.source.outgoing(vertex_id):
            mapped = m.edge_map[e.id]
            if not mapped.crushed:
                sums[mapped.edge] += 1 / e.unweighted_length
        return {eid: m.target.edge(eid).unweighted_length * total for eid, total in sums.items()}

    def harmonicity(self, m: PLMap) -> HarmonicCertificate:
        """
        Compute local degrees at interior source vertices and test their independence of the target edge.

        Args:
            m: Valid map.

        Returns:
            Certificate with local, per-edge and global degrees, or the first failure.
        """
        self.require_valid_map(m)
        local: Dict[str, Fraction] = {}
        for v in m.source.vertices:
            if v.is_boundary:
                continue
            if all(m.edge_map[e.id].crushed for e, _ in m.source.outgoing(v.id)):
                local[v.id] = Fraction(0)
                continue
            sums = self._preimage_sums(m, v.id)
            items = list(sums.items())
            first_edge, first_value = items[0]
            for eid, value in items[1:]:
                if value != first_value:
                    failure = HarmonicityFailure(
                        vertex=v.id,
                        target_vertex=m.vertex_map[v.id],
                        edges=(first_edge, eid),
                        values=(first_value, value),
                    )
                    logger.info("map %s is not harmonic: %s", m.name, failure.describe())
                    return HarmonicCertificate(map_name=m.name, harmonic=False, local_degrees=local, failure=failure)
            local[v.id] = first_value

        edge_degrees = {e.id: Fraction(0) for e in m.target.edges}
        for e in m.source.edges:
            mapped = m.edge_map[e.id]
            if not mapped.crushed:
                edge_degrees[mapped.edge] += 1 / e.unweighted_length
        edge_degrees = {eid: m.target.edge(eid).unweighted_length * s for eid, s in edge_degrees.items()}
        distinct = set(edge_degrees.values())
        degree = distinct.pop() if len(distinct) == 1 else None
        return HarmonicCertificate(
            map_name=m.name, harmonic=True, local_degrees=local, edge_degrees=edge_degrees, degree=degree
        )

    def require_harmonic(self, m: PLMap) -> HarmonicCertificate:
        certificate = self.harmonicity(m)
        if not certificate.harmonic:
            raise NotHarmonicError(f"map {m.name!r} is not harmonic: {certificate.failure.describe()}")
        return certificate

    def locally_pulls_back_harmonic(self, m: PLMap, vertex_id: str) -> bool:
        """
        Test whether every harmonic germ at phi(v') pulls back to a harmonic germ at v'.

        Args:
            m: Valid map.
            vertex_id: Source vertex v'.

        Returns:
            True iff the pulled-back slope balance at v' vanishes on all harmonic germs.
        """
        self.require_valid_map(m)
        if m.source.is_boundary(vertex_id):
            return True
        image = m.vertex_map[vertex_id]
        target_edges = m.target.outgoing(image)
        if not target_edges:
            return True
        pulled = {e.id: Fraction(0) for e, _ in target_edges}
        for e, _ in m.source.outgoing(vertex_id):
            mapped = m.edge_map[e.id]
            if not mapped.crushed:
                pulled[mapped.edge] += e.weight * m.expansion_factor(e.id)
        if m.target.is_boundary(image):
            germs = nullspace([], len(target_edges))
        else:
            germs = nullspace([[Fraction(e.weight) for e, _ in target_edges]], len(target_edges))
        return all(
            sum((pulled[e.id] * s for (e, _), s in zip(target_edges, germ)), Fraction(0)) == 0 for germ in germs
        )

    def is_harmonic_isomorphism(self, m: PLMap) -> bool:
        """Bijective on vertices and edges, harmonic, and of constant degree on every target component."""
        self.require_valid_map(m)
        if sorted(m.vertex_map.values()) != sorted(m.target.vertex_ids):
            return False
        images = [m.edge_map[eid].edge for eid in m.source.edge_ids]
        if None in images or sorted(images) != sorted(m.target.edge_ids):
            return False
        certificate = self.harmonicity(m)
        if not certificate.harmonic:
            return False
        for component in self.graph_service.components(m.target):
            if len({certificate.edge_degrees[eid] for eid in component.edges}) > 1:
                return False
        return True

    # pullback and composition

    def pullback_form(
        self,
        m: PLMap,
        form: GraphForm,
        target_parent: Optional[WeightedMetricGraph] = None,
        certificate: Optional[HarmonicCertificate] = None,
    ) -> GraphForm:
        """
        Pull a form back along a harmonic map.

        Args:
            m: Harmonic map.
            form: Valid form on m.target, or on target_parent when m.target subdivides it.
            target_parent: Unsubdivided target, used with m.target_subdivision.
            certificate: Harmonicity certificate already computed for m.

        Returns:
            The pulled-back form on m.source.
        """
        if certificate is None:
            certificate = self.require_harmonic(m)
        elif not certificate.harmonic:
            raise NotHarmonicError(f"map {m.name!r} is not harmonic")
        if form.graph != m.target.name:
            if target_parent is None or m.target_subdivision is None or form.graph != target_parent.name:
                raise PreconditionError(f"form lives on {form.graph!r}, not on the target {m.target.name!r}")
            form = self.form_service.refine_form(target_parent, form, m.target, m.target_subdivision)
        self.form_service.require_valid(m.target, form)

        coefficients: Dict[str, PiecewisePolynomial] = {}
        for e in m.source.edges:
            mapped = m.edge_map[e.id]
            if mapped.crushed:
                value = Fraction(0)
                if form.bidegree == (0, 0):
                    value = self.form_service.vertex_value(m.target, form, mapped.vertex)
                coefficients[e.id] = PiecewisePolynomial.constant(value, e.length, form.order)
                continue
            d = m.expansion_factor(e.id)
            f = self.form_service.oriented_coefficient(form, mapped.edge, not mapped.reversed)
            coefficients[e.id] = f.rescale(d).scale(d ** form.degree)
        values = {}
        if form.bidegree == (0, 0):
            values = {
                vid: self.form_service.vertex_value(m.target, form, m.vertex_map[vid])
                for vid in m.source.isolated_vertices()
            }
        return self.form_service.with_coefficients(
            form, coefficients, graph=m.source.name, vertex_values=values, order=form.order
        )

    def compose(self, outer: PLMap, inner: PLMap) -> PLMap:
        """
        Composite outer after inner.

        Args:
            outer: Map Sigma' -> Sigma.
            inner: Map Sigma'' -> Sigma' whose target is identical to outer's source.

        Returns:
            The composite Sigma'' -> Sigma.
        """
        if not inner.target.same_as(outer.source):
            raise IncompatibleMapsError(
                f"cannot compose {outer.name!r} after {inner.name!r}: "
                f"middle graphs {inner.target.name!r} and {outer.source.name!r} differ"
            )
        edge_map = {}
        for eid in inner.source.edge_ids:
            first = inner.edge_map[eid]
            if first.crushed:
                edge_map[eid] = EdgeImage(vertex=outer.vertex_map[first.vertex])
                continue
            second = outer.edge_map[first.edge]
            if second.crushed:
                edge_map[eid] = EdgeImage(vertex=second.vertex)
            else:
                edge_map[eid] = EdgeImage(edge=second.edge, reversed=first.reversed != second.reversed)
        return PLMap(
            name=f"{outer.name}.{inner.name}",
            source=inner.source,
            target=outer.target,
            vertex_map={vid: outer.vertex_map[inner.vertex_map[vid]] for vid in inner.source.vertex_ids},
            edge_map=edge_map,
            target_subdivision=outer.target_subdivision,
        )

    def integrate_pullback_check(self, m: PLMap, form: GraphForm) -> IntegralComparison:
        """
        Compare the integral of the pullback with degree times the integral downstairs.

        Args:
            m: Harmonic map with a global degree.
            form: (1,1)-form for graph integrals, (1,0)/(0,1) for boundary integrals.

        Returns:
            lhs on the source, rhs = degree * integral on the target.
        """
        certificate = self.require_harmonic(m)
        if certificate.degree is None:
            raise NotHarmonicError(f"map {m.name!r} has no global degree")
        pulled = self.pullback_form(m, form, certificate=certificate)
        if form.bidegree == (1, 1):
            lhs = self.form_service.integrate_graph(m.source, pulled)
            rhs = self.form_service.integrate_graph(m.target, form)
        elif form.bidegree in ((1, 0), (0, 1)):
            lhs = self.form_service.integrate_boundary(m.source, pulled)
            rhs = self.form_service.integrate_boundary(m.target, form)
        else:
            raise PreconditionError("functions have no integral; pass a form of bidegree (1,1), (1,0) or (0,1)")
        return IntegralComparison(lhs=lhs, rhs=certificate.degree * rhs)

    def target_subdivision(
        self, m: PLMap, target_parent: WeightedMetricGraph, correspondence: GraphCorrespondence
    ) -> PLMap:
        """Record that m.target is a subdivision of target_parent."""
        if correspondence.source != m.target.name or correspondence.target != target_parent.name:
            raise PreconditionError(
                f"correspondence {correspondence.source!r} -> {correspondence.target!r} does not describe "
                f"{m.target.name!r} -> {target_parent.name!r}"
            )
        return m.model_copy(update={"target_subdivision": correspondence})

    def pullback_many(self, m: PLMap, forms: Sequence[GraphForm]) -> List[GraphForm]:
        certificate = self.require_harmonic(m)
        return [self.pullback_form(m, form, certificate=certificate) for form in forms]
