"""Finite group actions by harmonic maps and their quotient graphs."""
import logging
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from src.models.graph_models import Edge, ValidationReport, Vertex, WeightedMetricGraph
from src.models.map_models import EdgeImage, GroupAction, InvariantCohomologyReport, PLMap, QuotientResult
from src.models.cohomology_models import bidegree_key
from src.models.form_models import BIDEGREES
from src.services.cohomology_service import CohomologyService
from src.services.graph_service import GraphService
from src.services.harmonic_service import HarmonicService
from src.utils.errors import InvalidActionError
from src.utils.linalg import rank

logger = logging.getLogger(__name__)


class QuotientService:
    """Equivariant subdivision, quotient construction and verification, invariant cohomology."""

    def __init__(
        self,
        order: Optional[int] = None,
        graph_service: Optional[GraphService] = None,
        harmonic_service: Optional[HarmonicService] = None,
        cohomology_service: Optional[CohomologyService] = None,
    ) -> None:
        self.graph_service = graph_service or GraphService()
        self.harmonic_service = harmonic_service or HarmonicService(order, graph_service=self.graph_service)
        self.cohomology_service = cohomology_service or CohomologyService(
            graph_service=self.graph_service,
            form_service=self.harmonic_service.form_service,
            harmonic_service=self.harmonic_service,
        )

    # actions

    @staticmethod
    def _same_map(a: PLMap, b: PLMap) -> bool:
        return a.vertex_map == b.vertex_map and a.edge_map == b.edge_map

    def validate_action(self, action: GroupAction) -> ValidationReport:
        """
        Check identity, closure, bijectivity, harmonicity and preservation of the boundary.

        Args:
            action: Candidate action.

        Returns:
            Report listing the failed group axioms.
        """
        g = action.graph
        problems: List[str] = []
        for sigma in action.elements:
            if not (sigma.source.same_as(g) and sigma.target.same_as(g)):
                problems.append(f"element {sigma.name!r} is not a self-map of {g.name!r}")
                continue
            report = self.harmonic_service.validate_plmap(sigma)
            if not report.valid:
                problems.extend(f"element {sigma.name!r}: {v}" for v in report.violations)
                continue
            if sorted(sigma.vertex_map.values()) != sorted(g.vertex_ids):
                problems.append(f"element {sigma.name!r} is not bijective on vertices")
            images = [sigma.edge_map[eid].edge for eid in g.edge_ids]
            if None in images or sorted(images) != sorted(g.edge_ids):
                problems.append(f"element {sigma.name!r} is not bijective on edges")
            elif not self.harmonic_service.harmonicity(sigma).harmonic:
                problems.append(f"element {sigma.name!r} is not harmonic")
            if {sigma.vertex_map[vid] for vid in g.boundary()} != g.boundary():
                problems.append(f"element {sigma.name!r} does not preserve the boundary")
        if problems:
            return ValidationReport(subject=g.name, violations=problems)

        identity = self.harmonic_service.identity_map(g)
        if not any(self._same_map(sigma, identity) for sigma in action.elements):
            problems.append("action does not contain the identity")
        for sigma in action.elements:
            for tau in action.elements:
                product = self.harmonic_service.compose(sigma, tau)
                if not any(self._same_map(product, rho) for rho in action.elements):
                    problems.append(f"composite of {sigma.name!r} after {tau.name!r} is not in the action")
        return ValidationReport(subject=g.name, violations=problems)

    def require_valid_action(self, action: GroupAction) -> None:
        report = self.validate_action(action)
        if not report.valid:
            raise InvalidActionError(f"invalid action on {action.graph.name!r}: {'; '.join(report.violations)}")

    def vertex_orbits(self, action: GroupAction) -> Dict[str, str]:
        """Map each vertex to its orbit representative, the first orbit member in graph order."""
        order = {vid: i for i, vid in enumerate(action.graph.vertex_ids)}
        return {
            vid: min({sigma.vertex_map[vid] for sigma in action.elements}, key=order.__getitem__)
            for vid in action.graph.vertex_ids
        }

    def edge_orbits(self, action: GroupAction) -> Dict[str, str]:
        order = {eid: i for i, eid in enumerate(action.graph.edge_ids)}
        return {
            eid: min({sigma.edge_map[eid].edge for sigma in action.elements}, key=order.__getitem__)
            for eid in action.graph.edge_ids
        }

    def equivariant_subdivision(self, g: WeightedMetricGraph, action: GroupAction) -> Tuple[WeightedMetricGraph, GroupAction]:
        """
        Split at midpoints every edge whose endpoints lie in one orbit, together with its orbit.

        Args:
            g: Graph acted on.
            action: Valid action on g.

        Returns:
            The subdivided graph and the action transported to it.
        """
        self.require_valid_action(action)
        vertex_rep = self.vertex_orbits(action)
        offending = set()
        for e in g.edges:
            if vertex_rep[e.tail] == vertex_rep[e.head]:
                offending.update(sigma.edge_map[e.id].edge for sigma in action.elements)
        if not offending:
            return g, action

        points = [(eid, g.edge(eid).length / 2) for eid in g.edge_ids if eid in offending]
        sub, _ = self.graph_service.subdivide(g, points)
        elements = []
        for sigma in action.elements:
            vertex_map = dict(sigma.vertex_map)
            edge_map: Dict[str, EdgeImage] = {}
            for e in g.edges:
                image = sigma.edge_map[e.id]
                if e.id not in offending:
                    edge_map[e.id] = image
                    continue
                vertex_map[f"{e.id}@1"] = f"{image.edge}@1"
                if image.reversed:
                    edge_map[f"{e.id}.0"] = EdgeImage(edge=f"{image.edge}.1", reversed=True)
                    edge_map[f"{e.id}.1"] = EdgeImage(edge=f"{image.edge}.0", reversed=True)
                else:
                    edge_map[f"{e.id}.0"] = EdgeImage(edge=f"{image.edge}.0")
                    edge_map[f"{e.id}.1"] = EdgeImage(edge=f"{image.edge}.1")
            elements.append(PLMap(name=sigma.name, source=sub, target=sub, vertex_map=vertex_map, edge_map=edge_map))
        logger.debug("equivariant subdivision of %s split %d edges", g.name, len(offending))
        return sub, GroupAction(graph=sub, elements=tuple(elements))

    # quotient

    def quotient(self, g: WeightedMetricGraph, action: GroupAction) -> QuotientResult:
        """
        Build the quotient graph with harmonic-mean lengths and its projection.

        Args:
            g: Graph acted on.
            action: Valid action on g.

        Returns:
            Subdivided graph, transported action, quotient, projection and its certificate.
        """
        sub, act = self.equivariant_subdivision(g, action)
        vertex_rep = self.vertex_orbits(act)
        edge_rep = self.edge_orbits(act)

        vertices = []
        for vid in sub.vertex_ids:
            if vertex_rep[vid] != vid:
                continue
            orbit = [u for u in sub.vertex_ids if vertex_rep[u] == vid]
            vertices.append(Vertex(id=vid, is_boundary=any(sub.is_boundary(u) for u in orbit)))
        edges = []
        for e in sub.edges:
            if edge_rep[e.id] != e.id:
                continue
            inverse_length = sum(
                (1 / sub.edge(eid).unweighted_length for eid in sub.edge_ids if edge_rep[eid] == e.id), Fraction(0)
            )
            edges.append(
                Edge(id=e.id, tail=vertex_rep[e.tail], head=vertex_rep[e.head], length=1 / inverse_length, weight=1)
            )
        quotient = WeightedMetricGraph(name=f"{g.name}.quotient", vertices=tuple(vertices), edges=tuple(edges))

        edge_map = {}
        for e in sub.edges:
            target = quotient.edge(edge_rep[e.id])
            edge_map[e.id] = EdgeImage(edge=target.id, reversed=vertex_rep[e.tail] != target.tail)
        projection = PLMap(
            name=f"pi:{g.name}",
            source=sub,
            target=quotient,
            vertex_map=dict(vertex_rep),
            edge_map=edge_map,
        )
        certificate = self.harmonic_service.harmonicity(projection)
        if not certificate.harmonic:
            raise InvalidActionError(f"projection onto {quotient.name!r} is not harmonic: {certificate.failure.describe()}")
        self._cross_check_local_degrees(act, vertex_rep, certificate.local_degrees)
        logger.info("quotient of %s by a group of order %d: %d vertices, %d edges",
                    g.name, act.order, len(vertices), len(edges))
        return QuotientResult(subdivided=sub, action=act, quotient=quotient, projection=projection, certificate=certificate)

    def _cross_check_local_degrees(
        self, action: GroupAction, vertex_rep: Dict[str, str], projection_degrees: Dict[str, Fraction]
    ) -> None:
        """d_{v'}(pi) must be the inverse of the sum of 1/d(v', v'') over the orbit; stabilizers act with degree 1."""
        certificates = [(sigma, self.harmonic_service.harmonicity(sigma)) for sigma in action.elements]
        g = action.graph
        for vid, expected in projection_degrees.items():
            if not g.outgoing(vid):
                continue
            ratios: Dict[str, Fraction] = {}
            for sigma, certificate in certificates:
                local = certificate.local_degrees[vid]
                image = sigma.vertex_map[vid]
                if image == vid and local != 1:
                    raise InvalidActionError(f"stabilizer element {sigma.name!r} has local degree {local} at {vid!r}")
                ratios.setdefault(image, local)
            predicted = 1 / sum((1 / d for d in ratios.values()), Fraction(0))
            if predicted != expected:
                raise InvalidActionError(
                    f"local degree of the projection at {vid!r} is {expected}, orbit formula gives {predicted}"
                )

    def verify_quotient(
        self, g: WeightedMetricGraph, action: GroupAction, quotient: WeightedMetricGraph, projection: PLMap
    ) -> ValidationReport:
        """
        Check the defining properties of a quotient map.

        Args:
            g: Graph acted on (as subdivided for the action).
            action: Action on g.
            quotient: Candidate quotient graph.
            projection: Candidate map g -> quotient.

        Returns:
            Report of the violated properties.
        """
        problems: List[str] = []
        if not (projection.source.same_as(g) and projection.target.same_as(quotient)):
            return ValidationReport(subject=projection.name, violations=["projection does not map g onto the quotient"])
        report = self.harmonic_service.validate_plmap(projection)
        if not report.valid:
            return ValidationReport(subject=projection.name, violations=report.violations)

        compose = self.harmonic_service.compose
        for sigma in action.elements:
            if not self._same_map(compose(projection, sigma), projection):
                problems.append(f"projection is not invariant under {sigma.name!r}")
        for vid in quotient.vertex_ids:
            fiber = {u for u in g.vertex_ids if projection.vertex_map[u] == vid}
            if not fiber:
                problems.append(f"vertex {vid!r} has an empty fiber")
            elif any({sigma.vertex_map[u] for sigma in action.elements} != fiber for u in fiber):
                problems.append(f"group does not act transitively on the fiber over vertex {vid!r}")
        for eid in quotient.edge_ids:
            fiber = {e for e in g.edge_ids if projection.edge_map[e].edge == eid}
            if not fiber:
                problems.append(f"edge {eid!r} has an empty fiber")
            elif any({sigma.edge_map[e].edge for sigma in action.elements} != fiber for e in fiber):
                problems.append(f"group does not act transitively on the fiber over edge {eid!r}")
        if any(image.crushed for image in projection.edge_map.values()):
            problems.append("projection crushes an edge")
        preimage = {u for u in g.vertex_ids if quotient.is_boundary(projection.vertex_map[u])}
        if preimage != g.boundary():
            problems.append("preimage of the quotient boundary differs from the boundary")
        if not self.harmonic_service.harmonicity(projection).harmonic:
            problems.append("projection is not harmonic")
        return ValidationReport(subject=projection.name, violations=problems)

    def factor_through_quotient(self, result: QuotientResult, phi: PLMap) -> PLMap:
        """
        The unique map from the quotient through which an invariant map factors.

        Args:
            result: Output of quotient().
            phi: Map out of result.subdivided with phi o sigma = phi for every sigma.

        Returns:
            The factored map out of result.quotient.
        """
        if not phi.source.same_as(result.subdivided):
            raise InvalidActionError(f"map {phi.name!r} does not start at {result.subdivided.name!r}")
        projection = result.projection
        vertex_map = {vid: phi.vertex_map[vid] for vid in result.quotient.vertex_ids}
        edge_map = {eid: phi.edge_map[eid] for eid in result.quotient.edge_ids}
        factored = PLMap(
            name=f"{phi.name}.factored",
            source=result.quotient,
            target=phi.target,
            vertex_map=vertex_map,
            edge_map=edge_map,
        )
        if not self._same_map(self.harmonic_service.compose(factored, projection), phi):
            raise InvalidActionError(f"map {phi.name!r} is not invariant under the action")
        return factored

    # cohomology

    def invariant_cohomology(self, g: WeightedMetricGraph, action: GroupAction) -> InvariantCohomologyReport:
        """
        Ranks of the averaging projectors on H^{p,q}(g) against the quotient's Dolbeault numbers.

        Args:
            g: Graph acted on.
            action: Valid action.

        Returns:
            Invariant ranks and quotient dimensions keyed by bidegree.
        """
        result = self.quotient(g, action)
        cohomology = self.cohomology_service
        basis = cohomology.cohomology_basis(result.subdivided)
        matrices = [cohomology.cohomology_pullback(sigma, basis, basis) for sigma in result.action.elements]
        table = cohomology.dolbeault_dimensions(result.quotient)
        ranks, dimensions = {}, {}
        for bidegree in BIDEGREES:
            key = bidegree_key(bidegree)
            n = matrices[0].shapes[key][0]
            average = [
                [sum((m.matrices[key][i][j] for m in matrices), Fraction(0)) / action.order for j in range(n)]
                for i in range(n)
            ]
            ranks[key] = rank(average, n)
            dimensions[key] = table.dimension(bidegree)
        report = InvariantCohomologyReport(invariant_ranks=ranks, quotient_dimensions=dimensions)
        if not report.agree:
            logger.warning("invariant ranks %s differ from quotient dimensions %s", ranks, dimensions)
        return report
