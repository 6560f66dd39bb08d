"""Dolbeault cohomology of weighted metric graphs with boundary."""
import logging
from collections import deque
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from src.models.cohomology_models import (
    CohomologyBasis,
    ComponentDimensions,
    DbarResult,
    DolbeaultTable,
    FundamentalCycle,
    PoincarePairing,
    PullbackMatrices,
    bidegree_key,
)
from src.models.form_models import BIDEGREES, GraphForm
from src.models.graph_models import GraphComponent, WeightedMetricGraph
from src.models.map_models import PLMap
from src.services.form_service import FormService
from src.services.graph_service import GraphService
from src.services.harmonic_service import HarmonicService
from src.utils.errors import MathematicalFailure, PreconditionError
from src.utils.linalg import determinant, nullspace, rank, solve
from src.utils.polynomial import PiecewisePolynomial, Polynomial, make_bump

logger = logging.getLogger(__name__)


class CohomologyService:
    """Dimensions, bases, d''-preimages, class coordinates, duality pairings and induced maps."""

    def __init__(
        self,
        order: Optional[int] = None,
        graph_service: Optional[GraphService] = None,
        form_service: Optional[FormService] = None,
        harmonic_service: Optional[HarmonicService] = None,
    ) -> None:
        self.graph_service = graph_service or GraphService()
        self.form_service = form_service or FormService(order)
        self.harmonic_service = harmonic_service or HarmonicService(
            graph_service=self.graph_service, form_service=self.form_service
        )
        self.order = self.form_service.order

    # linear-algebra data on the unweighting

    def _interior_rows(self, g: WeightedMetricGraph, vertices=None) -> Tuple[List[List[Fraction]], List[str]]:
        """Rows of the incidence matrix at interior vertices (optionally restricted to a vertex set)."""
        incidence = self.graph_service.incidence_matrix(g)
        rows, labels = [], []
        for vid, row in zip(g.vertex_ids, incidence):
            if g.is_boundary(vid) or (vertices is not None and vid not in vertices):
                continue
            rows.append(row)
            labels.append(vid)
        return rows, labels

    def _component_table(self, g0: WeightedMetricGraph, component: GraphComponent) -> ComponentDimensions:
        vertices = set(component.vertices)
        columns = [g0.edge_ids.index(eid) for eid in component.edges]
        incidence = self.graph_service.incidence_matrix(g0)
        full = [[incidence[g0.vertex_ids.index(vid)][j] for j in columns] for vid in component.vertices]
        interior = [
            [incidence[g0.vertex_ids.index(vid)][j] for j in columns]
            for vid in component.vertices
            if not g0.is_boundary(vid)
        ]
        n_edges = len(columns)
        heads = [
            [Fraction(int(g0.edge(eid).head == vid)) for eid in component.edges]
            for vid in component.vertices
            if not g0.is_boundary(vid)
        ]
        interior_rank = rank(interior, n_edges)
        combined = [row + head_row for row, head_row in zip(interior, heads)]
        boundary_count = sum(1 for vid in vertices if g0.is_boundary(vid))
        return ComponentDimensions(
            index=component.index,
            genus=n_edges - len(vertices) + 1,
            boundary_count=boundary_count,
            has_edges=bool(n_edges),
            h00=1,
            h10=n_edges - interior_rank,
            h01=n_edges - rank(full, n_edges),
            h11=rank(combined, 2 * n_edges) - interior_rank,
        )

    def dolbeault_dimensions(self, g: WeightedMetricGraph) -> DolbeaultTable:
        """
        Compute h^{p,q} per component from ranks of incidence systems on the unweighting.

        Args:
            g: Valid graph.

        Returns:
            Table per component; matches_closed_form compares with the genus formula.
        """
        self.graph_service.require_valid(g)
        g0, _ = self.graph_service.unweight(g)
        table = DolbeaultTable(
            graph=g.name, components=[self._component_table(g0, c) for c in self.graph_service.components(g0)]
        )
        if not table.matches_closed_form:
            logger.warning("dimension table of %s disagrees with the genus formula", g.name)
        logger.info("dolbeault numbers of %s: %s", g.name, table.total)
        return table

    # bases

    def fundamental_cycles(self, g: WeightedMetricGraph) -> List[FundamentalCycle]:
        """One closed walk per non-forest edge, based at the first vertex of its component."""
        forest, rest = self.graph_service.spanning_forest(g)
        parent: Dict[str, Optional[Tuple[str, bool]]] = {}
        base_of: Dict[str, str] = {}
        adjacency: Dict[str, List[Tuple[str, bool]]] = {vid: [] for vid in g.vertex_ids}
        for eid in forest:
            e = g.edge(eid)
            adjacency[e.tail].append((eid, True))
            adjacency[e.head].append((eid, False))
        for component in self.graph_service.components(g):
            base = component.vertices[0]
            parent[base] = None
            base_of[base] = base
            queue = deque([base])
            while queue:
                vid = queue.popleft()
                for eid, forward in adjacency[vid]:
                    nxt = g.edge(eid).other_end(vid)
                    if nxt not in parent:
                        parent[nxt] = (eid, forward)
                        base_of[nxt] = base
                        queue.append(nxt)

        def path_from_base(vid: str) -> List[Tuple[str, bool]]:
            steps = []
            while parent[vid] is not None:
                eid, forward = parent[vid]
                steps.append((eid, forward))
                e = g.edge(eid)
                vid = e.tail if forward else e.head
            return list(reversed(steps))

        cycles = []
        for eid in rest:
            e = g.edge(eid)
            back = [(step, not forward) for step, forward in reversed(path_from_base(e.head))]
            cycles.append(
                FundamentalCycle(edge=eid, base_vertex=base_of[e.tail], steps=path_from_base(e.tail) + [(eid, True)] + back)
            )
        return cycles

    def cycle_integrals(self, g: WeightedMetricGraph, form: GraphForm, cycles: List[FundamentalCycle]) -> List[Fraction]:
        """Line integrals of a (0,1)-form along closed walks."""
        if form.bidegree != (0, 1):
            raise PreconditionError(f"cycle integrals take (0,1)-forms, got {form.bidegree}")
        values = []
        for cycle in cycles:
            total = Fraction(0)
            for eid, forward in cycle.steps:
                integral = form.coefficient(eid).integrate_definite(0, g.edge(eid).length)
                total += integral if forward else -integral
            values.append(total)
        return values

    def cohomology_basis(self, g: WeightedMetricGraph) -> CohomologyBasis:
        """
        Build explicit representatives of every H^{p,q}.

        Args:
            g: Valid graph.

        Returns:
            Indicator functions, edge-constant (1,0)-forms, bump (0,1)-forms on
            non-forest edges and one unit-integral bump (1,1)-form per boundaryless
            component with an edge.
        """
        self.graph_service.require_valid(g)
        g0, _ = self.graph_service.unweight(g)
        k = self.order
        components = self.graph_service.components(g)

        h00 = []
        for component in components:
            members = set(component.edges)
            polynomials = {eid: Polynomial.constant(1) for eid in members}
            isolated = {vid: int(vid in component.vertices) for vid in g.isolated_vertices()}
            h00.append(self.form_service.from_polynomials(g, (0, 0), polynomials, isolated))

        rows, _ = self._interior_rows(g0)
        h10 = []
        for vector in nullspace(rows, len(g0.edges)):
            f0 = self.form_service.from_polynomials(
                g0, (1, 0), {e.id: Polynomial.constant(c) for e, c in zip(g0.edges, vector)}
            )
            h10.append(self.form_service.transport_from_unweighting(g, f0))

        cycles = self.fundamental_cycles(g)
        h01 = [self._bump_form(g, g0, (0, 1), cycle.edge) for cycle in cycles]

        h11, owners = [], []
        for component in components:
            if not component.edges or any(g.is_boundary(vid) for vid in component.vertices):
                continue
            h11.append(self._bump_form(g, g0, (1, 1), component.edges[0]))
            owners.append(component.index)

        logger.debug("basis of %s with K=%d: %d/%d/%d/%d", g.name, k, len(h00), len(h10), len(h01), len(h11))
        return CohomologyBasis(graph=g.name, h00=h00, h10=h10, h01=h01, h11=h11, cycles=cycles, component_of_h11=owners)

    def _bump_form(self, g: WeightedMetricGraph, g0: WeightedMetricGraph, bidegree, edge_id: str) -> GraphForm:
        e0 = g0.edge(edge_id)
        zero = self.form_service.zero_form(g0, bidegree)
        bump = make_bump(e0.length, e0.length / 4, 3 * e0.length / 4, self.order, 1)
        coefficients = dict(zero.coefficients)
        coefficients[edge_id] = bump
        return self.form_service.transport_from_unweighting(g, self.form_service.with_coefficients(zero, coefficients))

    # d''-preimages

    def dbar_preimage(self, g: WeightedMetricGraph, form: GraphForm) -> DbarResult:
        """
        Solve d''eta = form, or report the obstruction.

        Args:
            g: Graph.
            form: Valid (1,1)- or (0,1)-form.

        Returns:
            A preimage of order K+1, or per-component integrals (bidegree (1,1))
            resp. fundamental-cycle integrals (bidegree (0,1)).
        """
        self.form_service.require_valid(g, form)
        if form.bidegree == (1, 1):
            return self._dbar_top(g, form)
        if form.bidegree == (0, 1):
            return self._dbar_antiholomorphic(g, form)
        raise PreconditionError(f"d''-preimages are computed for (1,1)- and (0,1)-forms, got {form.bidegree}")

    def _dbar_top(self, g: WeightedMetricGraph, form: GraphForm) -> DbarResult:
        g0, _ = self.graph_service.unweight(g)
        f0 = self.form_service.transport_to_unweighting(g, form)
        masses = {e.id: f0.coefficients[e.id].integrate_definite(0, e.length) for e in g0.edges}
        rows, labels = self._interior_rows(g0)
        rhs = [sum((masses[e.id] for e in g0.edges if e.head == vid), Fraction(0)) for vid in labels]
        constants = solve(rows, rhs, len(g0.edges))

        obstruction = []
        for component in self.graph_service.components(g):
            if any(g.is_boundary(vid) for vid in component.vertices):
                obstruction.append(Fraction(0))
                continue
            obstruction.append(
                sum((g.edge(eid).weight * form.coefficients[eid].integrate_definite(0, g.edge(eid).length)
                     for eid in component.edges), Fraction(0))
            )
        if constants is None:
            logger.warning("(1,1)-form on %s is not d''-exact; obstruction %s", g.name, obstruction)
            return DbarResult(bidegree=(1, 1), obstruction=obstruction)

        coefficients = {}
        for e, c in zip(g0.edges, constants):
            f = f0.coefficients[e.id]
            coefficients[e.id] = PiecewisePolynomial.constant(c, e.length, f.order + 1) - f.antiderivative()
        eta0 = self.form_service.with_coefficients(f0, coefficients, bidegree=(1, 0), vertex_values={})
        eta = self.form_service.transport_from_unweighting(g, eta0)
        logger.info("found d''-preimage of a (1,1)-form on %s", g.name)
        return DbarResult(bidegree=(1, 1), preimage=eta, obstruction=obstruction)

    def _dbar_antiholomorphic(self, g: WeightedMetricGraph, form: GraphForm) -> DbarResult:
        cycles = self.fundamental_cycles(g)
        obstruction = self.cycle_integrals(g, form, cycles)
        if any(obstruction):
            logger.warning("(0,1)-form on %s has nonzero cycle integrals %s", g.name, obstruction)
            return DbarResult(bidegree=(0, 1), obstruction=obstruction)

        g0, _ = self.graph_service.unweight(g)
        f0 = self.form_service.transport_to_unweighting(g, form)
        forest, _ = self.graph_service.spanning_forest(g0)
        in_forest = set(forest)
        values: Dict[str, Fraction] = {}
        for component in self.graph_service.components(g0):
            values[component.vertices[0]] = Fraction(0)
            queue = deque([component.vertices[0]])
            while queue:
                vid = queue.popleft()
                for e, forward in g0.outgoing(vid):
                    if e.id not in in_forest:
                        continue
                    other = e.other_end(vid)
                    if other in values:
                        continue
                    mass = f0.coefficients[e.id].integrate_definite(0, e.length)
                    values[other] = values[vid] + mass if forward else values[vid] - mass
                    queue.append(other)

        coefficients = {}
        for e in g0.edges:
            f = f0.coefficients[e.id]
            coefficients[e.id] = f.antiderivative() + PiecewisePolynomial.constant(values[e.tail], e.length, f.order + 1)
        isolated = {vid: Fraction(0) for vid in g0.isolated_vertices()}
        eta0 = self.form_service.with_coefficients(f0, coefficients, bidegree=(0, 0), vertex_values=isolated)
        eta = self.form_service.transport_from_unweighting(g, eta0)
        logger.info("found d''-preimage of a (0,1)-form on %s", g.name)
        return DbarResult(bidegree=(0, 1), preimage=eta, obstruction=obstruction)

    # coordinates

    def class_coordinates(self, g: WeightedMetricGraph, basis: CohomologyBasis, form: GraphForm) -> List[Fraction]:
        """
        Coordinates of the class of a d''-closed form in the given basis.

        Args:
            g: Graph.
            basis: Basis from cohomology_basis(g).
            form: Valid form.

        Returns:
            Rational coordinates; for (0,1) and (1,1) the remainder is verified d''-exact.
        """
        self.form_service.require_valid(g, form)
        if form.bidegree == (0, 0):
            return self._closed_function_coordinates(g, form)
        if form.bidegree == (1, 0):
            return self._closed_holomorphic_coordinates(g, basis, form)
        if form.bidegree == (0, 1):
            coordinates = self.cycle_integrals(g, form, basis.cycles)
        else:
            by_component = {c.index: c for c in self.graph_service.components(g)}
            coordinates = [
                sum((g.edge(eid).weight * form.coefficients[eid].integrate_definite(0, g.edge(eid).length)
                     for eid in by_component[index].edges), Fraction(0))
                for index in basis.component_of_h11
            ]
        elements = basis.elements(form.bidegree)
        if elements:
            remainder = self.form_service.linear_combination(
                [form] + elements, [1] + [-c for c in coordinates]
            )
        else:
            remainder = form
        if not self.dbar_preimage(g, remainder).exact:
            raise MathematicalFailure(f"remainder of a {form.bidegree}-form on {g.name!r} is not d''-exact")
        return coordinates

    def _closed_function_coordinates(self, g: WeightedMetricGraph, form: GraphForm) -> List[Fraction]:
        coordinates = []
        for component in self.graph_service.components(g):
            values = {self.form_service.vertex_value(g, form, vid) for vid in component.vertices}
            if len(values) > 1 or any(not form.coefficients[eid].is_polynomial
                                      or form.coefficients[eid].first_piece.degree > 0 for eid in component.edges):
                raise PreconditionError(f"function on {g.name!r} is not locally constant, so not d''-closed")
            coordinates.append(values.pop())
        return coordinates

    def _closed_holomorphic_coordinates(
        self, g: WeightedMetricGraph, basis: CohomologyBasis, form: GraphForm
    ) -> List[Fraction]:
        def edge_constants(f: GraphForm) -> List[Fraction]:
            out = []
            for e in g.edges:
                c = f.coefficients[e.id]
                if not c.is_polynomial or c.first_piece.degree > 0:
                    raise PreconditionError(f"(1,0)-form on {g.name!r} is not constant on {e.id!r}, so not d''-closed")
                out.append(e.weight * c.evaluate(0))
            return out

        target = edge_constants(form)
        if not basis.h10:
            if any(target):
                raise MathematicalFailure(f"closed (1,0)-form on {g.name!r} lies outside the span of the basis")
            return []
        columns = [edge_constants(b) for b in basis.h10]
        rows = [[column[i] for column in columns] for i in range(len(g.edges))]
        coordinates = solve(rows, target, len(columns))
        if coordinates is None:
            raise MathematicalFailure(f"closed (1,0)-form on {g.name!r} lies outside the span of the basis")
        return coordinates

    # duality and functoriality

    def poincare_pairing(self, g: WeightedMetricGraph, basis: Optional[CohomologyBasis] = None) -> PoincarePairing:
        """
        Wedge-and-integrate pairings H^{0,0} x H^{1,1} and H^{1,0} x H^{0,1}.

        Args:
            g: Graph without boundary and without isolated vertices.
            basis: Basis of g; computed when omitted.

        Returns:
            Gram matrices and whether both pairings are perfect.
        """
        if g.boundary():
            logger.warning("pairing on %s not applicable: boundary is nonempty", g.name)
            return PoincarePairing(applicable=False, reason="boundary is nonempty")
        if g.isolated_vertices():
            logger.warning("pairing on %s not applicable: isolated vertices", g.name)
            return PoincarePairing(applicable=False, reason="graph has isolated vertices")
        basis = basis or self.cohomology_basis(g)
        fs = self.form_service
        scalar_gram = [[fs.integrate_graph(g, fs.wedge(a, b)) for b in basis.h11] for a in basis.h00]
        scalars = [scalar_gram[i][i] for i in range(min(len(basis.h00), len(basis.h11)))]
        gram = [[fs.integrate_graph(g, fs.wedge(a, b)) for b in basis.h01] for a in basis.h10]
        square = len(basis.h00) == len(basis.h11) and len(basis.h10) == len(basis.h01)
        det = determinant(gram)
        perfect = square and determinant(scalar_gram) != 0 and det != 0
        return PoincarePairing(
            applicable=True,
            scalars=scalars,
            scalar_gram=scalar_gram,
            gram=gram,
            determinant=det,
            perfect=perfect,
        )

    def cohomology_pullback(
        self,
        m: PLMap,
        source_basis: Optional[CohomologyBasis] = None,
        target_basis: Optional[CohomologyBasis] = None,
    ) -> PullbackMatrices:
        """
        Matrices of the pullback on every H^{p,q}.

        Args:
            m: Harmonic map.
            source_basis: Basis on m.source.
            target_basis: Basis on m.target.

        Returns:
            Per bidegree a (dim source) x (dim target) matrix whose column j holds the
            source coordinates of the pullback of target basis element j.
        """
        certificate = self.harmonic_service.require_harmonic(m)
        source_basis = source_basis or self.cohomology_basis(m.source)
        target_basis = target_basis or self.cohomology_basis(m.target)
        matrices, shapes = {}, {}
        for bidegree in BIDEGREES:
            columns = []
            for element in target_basis.elements(bidegree):
                pulled = self.harmonic_service.pullback_form(m, element, certificate=certificate)
                columns.append(self.class_coordinates(m.source, source_basis, pulled))
            n_rows = len(source_basis.elements(bidegree))
            key = bidegree_key(bidegree)
            matrices[key] = [[column[i] for column in columns] for i in range(n_rows)]
            shapes[key] = (n_rows, len(columns))
        return PullbackMatrices(map_name=m.name, matrices=matrices, shapes=shapes)
