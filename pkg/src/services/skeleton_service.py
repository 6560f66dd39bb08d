"""Weighted metric graphs and cohomology tables from semistable reduction data."""
import logging
from typing import Optional

from src.models.graph_models import Edge, Vertex, WeightedMetricGraph
from src.models.skeleton_models import CurveCohomologyTable, SkeletonDescription
from src.services.cohomology_service import CohomologyService

logger = logging.getLogger(__name__)


class SkeletonService:
    """Incidence graph of the special fibre and the Dolbeault table it determines."""

    def __init__(self, order: Optional[int] = None, cohomology_service: Optional[CohomologyService] = None) -> None:
        self.cohomology_service = cohomology_service or CohomologyService(order)

    def skeleton_to_graph(self, d: SkeletonDescription) -> WeightedMetricGraph:
        """
        One vertex per component, one edge per singular point.

        Args:
            d: Skeleton description.

        Returns:
            Graph with length = modulus valuation, weight = residue degree and
            boundary = non-proper components.
        """
        vertices = tuple(Vertex(id=c.id, is_boundary=not c.proper) for c in d.components)
        edges = tuple(
            Edge(id=p.id, tail=p.first, head=p.second, length=p.modulus_valuation, weight=p.residue_degree)
            for p in d.singular_points
        )
        g = WeightedMetricGraph(name=d.name, vertices=vertices, edges=edges)
        self.cohomology_service.graph_service.require_valid(g)
        logger.debug("skeleton %s: %d vertices, %d edges", d.name, len(vertices), len(edges))
        return g

    def curve_cohomology(self, d: SkeletonDescription) -> CurveCohomologyTable:
        """Per-component Dolbeault numbers of the skeleton graph, with genus and boundary size."""
        g = self.skeleton_to_graph(d)
        table = self.cohomology_service.dolbeault_dimensions(g)
        if not table.matches_closed_form:
            logger.warning("dimension table of %s differs from the genus/boundary prediction", d.name)
        return CurveCohomologyTable(
            skeleton=d.name,
            graph=g,
            table=table,
            genus=[c.genus for c in table.components],
            boundary_count=[c.boundary_count for c in table.components],
        )
