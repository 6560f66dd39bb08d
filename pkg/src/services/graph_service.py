"""Structural operations on weighted metric graphs with boundary."""
import logging
from collections import Counter
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence, Tuple

import networkx as nx

from src.models.graph_models import (
    Edge,
    EdgeSegment,
    GraphComponent,
    GraphCorrespondence,
    InteriorPoint,
    TreeAttachment,
    ValidationReport,
    Vertex,
    WeightedMetricGraph,
)
from src.models.map_models import EdgeImage, PLMap
from src.utils.errors import PreconditionError
from src.utils.polynomial import Scalar, as_fraction

logger = logging.getLogger(__name__)


class GraphService:
    """Validation, subdivision, unweighting, subgraphs, modifications and incidence data."""

    def validate_graph(self, g: WeightedMetricGraph) -> ValidationReport:
        """
        List every violated graph invariant.

        Args:
            g: Candidate graph.

        Returns:
            Report whose violations are empty iff g is valid.
        """
        problems: List[str] = []
        for vid, count in Counter(g.vertex_ids).items():
            if count > 1:
                problems.append(f"duplicate vertex id {vid!r}")
        for eid, count in Counter(g.edge_ids).items():
            if count > 1:
                problems.append(f"duplicate edge id {eid!r}")
        known = set(g.vertex_ids)
        for e in g.edges:
            for end in (e.tail, e.head):
                if end not in known:
                    problems.append(f"edge {e.id!r} references unknown vertex {end!r}")
            if e.tail == e.head:
                problems.append(f"loop edge {e.id!r} at vertex {e.tail!r}")
            if e.length <= 0:
                problems.append(f"nonpositive length {e.length} on edge {e.id!r}")
            if e.weight < 1:
                problems.append(f"nonpositive weight {e.weight} on edge {e.id!r}")
        return ValidationReport(subject=g.name, violations=problems)

    def to_networkx(self, g: WeightedMetricGraph) -> nx.MultiGraph:
        """Underlying multigraph; edge keys are edge ids, 'order' is the storage index."""
        graph = nx.MultiGraph()
        graph.add_nodes_from(g.vertex_ids)
        for index, e in enumerate(g.edges):
            graph.add_edge(e.tail, e.head, key=e.id, order=index)
        return graph

    def components(self, g: WeightedMetricGraph) -> List[GraphComponent]:
        """Connected components ordered by their first vertex in storage order."""
        position = {vid: i for i, vid in enumerate(g.vertex_ids)}
        groups = sorted(
            (sorted(c, key=position.__getitem__) for c in nx.connected_components(self.to_networkx(g))),
            key=lambda vs: position[vs[0]],
        )
        owner = {vid: i for i, vs in enumerate(groups) for vid in vs}
        edges: Dict[int, List[str]] = {i: [] for i in range(len(groups))}
        for e in g.edges:
            edges[owner[e.tail]].append(e.id)
        return [GraphComponent(index=i, vertices=tuple(vs), edges=tuple(edges[i])) for i, vs in enumerate(groups)]

    def spanning_forest(self, g: WeightedMetricGraph) -> Tuple[List[str], List[str]]:
        """
        Kruskal spanning forest growing from the lowest edge index.

        Returns:
            (forest edge ids, remaining edge ids), both in storage order.
        """
        chosen = {
            key for _, _, key in nx.minimum_spanning_edges(
                self.to_networkx(g), algorithm="kruskal", weight="order", keys=True, data=False
            )
        }
        forest = [eid for eid in g.edge_ids if eid in chosen]
        rest = [eid for eid in g.edge_ids if eid not in chosen]
        return forest, rest

    def genus(self, g: WeightedMetricGraph) -> List[Tuple[int, int]]:
        """Per component: #edges - #vertices + 1."""
        return [(c.index, len(c.edges) - len(c.vertices) + 1) for c in self.components(g)]

    def incidence_matrix(self, g: WeightedMetricGraph) -> List[List[Fraction]]:
        """
        Oriented incidence matrix: column e is (head) - (tail).

        Returns:
            Rows indexed by vertices, columns by edges, in storage order.
        """
        row = {vid: i for i, vid in enumerate(g.vertex_ids)}
        matrix = [[Fraction(0)] * len(g.edges) for _ in g.vertices]
        for j, e in enumerate(g.edges):
            matrix[row[e.tail]][j] -= 1
            matrix[row[e.head]][j] += 1
        return matrix

    def unweight(self, g: WeightedMetricGraph) -> Tuple[WeightedMetricGraph, GraphCorrespondence]:
        """
        Unweighting: same combinatorics, weights 1, lengths length/weight.

        Returns:
            The unweighted graph and the identity correspondence onto g.
        """
        g0 = WeightedMetricGraph(
            name=f"{g.name}.unweighted",
            vertices=g.vertices,
            edges=tuple(
                Edge(id=e.id, tail=e.tail, head=e.head, length=e.unweighted_length, weight=1) for e in g.edges
            ),
        )
        corr = GraphCorrespondence(
            source=g0.name,
            target=g.name,
            vertex_map={vid: vid for vid in g.vertex_ids},
            edge_map={e.id: EdgeSegment(edge=e.id, start=0, end=e.length) for e in g.edges},
        )
        return g0, corr

    def subdivide(
        self, g: WeightedMetricGraph, points: Sequence[Tuple[str, Scalar]]
    ) -> Tuple[WeightedMetricGraph, GraphCorrespondence]:
        """
        Insert new non-boundary vertices at interior points of edges.

        Args:
            g: Graph to subdivide.
            points: (edge id, position) pairs with 0 < position < length.

        Returns:
            The subdivided graph and the correspondence recording the tiling.
        """
        cuts: Dict[str, List[Fraction]] = {}
        for edge_id, position in points:
            e = g.edge(edge_id)
            position = as_fraction(position)
            if not 0 < position < e.length:
                raise PreconditionError(f"position {position} is not inside edge {edge_id!r} of length {e.length}")
            if position in cuts.setdefault(edge_id, []):
                raise PreconditionError(f"position {position} listed twice on edge {edge_id!r}")
            cuts[edge_id].append(position)

        if not cuts:
            return g, self._identity_correspondence(g, g.name)

        vertices = list(g.vertices)
        edges: List[Edge] = []
        edge_map: Dict[str, EdgeSegment] = {}
        interior: Dict[str, InteriorPoint] = {}
        for e in g.edges:
            marks = sorted(cuts.get(e.id, []))
            if not marks:
                edges.append(e)
                edge_map[e.id] = EdgeSegment(edge=e.id, start=0, end=e.length)
                continue
            new_ids = [f"{e.id}@{i}" for i in range(1, len(marks) + 1)]
            for vid, mark in zip(new_ids, marks):
                vertices.append(Vertex(id=vid))
                interior[vid] = InteriorPoint(edge=e.id, position=mark)
            ends = [e.tail] + new_ids + [e.head]
            stops = [Fraction(0)] + marks + [e.length]
            for i in range(len(stops) - 1):
                sub_id = f"{e.id}.{i}"
                edges.append(Edge(id=sub_id, tail=ends[i], head=ends[i + 1], length=stops[i + 1] - stops[i], weight=e.weight))
                edge_map[sub_id] = EdgeSegment(edge=e.id, start=stops[i], end=stops[i + 1])

        sub = WeightedMetricGraph(name=f"{g.name}.sub", vertices=tuple(vertices), edges=tuple(edges))
        logger.debug("subdivided %s at %d points into %d edges", g.name, len(points), len(edges))
        return sub, GraphCorrespondence(
            source=sub.name,
            target=g.name,
            vertex_map={vid: vid for vid in g.vertex_ids},
            interior_points=interior,
            edge_map=edge_map,
        )

    def subgraph(
        self, g: WeightedMetricGraph, edge_ids: Iterable[str], extra_vertex_ids: Iterable[str] = ()
    ) -> WeightedMetricGraph:
        """
        Union of closed edges and extra vertices, with its induced boundary.

        Args:
            g: Ambient graph.
            edge_ids: Edges to keep (their endpoints are kept too).
            extra_vertex_ids: Further vertices to keep.

        Returns:
            Subgraph whose boundary is its part of the boundary of g plus the
            vertices touching edges of g that were left out.
        """
        kept_edges = [g.edge(eid) for eid in edge_ids]
        keep = {e.id for e in kept_edges}
        vids = {v for e in kept_edges for v in (e.tail, e.head)}
        for vid in extra_vertex_ids:
            g.vertex(vid)
            vids.add(vid)
        vertices = []
        for v in g.vertices:
            if v.id not in vids:
                continue
            cut = any(e.id not in keep for e, _ in g.outgoing(v.id))
            vertices.append(Vertex(id=v.id, is_boundary=v.is_boundary or cut))
        return WeightedMetricGraph(
            name=f"{g.name}.part",
            vertices=tuple(vertices),
            edges=tuple(e for e in g.edges if e.id in keep),
        )

    def modify(
        self, g: WeightedMetricGraph, trees: Sequence[TreeAttachment]
    ) -> Tuple[WeightedMetricGraph, PLMap]:
        """
        Attach metric trees at vertices and return the retraction onto g.

        Args:
            g: Graph to modify.
            trees: Trees with their root and the vertex of g the root is glued to.

        Returns:
            The modification and the harmonic retraction crushing each tree.
        """
        vertices = list(g.vertices)
        edges = list(g.edges)
        vertex_map = {vid: vid for vid in g.vertex_ids}
        edge_map = {eid: EdgeImage(edge=eid) for eid in g.edge_ids}
        for i, attachment in enumerate(trees):
            g.vertex(attachment.vertex)
            tree = attachment.tree
            tree.vertex(attachment.root)
            if not nx.is_tree(self.to_networkx(tree)):
                raise PreconditionError(f"attached graph {tree.name!r} is not a tree")
            prefix = f"t{i}."
            rename = {
                vid: attachment.vertex if vid == attachment.root else prefix + vid for vid in tree.vertex_ids
            }
            for vid in tree.vertex_ids:
                if vid == attachment.root:
                    continue
                vertices.append(Vertex(id=rename[vid]))
                vertex_map[rename[vid]] = attachment.vertex
            for e in tree.edges:
                eid = prefix + e.id
                edges.append(Edge(id=eid, tail=rename[e.tail], head=rename[e.head], length=e.length, weight=e.weight))
                edge_map[eid] = EdgeImage(vertex=attachment.vertex)

        modified = WeightedMetricGraph(name=f"{g.name}.mod" if trees else g.name, vertices=tuple(vertices), edges=tuple(edges))
        retraction = PLMap(
            name=f"retract:{modified.name}",
            source=modified,
            target=g,
            vertex_map=vertex_map,
            edge_map=edge_map,
        )
        logger.debug("attached %d trees to %s", len(trees), g.name)
        return modified, retraction

    def _identity_correspondence(self, g: WeightedMetricGraph, source_name: str) -> GraphCorrespondence:
        return GraphCorrespondence(
            source=source_name,
            target=g.name,
            vertex_map={vid: vid for vid in g.vertex_ids},
            edge_map={e.id: EdgeSegment(edge=e.id, start=0, end=e.length) for e in g.edges},
        )

    def require_valid(self, g: WeightedMetricGraph) -> None:
        """Raise when g violates a graph invariant."""
        report = self.validate_graph(g)
        if not report.valid:
            raise PreconditionError(f"invalid graph {g.name!r}: {'; '.join(report.violations)}")
