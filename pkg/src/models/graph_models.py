from fractions import Fraction
from typing import Dict, List, Optional, Set, Tuple

from pydantic import BaseModel, PrivateAttr

from src.models.common import FROZEN, Rational
from src.utils.errors import ReferentialError


class Vertex(BaseModel):
    model_config = FROZEN

    id: str
    is_boundary: bool = False


class Edge(BaseModel):
    """Unoriented edge stored on its canonical orientation tail -> head."""
    model_config = FROZEN

    id: str
    tail: str
    head: str
    length: Rational
    weight: int = 1

    @property
    def unweighted_length(self) -> Fraction:
        return self.length / self.weight

    def other_end(self, vertex_id: str) -> str:
        return self.head if vertex_id == self.tail else self.tail


class WeightedMetricGraph(BaseModel):
    """Finite multigraph with rational lengths, integer weights and boundary vertices."""
    model_config = FROZEN

    name: str = "graph"
    vertices: Tuple[Vertex, ...]
    edges: Tuple[Edge, ...] = ()

    _vertex_index: Dict[str, Vertex] = PrivateAttr(default_factory=dict)
    _edge_index: Dict[str, Edge] = PrivateAttr(default_factory=dict)
    _incidence: Dict[str, List[Tuple[Edge, bool]]] = PrivateAttr(default_factory=dict)

    def _index(self) -> None:
        if self._vertex_index or not self.vertices:
            return
        self._vertex_index.update({v.id: v for v in self.vertices})
        self._edge_index.update({e.id: e for e in self.edges})
        incidence: Dict[str, List[Tuple[Edge, bool]]] = {v.id: [] for v in self.vertices}
        for e in self.edges:
            incidence.setdefault(e.tail, []).append((e, True))
            incidence.setdefault(e.head, []).append((e, False))
        self._incidence.update(incidence)

    @property
    def vertex_ids(self) -> List[str]:
        return [v.id for v in self.vertices]

    @property
    def edge_ids(self) -> List[str]:
        return [e.id for e in self.edges]

    def has_vertex(self, vertex_id: str) -> bool:
        self._index()
        return vertex_id in self._vertex_index

    def has_edge(self, edge_id: str) -> bool:
        self._index()
        return edge_id in self._edge_index

    def vertex(self, vertex_id: str) -> Vertex:
        self._index()
        try:
            return self._vertex_index[vertex_id]
        except KeyError:
            raise ReferentialError(f"unknown vertex {vertex_id!r} in graph {self.name!r}") from None

    def edge(self, edge_id: str) -> Edge:
        self._index()
        try:
            return self._edge_index[edge_id]
        except KeyError:
            raise ReferentialError(f"unknown edge {edge_id!r} in graph {self.name!r}") from None

    def boundary(self) -> Set[str]:
        return {v.id for v in self.vertices if v.is_boundary}

    def is_boundary(self, vertex_id: str) -> bool:
        return self.vertex(vertex_id).is_boundary

    def outgoing(self, vertex_id: str) -> List[Tuple[Edge, bool]]:
        """
        Edges at a vertex, oriented away from it.

        Args:
            vertex_id: Vertex id.

        Returns:
            (edge, True) when the vertex is the tail, (edge, False) when the
            outgoing orientation is the reverse of the stored one.
        """
        self.vertex(vertex_id)
        return list(self._incidence.get(vertex_id, []))

    def valence(self, vertex_id: str) -> int:
        return len(self.outgoing(vertex_id))

    def isolated_vertices(self) -> List[str]:
        return [v.id for v in self.vertices if not self.outgoing(v.id)]

    def same_as(self, other: "WeightedMetricGraph") -> bool:
        """Equality of the stored records, ignoring lookup caches."""
        return self.name == other.name and self.vertices == other.vertices and self.edges == other.edges


class ValidationReport(BaseModel):
    subject: str = ""
    violations: List[str] = []

    @property
    def valid(self) -> bool:
        return not self.violations


class EdgeSegment(BaseModel):
    """Sub-interval [start, end] of a target edge, in the target's canonical coordinate."""
    model_config = FROZEN

    edge: str
    start: Rational
    end: Rational
    reversed: bool = False


class InteriorPoint(BaseModel):
    model_config = FROZEN

    edge: str
    position: Rational


class GraphCorrespondence(BaseModel):
    """Identification of a subdivided, unweighted or local graph with its parent."""
    model_config = FROZEN

    source: str
    target: str
    vertex_map: Dict[str, str] = {}
    interior_points: Dict[str, InteriorPoint] = {}
    edge_map: Dict[str, EdgeSegment] = {}

    def segment(self, edge_id: str) -> EdgeSegment:
        try:
            return self.edge_map[edge_id]
        except KeyError:
            raise ReferentialError(f"edge {edge_id!r} has no parent segment in {self.target!r}") from None

    def parent_vertex(self, vertex_id: str) -> Optional[str]:
        return self.vertex_map.get(vertex_id)


class TreeAttachment(BaseModel):
    """A metric tree glued to a graph by identifying its root with a vertex."""
    model_config = FROZEN

    vertex: str
    tree: WeightedMetricGraph
    root: str


class GraphComponent(BaseModel):
    model_config = FROZEN

    index: int
    vertices: Tuple[str, ...]
    edges: Tuple[str, ...]
