"""Small named graphs, covers and symmetry groups used by tests, the corpus and the CLI examples."""
from math import gcd
from typing import List, Optional, Sequence

from src.models.graph_models import Edge, Vertex, WeightedMetricGraph
from src.models.map_models import EdgeImage, GroupAction, PLMap
from src.utils.polynomial import Scalar, as_fraction


def segment(length: Scalar = 1, weight: int = 1, boundary: bool = True, name: str = "segment") -> WeightedMetricGraph:
    """One edge a -> b; both ends are boundary unless boundary=False."""
    return WeightedMetricGraph(
        name=name,
        vertices=(Vertex(id="a", is_boundary=boundary), Vertex(id="b", is_boundary=boundary)),
        edges=(Edge(id="e", tail="a", head="b", length=as_fraction(length), weight=weight),),
    )


def cycle(n: int, lengths: Optional[Sequence[Scalar]] = None, weights: Optional[Sequence[int]] = None,
          name: Optional[str] = None) -> WeightedMetricGraph:
    """
    The n-cycle with vertices v0..v{n-1} and edges e_i: v_i -> v_{i+1}.

    Args:
        n: Number of edges, at least 2.
        lengths: Edge lengths, all 1 by default.
        weights: Edge weights, all 1 by default.
        name: Graph name, 'cycle{n}' by default.
    """
    if n < 2:
        raise ValueError("a cycle without loop edges needs at least two edges")
    lengths = [as_fraction(x) for x in (lengths or [1] * n)]
    weights = list(weights or [1] * n)
    return WeightedMetricGraph(
        name=name or f"cycle{n}",
        vertices=tuple(Vertex(id=f"v{i}") for i in range(n)),
        edges=tuple(
            Edge(id=f"e{i}", tail=f"v{i}", head=f"v{(i + 1) % n}", length=lengths[i], weight=weights[i])
            for i in range(n)
        ),
    )


def theta(lengths: Sequence[Scalar] = (1, 1, 1), weights: Sequence[int] = (1, 1, 1)) -> WeightedMetricGraph:
    """Two vertices joined by three edges: genus 2."""
    return WeightedMetricGraph(
        name="theta",
        vertices=(Vertex(id="a"), Vertex(id="b")),
        edges=tuple(
            Edge(id=f"e{i}", tail="a", head="b", length=as_fraction(x), weight=w)
            for i, (x, w) in enumerate(zip(lengths, weights))
        ),
    )


def star(n: int, lengths: Optional[Sequence[Scalar]] = None, weights: Optional[Sequence[int]] = None,
         boundary_leaves: bool = True) -> WeightedMetricGraph:
    """Centre c with n arms e_i: c -> l_i; the leaves are boundary unless boundary_leaves=False."""
    lengths = [as_fraction(x) for x in (lengths or [1] * n)]
    weights = list(weights or [1] * n)
    return WeightedMetricGraph(
        name=f"star{n}",
        vertices=(Vertex(id="c"),) + tuple(Vertex(id=f"l{i}", is_boundary=boundary_leaves) for i in range(n)),
        edges=tuple(
            Edge(id=f"e{i}", tail="c", head=f"l{i}", length=lengths[i], weight=weights[i]) for i in range(n)
        ),
    )


def path(n: int, lengths: Optional[Sequence[Scalar]] = None, boundary_ends: bool = True) -> WeightedMetricGraph:
    """Chain v0 - v1 - ... - v{n}, with boundary ends unless boundary_ends=False."""
    lengths = [as_fraction(x) for x in (lengths or [1] * n)]
    return WeightedMetricGraph(
        name=f"path{n}",
        vertices=tuple(Vertex(id=f"v{i}", is_boundary=boundary_ends and i in (0, n)) for i in range(n + 1)),
        edges=tuple(Edge(id=f"e{i}", tail=f"v{i}", head=f"v{i + 1}", length=lengths[i]) for i in range(n)),
    )


def cyclic_cover(n: int, degree: int, length: Scalar = 1) -> PLMap:
    """Degree-d wrapping of the (d*n)-cycle around the n-cycle."""
    source = cycle(n * degree, [length] * (n * degree), name=f"cycle{n * degree}")
    target = cycle(n, [length] * n, name=f"cycle{n}")
    return PLMap(
        name=f"cover{degree}:{target.name}",
        source=source,
        target=target,
        vertex_map={f"v{i}": f"v{i % n}" for i in range(n * degree)},
        edge_map={f"e{i}": EdgeImage(edge=f"e{i % n}") for i in range(n * degree)},
    )


def _cycle_size(g: WeightedMetricGraph) -> int:
    n = len(g.edges)
    if [v.id for v in g.vertices] != [f"v{i}" for i in range(n)]:
        raise ValueError(f"{g.name!r} is not laid out as a cycle built by cycle()")
    return n


def rotation(g: WeightedMetricGraph, k: int) -> PLMap:
    """v_i -> v_{i+k} on a graph built by cycle()."""
    n = _cycle_size(g)
    return PLMap(
        name=f"rot{k % n}",
        source=g,
        target=g,
        vertex_map={f"v{i}": f"v{(i + k) % n}" for i in range(n)},
        edge_map={f"e{i}": EdgeImage(edge=f"e{(i + k) % n}") for i in range(n)},
    )


def reflection(g: WeightedMetricGraph, k: int = 0) -> PLMap:
    """v_i -> v_{k-i}; e_i runs backwards along e_{k-i-1}."""
    n = _cycle_size(g)
    return PLMap(
        name=f"ref{k % n}",
        source=g,
        target=g,
        vertex_map={f"v{i}": f"v{(k - i) % n}" for i in range(n)},
        edge_map={f"e{i}": EdgeImage(edge=f"e{(k - i - 1) % n}", reversed=True) for i in range(n)},
    )


def rotation_group(g: WeightedMetricGraph, step: int = 1) -> GroupAction:
    """Cyclic group generated by the rotation by step."""
    n = _cycle_size(g)
    order = n // gcd(n, step)
    return GroupAction(graph=g, elements=tuple(rotation(g, step * j) for j in range(order)))


def flip_group(g: WeightedMetricGraph, k: int = 0) -> GroupAction:
    """Group of order two generated by one reflection."""
    return GroupAction(graph=g, elements=(rotation(g, 0), reflection(g, k)))


def dihedral_group(g: WeightedMetricGraph) -> GroupAction:
    n = _cycle_size(g)
    elements: List[PLMap] = [rotation(g, k) for k in range(n)] + [reflection(g, k) for k in range(n)]
    return GroupAction(graph=g, elements=tuple(elements))
