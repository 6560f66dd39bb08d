from fractions import Fraction

import pytest

from src.models.graph_models import Edge, TreeAttachment, Vertex, WeightedMetricGraph
from src.utils import graph_builders
from src.utils.errors import PreconditionError, ReferentialError
from src.utils.random_corpus import random_graph


def _graph(edges, vertices=("a", "b")):
    return WeightedMetricGraph(
        name="g",
        vertices=tuple(Vertex(id=v) for v in vertices),
        edges=tuple(Edge(id=eid, tail=t, head=h, length=length, weight=w) for eid, t, h, length, w in edges),
    )


class TestValidation:

    def test_golden_graphs_are_valid(self, graph_service, boundary_segment, circle, theta, tripod, weighted_circle):
        for g in (boundary_segment, circle, theta, tripod, weighted_circle):
            assert graph_service.validate_graph(g).valid

    @pytest.mark.parametrize("edges, vertices, fragment", [
        ([("e", "a", "a", 1, 1)], ("a",), "loop edge"),
        ([("e", "a", "b", 0, 1)], ("a", "b"), "nonpositive length"),
        ([("e", "a", "b", -1, 1)], ("a", "b"), "nonpositive length"),
        ([("e", "a", "b", 1, 0)], ("a", "b"), "nonpositive weight"),
        ([("e", "a", "b", 1, 1), ("e", "b", "a", 1, 1)], ("a", "b"), "duplicate edge"),
        ([("e", "a", "c", 1, 1)], ("a", "b"), "unknown vertex"),
        ([], ("a", "a"), "duplicate vertex"),
    ])
    def test_violations(self, graph_service, edges, vertices, fragment):
        report = graph_service.validate_graph(_graph(edges, vertices))
        assert not report.valid
        assert any(fragment in v for v in report.violations)

    def test_require_valid_raises(self, graph_service):
        with pytest.raises(PreconditionError):
            graph_service.require_valid(_graph([("e", "a", "a", 1, 1)], ("a",)))

    def test_unknown_lookup(self, theta):
        with pytest.raises(ReferentialError):
            theta.edge("nope")
        with pytest.raises(ReferentialError):
            theta.vertex("nope")

    def test_random_graphs_are_valid_and_connected(self, graph_service, rng):
        for _ in range(20):
            g = random_graph(rng)
            assert graph_service.validate_graph(g).valid
            assert len(graph_service.components(g)) == 1


class TestStructure:

    def test_outgoing_orientation(self, tripod):
        outgoing = tripod.outgoing("c")
        assert [(e.id, forward) for e, forward in outgoing] == [("e0", True), ("e1", True), ("e2", True)]
        assert [(e.id, forward) for e, forward in tripod.outgoing("l1")] == [("e1", False)]

    def test_genus(self, graph_service, theta, circle, tripod):
        assert graph_service.genus(theta) == [(0, 2)]
        assert graph_service.genus(circle) == [(0, 1)]
        assert graph_service.genus(tripod) == [(0, 0)]

    def test_components_in_storage_order(self, graph_service):
        g = _graph([("e", "c", "d", 1, 1)], ("a", "c", "d"))
        components = graph_service.components(g)
        assert [c.vertices for c in components] == [("a",), ("c", "d")]
        assert components[1].edges == ("e",)

    def test_spanning_forest_prefers_low_indices(self, graph_service, theta):
        forest, rest = graph_service.spanning_forest(theta)
        assert forest == ["e0"]
        assert rest == ["e1", "e2"]

    def test_incidence_matrix(self, graph_service, boundary_segment):
        assert graph_service.incidence_matrix(boundary_segment) == [[-1], [1]]


class TestUnweightAndSubdivide:

    def test_unweight(self, graph_service, weighted_circle):
        g0, corr = graph_service.unweight(weighted_circle)
        assert [e.weight for e in g0.edges] == [1, 1, 1]
        assert [e.length for e in g0.edges] == [1, Fraction(1, 4), Fraction(2, 3)]
        assert g0.name == "wcycle.unweighted"
        assert corr.vertex_map == {vid: vid for vid in weighted_circle.vertex_ids}

    def test_subdivide_inserts_interior_vertices(self, graph_service, boundary_segment):
        sub, corr = graph_service.subdivide(boundary_segment, [("e", Fraction(1, 3)), ("e", Fraction(1, 2))])
        assert sub.edge_ids == ["e.0", "e.1", "e.2"]
        assert [e.length for e in sub.edges] == [Fraction(1, 3), Fraction(1, 6), Fraction(1, 2)]
        assert not sub.is_boundary("e@1")
        assert corr.interior_points["e@2"].position == Fraction(1, 2)
        assert corr.segment("e.1").start == Fraction(1, 3)

    def test_subdivide_keeps_weights(self, graph_service, weighted_circle):
        sub, _ = graph_service.subdivide(weighted_circle, [("e2", 1)])
        assert sub.edge("e2.0").weight == 3

    @pytest.mark.parametrize("position", [0, 1, Fraction(3, 2)])
    def test_subdivide_rejects_endpoints(self, graph_service, boundary_segment, position):
        with pytest.raises(PreconditionError):
            graph_service.subdivide(boundary_segment, [("e", position)])

    def test_subdivide_nothing_is_identity(self, graph_service, theta):
        sub, corr = graph_service.subdivide(theta, [])
        assert sub.same_as(theta)
        assert corr.segment("e1").end == 1


class TestSubgraphAndModify:

    def test_subgraph_boundary_includes_cut_vertices(self, graph_service, theta):
        part = graph_service.subgraph(theta, ["e0"])
        assert part.boundary() == {"a", "b"}
        assert part.edge_ids == ["e0"]

    def test_modification_retracts_harmonically(self, graph_service, harmonic_service, circle):
        tree = graph_builders.path(2)
        modified, retraction = graph_service.modify(circle, [TreeAttachment(vertex="v0", tree=tree, root="v0")])
        assert len(modified.edges) == len(circle.edges) + 2
        assert retraction.edge_map["t0.e0"].crushed
        assert harmonic_service.harmonicity(retraction).harmonic

    def test_modify_rejects_non_trees(self, graph_service, circle):
        with pytest.raises(PreconditionError):
            graph_service.modify(circle, [TreeAttachment(vertex="v0", tree=graph_builders.cycle(2), root="v0")])
