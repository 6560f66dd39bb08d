from fractions import Fraction

import pytest

from src.models.graph_models import Edge, TreeAttachment, Vertex, WeightedMetricGraph
from src.models.map_models import EdgeImage, PLMap
from src.models.tropical_models import GammaGroup
from src.utils import graph_builders
from src.utils.errors import IncompatibleMapsError, NotHarmonicError, PreconditionError
from src.utils.polynomial import Polynomial
from src.utils.random_corpus import random_form, random_graph, random_rational


@pytest.fixture
def cover():
    return graph_builders.cyclic_cover(3, 2)


@pytest.fixture
def lopsided_map():
    """Two arms of a tripod folded onto one edge, the third onto another."""
    source = graph_builders.star(3)
    target = graph_builders.path(2, boundary_ends=False)
    return PLMap(
        name="fold",
        source=source,
        target=target,
        vertex_map={"c": "v1", "l0": "v2", "l1": "v2", "l2": "v0"},
        edge_map={"e0": EdgeImage(edge="e1"), "e1": EdgeImage(edge="e1"), "e2": EdgeImage(edge="e0", reversed=True)},
    )


def _random_map(rng, balanced):
    """Random d-sheeted map onto a random graph; unbalanced maps get one stretched edge."""
    target = random_graph(rng, min_vertices=2, max_vertices=5, max_edges=6, boundary_probability=0.0, name="base")
    sheets = int(rng.integers(1, 4))
    vertices = tuple(
        Vertex(id=f"{vid}.{i}", is_boundary=bool(rng.random() < 0.2))
        for vid in target.vertex_ids
        for i in range(sheets)
    )
    edges, edge_map = [], {}
    for e in target.edges:
        for i, j in enumerate(rng.permutation(sheets)):
            tail, head = f"{e.tail}.{i}", f"{e.head}.{j}"
            flipped = bool(rng.random() < 0.5)
            if flipped:
                tail, head = head, tail
            eid = f"{e.id}.{i}"
            edges.append(Edge(id=eid, tail=tail, head=head, length=e.length, weight=e.weight))
            edge_map[eid] = EdgeImage(edge=e.id, reversed=flipped)
    if not balanced:
        k = int(rng.integers(0, len(edges)))
        edges[k] = edges[k].model_copy(update={"length": edges[k].length * (1 + random_rational(rng))})
    source = WeightedMetricGraph(name="sheets", vertices=vertices, edges=tuple(edges))
    return PLMap(
        name="sheets", source=source, target=target,
        vertex_map={v.id: v.id.rsplit(".", 1)[0] for v in vertices}, edge_map=edge_map,
    )


def _constant_form(form_service, g, bidegree, value=1):
    return form_service.from_polynomials(g, bidegree, {eid: Polynomial.constant(value) for eid in g.edge_ids})


class TestHarmonicFunctions:

    def test_space_dimensions(self, harmonic_service, boundary_segment, tripod, circle, theta):
        assert len(harmonic_service.harmonic_function_space(boundary_segment)) == 2
        assert len(harmonic_service.harmonic_function_space(tripod)) == 3
        assert len(harmonic_service.harmonic_function_space(circle)) == 1
        assert len(harmonic_service.harmonic_function_space(theta)) == 1

    def test_basis_vectors_are_harmonic(self, harmonic_service, form_service, tripod):
        for h in harmonic_service.harmonic_function_space(tripod):
            f = harmonic_service.harmonic_function_form(tripod, h.vertex_values)
            assert harmonic_service.is_harmonic_function(tripod, f).harmonic

    def test_harmonic_with_integral_slopes(self, harmonic_service, tripod):
        f = harmonic_service.harmonic_function_form(tripod, {"c": 0, "l0": 2, "l1": -1, "l2": -1})
        report = harmonic_service.is_harmonic_function(tripod, f, GammaGroup.integers())
        assert report.harmonic and report.integral_slopes and report.gamma_harmonic
        assert report.slopes == {"e0": 2, "e1": -1, "e2": -1}

    def test_fractional_slope_is_not_integral(self, harmonic_service, boundary_segment):
        f = harmonic_service.harmonic_function_form(boundary_segment, {"a": 0, "b": Fraction(1, 2)})
        report = harmonic_service.is_harmonic_function(boundary_segment, f, GammaGroup.integers())
        assert report.harmonic
        assert not report.integral_slopes
        assert report.gamma_harmonic is False

    def test_values_outside_gamma(self, harmonic_service, boundary_segment):
        f = harmonic_service.harmonic_function_form(boundary_segment, {"a": Fraction(1, 3), "b": Fraction(4, 3)})
        assert harmonic_service.is_harmonic_function(boundary_segment, f).integral_slopes
        assert not harmonic_service.is_harmonic_function(boundary_segment, f, GammaGroup.integers()).gamma_harmonic
        thirds = GammaGroup.generated_by([Fraction(1, 3)])
        assert harmonic_service.is_harmonic_function(boundary_segment, f, thirds).gamma_harmonic

    def test_curved_function_is_not_harmonic(self, harmonic_service, form_service, boundary_segment):
        f = form_service.from_polynomials(boundary_segment, (0, 0), {"e": Polynomial((0, 0, 1))})
        report = harmonic_service.is_harmonic_function(boundary_segment, f)
        assert not report.harmonic
        assert report.reasons == ["not linear on edge 'e'"]

    def test_only_functions(self, harmonic_service, form_service, boundary_segment):
        with pytest.raises(PreconditionError):
            harmonic_service.is_harmonic_function(boundary_segment, form_service.zero_form(boundary_segment, (1, 0)))


class TestMaps:

    def test_cyclic_cover_degrees(self, harmonic_service, cover):
        certificate = harmonic_service.harmonicity(cover)
        assert certificate.harmonic
        assert certificate.degree == 2
        assert set(certificate.local_degrees.values()) == {1}
        assert certificate.edge_degrees == {"e0": 2, "e1": 2, "e2": 2}

    def test_unbalanced_fold_is_not_harmonic(self, harmonic_service, lopsided_map):
        certificate = harmonic_service.harmonicity(lopsided_map)
        assert not certificate.harmonic
        assert certificate.failure.vertex == "c"
        assert sorted(certificate.failure.values) == [1, 2]
        with pytest.raises(NotHarmonicError):
            harmonic_service.require_harmonic(lopsided_map)

    def test_local_pullback_of_harmonic_germs(self, harmonic_service, cover, lopsided_map):
        assert harmonic_service.locally_pulls_back_harmonic(cover, "v0")
        assert not harmonic_service.locally_pulls_back_harmonic(lopsided_map, "c")
        assert harmonic_service.locally_pulls_back_harmonic(lopsided_map, "l0")

    @pytest.mark.slow
    def test_harmonic_iff_harmonic_germs_pull_back(self, harmonic_service, rng):
        seen = set()
        for k in range(60):
            m = _random_map(rng, balanced=k % 2 == 0)
            harmonic = harmonic_service.harmonicity(m).harmonic
            interior = [v.id for v in m.source.vertices if not v.is_boundary]
            assert harmonic == all(harmonic_service.locally_pulls_back_harmonic(m, vid) for vid in interior)
            seen.add(harmonic)
        assert seen == {True, False}

    def test_missing_images(self, harmonic_service, cover):
        broken = PLMap(
            name="broken", source=cover.source, target=cover.target,
            vertex_map={k: v for k, v in cover.vertex_map.items() if k != "v0"}, edge_map=cover.edge_map,
        )
        report = harmonic_service.validate_plmap(broken)
        assert not report.valid
        assert any("has no image" in v for v in report.violations)
        with pytest.raises(PreconditionError):
            harmonic_service.harmonicity(broken)

    def test_wrong_endpoints(self, harmonic_service, circle):
        flipped = PLMap(
            name="bad", source=circle, target=circle,
            vertex_map={"v0": "v0", "v1": "v1"},
            edge_map={"e0": EdgeImage(edge="e0", reversed=True), "e1": EdgeImage(edge="e1")},
        )
        assert not harmonic_service.validate_plmap(flipped).valid

    def test_interior_vertex_onto_boundary(self, harmonic_service, boundary_segment, closed_segment):
        m = PLMap(
            name="into-boundary", source=closed_segment, target=boundary_segment,
            vertex_map={"a": "a", "b": "b"}, edge_map={"e": EdgeImage(edge="e")},
        )
        report = harmonic_service.validate_plmap(m)
        assert any("onto boundary vertex" in v for v in report.violations)

    def test_isomorphisms(self, harmonic_service, weighted_circle, cover):
        assert harmonic_service.is_harmonic_isomorphism(harmonic_service.identity_map(weighted_circle))
        assert harmonic_service.is_harmonic_isomorphism(harmonic_service.unweighting_map(weighted_circle))
        assert not harmonic_service.is_harmonic_isomorphism(cover)

    def test_compose(self, harmonic_service, cover):
        rotate = graph_builders.rotation(cover.source, 1)
        composite = harmonic_service.compose(cover, rotate)
        assert composite.vertex_map["v0"] == "v1"
        assert composite.edge_map["e5"].edge == "e0"
        assert harmonic_service.harmonicity(composite).degree == 2

    def test_compose_reversals_cancel(self, harmonic_service, circle):
        flip = graph_builders.reflection(circle, 0)
        twice = harmonic_service.compose(flip, flip)
        assert all(not image.reversed for image in twice.edge_map.values())
        assert twice.vertex_map == {"v0": "v0", "v1": "v1"}

    def test_compose_needs_matching_middle(self, harmonic_service, cover, theta):
        with pytest.raises(IncompatibleMapsError):
            harmonic_service.compose(cover, harmonic_service.identity_map(theta))


class TestPullback:

    def test_pullback_multiplies_integrals_by_degree(self, harmonic_service, form_service, cover):
        form = _constant_form(form_service, cover.target, (1, 1))
        comparison = harmonic_service.integrate_pullback_check(cover, form)
        assert comparison.lhs == 6
        assert comparison.rhs == 6
        assert comparison.equal

    def test_pullback_is_valid(self, harmonic_service, form_service, cover):
        form = _constant_form(form_service, cover.target, (1, 0))
        pulled = harmonic_service.pullback_form(cover, form)
        assert pulled.graph == cover.source.name
        assert form_service.validate_form(cover.source, pulled).valid

    @pytest.mark.parametrize("bidegree", [(1, 1), (0, 1)])
    def test_unweighting_pullback_is_transport(self, harmonic_service, form_service, rng, weighted_circle, bidegree):
        form = random_form(rng, weighted_circle, bidegree)
        pulled = harmonic_service.pullback_form(harmonic_service.unweighting_map(weighted_circle), form)
        assert pulled.same_as(form_service.transport_to_unweighting(weighted_circle, form))

    def test_crushed_edges_pull_back_to_constants(self, harmonic_service, form_service, graph_service, circle):
        whisker = TreeAttachment(vertex="v0", tree=graph_builders.path(1), root="v0")
        modified, retraction = graph_service.modify(circle, [whisker])
        f = harmonic_service.harmonic_function_form(circle, {"v0": 3, "v1": 3})
        pulled = harmonic_service.pullback_form(retraction, f)
        assert pulled.coefficient("t0.e0").first_piece == Polynomial.constant(3)
        assert form_service.validate_form(modified, pulled).valid

    def test_pullback_refuses_non_harmonic_maps(self, harmonic_service, form_service, lopsided_map):
        form = form_service.zero_form(lopsided_map.target, (1, 1))
        with pytest.raises(NotHarmonicError):
            harmonic_service.pullback_form(lopsided_map, form)

    def test_pullback_many(self, harmonic_service, form_service, cover):
        forms = [_constant_form(form_service, cover.target, (1, 1), value) for value in (1, 2)]
        pulled = harmonic_service.pullback_many(cover, forms)
        assert [form_service.integrate_graph(cover.source, p) for p in pulled] == [6, 12]

    def test_pullback_along_inclusion_is_restriction(self, harmonic_service, graph_service, rng, theta):
        part = graph_service.subgraph(theta, ["e0"])
        inclusion = harmonic_service.inclusion_map(part, theta)
        assert harmonic_service.harmonicity(inclusion).harmonic
        form = random_form(rng, theta, (0, 1))
        pulled = harmonic_service.pullback_form(inclusion, form)
        assert pulled.coefficient("e0") == form.coefficient("e0")

    def test_forms_on_an_unsubdivided_target(self, harmonic_service, graph_service, form_service, circle):
        sub, correspondence = graph_service.subdivide(circle, [("e0", Fraction(1, 2))])
        m = harmonic_service.target_subdivision(harmonic_service.identity_map(sub), circle, correspondence)
        form = _constant_form(form_service, circle, (1, 1))
        pulled = harmonic_service.pullback_form(m, form, target_parent=circle)
        assert form_service.integrate_graph(sub, pulled) == 2
        with pytest.raises(PreconditionError):
            harmonic_service.pullback_form(m, form)
