from fractions import Fraction

import pytest

from src.models.form_models import BIDEGREES
from src.models.graph_models import Edge, Vertex, WeightedMetricGraph
from src.utils import graph_builders
from src.utils.errors import PreconditionError
from src.utils.polynomial import Polynomial, make_bump
from src.utils.random_corpus import random_boundaryless_graph, random_form, random_graph

X = Polynomial.identity()


def _rank(rows):
    """Row reduction over the rationals, kept apart from the sympy-backed solver."""
    rows = [list(row) for row in rows]
    rank = 0
    for col in range(len(rows[0]) if rows else 0):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][col]:
                factor = rows[r][col] / rows[rank][col]
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
    return rank


@pytest.fixture
def segment_and_point():
    return WeightedMetricGraph(
        name="segment+point",
        vertices=(Vertex(id="a"), Vertex(id="b"), Vertex(id="z")),
        edges=(Edge(id="e", tail="a", head="b", length=1),),
    )


class TestDimensions:

    @pytest.mark.parametrize("builder, expected", [
        (graph_builders.theta, (1, 2, 2, 1)),
        (lambda: graph_builders.cycle(2), (1, 1, 1, 1)),
        (lambda: graph_builders.segment(1), (1, 1, 0, 0)),
        (lambda: graph_builders.segment(1, boundary=False), (1, 0, 0, 1)),
        (lambda: graph_builders.star(3), (1, 2, 0, 0)),
        (lambda: graph_builders.cycle(3, [1, Fraction(1, 2), 2], [1, 2, 3]), (1, 1, 1, 1)),
    ])
    def test_golden_tables(self, cohomology_service, builder, expected):
        table = cohomology_service.dolbeault_dimensions(builder())
        assert table.total == expected
        assert table.matches_closed_form

    def test_components_are_counted_separately(self, cohomology_service, segment_and_point):
        table = cohomology_service.dolbeault_dimensions(segment_and_point)
        assert [c.as_tuple() for c in table.components] == [(1, 0, 0, 1), (1, 0, 0, 0)]
        assert table.total == (2, 0, 0, 1)
        assert table.dimension((1, 1)) == 1

    @pytest.mark.slow
    def test_random_graphs_match_genus_formula(self, cohomology_service, graph_service, rng):
        for _ in range(200):
            g = random_graph(rng, boundary_probability=0.4)
            table = cohomology_service.dolbeault_dimensions(g)
            assert table.matches_closed_form
            assert table.total[0] == 1
            [(_, genus)] = graph_service.genus(g)
            assert genus == len(g.edges) - _rank(graph_service.incidence_matrix(g))

    def test_weights_do_not_change_dimensions(self, cohomology_service, theta):
        heavy = graph_builders.theta(lengths=(1, 2, 3), weights=(5, 1, 2))
        assert cohomology_service.dolbeault_dimensions(heavy).total == cohomology_service.dolbeault_dimensions(theta).total


class TestBasis:

    def test_fundamental_cycles_of_theta(self, cohomology_service, theta):
        cycles = cohomology_service.fundamental_cycles(theta)
        assert [c.edge for c in cycles] == ["e1", "e2"]
        assert cycles[0].base_vertex == "a"
        assert cycles[0].steps == [("e1", True), ("e0", False)]

    @pytest.mark.parametrize("name", ["theta", "circle", "weighted_circle", "tripod", "closed_segment"])
    def test_basis_sizes_and_validity(self, cohomology_service, form_service, request, name):
        g = request.getfixturevalue(name)
        basis = cohomology_service.cohomology_basis(g)
        table = cohomology_service.dolbeault_dimensions(g)
        for bidegree in BIDEGREES:
            elements = basis.elements(bidegree)
            assert len(elements) == table.dimension(bidegree)
            for form in elements:
                assert form_service.validate_form(g, form).valid

    def test_cycle_coordinates_of_basis(self, cohomology_service, theta, weighted_circle):
        for g in (theta, weighted_circle):
            basis = cohomology_service.cohomology_basis(g)
            for i, form in enumerate(basis.h01):
                expected = [Fraction(int(i == j)) for j in range(len(basis.h01))]
                assert cohomology_service.class_coordinates(g, basis, form) == expected

    def test_top_class_has_unit_weighted_integral(self, cohomology_service, form_service, weighted_circle):
        basis = cohomology_service.cohomology_basis(weighted_circle)
        assert form_service.integrate_graph(weighted_circle, basis.h11[0]) == 1
        doubled = form_service.scale(basis.h11[0], 2)
        assert cohomology_service.class_coordinates(weighted_circle, basis, doubled) == [2]

    def test_holomorphic_coordinates(self, cohomology_service, theta):
        basis = cohomology_service.cohomology_basis(theta)
        for i, form in enumerate(basis.h10):
            assert cohomology_service.class_coordinates(theta, basis, form) == [int(i == j) for j in range(2)]

    def test_function_coordinates(self, cohomology_service, form_service, theta):
        basis = cohomology_service.cohomology_basis(theta)
        five = form_service.constant_function(theta, 5)
        assert cohomology_service.class_coordinates(theta, basis, five) == [5]

    def test_nonconstant_function_is_not_closed(self, cohomology_service, form_service, boundary_segment):
        basis = cohomology_service.cohomology_basis(boundary_segment)
        f = form_service.from_polynomials(boundary_segment, (0, 0), {"e": X})
        with pytest.raises(PreconditionError):
            cohomology_service.class_coordinates(boundary_segment, basis, f)


class TestDbar:

    def test_top_forms_on_a_segment_with_boundary_are_exact(self, cohomology_service, form_service, boundary_segment):
        form = form_service.from_polynomials(boundary_segment, (1, 1), {"e": Polynomial.constant(1)})
        result = cohomology_service.dbar_preimage(boundary_segment, form)
        assert result.exact
        assert result.preimage.bidegree == (1, 0)
        assert form_service.d_second(result.preimage).same_as(form)

    def test_top_bump_on_closed_segment_is_obstructed(self, cohomology_service, closed_segment):
        bump = cohomology_service.cohomology_basis(closed_segment).h11[0]
        result = cohomology_service.dbar_preimage(closed_segment, bump)
        assert not result.exact
        assert result.obstruction == [1]

    def test_balanced_bumps_are_exact(self, cohomology_service, form_service, closed_segment):
        left = make_bump(1, Fraction(1, 8), Fraction(3, 8), 3, 1)
        right = make_bump(1, Fraction(5, 8), Fraction(7, 8), 3, 1)
        form = form_service.with_coefficients(form_service.zero_form(closed_segment, (1, 1)), {"e": left - right})
        result = cohomology_service.dbar_preimage(closed_segment, form)
        assert result.exact
        assert form_service.validate_form(closed_segment, result.preimage).valid
        assert form_service.d_second(result.preimage).same_as(form)

    def test_antiholomorphic_preimage(self, cohomology_service, form_service, boundary_segment):
        form = form_service.from_polynomials(boundary_segment, (0, 1), {"e": X})
        result = cohomology_service.dbar_preimage(boundary_segment, form)
        assert result.preimage.bidegree == (0, 0)
        assert form_service.d_second(result.preimage).same_as(form)

    def test_cycle_integral_obstructs(self, cohomology_service, form_service, circle):
        form = form_service.from_polynomials(circle, (0, 1), {"e0": Polynomial.constant(1), "e1": Polynomial.constant(1)})
        result = cohomology_service.dbar_preimage(circle, form)
        assert not result.exact
        assert result.obstruction == [2]

    @pytest.mark.parametrize("bidegree", [(1, 1), (0, 1)])
    def test_d_double_prime_of_anything_is_exact(self, cohomology_service, form_service, rng, bidegree):
        for _ in range(4):
            g = random_boundaryless_graph(rng, max_vertices=4, max_edges=6)
            source = random_form(rng, g, (1, 0) if bidegree == (1, 1) else (0, 0))
            image = form_service.d_second(source)
            result = cohomology_service.dbar_preimage(g, image)
            assert result.exact
            assert form_service.d_second(result.preimage).same_as(image)

    def test_functions_have_no_preimage(self, cohomology_service, form_service, boundary_segment):
        with pytest.raises(PreconditionError):
            cohomology_service.dbar_preimage(boundary_segment, form_service.constant_function(boundary_segment, 1))


class TestPairing:

    @pytest.mark.parametrize("name", ["theta", "circle", "weighted_circle", "closed_segment"])
    def test_perfect_without_boundary(self, cohomology_service, request, name):
        pairing = cohomology_service.poincare_pairing(request.getfixturevalue(name))
        assert pairing.applicable
        assert pairing.perfect
        assert pairing.scalars == [1]

    def test_circle_gram(self, cohomology_service, circle):
        pairing = cohomology_service.poincare_pairing(circle)
        assert pairing.gram == [[1]]
        assert pairing.determinant == 1

    def test_not_applicable_with_boundary(self, cohomology_service, boundary_segment):
        pairing = cohomology_service.poincare_pairing(boundary_segment)
        assert not pairing.applicable
        assert pairing.reason == "boundary is nonempty"

    def test_not_applicable_with_isolated_vertices(self, cohomology_service, segment_and_point):
        assert cohomology_service.poincare_pairing(segment_and_point).reason == "graph has isolated vertices"


class TestPullbackMatrices:

    def test_cover_multiplies_top_and_cycle_classes(self, cohomology_service):
        cover = graph_builders.cyclic_cover(3, 2)
        matrices = cohomology_service.cohomology_pullback(cover)
        assert matrices.matrix((0, 0)) == [[1]]
        assert matrices.matrix((1, 0)) == [[1]]
        assert matrices.matrix((0, 1)) == [[2]]
        assert matrices.matrix((1, 1)) == [[2]]
        assert set(matrices.shapes.values()) == {(1, 1)}

    @pytest.mark.parametrize("make_symmetry", [lambda g: graph_builders.rotation(g, 1),
                                               lambda g: graph_builders.reflection(g, 0)])
    def test_pullback_of_composite_is_product(self, cohomology_service, harmonic_service, make_symmetry):
        cover = graph_builders.cyclic_cover(3, 2)
        symmetry = make_symmetry(cover.source)
        composite = cohomology_service.cohomology_pullback(harmonic_service.compose(cover, symmetry))
        outer = cohomology_service.cohomology_pullback(cover)
        inner = cohomology_service.cohomology_pullback(symmetry)
        for bidegree in BIDEGREES:
            assert composite.matrix(bidegree) == _product(inner.matrix(bidegree), outer.matrix(bidegree))

    def test_reflection_negates_one_forms(self, cohomology_service, circle):
        matrices = cohomology_service.cohomology_pullback(graph_builders.reflection(circle, 0))
        assert [matrices.matrix(b) for b in BIDEGREES] == [[[1]], [[-1]], [[-1]], [[1]]]


def _product(a, b):
    return [[sum((a[i][k] * b[k][j] for k in range(len(b))), Fraction(0)) for j in range(len(b[0]))] for i in range(len(a))]
