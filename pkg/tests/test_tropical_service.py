from fractions import Fraction

import pytest
from sympy import Integer, Piecewise, expand

from src.models.tropical_models import GammaGroup, LagerbergPolyForm, TropCycle, TropSegment, coordinate_symbols
from src.utils import graph_builders
from src.utils.errors import PreconditionError, ReferentialError, TropicalizationError
from src.utils.polynomial import Polynomial
from src.utils.random_corpus import random_graph, random_lagerberg, random_tropicalization

F = Fraction
(x1,) = coordinate_symbols(1)
y1, y2 = coordinate_symbols(2)


@pytest.fixture
def unit_trop(tropical_service, boundary_segment):
    """The segment mapped onto [0, 1] with slope one."""
    return tropical_service.tropicalization_from_values(boundary_segment, [{"a": 0, "b": 1}])


@pytest.fixture
def tripod_trop(tropical_service, tripod):
    """Standard tropical line: arms along e1, e2 and -(e1 + e2)."""
    return tropical_service.tropicalization_from_values(
        tripod, [{"c": 0, "l0": 1, "l1": 0, "l2": -1}, {"c": 0, "l0": 0, "l1": 1, "l2": -1}]
    )


def _cancel(a, b):
    keys = set(a.coefficients) | set(b.coefficients)
    return a.bidegree == b.bidegree and all(expand(a.coefficient(*k) + b.coefficient(*k)) == 0 for k in keys)


class TestHarmonicity:

    def test_tropical_line_is_harmonic(self, tropical_service, tripod, tripod_trop):
        report = tropical_service.check_harmonic_trop(tripod, tripod_trop, GammaGroup.integers())
        assert report.harmonic and report.integral and report.gamma_harmonic
        assert report.witnesses == []

    def test_unbalanced_circle(self, tropical_service, circle):
        h = tropical_service.tropicalization_from_values(circle, [{"v0": 0, "v1": 1}])
        report = tropical_service.check_harmonic_trop(circle, h)
        assert not report.harmonic
        assert any("unbalanced at 'v0'" in w for w in report.witnesses)

    def test_fractional_slopes(self, tropical_service, boundary_segment):
        h = tropical_service.tropicalization_from_values(boundary_segment, [{"a": 0, "b": F(1, 2)}])
        report = tropical_service.check_harmonic_trop(boundary_segment, h)
        assert report.harmonic and not report.integral
        with pytest.raises(TropicalizationError):
            tropical_service.trop_cycle(boundary_segment, h)

    def test_value_group(self, tropical_service, boundary_segment):
        h = tropical_service.tropicalization_from_values(boundary_segment, [{"a": F(1, 3), "b": F(4, 3)}])
        assert not tropical_service.check_harmonic_trop(boundary_segment, h).gamma_harmonic
        thirds = GammaGroup.generated_by([F(1, 3)])
        assert tropical_service.check_harmonic_trop(boundary_segment, h, thirds).gamma_harmonic
        assert thirds.saturation().contains(F(2, 7))

    def test_values_are_read_at_ambient_edge_ends(self, tropical_service, graph_service, boundary_segment):
        sub, corr = graph_service.subdivide(boundary_segment, [("e", F(1, 2))])
        part = graph_service.subgraph(sub, ["e.0"])
        h = tropical_service.tropicalization_from_values(part, [{"a": 0, "e@1": F(1, 2)}])
        integers = GammaGroup.integers()
        assert not tropical_service.check_harmonic_trop(part, h, integers).gamma_harmonic
        assert tropical_service.check_harmonic_trop(part, h, integers, boundary_segment, corr).gamma_harmonic

    def test_inconsistent_slopes(self, tropical_service, boundary_segment, unit_trop):
        component = unit_trop.components[0]
        broken = unit_trop.model_copy(update={
            "components": (component.model_copy(update={"slopes": {"e": F(2)}}),)
        })
        with pytest.raises(TropicalizationError):
            tropical_service.check_harmonic_trop(boundary_segment, broken)

    def test_wrong_graph(self, tropical_service, theta, unit_trop):
        with pytest.raises(ReferentialError):
            tropical_service.check_harmonic_trop(theta, unit_trop)

    def test_compose_with_unweighting(self, tropical_service, harmonic_service):
        g = graph_builders.segment(1, weight=2)
        h = tropical_service.tropicalization_from_values(g, [{"a": 0, "b": 1}])
        composed = tropical_service.compose_tropicalization(h, harmonic_service.unweighting_map(g))
        assert composed.graph == "segment.unweighted"
        assert composed.components[0].slopes == {"e": 2}


class TestLagerberg:

    def test_pullback_of_top_form(self, tropical_service, form_service, boundary_segment, unit_trop):
        eta = LagerbergPolyForm(dimension=1, bidegree=(1, 1), coefficients={(1, 1): x1})
        pulled = tropical_service.pullback_lagerberg(boundary_segment, unit_trop, eta)
        assert pulled.coefficient("e").first_piece == Polynomial.identity()
        assert form_service.integrate_graph(boundary_segment, pulled) == F(1, 2)

    def test_pullback_scales_by_slopes(self, tropical_service):
        g = graph_builders.segment(1)
        h = tropical_service.tropicalization_from_values(g, [{"a": 0, "b": 2}, {"a": 1, "b": 1}])
        eta = LagerbergPolyForm(dimension=2, bidegree=(1, 0), coefficients={(1,): y2, (2,): y1})
        pulled = tropical_service.pullback_lagerberg(g, h, eta)
        assert pulled.coefficient("e").first_piece == Polynomial.constant(2)

    def test_pulled_forms_are_valid(self, tropical_service, form_service, rng):
        for bidegree in ((0, 0), (1, 0), (0, 1), (1, 1)):
            g = random_graph(rng, max_vertices=5, max_edges=6)
            h = random_tropicalization(rng, g, 2, tropical_service.harmonic_service)
            pulled = tropical_service.pullback_lagerberg(g, h, random_lagerberg(rng, 2, bidegree))
            assert form_service.validate_form(g, pulled).valid

    def test_pullback_commutes_with_d_second(self, tropical_service, form_service, tripod, tripod_trop):
        f = LagerbergPolyForm(dimension=2, bidegree=(0, 0), coefficients={(): y1 ** 2 * y2 + 3 * y2})
        one = LagerbergPolyForm(dimension=2, bidegree=(1, 0), coefficients={(1,): y1 * y2, (2,): y1 ** 3})
        for eta in (f, one):
            downstairs = form_service.d_second(tropical_service.pullback_lagerberg(tripod, tripod_trop, eta))
            upstairs = tropical_service.pullback_lagerberg(tripod, tripod_trop, tropical_service.lagerberg_d_second(eta))
            assert downstairs.same_as(upstairs)

    def test_pullback_respects_wedge(self, tropical_service, form_service, tripod, tripod_trop):
        alpha = LagerbergPolyForm(dimension=2, bidegree=(1, 0), coefficients={(1,): y2, (2,): Integer(1)})
        beta = LagerbergPolyForm(dimension=2, bidegree=(0, 1), coefficients={(2,): y1 ** 2})
        pull = lambda eta: tropical_service.pullback_lagerberg(tripod, tripod_trop, eta)
        for a, b in ((alpha, beta), (beta, alpha)):
            assert form_service.wedge(pull(a), pull(b)).same_as(pull(tropical_service.lagerberg_wedge(a, b)))

    def test_anticommuting_differentials(self, tropical_service):
        f = LagerbergPolyForm(dimension=2, bidegree=(0, 0), coefficients={(): y1 ** 2 * y2})
        a = tropical_service.lagerberg_d_first(tropical_service.lagerberg_d_second(f))
        b = tropical_service.lagerberg_d_second(tropical_service.lagerberg_d_first(f))
        assert a.coefficient(1, 2) == 2 * y1
        assert _cancel(a, b)

    def test_wedge_limits(self, tropical_service):
        one = LagerbergPolyForm(dimension=2, bidegree=(1, 0), coefficients={(1,): y1})
        with pytest.raises(PreconditionError):
            tropical_service.lagerberg_wedge(one, one)
        with pytest.raises(PreconditionError):
            tropical_service.lagerberg_d_first(one)

    def test_piecewise_coefficients_pull_back_branch_by_branch(self, tropical_service, boundary_segment):
        eta = LagerbergPolyForm(
            dimension=1, bidegree=(0, 0), coefficients={(): Piecewise((x1 ** 2, x1 >= 0), (-x1, True))}
        )
        left = tropical_service.tropicalization_from_values(boundary_segment, [{"a": -1, "b": 0}])
        right = tropical_service.tropicalization_from_values(boundary_segment, [{"a": 0, "b": 1}])
        assert tropical_service.pullback_lagerberg(boundary_segment, left, eta).coefficient("e").first_piece == Polynomial((1, -1))
        assert tropical_service.pullback_lagerberg(boundary_segment, right, eta).coefficient("e").first_piece == Polynomial((0, 0, 1))

    def test_edges_may_not_cross_a_break(self, tropical_service, boundary_segment):
        eta = LagerbergPolyForm(
            dimension=1, bidegree=(1, 1), coefficients={(1, 1): Piecewise((x1, x1 >= 0), (Integer(0), True))}
        )
        across = tropical_service.tropicalization_from_values(boundary_segment, [{"a": -1, "b": 1}])
        with pytest.raises(PreconditionError):
            tropical_service.pullback_lagerberg(boundary_segment, across, eta)

    def test_dimension_mismatch(self, tropical_service, boundary_segment, unit_trop):
        eta = LagerbergPolyForm(dimension=2, bidegree=(0, 0), coefficients={(): y1})
        with pytest.raises(PreconditionError):
            tropical_service.pullback_lagerberg(boundary_segment, unit_trop, eta)

    def test_form_keys_are_checked(self):
        with pytest.raises(ValueError):
            LagerbergPolyForm(dimension=1, bidegree=(1, 0), coefficients={(2,): x1})
        with pytest.raises(ValueError):
            LagerbergPolyForm(dimension=1, bidegree=(1, 1), coefficients={(1, 1): y2})


class TestCycles:

    def test_primitive(self, tropical_service):
        assert tropical_service.primitive([F(2), F(4)]) == ((1, 2), 2)
        assert tropical_service.primitive([F(-3), F(6)]) == ((-1, 2), 3)
        assert tropical_service.primitive([F(0), F(0)]) == ((0, 0), 0)

    def test_weighted_edge_multiplicity(self, tropical_service):
        g = graph_builders.segment(1, weight=2)
        h = tropical_service.tropicalization_from_values(g, [{"a": 0, "b": 2}, {"a": 0, "b": 4}])
        cycle = tropical_service.trop_cycle(g, h)
        assert len(cycle.segments) == 1
        segment = cycle.segments[0]
        assert segment.direction == (1, 2)
        assert segment.lattice_length == 2
        assert segment.multiplicity == 4
        assert segment.end == (2, 4)

    def test_tropical_line_balances(self, tropical_service, tripod, tripod_trop):
        cycle = tropical_service.trop_cycle(tripod, tripod_trop)
        assert len(cycle.segments) == 3
        assert cycle.excluded == ((-1, -1), (0, 1), (1, 0))
        assert tropical_service.check_balancing(cycle).balanced

    def test_loose_ends_are_reported(self, tropical_service):
        cycle = TropCycle(dimension=1, segments=(
            TropSegment(start=(F(0),), end=(F(1),), direction=(1,), lattice_length=1, multiplicity=3),
        ))
        report = tropical_service.check_balancing(cycle)
        assert [(v.point, v.defect) for v in report.violations] == [((0,), (3,)), ((1,), (-3,))]

    def test_crossings_are_refined(self, tropical_service):
        raw = [
            ((F(0), F(0)), (F(2), F(2)), (1, 1), F(2), 1),
            ((F(0), F(2)), (F(2), F(0)), (1, -1), F(2), 1),
        ]
        cycle = tropical_service.refine(2, raw)
        assert len(cycle.segments) == 4
        points = {v.point for v in tropical_service.check_balancing(cycle).violations}
        assert (1, 1) not in points
        assert len(points) == 4

    def test_overlaps_add_multiplicities(self, tropical_service):
        raw = [((F(0),), (F(2),), (1,), F(2), 1), ((F(1),), (F(0),), (-1,), F(1), 2)]
        cycle = tropical_service.refine(1, raw)
        assert [(s.start, s.end, s.multiplicity) for s in cycle.segments] == [((0,), (1,), 3), ((1,), (2,), 1)]

    @pytest.mark.slow
    def test_random_cycles_balance(self, tropical_service, rng):
        for _ in range(100):
            g = random_graph(rng, max_vertices=5, max_edges=7)
            h = random_tropicalization(rng, g, 2, tropical_service.harmonic_service)
            assert tropical_service.check_balancing(tropical_service.trop_cycle(g, h)).balanced


class TestIntegration:

    def test_golden_segment(self, tropical_service, boundary_segment, unit_trop):
        eta = LagerbergPolyForm(dimension=1, bidegree=(1, 1), coefficients={(1, 1): x1})
        result = tropical_service.integration_compat_check(boundary_segment, unit_trop, eta)
        assert result.graph_side == result.trop_side == F(1, 2)

    @pytest.mark.parametrize("bidegree, expected", [((1, 0), -1), ((0, 1), 1)])
    def test_boundary_integrals(self, tropical_service, boundary_segment, unit_trop, bidegree, expected):
        eta = LagerbergPolyForm(dimension=1, bidegree=bidegree, coefficients={(1,): x1 ** 2})
        result = tropical_service.integration_compat_check(boundary_segment, unit_trop, eta)
        assert result.graph_side == expected
        assert result.equal

    @pytest.mark.slow
    @pytest.mark.parametrize("bidegree", [(1, 1), (1, 0), (0, 1)])
    def test_random_integrals_agree(self, tropical_service, rng, bidegree):
        for _ in range(34):
            g = random_graph(rng, max_vertices=5, max_edges=6, boundary_probability=0.5)
            h = random_tropicalization(rng, g, 2, tropical_service.harmonic_service)
            assert tropical_service.integration_compat_check(g, h, random_lagerberg(rng, 2, bidegree)).equal

    def test_functions_have_no_integral(self, tropical_service, boundary_segment, unit_trop):
        eta = LagerbergPolyForm(dimension=1, bidegree=(0, 0), coefficients={(): x1})
        with pytest.raises(PreconditionError):
            tropical_service.integration_compat_check(boundary_segment, unit_trop, eta)


class TestStarExtension:

    def test_restrictions_recover_the_rays(self, tropical_service):
        t = Polynomial.identity()
        rays = [t * t - 2 * t + 5, t * t + t + 5, t ** 3 + t + 5]
        expr = tropical_service.polynomial_star_extension(rays)
        for i, ray in enumerate(rays):
            assert tropical_service.restrict_to_ray(expr, 2, i) == ray

    def test_rays_in_general_position(self, tropical_service):
        t = Polynomial.identity()
        rays = [t * t - 3 * t + 1, t ** 3 + t + 1, 2 * t * t + 2 * t + 1]
        directions = [(1, 1), (-1, 2)]
        expr = tropical_service.polynomial_star_extension(rays, directions)
        for i, ray in enumerate(rays):
            assert tropical_service.restrict_to_ray(expr, 2, i, directions) == ray
        with pytest.raises(PreconditionError):
            tropical_service.polynomial_star_extension(rays, [(1, 1), (2, 2)])

    def test_needs_three_rays(self, tropical_service):
        with pytest.raises(PreconditionError):
            tropical_service.polynomial_star_extension([Polynomial.constant(1), Polynomial.constant(1)])

    def test_needs_balanced_derivatives(self, tropical_service):
        t = Polynomial.identity()
        with pytest.raises(PreconditionError):
            tropical_service.polynomial_star_extension([t, t, t])
        with pytest.raises(PreconditionError):
            tropical_service.polynomial_star_extension([Polynomial.constant(1), Polynomial(), Polynomial()])
