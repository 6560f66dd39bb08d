from fractions import Fraction

import pytest
from sympy import Rational, symbols

from src.utils import graph_builders
from src.utils.errors import ParseError, ReferentialError
from src.utils.polynomial import Polynomial
from src.utils.random_corpus import random_form
from src.utils.text_formats import (
    parse_action,
    parse_form,
    parse_graph,
    parse_lagerberg,
    parse_map,
    parse_rational,
    parse_skeleton,
    parse_tropicalization,
    serialize_action,
    serialize_form,
    serialize_graph,
    serialize_lagerberg,
    Token,
)

SEGMENT = """
graph seg        # a unit segment
vertex a boundary
vertex b boundary
edge e a b 3/2 2
"""


@pytest.fixture
def seg():
    return parse_graph(SEGMENT)


class TestGraphs:

    def test_parse(self, seg):
        assert seg.name == "seg"
        assert seg.boundary() == {"a", "b"}
        assert seg.edge("e").length == Fraction(3, 2)
        assert seg.edge("e").weight == 2

    def test_serialized_graph_reads_back(self, theta):
        assert parse_graph(serialize_graph(theta)).same_as(theta)

    def test_zero_denominator_reports_position(self):
        with pytest.raises(ParseError) as info:
            parse_graph("graph g\nvertex a\nvertex b\nedge e a b 1/0\n")
        assert (info.value.line, info.value.column) == (4, 12)

    def test_unknown_record(self):
        with pytest.raises(ParseError) as info:
            parse_graph("graph g\n  node a\n")
        assert (info.value.line, info.value.column) == (2, 3)

    def test_unknown_vertex(self):
        with pytest.raises(ReferentialError):
            parse_graph("graph g\nvertex a\nedge e a z 1\n")

    @pytest.mark.parametrize("text", ["", "# nothing\n", "vertex a\n"])
    def test_missing_header(self, text):
        with pytest.raises(ParseError):
            parse_graph(text)

    def test_rationals(self):
        assert parse_rational(Token("-7/3", 1, 1)) == Fraction(-7, 3)
        with pytest.raises(ParseError):
            parse_rational(Token("0.5", 1, 1))


class TestForms:

    def test_reversed_blocks_are_reoriented(self):
        g = parse_graph("graph g\nvertex a boundary\nvertex b boundary\nedge e a b 1\n")
        form = parse_form("form g 1,0 3\nedge e reversed\npiece 0 1 0 1\n", g)
        assert form.coefficient("e").first_piece == Polynomial((-1, 1))
        assert form.order == 3

    def test_serialized_form_reads_back(self, rng, tripod):
        form = random_form(rng, tripod, (0, 1))
        assert parse_form(serialize_form(form), tripod).same_as(form)

    def test_isolated_values(self):
        g = parse_graph("graph g\nvertex z\n")
        assert parse_form("form g 0,0 2\nvalue z 5\n", g).vertex_values == {"z": 5}

    def test_form_on_another_graph(self, seg):
        with pytest.raises(ReferentialError):
            parse_form("form other 1,1 3\n", seg)

    def test_gaps_between_pieces(self, seg):
        text = "form seg 1,1 3\nedge e forward\npiece 0 1/2 1\npiece 3/4 3/2 1\n"
        with pytest.raises(ParseError) as info:
            parse_form(text, seg)
        assert info.value.line == 2

    def test_piece_before_edge(self, seg):
        with pytest.raises(ParseError):
            parse_form("form seg 1,1 3\npiece 0 3/2 1\n", seg)

    def test_bad_bidegree(self, seg):
        with pytest.raises(ParseError) as info:
            parse_form("form seg 2,0 3\n", seg)
        assert info.value.column == 10


class TestMapsAndActions:

    def test_map_with_crushed_edge(self, circle):
        whisker = parse_graph("graph w\nvertex v0\nvertex v1\nvertex t boundary\n"
                              "edge e0 v0 v1 1\nedge e1 v1 v0 1\nedge s v0 t 1\n")
        m = parse_map(
            "map r w cycle2\nvertex v0 v0\nvertex v1 v1\nvertex t v0\n"
            "edge e0 onto e0\nedge e1 onto e1\nedge s crush v0\n",
            whisker, circle,
        )
        assert m.edge_map["s"].crushed
        assert m.edge_map["e0"].edge == "e0"

    def test_map_between_the_wrong_graphs(self, circle, theta):
        with pytest.raises(ReferentialError):
            parse_map("map m theta cycle2\n", circle, theta)

    def test_action_reads_back(self):
        triangle = graph_builders.cycle(3)
        action = graph_builders.dihedral_group(triangle)
        again = parse_action(serialize_action(action), triangle)
        assert [m.name for m in again.elements] == [m.name for m in action.elements]
        assert again.elements[1].edge_map == action.elements[1].edge_map

    def test_record_outside_element(self, circle):
        with pytest.raises(ParseError):
            parse_action("action cycle2\nvertex v0 v0\n", circle)


class TestTropicalData:

    def test_slopes_default_to_differences(self, seg):
        h = parse_tropicalization("tropicalization seg 2\nvalue a 0 0\nvalue b 3 -3/2\n", seg)
        assert h.slope_vector("e") == (2, -1)

    def test_every_vertex_needs_a_value(self, seg):
        with pytest.raises(ReferentialError):
            parse_tropicalization("tropicalization seg 1\nvalue a 0\n", seg)

    def test_lagerberg(self):
        eta = parse_lagerberg("lagerberg 2 1,1\ncoefficient 1,2 x1**2 + 1/2*x2\ncoefficient 2,2 3\n")
        x1, x2 = symbols("x1 x2")
        assert eta.coefficient(1, 2) == x1 ** 2 + Rational(1, 2) * x2
        assert eta.coefficient(2, 2) == 3
        assert parse_lagerberg(serialize_lagerberg(eta)) == eta

    @pytest.mark.parametrize("line", ["coefficient 3 x1", "coefficient 1 x1 +", "coefficient 1 y", "coefficient 1,1 x1"])
    def test_bad_lagerberg_coefficients(self, line):
        with pytest.raises(ParseError) as info:
            parse_lagerberg(f"lagerberg 2 1,0\n{line}\n")
        assert info.value.line == 2


class TestSkeletons:

    def test_parse(self):
        d = parse_skeleton("skeleton tate\ncomponent C1\ncomponent C2 nonproper\nnode p C1 C2 1 3/2\n")
        assert [c.proper for c in d.components] == [True, False]
        assert d.singular_points[0].modulus_valuation == Fraction(3, 2)

    def test_invalid_descriptions_become_parse_errors(self):
        with pytest.raises(ParseError) as info:
            parse_skeleton("skeleton s\ncomponent C\ncomponent D\nnode p C D 0 1\n")
        assert info.value.line == 4
