import json

import pytest

from config.settings import Config
from src.app import EXIT_FAILURE, EXIT_INPUT, EXIT_OK, main
from src.models.map_models import EdgeImage, PLMap
from src.utils import graph_builders
from src.utils.polynomial import Polynomial
from src.utils.text_formats import serialize_action, serialize_form, serialize_graph, serialize_map


@pytest.fixture(autouse=True)
def default_config(monkeypatch):
    monkeypatch.setattr(Config, "SMOOTHNESS_ORDER", "3")
    monkeypatch.setattr(Config, "LOG_LEVEL", "WARNING")


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)
    return _write


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, (json.loads(out.out) if out.out.strip() else None), out.err


class TestGraphCommands:

    def test_cohomology(self, capsys, write, theta):
        code, report, _ = _run(capsys, "cohomology", "--graph", write("theta.txt", serialize_graph(theta)))
        assert code == EXIT_OK
        assert report["total"] == [1, 2, 2, 1]
        assert report["matches_closed_form"]

    def test_invalid_graph_is_an_input_error(self, capsys, write):
        path = write("loop.txt", "graph g\nvertex a\nedge e a a 1\n")
        code, report, _ = _run(capsys, "validate", "--graph", path)
        assert code == EXIT_INPUT
        assert not report["graph_valid"]
        assert "loop edge 'e' at vertex 'a'" in report["graph_violations"]

    def test_parse_errors_name_the_line(self, capsys, write):
        code, report, err = _run(capsys, "cohomology", "--graph", write("bad.txt", "graph g\nvertex a\nedge e a b x\n"))
        assert code == EXIT_INPUT
        assert report is None
        assert "line 3" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = _run(capsys, "cohomology", "--graph", str(tmp_path / "nowhere.txt"))
        assert code == EXIT_INPUT
        assert err.startswith("error:")

    def test_subdivide(self, capsys, write, circle):
        code, report, _ = _run(capsys, "subdivide", "--graph", write("c.txt", serialize_graph(circle)), "--point", "e0:1/2")
        assert code == EXIT_OK
        assert "vertex e0@1" in report["graph"]

    def test_bad_configuration(self, capsys, monkeypatch, write, theta):
        monkeypatch.setattr(Config, "SMOOTHNESS_ORDER", "three")
        code, _, err = _run(capsys, "cohomology", "--graph", write("theta.txt", serialize_graph(theta)))
        assert code == EXIT_INPUT
        assert "SMOOTHNESS_ORDER" in err


class TestFormCommands:

    def test_integrate_top_form(self, capsys, write, form_service, boundary_segment):
        form = form_service.from_polynomials(boundary_segment, (1, 1), {"e": Polynomial.constant(2)})
        code, report, _ = _run(
            capsys, "integrate",
            "--graph", write("g.txt", serialize_graph(boundary_segment)),
            "--form", write("f.txt", serialize_form(form)),
        )
        assert code == EXIT_OK
        assert report == {"kind": "graph", "value": "2"}

    def test_obstructed_preimage(self, capsys, write, form_service, circle):
        form = form_service.from_polynomials(circle, (0, 1), {"e0": Polynomial.constant(1), "e1": Polynomial.constant(1)})
        args = ["ddbar-preimage", "--graph", write("g.txt", serialize_graph(circle)), "--form", write("f.txt", serialize_form(form))]
        code, report, _ = _run(capsys, *args)
        assert code == EXIT_OK
        assert report["exact"] is False
        code, _, _ = _run(capsys, *args, "--require-exact")
        assert code == EXIT_FAILURE

    def test_certify_branch_vertex(self, capsys, write, form_service, tripod):
        form = form_service.from_polynomials(tripod, (1, 1), {"e0": Polynomial.identity()})
        code, report, _ = _run(
            capsys, "certify-local",
            "--graph", write("g.txt", serialize_graph(tripod)),
            "--form", write("f.txt", serialize_form(form)),
            "--vertex", "c",
        )
        assert code == EXIT_OK
        assert report["case"] == "branch vertex"
        assert report["lagerberg"].startswith("lagerberg 2 1,1")


class TestMapCommands:

    def test_pullback_along_non_harmonic_map(self, capsys, write, form_service):
        source = graph_builders.star(3)
        target = graph_builders.path(2, boundary_ends=False)
        fold = PLMap(
            name="fold", source=source, target=target,
            vertex_map={"c": "v1", "l0": "v2", "l1": "v2", "l2": "v0"},
            edge_map={"e0": EdgeImage(edge="e1"), "e1": EdgeImage(edge="e1"), "e2": EdgeImage(edge="e0", reversed=True)},
        )
        code, report, _ = _run(
            capsys, "pullback",
            "--source", write("s.txt", serialize_graph(source)),
            "--target", write("t.txt", serialize_graph(target)),
            "--map", write("m.txt", serialize_map(fold)),
            "--form", write("f.txt", serialize_form(form_service.zero_form(target, (1, 1)))),
        )
        assert code == EXIT_FAILURE
        assert report["error"] == "NotHarmonicError"

    def test_pullback_needs_its_files(self, capsys):
        code, _, err = _run(capsys, "pullback", "--form", "f.txt")
        assert code == EXIT_INPUT
        assert "--map" in err

    def test_quotient(self, capsys, write, circle):
        code, report, _ = _run(
            capsys, "quotient",
            "--graph", write("g.txt", serialize_graph(circle)),
            "--action", write("a.txt", serialize_action(graph_builders.flip_group(circle))),
        )
        assert code == EXIT_OK
        assert report["verified"]
        assert report["certificate"]["degree"] == "1"

    def test_skeleton(self, capsys, write):
        text = "skeleton tate\ncomponent C1\ncomponent C2\nnode p C1 C2 1 1\nnode q C1 C2 1 1\n"
        code, report, _ = _run(capsys, "skeleton", "--skeleton", write("s.txt", text))
        assert code == EXIT_OK
        assert report["h"] == [[1, 1, 1, 1]]
        assert report["genus"] == [1]
