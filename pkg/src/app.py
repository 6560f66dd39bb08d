import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from config.settings import Config
from src.models.cohomology_models import bidegree_key
from src.models.form_models import BIDEGREES
from src.models.map_models import HarmonicCertificate
from src.models.tropical_models import GammaGroup, GraphPoint
from src.services.cohomology_service import CohomologyService
from src.services.form_service import FormService
from src.services.graph_service import GraphService
from src.services.harmonic_service import HarmonicService
from src.services.local_pullback_service import LocalPullbackService
from src.services.quotient_service import QuotientService
from src.services.skeleton_service import SkeletonService
from src.services.tropical_service import TropicalService
from src.utils.errors import InputError, MathematicalFailure, ParseError
from src.utils.text_formats import (
    Token,
    format_rational,
    parse_action,
    parse_form,
    parse_graph,
    parse_lagerberg,
    parse_map,
    parse_rational,
    parse_skeleton,
    parse_tropicalization,
    serialize_form,
    serialize_graph,
    serialize_lagerberg,
    serialize_map,
    serialize_tropicalization,
)

logger = logging.getLogger("graphforms")

EXIT_OK, EXIT_FAILURE, EXIT_INPUT = 0, 1, 2


class Services:
    """All services sharing one smoothness order."""

    def __init__(self, order: Optional[int]) -> None:
        self.graph = GraphService()
        self.form = FormService(order)
        self.harmonic = HarmonicService(order, self.graph, self.form)
        self.cohomology = CohomologyService(order, self.graph, self.form, self.harmonic)
        self.quotient = QuotientService(order, self.graph, self.harmonic, self.cohomology)
        self.tropical = TropicalService(order, self.form, self.harmonic)
        self.local = LocalPullbackService(order, self.form, self.tropical)
        self.skeleton = SkeletonService(order, self.cohomology)


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _rational_token(text: str) -> Fraction:
    return parse_rational(Token(text.strip(), 0, 1))


def _gamma(text: Optional[str]) -> Optional[GammaGroup]:
    if not text:
        return None
    return GammaGroup.generated_by(_rational_token(x) for x in text.split(","))


def _json(value: Any) -> Any:
    """Rationals as 'p/q' strings, tuples as lists."""
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, dict):
        return {str(k): _json(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json(v) for v in value]
    return value


def _certificate(cert: HarmonicCertificate) -> Dict[str, Any]:
    report: Dict[str, Any] = {
        "map": cert.map_name,
        "harmonic": cert.harmonic,
        "degree": cert.degree,
        "local_degrees": dict(sorted(cert.local_degrees.items())),
        "edge_degrees": dict(sorted(cert.edge_degrees.items())),
    }
    if cert.failure is not None:
        report["failure"] = cert.failure.describe()
    return report


# subcommands; each returns (report, exit code)


def cmd_validate(args, s: Services):
    g = parse_graph(_read(args.graph))
    graph_report = s.graph.validate_graph(g)
    report: Dict[str, Any] = {"graph": g.name, "graph_valid": graph_report.valid, "graph_violations": graph_report.violations}
    ok = graph_report.valid
    if args.form and ok:
        form_report = s.form.validate_form(g, parse_form(_read(args.form), g))
        report.update(form_valid=form_report.valid, form_violations=form_report.violations)
        ok = form_report.valid
    return report, EXIT_OK if ok else EXIT_INPUT


def _valid_graph(args, s: Services, key: str = "graph"):
    g = parse_graph(_read(getattr(args, key)))
    s.graph.require_valid(g)
    return g


def _valid_form(args, s: Services, g):
    form = parse_form(_read(args.form), g)
    s.form.require_valid(g, form)
    return form


def cmd_cohomology(args, s: Services):
    table = s.cohomology.dolbeault_dimensions(_valid_graph(args, s))
    components = [
        {
            "component": c.index,
            "genus": c.genus,
            "boundary": c.boundary_count,
            "h": list(c.as_tuple()),
            "closed_form": list(c.closed_form()),
        }
        for c in table.components
    ]
    report = {"graph": table.graph, "components": components, "total": list(table.total),
              "matches_closed_form": table.matches_closed_form}
    return report, EXIT_OK if table.matches_closed_form else EXIT_FAILURE


def cmd_basis(args, s: Services):
    g = _valid_graph(args, s)
    basis = s.cohomology.cohomology_basis(g)
    report = {
        "graph": g.name,
        "cycles": [{"edge": c.edge, "base": c.base_vertex, "steps": [[eid, fw] for eid, fw in c.steps]} for c in basis.cycles],
        "basis": {bidegree_key(b): [serialize_form(f) for f in basis.elements(b)] for b in BIDEGREES},
    }
    return report, EXIT_OK


def cmd_pairing(args, s: Services):
    pairing = s.cohomology.poincare_pairing(_valid_graph(args, s))
    report = {
        "applicable": pairing.applicable,
        "reason": pairing.reason,
        "scalar_gram": pairing.scalar_gram,
        "gram": pairing.gram,
        "determinant": pairing.determinant,
        "perfect": pairing.perfect,
    }
    return report, EXIT_OK if pairing.perfect or not pairing.applicable else EXIT_FAILURE


def cmd_integrate(args, s: Services):
    g = _valid_graph(args, s)
    form = _valid_form(args, s, g)
    if form.bidegree == (1, 1):
        return {"kind": "graph", "value": s.form.integrate_graph(g, form)}, EXIT_OK
    if form.bidegree in ((1, 0), (0, 1)):
        return {"kind": "boundary", "value": s.form.integrate_boundary(g, form)}, EXIT_OK
    raise InputError("functions have no integral; pass a (1,1)-, (1,0)- or (0,1)-form")


def cmd_stokes(args, s: Services):
    g = _valid_graph(args, s)
    result = s.form.stokes_check(g, _valid_form(args, s, g))
    return {"lhs": result.lhs, "rhs": result.rhs, "equal": result.equal}, EXIT_OK if result.equal else EXIT_FAILURE


def cmd_ddbar_preimage(args, s: Services):
    g = _valid_graph(args, s)
    result = s.cohomology.dbar_preimage(g, _valid_form(args, s, g))
    report = {
        "exact": result.exact,
        "obstruction": result.obstruction,
        "preimage": serialize_form(result.preimage) if result.preimage is not None else None,
    }
    failed = args.require_exact and not result.exact
    return report, EXIT_FAILURE if failed else EXIT_OK


def cmd_pullback(args, s: Services):
    if args.lagerberg:
        g = _valid_graph(args, s)
        h = parse_tropicalization(_read(args.tropicalization), g)
        pulled = s.tropical.pullback_lagerberg(g, h, parse_lagerberg(_read(args.lagerberg)))
        return {"form": serialize_form(pulled)}, EXIT_OK
    source = _valid_graph(args, s, "source")
    target = _valid_graph(args, s, "target")
    m = parse_map(_read(args.map), source, target)
    s.harmonic.require_valid_map(m)
    certificate = s.harmonic.require_harmonic(m)
    form = parse_form(_read(args.form), target)
    pulled = s.harmonic.pullback_form(m, form, certificate=certificate)
    return {"certificate": _certificate(certificate), "form": serialize_form(pulled)}, EXIT_OK


def cmd_quotient(args, s: Services):
    g = _valid_graph(args, s)
    action = parse_action(_read(args.action), g)
    result = s.quotient.quotient(g, action)
    verification = s.quotient.verify_quotient(result.subdivided, result.action, result.quotient, result.projection)
    report = {
        "subdivided": serialize_graph(result.subdivided),
        "quotient": serialize_graph(result.quotient),
        "projection": serialize_map(result.projection),
        "certificate": _certificate(result.certificate),
        "verified": verification.valid,
        "violations": verification.violations,
    }
    return report, EXIT_OK if verification.valid else EXIT_FAILURE


def cmd_tropicalize(args, s: Services):
    g = _valid_graph(args, s)
    h = parse_tropicalization(_read(args.tropicalization), g)
    flags = s.tropical.check_harmonic_trop(g, h, _gamma(args.gamma))
    report: Dict[str, Any] = {
        "harmonic": flags.harmonic,
        "integral": flags.integral,
        "gamma_harmonic": flags.gamma_harmonic,
        "witnesses": flags.witnesses,
    }
    ok = flags.harmonic
    if flags.integral:
        cycle = s.tropical.trop_cycle(g, h)
        balance = s.tropical.check_balancing(cycle)
        report["segments"] = [
            {"start": seg.start, "end": seg.end, "direction": seg.direction,
             "lattice_length": seg.lattice_length, "multiplicity": seg.multiplicity}
            for seg in cycle.segments
        ]
        report["excluded"] = cycle.excluded
        report["balanced"] = balance.balanced
        report["unbalanced"] = [{"point": p.point, "defect": p.defect} for p in balance.violations]
        ok = ok and balance.balanced
        if args.lagerberg:
            comparison = s.tropical.integration_compat_check(g, h, parse_lagerberg(_read(args.lagerberg)))
            report["integration"] = {"kind": comparison.kind, "graph_side": comparison.graph_side,
                                     "trop_side": comparison.trop_side, "equal": comparison.equal}
            ok = ok and comparison.equal
    return report, EXIT_OK if ok else EXIT_FAILURE


def cmd_certify_local(args, s: Services):
    g = _valid_graph(args, s)
    form = parse_form(_read(args.form), g)
    if args.vertex:
        point = GraphPoint(vertex=args.vertex)
    elif args.edge and args.position:
        point = GraphPoint(edge=args.edge, position=_rational_token(args.position))
    else:
        raise InputError("certify-local needs --vertex or --edge with --position")
    cert = s.local.local_pullback_certificate(g, form, point, _gamma(args.gamma))
    report = {
        "case": cert.case,
        "verified": cert.verified,
        "neighbourhood": serialize_graph(cert.neighbourhood),
        "tropicalization": serialize_tropicalization(cert.tropicalization, cert.neighbourhood),
        "lagerberg": serialize_lagerberg(cert.form),
        "restricted": serialize_form(cert.restricted),
    }
    return report, EXIT_OK


def cmd_unweight(args, s: Services):
    g0, _ = s.graph.unweight(_valid_graph(args, s))
    return {"graph": serialize_graph(g0)}, EXIT_OK


def cmd_subdivide(args, s: Services):
    g = _valid_graph(args, s)
    points = []
    for text in args.point or []:
        edge, sep, position = text.partition(":")
        if not sep:
            raise ParseError(f"expected edge:position, got {text!r}")
        points.append((edge, _rational_token(position)))
    sub, _ = s.graph.subdivide(g, points)
    return {"graph": serialize_graph(sub)}, EXIT_OK


def cmd_skeleton(args, s: Services):
    result = s.skeleton.curve_cohomology(parse_skeleton(_read(args.skeleton)))
    report = {
        "skeleton": result.skeleton,
        "graph": serialize_graph(result.graph),
        "genus": result.genus,
        "boundary": result.boundary_count,
        "h": [list(c.as_tuple()) for c in result.table.components],
        "matches_closed_form": result.table.matches_closed_form,
    }
    return report, EXIT_OK if result.table.matches_closed_form else EXIT_FAILURE


COMMANDS: Dict[str, Callable] = {
    "validate": cmd_validate,
    "cohomology": cmd_cohomology,
    "basis": cmd_basis,
    "pairing": cmd_pairing,
    "integrate": cmd_integrate,
    "stokes": cmd_stokes,
    "ddbar-preimage": cmd_ddbar_preimage,
    "pullback": cmd_pullback,
    "quotient": cmd_quotient,
    "tropicalize": cmd_tropicalize,
    "certify-local": cmd_certify_local,
    "unweight": cmd_unweight,
    "subdivide": cmd_subdivide,
    "skeleton": cmd_skeleton,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--K", type=int, default=None, help="smoothness order (overrides SMOOTHNESS_ORDER)")

    parser = argparse.ArgumentParser(prog="graphforms", description="Forms and cohomology on weighted metric graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str, *files: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text)
        for f in files:
            p.add_argument(f"--{f}", required=True)
        return p

    add("validate", "check a graph and optionally a form", "graph").add_argument("--form")
    add("cohomology", "Dolbeault dimensions", "graph")
    add("basis", "explicit cohomology representatives", "graph")
    add("pairing", "Poincare duality Gram matrices", "graph")
    add("integrate", "graph or boundary integral of a form", "graph", "form")
    add("stokes", "compare both sides of Stokes", "graph", "form")
    add("ddbar-preimage", "solve d''eta = form", "graph", "form").add_argument("--require-exact", action="store_true")
    p = add("pullback", "pull back along a harmonic map or a tropicalization")
    for flag in ("map", "source", "target", "form", "graph", "tropicalization", "lagerberg"):
        p.add_argument(f"--{flag}")
    add("quotient", "quotient by a finite group action", "graph", "action")
    p = add("tropicalize", "harmonicity, tropical cycle and balancing", "graph", "tropicalization")
    p.add_argument("--gamma")
    p.add_argument("--lagerberg")
    p = add("certify-local", "local pullback certificate", "graph", "form")
    for flag in ("vertex", "edge", "position", "gamma"):
        p.add_argument(f"--{flag}")
    add("unweight", "unweighting of a graph", "graph")
    add("subdivide", "subdivide at edge points", "graph").add_argument("--point", action="append")
    add("skeleton", "graph and cohomology table of a skeleton", "skeleton")
    return parser


def _check_pullback_flags(args) -> None:
    if args.command != "pullback":
        return
    needed: List[str] = ["graph", "tropicalization"] if args.lagerberg else ["map", "source", "target", "form"]
    missing = [f"--{flag}" for flag in needed if not getattr(args, flag)]
    if missing:
        raise InputError(f"pullback needs {', '.join(missing)}")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        Config.validate()
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(
        level=Config.LOG_LEVEL, stream=sys.stderr, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )
    try:
        _check_pullback_flags(args)
        services = Services(Config.smoothness_order(args.K))
        report, code = COMMANDS[args.command](args, services)
    except (InputError, OSError) as exc:
        logger.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MathematicalFailure as exc:
        logger.warning("%s", exc)
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}, indent=2))
        return EXIT_FAILURE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(json.dumps(_json(report), indent=2))
    return code


if __name__ == "__main__":
    sys.exit(main())
