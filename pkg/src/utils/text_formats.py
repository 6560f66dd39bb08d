"""
Line-oriented text formats for graphs, forms, maps, actions, tropicalizations,
Lagerberg forms and skeletons.

Every file is a header line followed by records, one per line. Blank lines and
text after '#' are ignored. Rationals are written as integers or "p/q".
"""
import re
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from pydantic import ValidationError
from sympy import SympifyError, sstr

from src.models.form_models import GraphForm
from src.models.graph_models import Edge, Vertex, WeightedMetricGraph
from src.models.map_models import EdgeImage, GroupAction, HarmonicFunction, PLMap
from src.models.skeleton_models import SingularPoint, SkeletonComponent, SkeletonDescription
from src.models.tropical_models import HarmonicTropicalization, LagerbergPolyForm, coordinate_symbols
from src.utils.errors import ParseError, PreconditionError, ReferentialError
from src.utils.polynomial import PiecewisePolynomial, Polynomial
from src.utils.symbolic import parse_expr_exact

_RATIONAL = re.compile(r"^-?\d+(/\d+)?$")


class Token(str):
    """A word of the input remembering where it started."""

    line: int
    column: int

    def __new__(cls, text: str, line: int, column: int) -> "Token":
        token = super().__new__(cls, text)
        token.line = line
        token.column = column
        return token


Record = Tuple[int, str, List[Token]]


def _records(text: str) -> Iterator[Record]:
    """(line number, raw line, tokens) for every non-empty line."""
    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0]
        tokens = [Token(m.group(), number, m.start() + 1) for m in re.finditer(r"\S+", content)]
        if tokens:
            yield number, content, tokens


def _fail(message: str, token: Optional[Token] = None, line: Optional[int] = None) -> ParseError:
    if token is not None:
        return ParseError(message, token.line, token.column)
    return ParseError(message, line, 1 if line is not None else None)


def parse_rational(token: Token) -> Fraction:
    if not _RATIONAL.match(token):
        raise _fail(f"expected a rational number, got {token!r}", token)
    numerator, _, denominator = token.partition("/")
    if denominator and int(denominator) == 0:
        raise _fail(f"zero denominator in {token!r}", token)
    return Fraction(int(numerator), int(denominator or 1))


def parse_int(token: Token) -> int:
    if not re.match(r"^-?\d+$", token):
        raise _fail(f"expected an integer, got {token!r}", token)
    return int(token)


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def _bidegree(token: Token) -> Tuple[int, int]:
    match = re.match(r"^([01]),([01])$", token)
    if not match:
        raise _fail(f"expected a bidegree like 1,0, got {token!r}", token)
    return int(match.group(1)), int(match.group(2))


def _arity(tokens: List[Token], low: int, high: Optional[int] = None) -> None:
    high = low if high is None else high
    if not low <= len(tokens) <= high:
        expected = str(low) if low == high else f"{low} to {high}"
        raise _fail(f"{tokens[0]!r} record takes {expected} fields, got {len(tokens)}", tokens[0])


def _header(records: List[Record], keyword: str) -> List[Token]:
    if not records:
        raise ParseError(f"empty input, expected a {keyword!r} header", 1, 1)
    _, _, tokens = records[0]
    if tokens[0] != keyword:
        raise _fail(f"expected a {keyword!r} header, got {tokens[0]!r}", tokens[0])
    return tokens


def _build(factory, line: int, **fields):
    try:
        return factory(**fields)
    except ValidationError as exc:
        message = "; ".join(err["msg"] for err in exc.errors())
        raise _fail(message, line=line) from None


# graphs


def parse_graph(text: str) -> WeightedMetricGraph:
    """
    Read a graph.

        graph <name>
        vertex <id> [boundary]
        edge <id> <tail> <head> <length> [<weight>]
    """
    records = list(_records(text))
    header = _header(records, "graph")
    _arity(header, 2)
    vertices: List[Vertex] = []
    edges: List[Edge] = []
    known = set()
    for number, _, tokens in records[1:]:
        kind = tokens[0]
        if kind == "vertex":
            _arity(tokens, 2, 3)
            if len(tokens) == 3 and tokens[2] != "boundary":
                raise _fail(f"expected 'boundary', got {tokens[2]!r}", tokens[2])
            vertices.append(Vertex(id=str(tokens[1]), is_boundary=len(tokens) == 3))
            known.add(str(tokens[1]))
        elif kind == "edge":
            _arity(tokens, 5, 6)
            for end in tokens[2:4]:
                if end not in known:
                    raise ReferentialError(f"line {end.line}, column {end.column}: edge {tokens[1]!r} uses unknown vertex {end!r}")
            weight = parse_int(tokens[5]) if len(tokens) == 6 else 1
            edges.append(Edge(id=str(tokens[1]), tail=str(tokens[2]), head=str(tokens[3]), length=parse_rational(tokens[4]), weight=weight))
        else:
            raise _fail(f"unknown graph record {kind!r}", kind)
    return _build(WeightedMetricGraph, records[0][0], name=str(header[1]), vertices=tuple(vertices), edges=tuple(edges))


def serialize_graph(g: WeightedMetricGraph) -> str:
    lines = [f"graph {g.name}"]
    lines += [f"vertex {v.id}" + (" boundary" if v.is_boundary else "") for v in g.vertices]
    lines += [
        f"edge {e.id} {e.tail} {e.head} {format_rational(e.length)}" + (f" {e.weight}" if e.weight != 1 else "")
        for e in g.edges
    ]
    return "\n".join(lines) + "\n"


# forms


def parse_form(text: str, g: WeightedMetricGraph) -> GraphForm:
    """
    Read a form on g.

        form <graph> <p,q> <K>
        edge <id> forward|reversed
        piece <a> <b> <c0> <c1> ...      # coefficients of the piece in the edge coordinate
        value <vertex> <x>               # isolated vertices of (0,0)-forms

    Pieces of a reversed block are given on the edge traversed head to tail.
    """
    records = list(_records(text))
    header = _header(records, "form")
    _arity(header, 4)
    if header[1] != g.name:
        raise ReferentialError(f"line {header[1].line}: form lives on {header[1]!r}, not on {g.name!r}")
    bidegree = _bidegree(header[2])
    order = parse_int(header[3])
    blocks: Dict[str, Tuple[Token, bool, List[Tuple[Fraction, Fraction, Polynomial]]]] = {}
    current: Optional[str] = None
    values: Dict[str, Fraction] = {}
    for number, _, tokens in records[1:]:
        kind = tokens[0]
        if kind == "edge":
            _arity(tokens, 3)
            if not g.has_edge(tokens[1]):
                raise ReferentialError(f"line {number}, column {tokens[1].column}: unknown edge {tokens[1]!r}")
            if tokens[2] not in ("forward", "reversed"):
                raise _fail(f"orientation must be 'forward' or 'reversed', got {tokens[2]!r}", tokens[2])
            if tokens[1] in blocks:
                raise _fail(f"edge {tokens[1]!r} appears twice", tokens[1])
            current = str(tokens[1])
            blocks[current] = (tokens[1], tokens[2] == "reversed", [])
        elif kind == "piece":
            if current is None:
                raise _fail("piece record before any edge record", kind)
            _arity(tokens, 4, len(tokens))
            a, b = parse_rational(tokens[1]), parse_rational(tokens[2])
            blocks[current][2].append((a, b, Polynomial(parse_rational(t) for t in tokens[3:])))
        elif kind == "value":
            _arity(tokens, 3)
            if not g.has_vertex(tokens[1]):
                raise ReferentialError(f"line {number}, column {tokens[1].column}: unknown vertex {tokens[1]!r}")
            values[str(tokens[1])] = parse_rational(tokens[2])
        else:
            raise _fail(f"unknown form record {kind!r}", kind)

    sign = -1 if sum(bidegree) % 2 else 1
    coefficients = {}
    for e in g.edges:
        if e.id not in blocks:
            coefficients[e.id] = PiecewisePolynomial.zero(e.length, order)
            continue
        token, reversed_block, pieces = blocks[e.id]
        if not pieces:
            raise _fail(f"edge {e.id!r} has no pieces", token)
        try:
            f = PiecewisePolynomial(
                e.length, [pieces[0][0]] + [b for _, b, _ in pieces], [p for _, _, p in pieces], order
            )
        except PreconditionError as exc:
            raise _fail(f"edge {e.id!r}: {exc}", token) from None
        if any(b != a2 for (_, b, _), (a2, _, _) in zip(pieces, pieces[1:])):
            raise _fail(f"edge {e.id!r}: pieces are not contiguous", token)
        coefficients[e.id] = f.reverse().scale(sign) if reversed_block else f
    return GraphForm(graph=g.name, bidegree=bidegree, coefficients=coefficients, vertex_values=values, order=order)


def serialize_form(form: GraphForm) -> str:
    lines = [f"form {form.graph} {form.bidegree[0]},{form.bidegree[1]} {form.order}"]
    for eid in sorted(form.coefficients):
        lines.append(f"edge {eid} forward")
        for a, b, p in form.coefficients[eid].intervals():
            coefficients = " ".join(format_rational(c) for c in p.coefficients) or "0"
            lines.append(f"piece {format_rational(a)} {format_rational(b)} {coefficients}")
    lines += [f"value {vid} {format_rational(x)}" for vid, x in sorted(form.vertex_values.items())]
    return "\n".join(lines) + "\n"


# maps and actions


def _map_body(
    records: Sequence[Record], name: str, source: WeightedMetricGraph, target: WeightedMetricGraph
) -> PLMap:
    vertex_map: Dict[str, str] = {}
    edge_map: Dict[str, EdgeImage] = {}
    for number, _, tokens in records:
        kind = tokens[0]
        if kind == "vertex":
            _arity(tokens, 3)
            for token, graph in ((tokens[1], source), (tokens[2], target)):
                if not graph.has_vertex(token):
                    raise ReferentialError(f"line {number}, column {token.column}: unknown vertex {token!r} in {graph.name!r}")
            vertex_map[str(tokens[1])] = str(tokens[2])
        elif kind == "edge":
            _arity(tokens, 4, 5)
            if not source.has_edge(tokens[1]):
                raise ReferentialError(f"line {number}, column {tokens[1].column}: unknown edge {tokens[1]!r} in {source.name!r}")
            if tokens[2] == "onto":
                if not target.has_edge(tokens[3]):
                    raise ReferentialError(f"line {number}, column {tokens[3].column}: unknown edge {tokens[3]!r} in {target.name!r}")
                if len(tokens) == 5 and tokens[4] != "reversed":
                    raise _fail(f"expected 'reversed', got {tokens[4]!r}", tokens[4])
                edge_map[str(tokens[1])] = EdgeImage(edge=str(tokens[3]), reversed=len(tokens) == 5)
            elif tokens[2] == "crush":
                _arity(tokens, 4)
                if not target.has_vertex(tokens[3]):
                    raise ReferentialError(f"line {number}, column {tokens[3].column}: unknown vertex {tokens[3]!r} in {target.name!r}")
                edge_map[str(tokens[1])] = EdgeImage(vertex=str(tokens[3]))
            else:
                raise _fail(f"expected 'onto' or 'crush', got {tokens[2]!r}", tokens[2])
        else:
            raise _fail(f"unknown map record {kind!r}", kind)
    return PLMap(name=name, source=source, target=target, vertex_map=vertex_map, edge_map=edge_map)


def parse_map(text: str, source: WeightedMetricGraph, target: WeightedMetricGraph) -> PLMap:
    """
    Read a map between two parsed graphs.

        map <name> <source graph> <target graph>
        vertex <source vertex> <target vertex>
        edge <source edge> onto <target edge> [reversed]
        edge <source edge> crush <target vertex>
    """
    records = list(_records(text))
    header = _header(records, "map")
    _arity(header, 4)
    for token, graph in ((header[2], source), (header[3], target)):
        if token != graph.name:
            raise ReferentialError(f"line {token.line}, column {token.column}: expected graph {graph.name!r}, got {token!r}")
    return _map_body(records[1:], str(header[1]), source, target)


def _map_lines(m: PLMap) -> List[str]:
    lines = [f"vertex {v} {m.vertex_map[v]}" for v in sorted(m.vertex_map)]
    for eid in sorted(m.edge_map):
        image = m.edge_map[eid]
        if image.crushed:
            lines.append(f"edge {eid} crush {image.vertex}")
        else:
            lines.append(f"edge {eid} onto {image.edge}" + (" reversed" if image.reversed else ""))
    return lines


def serialize_map(m: PLMap) -> str:
    return "\n".join([f"map {m.name} {m.source.name} {m.target.name}"] + _map_lines(m)) + "\n"


def parse_action(text: str, g: WeightedMetricGraph) -> GroupAction:
    """
    Read a finite group action on g, one block per element.

        action <graph>
        element <name>
        vertex ... / edge ...        # as in map files, with source = target = g
    """
    records = list(_records(text))
    header = _header(records, "action")
    _arity(header, 2)
    if header[1] != g.name:
        raise ReferentialError(f"line {header[1].line}: action is on {header[1]!r}, not on {g.name!r}")
    blocks: List[Tuple[str, List[Record]]] = []
    for record in records[1:]:
        tokens = record[2]
        if tokens[0] == "element":
            _arity(tokens, 2)
            blocks.append((str(tokens[1]), []))
        elif not blocks:
            raise _fail("record before any element header", tokens[0])
        else:
            blocks[-1][1].append(record)
    elements = tuple(_map_body(body, name, g, g) for name, body in blocks)
    return GroupAction(graph=g, elements=elements)


def serialize_action(action: GroupAction) -> str:
    lines = [f"action {action.graph.name}"]
    for m in action.elements:
        lines.append(f"element {m.name}")
        lines += _map_lines(m)
    return "\n".join(lines) + "\n"


# tropical data


def parse_tropicalization(text: str, g: WeightedMetricGraph) -> HarmonicTropicalization:
    """
    Read a map to Q^n.

        tropicalization <graph> <n>
        value <vertex> <x1> ... <xn>
        slope <edge> <s1> ... <sn>       # optional, derived from values when absent
    """
    records = list(_records(text))
    header = _header(records, "tropicalization")
    _arity(header, 3)
    if header[1] != g.name:
        raise ReferentialError(f"line {header[1].line}: tropicalization of {header[1]!r}, not of {g.name!r}")
    n = parse_int(header[2])
    if n < 1:
        raise _fail("dimension must be positive", header[2])
    values: Dict[str, Tuple[Fraction, ...]] = {}
    slopes: Dict[str, Tuple[Fraction, ...]] = {}
    for number, _, tokens in records[1:]:
        kind = tokens[0]
        if kind not in ("value", "slope"):
            raise _fail(f"unknown tropicalization record {kind!r}", kind)
        _arity(tokens, n + 2)
        known = g.has_vertex(tokens[1]) if kind == "value" else g.has_edge(tokens[1])
        if not known:
            raise ReferentialError(f"line {number}, column {tokens[1].column}: unknown {'vertex' if kind == 'value' else 'edge'} {tokens[1]!r}")
        (values if kind == "value" else slopes)[str(tokens[1])] = tuple(parse_rational(t) for t in tokens[2:])
    missing = [vid for vid in g.vertex_ids if vid not in values]
    if missing:
        raise ReferentialError(f"tropicalization has no values at vertices {missing}")
    components = []
    for i in range(n):
        vertex_values = {vid: values[vid][i] for vid in g.vertex_ids}
        edge_slopes = {
            e.id: slopes[e.id][i] if e.id in slopes else (vertex_values[e.head] - vertex_values[e.tail]) / e.length
            for e in g.edges
        }
        components.append(HarmonicFunction(vertex_values=vertex_values, slopes=edge_slopes))
    return HarmonicTropicalization(graph=g.name, components=tuple(components))


def serialize_tropicalization(h: HarmonicTropicalization, g: WeightedMetricGraph) -> str:
    lines = [f"tropicalization {h.graph} {h.dimension}"]
    lines += [f"value {vid} " + " ".join(format_rational(x) for x in h.point(vid)) for vid in g.vertex_ids]
    lines += [f"slope {eid} " + " ".join(format_rational(x) for x in h.slope_vector(eid)) for eid in g.edge_ids]
    return "\n".join(lines) + "\n"


def parse_lagerberg(text: str) -> LagerbergPolyForm:
    """
    Read a polynomial Lagerberg form on Q^n.

        lagerberg <n> <p,q>
        coefficient <index> <polynomial in x1..xn>

    The index is '-' for functions, 'i' for (1,0)/(0,1) and 'i,j' for (1,1).
    """
    records = list(_records(text))
    header = _header(records, "lagerberg")
    _arity(header, 3)
    n = parse_int(header[1])
    if n < 1:
        raise _fail("dimension must be positive", header[1])
    bidegree = _bidegree(header[2])
    xs = coordinate_symbols(n)
    coefficients = {}
    for number, content, tokens in records[1:]:
        if tokens[0] != "coefficient":
            raise _fail(f"unknown lagerberg record {tokens[0]!r}", tokens[0])
        _arity(tokens, 3, len(tokens))
        index = tokens[1]
        if index == "-":
            key: Tuple[int, ...] = ()
        elif re.match(r"^\d+(,\d+)?$", index):
            key = tuple(int(i) for i in index.split(","))
        else:
            raise _fail(f"bad coefficient index {index!r}", index)
        if len(key) != sum(bidegree) or any(not 1 <= i <= n for i in key):
            raise _fail(f"index {index!r} does not fit bidegree {bidegree} on Q^{n}", index)
        source = content[tokens[2].column - 1:].strip()
        try:
            coefficients[key] = parse_expr_exact(source, xs)
        except (SympifyError, SyntaxError, TypeError, PreconditionError) as exc:
            raise _fail(f"cannot read coefficient {source!r}: {exc}", tokens[2]) from None
    return _build(LagerbergPolyForm, records[0][0], dimension=n, bidegree=bidegree, coefficients=coefficients)


def serialize_lagerberg(eta: LagerbergPolyForm) -> str:
    lines = [f"lagerberg {eta.dimension} {eta.bidegree[0]},{eta.bidegree[1]}"]
    for key in sorted(eta.coefficients):
        index = ",".join(str(i) for i in key) or "-"
        lines.append(f"coefficient {index} {sstr(eta.coefficients[key], order='lex')}")
    return "\n".join(lines) + "\n"


def parse_skeleton(text: str) -> SkeletonDescription:
    """
    Read semistable reduction data.

        skeleton <name>
        component <id> [nonproper]
        node <id> <component> <component> <residue degree> <modulus valuation>
    """
    records = list(_records(text))
    header = _header(records, "skeleton")
    _arity(header, 2)
    components: List[SkeletonComponent] = []
    points: List[SingularPoint] = []
    for number, _, tokens in records[1:]:
        kind = tokens[0]
        if kind == "component":
            _arity(tokens, 2, 3)
            if len(tokens) == 3 and tokens[2] != "nonproper":
                raise _fail(f"expected 'nonproper', got {tokens[2]!r}", tokens[2])
            components.append(SkeletonComponent(id=str(tokens[1]), proper=len(tokens) == 2))
        elif kind == "node":
            _arity(tokens, 6)
            points.append(_build(
                SingularPoint, number, id=str(tokens[1]), first=str(tokens[2]), second=str(tokens[3]),
                residue_degree=parse_int(tokens[4]), modulus_valuation=parse_rational(tokens[5]),
            ))
        else:
            raise _fail(f"unknown skeleton record {kind!r}", kind)
    return _build(
        SkeletonDescription, records[0][0], name=str(header[1]), components=tuple(components), singular_points=tuple(points)
    )


def serialize_skeleton(d: SkeletonDescription) -> str:
    lines = [f"skeleton {d.name}"]
    lines += [f"component {c.id}" + ("" if c.proper else " nonproper") for c in d.components]
    lines += [
        f"node {p.id} {p.first} {p.second} {p.residue_degree} {format_rational(p.modulus_valuation)}"
        for p in d.singular_points
    ]
    return "\n".join(lines) + "\n"
