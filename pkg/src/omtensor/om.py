"""OpenMath object model and the XML encoding subset.

Supported elements: OMOBJ, OMA, OMS, OMV, OMI, OMF.  OMBIND/OMBVAR are
accepted only in the fixed explicit-summation shape::

    <OMA>
      <OMS cd="arith1" name="sum"/>
      <OMA><OMS cd="interval1" name="integer_interval"/> lo hi </OMA>
      <OMBIND><OMS cd="fns1" name="lambda"/><OMBVAR><OMV name="j"/></OMBVAR> body </OMBIND>
    </OMA>

which maps onto :class:`SumBinder`.
"""

from __future__ import annotations

import math
import re
import struct
import xml.parsers.expat
from dataclasses import dataclass, field
from typing import Union

from .errors import BadName, UnsupportedElement, XmlSyntax

OM_NS = "http://www.openmath.org/OpenMath"

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*\Z")

TENSOR1_SYMBOLS = (
    "tuple",
    "tuple_selector",
    "Cartesian",
    "unit_Cartesian",
    "Kronecker_tensor",
    "basis_selector",
    "tensor_selector",
    "contra_index",
    "covar_index",
    "metric_tensor",
    "Levi-Civita",
)
# reserved frame value; not one of the published symbols
UNSPECIFIED = "unspecified"
ARITH1_SYMBOLS = ("plus", "minus", "times", "divide", "power", "unary_minus", "abs", "root", "sum")

SUM = ("arith1", "sum")
INTERVAL = ("interval1", "integer_interval")
LAMBDA = ("fns1", "lambda")


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int
    line: int = 1
    column: int = 1

    def __post_init__(self):
        if not (0 <= self.start <= self.end):
            raise ValueError(f"bad span offsets {self.start}..{self.end}")
        if self.line < 1 or self.column < 1:
            raise ValueError("line and column are 1-based")

    def contains(self, other: SourceSpan) -> bool:
        return self.start <= other.start and other.end <= self.end


def _span_field():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Symbol:
    cd: str
    name: str
    span: SourceSpan | None = _span_field()

    def __post_init__(self):
        for part in (self.cd, self.name):
            if not NAME_RE.match(part):
                raise BadName(f"invalid OpenMath name {part!r}", self.span)


@dataclass(frozen=True)
class Variable:
    name: str
    span: SourceSpan | None = _span_field()

    def __post_init__(self):
        if not NAME_RE.match(self.name):
            raise BadName(f"invalid variable name {self.name!r}", self.span)


@dataclass(frozen=True)
class Integer:
    value: int
    span: SourceSpan | None = _span_field()


@dataclass(frozen=True)
class Float:
    value: float
    span: SourceSpan | None = _span_field()


@dataclass(frozen=True)
class Application:
    head: OMNode
    args: tuple[OMNode, ...]
    span: SourceSpan | None = _span_field()

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if not self.args:
            raise ValueError("application needs at least one argument")
        if not isinstance(self.head, (Symbol, Application)):
            raise ValueError("application head must be a symbol or application")


@dataclass(frozen=True)
class SumBinder:
    var: str
    lower: OMNode
    upper: OMNode
    body: OMNode
    span: SourceSpan | None = _span_field()

    def __post_init__(self):
        if not NAME_RE.match(self.var):
            raise BadName(f"invalid bound variable name {self.var!r}", self.span)


OMNode = Union[Symbol, Variable, Integer, Float, Application, SumBinder]


def sym(name: str, cd: str = "tensor1") -> Symbol:
    return Symbol(cd, name)


def apply(head: str | Symbol, *args: OMNode) -> Application:
    if isinstance(head, str):
        head = sym(head)
    return Application(head, tuple(args))


def head_is(node: OMNode, cd: str, name: str) -> bool:
    return (
        isinstance(node, Application)
        and isinstance(node.head, Symbol)
        and node.head.cd == cd
        and node.head.name == name
    )


def children(node: OMNode) -> tuple[OMNode, ...]:
    if isinstance(node, Application):
        return (node.head, *node.args)
    if isinstance(node, SumBinder):
        return (node.lower, node.upper, node.body)
    return ()


def walk(node: OMNode):
    """Pre-order traversal."""
    yield node
    for c in children(node):
        yield from walk(c)


# --------------------------------------------------------------------------
# XML parsing


@dataclass
class _Elem:
    tag: str
    attrs: dict
    span_start: tuple[int, int, int]
    children: list = field(default_factory=list)
    text: str = ""
    end: int = 0
    empty_end: int | None = None

    def span(self) -> SourceSpan:
        b, line, col = self.span_start
        return SourceSpan(b, self.end, line, col)


# a start tag; quoted attribute values cannot contain their own quote
_START_TAG = re.compile(rb"""<[^\s/>]+(?:\s+[^\s=/>]+\s*=\s*(?:"[^"]*"|'[^']*'))*\s*(/?)>""")


def _read_tree(data: bytes) -> _Elem:
    parser = xml.parsers.expat.ParserCreate("UTF-8", namespace_separator=" ")
    stack: list[_Elem] = []
    root: list[_Elem] = []

    def start(name, attrs):
        ns, _, local = name.rpartition(" ")
        if ns and ns != OM_NS:
            raise UnsupportedElement(f"element {local!r} in foreign namespace {ns!r}", _here())
        at = parser.CurrentByteIndex
        el = _Elem(local, attrs, (at, parser.CurrentLineNumber, parser.CurrentColumnNumber + 1))
        m = _START_TAG.match(data, at)
        if m and m.group(1):
            el.empty_end = m.end()
        if stack:
            stack[-1].children.append(el)
        else:
            root.append(el)
        stack.append(el)

    def end(name):
        el = stack.pop()
        if el.empty_end is not None:
            el.end = el.empty_end
        else:
            # expat reports the start of "</tag>"
            el.end = data.index(b">", parser.CurrentByteIndex) + 1

    def chars(text):
        if stack:
            stack[-1].text += text

    def _here():
        return SourceSpan(parser.CurrentByteIndex, parser.CurrentByteIndex, parser.CurrentLineNumber, parser.CurrentColumnNumber + 1)

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    try:
        parser.Parse(data, True)
    except xml.parsers.expat.ExpatError as exc:
        line, col = exc.lineno, exc.offset + 1
        raise XmlSyntax(
            f"malformed XML: {xml.parsers.expat.ErrorString(exc.code)}",
            SourceSpan(_byte_offset(data, line, col), _byte_offset(data, line, col), line, col),
        ) from None
    return root[0]


def _byte_offset(data: bytes, line: int, col: int) -> int:
    lines = data.split(b"\n")
    off = sum(len(l) + 1 for l in lines[: line - 1])
    return min(off + col - 1, len(data))


def _no_text(el: _Elem):
    if el.text.strip():
        raise XmlSyntax(f"unexpected character data in <{el.tag}>", el.span())


def _attr(el: _Elem, name: str) -> str:
    try:
        return el.attrs[name]
    except KeyError:
        raise XmlSyntax(f"<{el.tag}> is missing attribute {name!r}", el.span()) from None


def _parse_int(text: str, span) -> int:
    t = text.strip()
    try:
        if re.fullmatch(r"-?x[0-9A-Fa-f]+", t):
            sign = -1 if t.startswith("-") else 1
            return sign * int(t.lstrip("-")[1:], 16)
        if re.fullmatch(r"-?[0-9]+", t):
            return int(t)
    except ValueError:
        pass
    raise XmlSyntax(f"invalid OMI content {text!r}", span)


_SPECIAL_FLOATS = {"INF": math.inf, "-INF": -math.inf, "NaN": math.nan}


def _parse_float(el: _Elem) -> float:
    if "dec" in el.attrs:
        s = el.attrs["dec"].strip()
        if s in _SPECIAL_FLOATS:
            return _SPECIAL_FLOATS[s]
        try:
            return float(s)
        except ValueError:
            raise XmlSyntax(f"invalid OMF dec value {s!r}", el.span()) from None
    if "hex" in el.attrs:
        try:
            return _unpack_hex(el.attrs["hex"])
        except ValueError:
            raise XmlSyntax(f"invalid OMF hex value {el.attrs['hex']!r}", el.span()) from None
    raise XmlSyntax("<OMF> needs a dec or hex attribute", el.span())


def _unpack_hex(h: str) -> float:
    raw = bytes.fromhex(h.strip())
    if len(raw) != 8:
        raise ValueError(h)
    return struct.unpack(">d", raw)[0]


def _convert(el: _Elem) -> OMNode:
    span = el.span()
    tag = el.tag
    if tag == "OMI":
        if el.children:
            raise XmlSyntax("<OMI> cannot have child elements", span)
        return Integer(_parse_int(el.text, span), span)
    if tag == "OMF":
        _no_text(el)
        return Float(_parse_float(el), span)
    if tag == "OMV":
        _no_text(el)
        return Variable(_attr(el, "name"), span)
    if tag == "OMS":
        _no_text(el)
        return Symbol(_attr(el, "cd"), _attr(el, "name"), span)
    if tag == "OMA":
        _no_text(el)
        if len(el.children) < 2:
            raise XmlSyntax("<OMA> needs a head and at least one argument", span)
        head = _convert(el.children[0])
        if isinstance(head, Symbol) and (head.cd, head.name) == SUM:
            return _convert_sum(el, span)
        if not isinstance(head, (Symbol, Application)):
            raise XmlSyntax("<OMA> head must be OMS or OMA", head.span)
        return Application(head, tuple(_convert(c) for c in el.children[1:]), span)
    if tag in ("OMBIND", "OMBVAR"):
        raise UnsupportedElement(f"<{tag}> is only supported inside explicit summation", span)
    raise UnsupportedElement(f"unsupported element <{tag}>", span)


def _convert_sum(el: _Elem, span) -> SumBinder:
    bad = UnsupportedElement(
        "summation must have the shape sum(integer_interval(lo, hi), lambda[j](body))", span
    )
    if len(el.children) != 3:
        raise bad
    rng, bind = el.children[1], el.children[2]
    if rng.tag != "OMA" or bind.tag != "OMBIND" or len(rng.children) != 3 or len(bind.children) != 3:
        raise bad
    rhead = _convert(rng.children[0])
    if not (isinstance(rhead, Symbol) and (rhead.cd, rhead.name) == INTERVAL):
        raise bad
    bhead, bvars, body = bind.children
    lam = _convert(bhead)
    if not (isinstance(lam, Symbol) and (lam.cd, lam.name) == LAMBDA):
        raise bad
    if bvars.tag != "OMBVAR" or len(bvars.children) != 1 or bvars.children[0].tag != "OMV":
        raise bad
    for e in (rng, bind, bvars):
        _no_text(e)
    var = _convert(bvars.children[0])
    return SumBinder(var.name, _convert(rng.children[1]), _convert(rng.children[2]), _convert(body), span)


def parse_xml(text: str | bytes) -> OMNode:
    """Parse an ``<OMOBJ>`` document into an :class:`OMNode` tree."""
    data = text.encode("utf-8") if isinstance(text, str) else text
    root = _read_tree(data)
    if root.tag != "OMOBJ":
        raise XmlSyntax(f"root element must be OMOBJ, not {root.tag}", root.span())
    _no_text(root)
    if len(root.children) != 1:
        raise XmlSyntax("<OMOBJ> must contain exactly one object", root.span())
    return _convert(root.children[0])


# --------------------------------------------------------------------------
# canonical XML serialization


def _xml_attr(value: str) -> str:
    return value.replace("&", "&amp;").replace('"', "&quot;").replace("<", "&lt;")


def format_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "INF" if x > 0 else "-INF"
    return repr(float(x))


def _emit(node: OMNode, depth: int, out: list[str]):
    pad = "  " * depth
    if isinstance(node, Integer):
        out.append(f"{pad}<OMI>{node.value}</OMI>")
    elif isinstance(node, Float):
        out.append(f'{pad}<OMF dec="{format_float(node.value)}"/>')
    elif isinstance(node, Variable):
        out.append(f'{pad}<OMV name="{_xml_attr(node.name)}"/>')
    elif isinstance(node, Symbol):
        out.append(f'{pad}<OMS cd="{_xml_attr(node.cd)}" name="{_xml_attr(node.name)}"/>')
    elif isinstance(node, Application):
        out.append(f"{pad}<OMA>")
        for c in (node.head, *node.args):
            _emit(c, depth + 1, out)
        out.append(f"{pad}</OMA>")
    elif isinstance(node, SumBinder):
        inner = "  " * (depth + 1)
        out.append(f"{pad}<OMA>")
        out.append(f'{inner}<OMS cd="{SUM[0]}" name="{SUM[1]}"/>')
        out.append(f"{inner}<OMA>")
        _emit(Symbol(*INTERVAL), depth + 2, out)
        _emit(node.lower, depth + 2, out)
        _emit(node.upper, depth + 2, out)
        out.append(f"{inner}</OMA>")
        out.append(f"{inner}<OMBIND>")
        _emit(Symbol(*LAMBDA), depth + 2, out)
        out.append(f'{inner}  <OMBVAR><OMV name="{_xml_attr(node.var)}"/></OMBVAR>')
        _emit(node.body, depth + 2, out)
        out.append(f"{inner}</OMBIND>")
        out.append(f"{pad}</OMA>")
    else:
        raise TypeError(f"not an OpenMath node: {node!r}")


def serialize_xml(node: OMNode) -> str:
    """Canonical XML: 2-space indent, cd before name, LF line endings."""
    out = [f'<OMOBJ xmlns="{OM_NS}">']
    _emit(node, 1, out)
    out.append("</OMOBJ>")
    return "\n".join(out) + "\n"
