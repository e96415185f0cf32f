"""Compact text syntax for OpenMath objects.

Grammar (EBNF)::

    expr        = summation | application | symbol | number | variable ;
    summation   = "sum" "(" ident "=" expr ".." expr "," expr ")" ;
    application = name "(" expr { "," expr } ")" ;
    name        = ident | ident ":" ident ;
    symbol      = ident ":" ident ;
    variable    = ident ;
    number      = [ "-" ] digit { digit } [ "." digit { digit } ] [ exponent ] ;
    exponent    = ( "e" | "E" ) [ "+" | "-" ] digit { digit } ;
    ident       = ( letter | "_" ) { letter | digit | "_" | "-" } ;

A number containing "." or an exponent is a Float, otherwise an Integer.
Unqualified application heads resolve to tensor1 first, then arith1.
"""

from __future__ import annotations

import math
import re

from .errors import AmbiguousName, CompactSyntax
from .om import (
    ARITH1_SYMBOLS,
    TENSOR1_SYMBOLS,
    UNSPECIFIED,
    Application,
    Float,
    Integer,
    OMNode,
    SourceSpan,
    SumBinder,
    Symbol,
    Variable,
    format_float,
)

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_\-]*)
  | (?P<range>\.\.)
  | (?P<punct>[(),:=])
    """,
    re.VERBOSE,
)

_TENSOR1 = set(TENSOR1_SYMBOLS) | {UNSPECIFIED}
_ARITH1 = set(ARITH1_SYMBOLS)


class _Tok:
    __slots__ = ("kind", "text", "start", "end")

    def __init__(self, kind, text, start, end):
        self.kind, self.text, self.start, self.end = kind, text, start, end


class _Parser:
    def __init__(self, text: str):
        self.text = text
        # char offset -> byte offset
        self._bytes = [0]
        for ch in text:
            self._bytes.append(self._bytes[-1] + len(ch.encode("utf-8")))
        self.toks = self._lex()
        self.pos = 0

    def span(self, start: int, end: int) -> SourceSpan:
        line = self.text.count("\n", 0, start) + 1
        col = start - (self.text.rfind("\n", 0, start) + 1) + 1
        return SourceSpan(self._bytes[start], self._bytes[end], line, col)

    def _lex(self) -> list[_Tok]:
        toks, i = [], 0
        while i < len(self.text):
            m = _TOKEN.match(self.text, i)
            if not m:
                raise CompactSyntax(f"unexpected character {self.text[i]!r}", self.span(i, i + 1))
            kind = m.lastgroup
            if kind != "ws":
                toks.append(_Tok(kind, m.group(), m.start(), m.end()))
            i = m.end()
        toks.append(_Tok("eof", "", len(self.text), len(self.text)))
        return toks

    def peek(self, k: int = 0) -> _Tok:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def take(self, text: str | None = None, kind: str | None = None) -> _Tok:
        tok = self.peek()
        if (text is not None and tok.text != text) or (kind is not None and tok.kind != kind):
            want = repr(text) if text is not None else kind
            got = repr(tok.text) if tok.kind != "eof" else "end of input"
            raise CompactSyntax(f"expected {want}, found {got}", self.span(tok.start, tok.end))
        self.pos += 1
        return tok

    def parse(self) -> OMNode:
        node = self.expr()
        self.take(kind="eof")
        return node

    def expr(self) -> OMNode:
        tok = self.peek()
        if tok.kind == "number":
            self.pos += 1
            sp = self.span(tok.start, tok.end)
            if any(c in tok.text for c in ".eE"):
                return Float(float(tok.text), sp)
            return Integer(int(tok.text), sp)
        if tok.kind != "ident":
            got = repr(tok.text) if tok.kind != "eof" else "end of input"
            raise CompactSyntax(f"expected an expression, found {got}", self.span(tok.start, tok.end))
        if tok.text == "sum" and self.peek(1).text == "(" and self.peek(3).text == "=":
            return self.summation()
        self.pos += 1
        if self.peek().text == ":":
            self.pos += 1
            name = self.take(kind="ident")
            head = Symbol(tok.text, name.text, self.span(tok.start, name.end))
        elif self.peek().text == "(":
            head = self.resolve(tok)
        else:
            return Variable(tok.text, self.span(tok.start, tok.end))
        node = head
        while self.peek().text == "(":
            self.take("(")
            args = [self.expr()]
            while self.peek().text == ",":
                self.pos += 1
                args.append(self.expr())
            close = self.take(")")
            node = Application(node, tuple(args), self.span(tok.start, close.end))
        return node

    def resolve(self, tok: _Tok) -> Symbol:
        sp = self.span(tok.start, tok.end)
        if tok.text in _TENSOR1:
            return Symbol("tensor1", tok.text, sp)
        if tok.text in _ARITH1:
            return Symbol("arith1", tok.text, sp)
        raise AmbiguousName(f"{tok.text!r} is not a tensor1 or arith1 symbol; qualify it as cd:name", sp)

    def summation(self) -> SumBinder:
        start = self.take("sum")
        self.take("(")
        var = self.take(kind="ident")
        self.take("=")
        lower = self.expr()
        self.take("..")
        upper = self.expr()
        self.take(",")
        body = self.expr()
        close = self.take(")")
        return SumBinder(var.text, lower, upper, body, self.span(start.start, close.end))


def parse_compact(text: str) -> OMNode:
    return _Parser(text).parse()


def format_compact(node: OMNode) -> str:
    """Inverse of :func:`parse_compact` (always emits qualified symbols)."""
    if isinstance(node, Integer):
        return str(node.value)
    if isinstance(node, Float):
        if not math.isfinite(node.value):
            raise ValueError("non-finite floats have no compact form")
        s = format_float(node.value)
        if not any(c in s for c in ".eE"):
            s += ".0"
        return s
    if isinstance(node, Variable):
        return node.name
    if isinstance(node, Symbol):
        return f"{node.cd}:{node.name}"
    if isinstance(node, Application):
        head = format_compact(node.head)
        return f"{head}({', '.join(format_compact(a) for a in node.args)})"
    if isinstance(node, SumBinder):
        return (
            f"sum({node.var}={format_compact(node.lower)}..{format_compact(node.upper)}, "
            f"{format_compact(node.body)})"
        )
    raise TypeError(f"not an OpenMath node: {node!r}")
