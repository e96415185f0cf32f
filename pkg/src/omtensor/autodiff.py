"""Scalar expression trees and forward-mode differentiation.

Chart maps are written as :class:`ScalarExpr` trees over coordinate slots.
:func:`eval_dual` pushes :class:`Dual` numbers through a tree, giving the
value and exact partial derivatives in one pass.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DomainError


class Dual:
    """Value plus a fixed-length vector of partial derivatives."""

    __slots__ = ("value", "partials")

    def __init__(self, value: float, partials):
        self.value = float(value)
        self.partials = np.asarray(partials, dtype=float)

    @classmethod
    def constant(cls, value: float, n: int) -> Dual:
        return cls(value, np.zeros(n))

    @classmethod
    def variable(cls, value: float, slot: int, n: int) -> Dual:
        d = np.zeros(n)
        d[slot] = 1.0
        return cls(value, d)

    def _check(self, other: Dual):
        if self.partials.shape != other.partials.shape:
            raise ValueError(
                f"dual numbers seeded with different dimensions ({len(self.partials)} vs {len(other.partials)})"
            )

    def __add__(self, other: Dual) -> Dual:
        self._check(other)
        return Dual(self.value + other.value, self.partials + other.partials)

    def __sub__(self, other: Dual) -> Dual:
        self._check(other)
        return Dual(self.value - other.value, self.partials - other.partials)

    def __mul__(self, other: Dual) -> Dual:
        self._check(other)
        return Dual(self.value * other.value, self.value * other.partials + other.value * self.partials)

    def __truediv__(self, other: Dual) -> Dual:
        self._check(other)
        q = self.value / other.value
        return Dual(q, (self.partials - q * other.partials) / other.value)

    def __neg__(self) -> Dual:
        return Dual(-self.value, -self.partials)

    def __repr__(self):
        return f"Dual({self.value!r}, {self.partials.tolist()!r})"


# ---------------------------------------------------------------------------
# expression tree


class _Ops:
    """Operator sugar so chart maps can be written as ordinary arithmetic."""

    def __add__(self, other):
        return Add(self, _lift(other))

    def __radd__(self, other):
        return Add(_lift(other), self)

    def __sub__(self, other):
        return Sub(self, _lift(other))

    def __rsub__(self, other):
        return Sub(_lift(other), self)

    def __mul__(self, other):
        return Mul(self, _lift(other))

    def __rmul__(self, other):
        return Mul(_lift(other), self)

    def __truediv__(self, other):
        return Div(self, _lift(other))

    def __rtruediv__(self, other):
        return Div(_lift(other), self)

    def __neg__(self):
        return Neg(self)

    def __pow__(self, n: int):
        return Pow(self, n)


def _lift(x) -> ScalarExpr:
    if isinstance(x, _Ops):
        return x
    return Const(float(x))


@dataclass(frozen=True, eq=True)
class Const(_Ops):
    value: float


@dataclass(frozen=True)
class Var(_Ops):
    slot: int

    def __post_init__(self):
        if self.slot < 0:
            raise ValueError("variable slots are 0-based and nonnegative")


@dataclass(frozen=True)
class Add(_Ops):
    a: ScalarExpr
    b: ScalarExpr


@dataclass(frozen=True)
class Sub(_Ops):
    a: ScalarExpr
    b: ScalarExpr


@dataclass(frozen=True)
class Mul(_Ops):
    a: ScalarExpr
    b: ScalarExpr


@dataclass(frozen=True)
class Div(_Ops):
    a: ScalarExpr
    b: ScalarExpr


@dataclass(frozen=True)
class Neg(_Ops):
    a: ScalarExpr


@dataclass(frozen=True)
class Pow(_Ops):
    a: ScalarExpr
    n: int

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)):
            raise TypeError("Pow takes an integer exponent; use Exp(Mul(b, Ln(a))) for real powers")


@dataclass(frozen=True)
class Sin(_Ops):
    a: ScalarExpr


@dataclass(frozen=True)
class Cos(_Ops):
    a: ScalarExpr


@dataclass(frozen=True)
class Tan(_Ops):
    a: ScalarExpr


@dataclass(frozen=True)
class Exp(_Ops):
    a: ScalarExpr


@dataclass(frozen=True)
class Ln(_Ops):
    a: ScalarExpr


@dataclass(frozen=True)
class Sqrt(_Ops):
    a: ScalarExpr


@dataclass(frozen=True)
class Atan2(_Ops):
    y: ScalarExpr
    x: ScalarExpr


ScalarExpr = Union[Const, Var, Add, Sub, Mul, Div, Neg, Pow, Sin, Cos, Tan, Exp, Ln, Sqrt, Atan2]

UNARY = {"sin": Sin, "cos": Cos, "tan": Tan, "exp": Exp, "ln": Ln, "sqrt": Sqrt}
_UNARY_NAME = {v: k for k, v in UNARY.items()}


def max_slot(expr: ScalarExpr) -> int:
    """Largest variable slot used, or -1 for a constant expression."""
    if isinstance(expr, Var):
        return expr.slot
    if isinstance(expr, Const):
        return -1
    if isinstance(expr, Atan2):
        return max(max_slot(expr.y), max_slot(expr.x))
    if isinstance(expr, (Add, Sub, Mul, Div)):
        return max(max_slot(expr.a), max_slot(expr.b))
    return max_slot(expr.a)


# ---------------------------------------------------------------------------
# evaluation


def _check_point(expr, point):
    if max_slot(expr) >= len(point):
        raise ValueError(f"expression uses slot {max_slot(expr)} but the point has {len(point)} coordinates")


def eval_scalar(expr: ScalarExpr, point: Sequence[float]) -> float:
    point = [float(p) for p in point]
    _check_point(expr, point)
    return _eval(expr, point)


def _eval(e, p) -> float:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return p[e.slot]
    if isinstance(e, Add):
        return _eval(e.a, p) + _eval(e.b, p)
    if isinstance(e, Sub):
        return _eval(e.a, p) - _eval(e.b, p)
    if isinstance(e, Mul):
        return _eval(e.a, p) * _eval(e.b, p)
    if isinstance(e, Div):
        den = _eval(e.b, p)
        if den == 0.0:
            raise DomainError("division by zero", e)
        return _eval(e.a, p) / den
    if isinstance(e, Neg):
        return -_eval(e.a, p)
    if isinstance(e, Pow):
        base = _eval(e.a, p)
        if base == 0.0 and e.n < 0:
            raise DomainError("zero raised to a negative power", e)
        return _guard(lambda: base ** int(e.n), e)
    if isinstance(e, Atan2):
        y, x = _eval(e.y, p), _eval(e.x, p)
        if x == 0.0 and y == 0.0:
            raise DomainError("atan2(0, 0) is undefined", e)
        return math.atan2(y, x)
    a = _eval(e.a, p)
    if isinstance(e, Sin):
        return math.sin(a)
    if isinstance(e, Cos):
        return math.cos(a)
    if isinstance(e, Tan):
        if math.cos(a) == 0.0:
            raise DomainError("tan pole", e)
        return math.tan(a)
    if isinstance(e, Exp):
        return _guard(lambda: math.exp(a), e)
    if isinstance(e, Ln):
        if a <= 0.0:
            raise DomainError(f"ln of nonpositive value {a!r}", e)
        return math.log(a)
    if isinstance(e, Sqrt):
        if a < 0.0:
            raise DomainError(f"sqrt of negative value {a!r}", e)
        return math.sqrt(a)
    raise TypeError(f"not a scalar expression: {e!r}")


def _guard(fn, e):
    try:
        return fn()
    except OverflowError:
        raise DomainError("overflow", e) from None


def eval_dual(expr: ScalarExpr, point: Sequence[float], seed: int | None = None) -> Dual:
    """Value and derivatives of ``expr`` at ``point``.

    With ``seed=None`` every coordinate is seeded, so ``partials`` is the
    full gradient.  With an integer seed only that direction is seeded and
    ``partials[seed]`` holds the single directional derivative.
    """
    point = [float(p) for p in point]
    _check_point(expr, point)
    n = len(point)
    if seed is None:
        args = [Dual.variable(v, i, n) for i, v in enumerate(point)]
    else:
        if not 0 <= seed < n:
            raise ValueError(f"seed {seed} out of range for {n} coordinates")
        args = [Dual.variable(v, i, n) if i == seed else Dual.constant(v, n) for i, v in enumerate(point)]
    return _dual(expr, args, n)


def _dual(e, p, n) -> Dual:
    if isinstance(e, Const):
        return Dual.constant(e.value, n)
    if isinstance(e, Var):
        return p[e.slot]
    if isinstance(e, Add):
        return _dual(e.a, p, n) + _dual(e.b, p, n)
    if isinstance(e, Sub):
        return _dual(e.a, p, n) - _dual(e.b, p, n)
    if isinstance(e, Mul):
        return _dual(e.a, p, n) * _dual(e.b, p, n)
    if isinstance(e, Div):
        den = _dual(e.b, p, n)
        if den.value == 0.0:
            raise DomainError("division by zero", e)
        return _dual(e.a, p, n) / den
    if isinstance(e, Neg):
        return -_dual(e.a, p, n)
    if isinstance(e, Pow):
        b = _dual(e.a, p, n)
        k = int(e.n)
        if b.value == 0.0 and k < 0:
            raise DomainError("zero raised to a negative power", e)
        if k == 0:
            return Dual.constant(1.0, n)
        val = _guard(lambda: b.value**k, e)
        return Dual(val, k * _guard(lambda: b.value ** (k - 1), e) * b.partials)
    if isinstance(e, Atan2):
        y, x = _dual(e.y, p, n), _dual(e.x, p, n)
        r2 = x.value * x.value + y.value * y.value
        if r2 == 0.0:
            raise DomainError("atan2(0, 0) is undefined", e)
        return Dual(math.atan2(y.value, x.value), (x.value * y.partials - y.value * x.partials) / r2)
    a = _dual(e.a, p, n)
    v = a.value
    if isinstance(e, Sin):
        return Dual(math.sin(v), math.cos(v) * a.partials)
    if isinstance(e, Cos):
        return Dual(math.cos(v), -math.sin(v) * a.partials)
    if isinstance(e, Tan):
        c = math.cos(v)
        if c == 0.0:
            raise DomainError("tan pole", e)
        return Dual(math.tan(v), a.partials / (c * c))
    if isinstance(e, Exp):
        ev = _guard(lambda: math.exp(v), e)
        return Dual(ev, ev * a.partials)
    if isinstance(e, Ln):
        if v <= 0.0:
            raise DomainError(f"ln of nonpositive value {v!r}", e)
        return Dual(math.log(v), a.partials / v)
    if isinstance(e, Sqrt):
        if v < 0.0:
            raise DomainError(f"sqrt of negative value {v!r}", e)
        if v == 0.0:
            raise DomainError("sqrt is not differentiable at 0", e)
        s = math.sqrt(v)
        return Dual(s, a.partials / (2.0 * s))
    raise TypeError(f"not a scalar expression: {e!r}")


def gradient(expr: ScalarExpr, point: Sequence[float]) -> np.ndarray:
    return eval_dual(expr, point).partials


# ---------------------------------------------------------------------------
# infix text form, used by chart-definition files
#
#   expr   = term { ("+" | "-") term }
#   term   = unary { ("*" | "/") unary }
#   unary  = "-" unary | power
#   power  = atom [ "^" [ "-" ] integer ]
#   atom   = number | "pi" | name | func "(" expr ")" | "atan2" "(" expr "," expr ")" | "(" expr ")"

_SCALAR_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|([A-Za-z_]\w*)|(.))")


class ScalarSyntaxError(ValueError):
    code = "CompactSyntax"


def _scalar_tokens(text: str):
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _SCALAR_TOKEN.match(text, pos)
        num, name, op = m.groups()
        if num is not None:
            out.append(("num", num, m.start(1)))
        elif name is not None:
            out.append(("name", name, m.start(2)))
        else:
            out.append(("op", op, m.start(3)))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


def parse_scalar(text: str, names: Sequence[str] | None = None) -> ScalarExpr:
    """Parse infix text into a :class:`ScalarExpr`.

    Coordinates are referenced by ``names`` (slot = position in the list);
    ``x0``, ``x1``, ... always work as slot references.
    """
    toks = _scalar_tokens(text)
    slots = {nm: i for i, nm in enumerate(names or ())}
    pos = 0

    def peek():
        return toks[pos]

    def advance():
        nonlocal pos
        pos += 1
        return toks[pos - 1]

    def expect(op):
        t = advance()
        if t[1] != op:
            raise ScalarSyntaxError(f"expected {op!r} at offset {t[2]} in {text!r}")

    def expr():
        node = term()
        while peek()[1] in ("+", "-") and peek()[0] == "op":
            op = advance()[1]
            rhs = term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term():
        node = unary()
        while peek()[1] in ("*", "/") and peek()[0] == "op":
            op = advance()[1]
            rhs = unary()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def unary():
        if peek() == ("op", "-", peek()[2]):
            advance()
            if peek()[0] == "num" and toks[pos + 1][1] != "^":
                # "-2.5" is a negative literal; "-(2.5)" is a negation
                return Const(-float(advance()[1]))
            return Neg(unary())
        return power()

    def power():
        base = atom()
        if peek()[1] == "^":
            advance()
            sign = 1
            if peek()[1] == "-":
                advance()
                sign = -1
            t = advance()
            if t[0] != "num" or not t[1].isdigit():
                raise ScalarSyntaxError(f"exponent must be an integer literal at offset {t[2]} in {text!r}")
            return Pow(base, sign * int(t[1]))
        return base

    def atom():
        kind, val, off = advance()
        if kind == "num":
            return Const(float(val))
        if kind == "name":
            if val in UNARY or val == "atan2":
                expect("(")
                a = expr()
                if val == "atan2":
                    expect(",")
                    b = expr()
                    expect(")")
                    return Atan2(a, b)
                expect(")")
                return UNARY[val](a)
            if val == "pi":
                return Const(math.pi)
            if val in slots:
                return Var(slots[val])
            m = re.fullmatch(r"x(\d+)", val)
            if m:
                return Var(int(m.group(1)))
            raise ScalarSyntaxError(f"unknown name {val!r} at offset {off} in {text!r}")
        if val == "(":
            node = expr()
            expect(")")
            return node
        raise ScalarSyntaxError(f"unexpected {val or 'end of input'!r} at offset {off} in {text!r}")

    node = expr()
    if peek()[0] != "eof":
        raise ScalarSyntaxError(f"trailing input at offset {peek()[2]} in {text!r}")
    return node


def format_scalar(expr: ScalarExpr, names: Sequence[str] | None = None) -> str:
    """Fully parenthesised infix text; ``parse_scalar`` reads it back."""
    if isinstance(expr, Const):
        return repr(expr.value) if math.copysign(1.0, expr.value) > 0 else f"(-{repr(-expr.value)})"
    if isinstance(expr, Var):
        return names[expr.slot] if names else f"x{expr.slot}"
    if isinstance(expr, Atan2):
        return f"atan2({format_scalar(expr.y, names)}, {format_scalar(expr.x, names)})"
    if isinstance(expr, Neg):
        return f"(-({format_scalar(expr.a, names)}))"
    if isinstance(expr, Pow):
        return f"({format_scalar(expr.a, names)}^{expr.n})"
    for cls, op in ((Add, "+"), (Sub, "-"), (Mul, "*"), (Div, "/")):
        if isinstance(expr, cls):
            return f"({format_scalar(expr.a, names)} {op} {format_scalar(expr.b, names)})"
    return f"{_UNARY_NAME[type(expr)]}({format_scalar(expr.a, names)})"
