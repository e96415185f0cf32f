"""Validation and evaluation of tensor1 formulas.

``validate`` never raises; it returns diagnostics.  ``evaluate`` assumes a
tree with no Error diagnostics and raises :class:`OMTensorError` subclasses.

Symbol semantics (beyond the obvious arithmetic):

* ``tensor_selector(T, tuple(idx...), F)`` reads a component of ``T`` in
  frame ``F``, transforming first when ``T`` is stored elsewhere.  An index
  whose variance differs from the stored slot is raised or lowered with the
  metric of ``F``.  ``F`` may be a frame name, ``tensor1:unspecified`` or a
  basis tuple literal.  Under ``unspecified`` every frame-bound tensor read
  in one evaluation must share a single frame.
* ``metric_tensor(F)`` is the covariant metric of ``F`` as a tensor;
  ``metric_tensor(F, i, j)`` reads ``g_ij`` (``g^ij`` for contra indexes).
* ``basis_selector(F, covar_index(k))`` is the basis vector ``g_k`` and
  ``basis_selector(F, contra_index(k))`` the dual covector ``g^k``, both in
  Cartesian components.
* ``Cartesian(k)`` is the k-th ambient coordinate of the environment's
  evaluation point; ``unit_Cartesian(k)`` is ``e_k``.
"""

from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import tensor as tc
from .env import Environment
from .errors import (
    ArityMismatch,
    DimMismatch,
    DomainError,
    FrameMismatch,
    FrameRequired,
    IndexCountMismatch,
    IndexOutOfRange,
    OMTensorError,
    TypeMismatch,
    UnboundVariable,
    UnsupportedSymbol,
)
from .om import (
    UNSPECIFIED,
    Application,
    Float,
    Integer,
    OMNode,
    SourceSpan,
    SumBinder,
    Symbol,
    Variable,
)
from .tensor import COVAR, CONTRA, Frame, IndexKind, TensorValue, Variance

# ---------------------------------------------------------------------------
# values


@dataclass(frozen=True)
class Scalar:
    value: float


@dataclass(frozen=True)
class Tensor:
    tensor: TensorValue


@dataclass(frozen=True)
class Tuple:
    items: tuple

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        kinds = {type(v) for v in self.items}
        if len(kinds) > 1:
            raise TypeMismatch(f"tuple elements must be of one kind, got {sorted(k.__name__ for k in kinds)}")


@dataclass(frozen=True)
class Index:
    kind: IndexKind


@dataclass(frozen=True, eq=False)
class FrameRef:
    frame: Frame | None

    def __eq__(self, other):
        if not isinstance(other, FrameRef):
            return NotImplemented
        if self.frame is None or other.frame is None:
            return self.frame is other.frame
        return self.frame.same_as(other.frame)

    __hash__ = None


@dataclass(frozen=True)
class ChartRef:
    chart: tc.Chart


Value = Union[Scalar, Tensor, Tuple, Index, FrameRef, ChartRef]


# ---------------------------------------------------------------------------
# diagnostics


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str
    span: SourceSpan | None = None

    def format(self) -> str:
        where = f"{self.span.line}:{self.span.column}" if self.span else "0:0"
        return f"{self.severity.value} {self.code} {where} {self.message}"

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR


# (min, max) argument counts; None = unbounded
ARITY = {
    ("tensor1", "tuple"): (1, None),
    ("tensor1", "tuple_selector"): (2, 2),
    ("tensor1", "Cartesian"): (1, 1),
    ("tensor1", "unit_Cartesian"): (1, 1),
    ("tensor1", "Kronecker_tensor"): (1, 1),
    ("tensor1", "basis_selector"): (2, 2),
    ("tensor1", "tensor_selector"): (3, 3),
    ("tensor1", "contra_index"): (1, 1),
    ("tensor1", "covar_index"): (1, 1),
    ("tensor1", "metric_tensor"): (1, 3),
    ("tensor1", "Levi-Civita"): (1, 1),
    ("arith1", "plus"): (1, None),
    ("arith1", "times"): (1, None),
    ("arith1", "minus"): (2, 2),
    ("arith1", "divide"): (2, 2),
    ("arith1", "power"): (2, 2),
    ("arith1", "unary_minus"): (1, 1),
    ("arith1", "abs"): (1, 1),
    ("arith1", "root"): (2, 2),
    ("linalg1", "vector_selector"): (2, 2),
}
# symbols meaningful without application
NULLARY = {("tensor1", UNSPECIFIED), ("tensor1", "Kronecker_tensor")}
INDEX_HEADS = {("tensor1", "contra_index"): CONTRA, ("tensor1", "covar_index"): COVAR}


def _key(node) -> tuple[str, str] | None:
    if isinstance(node, Application) and isinstance(node.head, Symbol):
        return (node.head.cd, node.head.name)
    return None


def _index_variance(node) -> Variance | None:
    return INDEX_HEADS.get(_key(node))


class _Validator:
    def __init__(self, env: Environment | None):
        self.env = env
        self.diags: list[Diagnostic] = []
        # free index variable -> [(variance, span)]
        self.index_uses: dict[str, list] = defaultdict(list)
        # id(diagnostic) -> variable name, for UnboundVariable entries
        self.unbound: dict[int, str] = {}

    def error(self, code, msg, node):
        self.diags.append(Diagnostic(Severity.ERROR, code, msg, getattr(node, "span", None)))

    def warn(self, code, msg, node):
        self.diags.append(Diagnostic(Severity.WARNING, code, msg, getattr(node, "span", None)))

    def run(self, node: OMNode) -> list[Diagnostic]:
        self.visit(node, frozenset())
        einstein = {name for name, uses in self.index_uses.items() if len({v for v, _ in uses}) > 1}
        # a free summation index is reported once, as ImplicitEinstein
        self.diags = [d for d in self.diags if self.unbound.get(id(d)) not in einstein]
        for name, uses in self.index_uses.items():
            kinds = {v for v, _ in uses}
            if name in einstein:
                first = uses[0][0]
                span = next(sp for v, sp in uses if v is not first)
                self.diags.append(
                    Diagnostic(
                        Severity.ERROR,
                        "ImplicitEinstein",
                        f"index {name!r} appears both as contra_index and covar_index without an enclosing "
                        f"explicit sum over {name!r}",
                        span,
                    )
                )
        return self.diags

    # -- helpers -------------------------------------------------------------

    def literal_natural(self, node, what: str, upper: int | None = None):
        if isinstance(node, Float):
            self.error("NotNatural", f"{what} must be a natural number, got {node.value!r}", node)
        elif isinstance(node, Integer):
            if node.value < 1 or (upper is not None and node.value > upper):
                rng = f"1..{upper}" if upper is not None else ">= 1"
                self.error("IndexOutOfRange", f"{what} {node.value} outside {rng}", node)

    def static_tensor(self, node) -> tuple[int | None, int | None]:
        """(order, dim) of a tensor-valued node when known without evaluating."""
        env = self.env
        if isinstance(node, Variable) and env is not None and node.name in env.tensors:
            t = env.tensors[node.name]
            return t.order, t.dim
        if isinstance(node, Symbol) and (node.cd, node.name) == ("tensor1", "Kronecker_tensor"):
            return 2, env.ambient_dim() if env else None
        key = _key(node)
        lit = node.args[0].value if key and isinstance(node.args[0], Integer) else None
        if key == ("tensor1", "Kronecker_tensor"):
            return 2, lit
        if key == ("tensor1", "Levi-Civita"):
            return lit, lit
        if key == ("tensor1", "metric_tensor") and len(node.args) == 1:
            return 2, self.static_frame_dim(node.args[0])
        if key == ("tensor1", "basis_selector"):
            return 1, self.static_frame_dim(node.args[0])
        if key == ("tensor1", "unit_Cartesian"):
            return 1, env.ambient_dim() if env else None
        return None, None

    def static_frame_dim(self, node) -> int | None:
        if isinstance(node, Variable) and self.env is not None and node.name in self.env.frames:
            return self.env.frames[node.name].dim
        if _key(node) == ("tensor1", "tuple"):
            return len(node.args)
        return None

    def is_coordinate_tuple(self, node) -> bool:
        if isinstance(node, Variable):
            return self.env is not None and node.name in self.env.tuples
        return _key(node) == ("tensor1", "tuple")

    # -- traversal -----------------------------------------------------------

    def visit(self, node: OMNode, bound: frozenset):
        if isinstance(node, SumBinder):
            for b in (node.lower, node.upper):
                if isinstance(b, Float):
                    self.error("SumBounds", "summation bounds must be integers", b)
                self.visit(b, bound)
            self.visit(node.body, bound | {node.var})
            return
        if isinstance(node, Variable):
            env = self.env
            if env is not None and node.name not in bound and not any(
                node.name in m for m in (env.scalars, env.tensors, env.tuples, env.frames, env.charts)
            ):
                self.error("UnboundVariable", f"variable {node.name!r} is not bound", node)
                self.unbound[id(self.diags[-1])] = node.name
            return
        if isinstance(node, Symbol):
            key = (node.cd, node.name)
            if key in NULLARY:
                return
            if key in ARITY:
                self.error("ArityMismatch", f"{node.cd}:{node.name} must be applied to arguments", node)
            else:
                self.error("UnsupportedSymbol", f"unsupported symbol {node.cd}:{node.name}", node)
            return
        if not isinstance(node, Application):
            return
        key = _key(node)
        if key is None:
            self.error("UnsupportedSymbol", "application heads must be symbols", node.head)
        elif key not in ARITY:
            self.error("UnsupportedSymbol", f"unsupported symbol {key[0]}:{key[1]}", node.head)
        else:
            lo, hi = ARITY[key]
            n = len(node.args)
            if n < lo or (hi is not None and n > hi) or (key == ("tensor1", "metric_tensor") and n == 2):
                want = f"{lo}" if lo == hi else f"{lo} or {hi}" if key[1] == "metric_tensor" else f"at least {lo}"
                self.error("ArityMismatch", f"{key[1]} takes {want} argument(s), got {n}", node)
            else:
                self.check_application(key, node, bound)
        for a in node.args:
            self.visit(a, bound)

    def check_application(self, key, node, bound):
        cd, name = key
        args = node.args
        env = self.env
        if key in INDEX_HEADS:
            arg = args[0]
            self.literal_natural(arg, "index")
            if isinstance(arg, Variable) and arg.name not in bound:
                self.index_uses[arg.name].append((INDEX_HEADS[key], arg.span))
        elif name in ("Cartesian", "unit_Cartesian") and cd == "tensor1":
            self.literal_natural(args[0], f"{name} argument", env.ambient_dim() if env else None)
        elif name in ("Levi-Civita", "Kronecker_tensor") and cd == "tensor1":
            self.literal_natural(args[0], "dimension")
        elif key == ("tensor1", "tuple_selector"):
            tup, idx = args
            if not self.is_coordinate_tuple(tup) and self.is_coordinate_tuple(idx):
                tup, idx = idx, tup
            upper = len(tup.args) if _key(tup) == ("tensor1", "tuple") else None
            if upper is None and isinstance(tup, Variable) and env is not None and tup.name in env.tuples:
                upper = len(env.tuples[tup.name])
            self.literal_natural(idx, "tuple index", upper)
        elif key == ("tensor1", "basis_selector"):
            idx = args[1]
            if _index_variance(idx) is None:
                self.error(
                    "BasisIndexKind",
                    "second argument of basis_selector must be contra_index(...) or covar_index(...)",
                    idx,
                )
            else:
                self.literal_natural(idx.args[0], "basis index", self.static_frame_dim(args[0]))
        elif key == ("tensor1", "tensor_selector"):
            self.check_tensor_selector(node)
        elif key == ("tensor1", "metric_tensor") and len(args) == 3:
            dim = self.static_frame_dim(args[0])
            for a in args[1:]:
                if _index_variance(a) is None:
                    self.error("TypeMismatch", "metric_tensor component access takes index arguments", a)
                else:
                    self.literal_natural(a.args[0], "index", dim)
        elif key == ("linalg1", "vector_selector"):
            if any(self.is_coordinate_tuple(a) for a in args):
                self.warn(
                    "CoordinateTupleNotVector",
                    "vector_selector applied to a coordinate tuple; coordinate tuples are not vectors, "
                    "use tensor1:tuple_selector",
                    node,
                )

    def check_tensor_selector(self, node):
        t, idx, _frame = node.args
        order, dim = self.static_tensor(t)
        if _key(idx) != ("tensor1", "tuple"):
            if _index_variance(idx) is not None or isinstance(idx, (Integer, Float, Symbol)):
                self.error("TypeMismatch", "second argument of tensor_selector must be tuple(...) of indexes", idx)
            return
        for a in idx.args:
            if _index_variance(a) is None and not isinstance(a, Variable):
                self.error("TypeMismatch", "tensor_selector indexes must be contra_index or covar_index", a)
            elif _index_variance(a) is not None and dim is not None:
                self.literal_natural(a.args[0], "index", dim)
        if order is not None and len(idx.args) != order:
            self.error(
                "IndexCountMismatch",
                f"tensor_selector uses {len(idx.args)} index(es) on a tensor of order {order}",
                idx,
            )


def validate(node: OMNode, env: Environment | None = None) -> list[Diagnostic]:
    """Static checks; environment-dependent checks are skipped when ``env`` is None."""
    return _Validator(env).run(node)


# ---------------------------------------------------------------------------
# evaluation


class _Evaluator:
    def __init__(self, env: Environment):
        self.env = env
        # frame fixed by the first tensor read under "unspecified"
        self.implicit: Frame | None = None

    def eval(self, node: OMNode, scope: dict) -> Value:
        try:
            return self._eval(node, scope)
        except OMTensorError as exc:
            if exc.span is None:
                exc.span = getattr(node, "span", None)
            raise

    def _eval(self, node, scope) -> Value:
        if isinstance(node, Integer):
            return Scalar(node.value)
        if isinstance(node, Float):
            return Scalar(node.value)
        if isinstance(node, Variable):
            return self.variable(node, scope)
        if isinstance(node, Symbol):
            key = (node.cd, node.name)
            if key == ("tensor1", UNSPECIFIED):
                return FrameRef(None)
            if key == ("tensor1", "Kronecker_tensor"):
                dim = self.env.ambient_dim()
                if dim is None:
                    raise FrameRequired("bare Kronecker_tensor needs a known dimension; use Kronecker_tensor(n)")
                return Tensor(tc.kronecker(dim))
            raise UnsupportedSymbol(f"cannot evaluate bare symbol {node.cd}:{node.name}")
        if isinstance(node, SumBinder):
            lo = self.natural_or_int(node.lower, scope, "summation bound")
            hi = self.natural_or_int(node.upper, scope, "summation bound")
            acc: Value | None = None
            for k in range(lo, hi + 1):
                term = self.eval(node.body, {**scope, node.var: k})
                acc = term if acc is None else _add(acc, term)
            return acc if acc is not None else Scalar(0)
        if isinstance(node, Application):
            key = _key(node)
            if key is None:
                raise UnsupportedSymbol("application heads must be symbols")
            handler = _HANDLERS.get(key)
            if handler is None:
                raise UnsupportedSymbol(f"unsupported symbol {key[0]}:{key[1]}")
            lo, hi = ARITY[key]
            n = len(node.args)
            if n < lo or (hi is not None and n > hi):
                raise ArityMismatch(f"{key[1]} got {n} argument(s)")
            return handler(self, node, scope)
        raise TypeError(f"not an OpenMath node: {node!r}")

    def variable(self, node: Variable, scope) -> Value:
        name = node.name
        env = self.env
        if name in scope:
            return Scalar(scope[name])
        if name in env.scalars:
            return Scalar(env.scalars[name])
        if name in env.tensors:
            return Tensor(env.tensors[name])
        if name in env.tuples:
            return Tuple(tuple(Scalar(x) for x in env.tuples[name]))
        if name in env.frames:
            return FrameRef(env.frames[name])
        if name in env.charts:
            return ChartRef(env.charts[name])
        raise UnboundVariable(f"variable {name!r} is not bound", node.span)

    # -- typed argument helpers ---------------------------------------------

    def scalar(self, node, scope) -> float:
        v = self.eval(node, scope)
        if isinstance(v, Scalar):
            return v.value
        if isinstance(v, Tensor) and v.tensor.order == 0:
            return float(v.tensor.components[0])
        raise TypeMismatch(f"expected a scalar, got {type(v).__name__}", node.span)

    def natural_or_int(self, node, scope, what) -> int:
        x = self.scalar(node, scope)
        if isinstance(x, bool) or (isinstance(x, float) and not x.is_integer()):
            raise TypeMismatch(f"{what} must be an integer, got {x!r}", node.span)
        return int(x)

    def natural(self, node, scope, what, upper: int | None = None) -> int:
        k = self.natural_or_int(node, scope, what)
        if k < 1 or (upper is not None and k > upper):
            raise IndexOutOfRange(
                f"{what} {k} outside 1..{upper if upper is not None else 'inf'}", k, upper, node.span
            )
        return k

    def tensor(self, node, scope) -> TensorValue:
        v = self.eval(node, scope)
        if isinstance(v, Tensor):
            return v.tensor
        raise TypeMismatch(f"expected a tensor, got {type(v).__name__}", node.span)

    def index(self, node, scope) -> IndexKind:
        v = self.eval(node, scope)
        if isinstance(v, Index):
            return v.kind
        raise TypeMismatch(f"expected contra_index(...) or covar_index(...), got {type(v).__name__}", node.span)

    def frame(self, node, scope) -> Frame | None:
        v = self.eval(node, scope)
        if isinstance(v, FrameRef):
            return v.frame
        if isinstance(v, Tuple):
            return self.basis_frame(v, node)
        raise TypeMismatch(f"expected a frame, got {type(v).__name__}", node.span)

    def basis_frame(self, tup: Tuple, node) -> Frame:
        cols = []
        for item in tup.items:
            if isinstance(item, Tensor) and item.tensor.signature == (CONTRA,):
                t = item.tensor
                cols.append(t.components if t.frame is None else t.frame.basis @ t.components)
            elif isinstance(item, Tuple) and all(isinstance(x, Scalar) for x in item.items):
                cols.append([x.value for x in item.items])
            else:
                raise TypeMismatch("a basis tuple must contain vectors", node.span)
        if any(len(c) != len(cols) for c in cols):
            raise DimMismatch(f"basis tuple of {len(cols)} vectors must have {len(cols)} components each", node.span)
        return Frame.from_basis(np.array(cols, dtype=float).T, name="basis")

    def cartesian_frame(self, dim: int | None = None) -> Frame:
        p = self.env.ambient_point()
        if p is not None and (dim is None or len(p) == dim):
            return tc.cartesian_frame(p, name=f"cartesian{len(p)}")
        dim = dim if dim is not None else self.env.ambient_dim()
        if dim is None:
            raise FrameRequired("no evaluation point or common frame dimension in the environment")
        return Frame.from_basis(np.eye(dim), name=f"cartesian{dim}")


def _add(a: Value, b: Value) -> Value:
    if isinstance(a, Scalar) and isinstance(b, Scalar):
        return Scalar(a.value + b.value)
    if isinstance(a, Tensor) and isinstance(b, Tensor):
        return Tensor(tc.add(a.tensor, b.tensor))
    raise TypeMismatch(f"cannot add {type(a).__name__} and {type(b).__name__}")


def _mul(a: Value, b: Value) -> Value:
    if isinstance(a, Scalar) and isinstance(b, Scalar):
        return Scalar(a.value * b.value)
    if isinstance(a, Scalar) and isinstance(b, Tensor):
        return Tensor(tc.scale(b.tensor, a.value))
    if isinstance(a, Tensor) and isinstance(b, Scalar):
        return Tensor(tc.scale(a.tensor, b.value))
    if isinstance(a, Tensor) and isinstance(b, Tensor):
        return Tensor(tc.tensor_product(a.tensor, b.tensor))
    raise TypeMismatch(f"cannot multiply {type(a).__name__} and {type(b).__name__}")


def _neg(a: Value) -> Value:
    return _mul(Scalar(-1), a) if isinstance(a, Tensor) else Scalar(-_num(a))


def _num(v: Value) -> float:
    if isinstance(v, Scalar):
        return v.value
    raise TypeMismatch(f"expected a scalar, got {type(v).__name__}")


def _checked(fn, what):
    try:
        r = fn()
    except (ZeroDivisionError, OverflowError, ValueError) as exc:
        raise DomainError(f"{what}: {exc}") from None
    if isinstance(r, complex) or (isinstance(r, float) and math.isnan(r)):
        raise DomainError(f"{what} has no real value")
    return r


# -- arith1 ----------------------------------------------------------------


def _plus(ev, node, scope):
    vals = [ev.eval(a, scope) for a in node.args]
    acc = vals[0]
    for v in vals[1:]:
        acc = _add(acc, v)
    return acc


def _times(ev, node, scope):
    vals = [ev.eval(a, scope) for a in node.args]
    acc = vals[0]
    for v in vals[1:]:
        acc = _mul(acc, v)
    return acc


def _minus(ev, node, scope):
    a, b = (ev.eval(x, scope) for x in node.args)
    return _add(a, _neg(b))


def _unary_minus(ev, node, scope):
    return _neg(ev.eval(node.args[0], scope))


def _divide(ev, node, scope):
    a = ev.eval(node.args[0], scope)
    b = ev.scalar(node.args[1], scope)
    if b == 0:
        raise DomainError("division by zero", span=node.span)
    if isinstance(a, Tensor):
        return Tensor(tc.scale(a.tensor, 1.0 / b))
    return Scalar(_checked(lambda: _num(a) / b, "divide"))


def _power(ev, node, scope):
    a, b = ev.scalar(node.args[0], scope), ev.scalar(node.args[1], scope)
    return Scalar(_checked(lambda: a**b, "power"))


def _abs(ev, node, scope):
    return Scalar(abs(ev.scalar(node.args[0], scope)))


def _root(ev, node, scope):
    a, n = ev.scalar(node.args[0], scope), ev.scalar(node.args[1], scope)
    if n == 0:
        raise DomainError("zeroth root", span=node.span)
    if a < 0 and float(n).is_integer() and int(n) % 2 == 1:
        return Scalar(-((-a) ** (1.0 / n)))
    return Scalar(_checked(lambda: a ** (1.0 / n), "root"))


# -- tensor1 ---------------------------------------------------------------


def _tuple(ev, node, scope):
    return Tuple(tuple(ev.eval(a, scope) for a in node.args))


def _select_from_tuple(ev, tup: Tuple, idx_node, scope, what):
    k = ev.natural(idx_node, scope, what, len(tup.items))
    return tup.items[k - 1]


def _tuple_selector(ev, node, scope):
    a, b = node.args
    va = ev.eval(a, scope)
    if isinstance(va, Tuple):
        return _select_from_tuple(ev, va, b, scope, "tuple index")
    vb = ev.eval(b, scope)
    if isinstance(vb, Tuple):
        # index-first argument order
        return _select_from_tuple(ev, vb, a, scope, "tuple index")
    raise TypeMismatch("tuple_selector needs a tuple argument", node.span)


def _cartesian(ev, node, scope):
    p = ev.env.ambient_point()
    if p is None:
        raise FrameRequired("Cartesian(k) needs an evaluation point in the environment", node.span)
    k = ev.natural(node.args[0], scope, "Cartesian coordinate index", len(p))
    return Scalar(float(p[k - 1]))


def _unit_cartesian(ev, node, scope):
    frame = ev.cartesian_frame()
    k = ev.natural(node.args[0], scope, "unit_Cartesian index", frame.dim)
    e = np.zeros(frame.dim)
    e[k - 1] = 1.0
    return Tensor(TensorValue(frame.dim, (CONTRA,), e, frame))


def _kronecker(ev, node, scope):
    n = ev.natural(node.args[0], scope, "dimension")
    return Tensor(tc.kronecker(n))


def _levi_civita(ev, node, scope):
    n = ev.natural(node.args[0], scope, "dimension")
    return Tensor(tc.levi_civita(n))


def _contra_index(ev, node, scope):
    return Index(IndexKind(CONTRA, ev.natural(node.args[0], scope, "index")))


def _covar_index(ev, node, scope):
    return Index(IndexKind(COVAR, ev.natural(node.args[0], scope, "index")))


def _require_frame(ev, node, scope, what) -> Frame:
    f = ev.frame(node, scope)
    if f is None:
        raise FrameRequired(f"{what} depends on the basis; an unspecified frame is not enough", node.span)
    return f


def _metric_tensor(ev, node, scope):
    frame = _require_frame(ev, node.args[0], scope, "metric_tensor")
    if len(node.args) == 1:
        return Tensor(TensorValue(frame.dim, (COVAR, COVAR), frame.metric, frame))
    i, j = (ev.index(a, scope) for a in node.args[1:])
    for ix, a in zip((i, j), node.args[1:]):
        if ix.value > frame.dim:
            raise IndexOutOfRange(f"index {ix.value} outside 1..{frame.dim}", ix.value, frame.dim, a.span)
    if i.variance is COVAR and j.variance is COVAR:
        m = frame.metric
    elif i.variance is CONTRA and j.variance is CONTRA:
        m = frame.inverse_metric
    else:
        m = np.eye(frame.dim)
    return Scalar(float(m[i.value - 1, j.value - 1]))


def _basis_selector(ev, node, scope):
    frame = _require_frame(ev, node.args[0], scope, "basis_selector")
    ix = ev.index(node.args[1], scope)
    if ix.value > frame.dim:
        raise IndexOutOfRange(f"basis index {ix.value} outside 1..{frame.dim}", ix.value, frame.dim, node.args[1].span)
    cart = (
        tc.cartesian_frame(frame.ambient_point, name=f"cartesian{frame.dim}")
        if frame.ambient_point is not None
        else Frame.from_basis(np.eye(frame.dim), name=f"cartesian{frame.dim}")
    )
    k = ix.value - 1
    if ix.variance is COVAR:
        return Tensor(TensorValue(frame.dim, (CONTRA,), frame.basis[:, k], cart))
    return Tensor(TensorValue(frame.dim, (COVAR,), frame.dual_basis[k, :], cart))


def _adjust_variance(t: TensorValue, kinds, frame: Frame | None, span) -> TensorValue:
    for slot, ix in enumerate(kinds):
        if t.signature[slot] is ix.variance:
            continue
        if frame is None:
            raise FrameRequired(
                "raising or lowering an index needs a metric; give tensor_selector a frame", span
            )
        if t.frame is None:
            t = t.with_frame(frame)
        t = tc.lower_index(t, slot, frame) if ix.variance is COVAR else tc.raise_index(t, slot, frame)
    return t


def _tensor_selector(ev, node, scope):
    t_node, idx_node, frame_node = node.args
    t = ev.tensor(t_node, scope)
    idx = ev.eval(idx_node, scope)
    if isinstance(idx, Index):
        idx = Tuple((idx,))
    if not isinstance(idx, Tuple) or not all(isinstance(i, Index) for i in idx.items):
        raise TypeMismatch("second argument of tensor_selector must be a tuple of indexes", idx_node.span)
    kinds = [i.kind for i in idx.items]
    if len(kinds) != t.order:
        raise IndexCountMismatch(f"{len(kinds)} index(es) for a tensor of order {t.order}", idx_node.span)
    for k in kinds:
        if k.value > t.dim:
            raise IndexOutOfRange(f"index {k.value} outside 1..{t.dim}", k.value, t.dim, idx_node.span)
    frame = ev.frame(frame_node, scope)
    if frame is not None and frame.dim != t.dim:
        raise DimMismatch(f"dim-{t.dim} tensor read in a dim-{frame.dim} frame", frame_node.span)

    if t.frame is None:
        # frame-independent components
        read = _adjust_variance(t, kinds, frame, node.span)
    elif frame is None:
        if ev.implicit is None:
            ev.implicit = t.frame
        elif not ev.implicit.same_as(t.frame):
            raise FrameRequired(
                f"tensors in frames {ev.implicit.label()} and {t.frame.label()} are mixed under an "
                "unspecified frame; name the frame explicitly",
                frame_node.span,
            )
        read = _adjust_variance(t, kinds, t.frame, node.span)
    else:
        if not t.frame.same_as(frame):
            t = tc.transform(t, frame)
        read = _adjust_variance(t, kinds, frame, node.span)
    return Scalar(read.component(*(k.value for k in kinds)))


def _vector_selector(ev, node, scope):
    a, b = node.args
    va, vb = ev.eval(a, scope), ev.eval(b, scope)
    if isinstance(va, (Tuple, Tensor)) and not isinstance(vb, (Tuple, Tensor)):
        va, vb, a, b = vb, va, b, a
    if isinstance(vb, Tuple):
        return _select_from_tuple(ev, vb, a, scope, "vector index")
    if isinstance(vb, Tensor) and vb.tensor.order == 1:
        k = ev.natural(a, scope, "vector index", vb.tensor.dim)
        return Scalar(vb.tensor.component(k))
    raise TypeMismatch("vector_selector needs an index and a vector", node.span)


_HANDLERS = {
    ("arith1", "plus"): _plus,
    ("arith1", "times"): _times,
    ("arith1", "minus"): _minus,
    ("arith1", "unary_minus"): _unary_minus,
    ("arith1", "divide"): _divide,
    ("arith1", "power"): _power,
    ("arith1", "abs"): _abs,
    ("arith1", "root"): _root,
    ("tensor1", "tuple"): _tuple,
    ("tensor1", "tuple_selector"): _tuple_selector,
    ("tensor1", "Cartesian"): _cartesian,
    ("tensor1", "unit_Cartesian"): _unit_cartesian,
    ("tensor1", "Kronecker_tensor"): _kronecker,
    ("tensor1", "Levi-Civita"): _levi_civita,
    ("tensor1", "contra_index"): _contra_index,
    ("tensor1", "covar_index"): _covar_index,
    ("tensor1", "metric_tensor"): _metric_tensor,
    ("tensor1", "basis_selector"): _basis_selector,
    ("tensor1", "tensor_selector"): _tensor_selector,
    ("linalg1", "vector_selector"): _vector_selector,
}


def evaluate(node: OMNode, env: Environment | None = None) -> Value:
    return _Evaluator(env if env is not None else Environment()).eval(node, {})


# ---------------------------------------------------------------------------


def check_curl_cartesian(field_partials, frame: Frame) -> TensorValue:
    """(curl v)_i = eps_ijk d_j v_k from a matrix ``P[i][j] = d_j v^i``.

    Only meaningful in a Cartesian 3-frame, where v_k = v^k.
    """
    P = np.asarray(field_partials, dtype=float)
    if P.shape != (3, 3) or frame.dim != 3:
        raise DimMismatch("curl needs a 3x3 partial-derivative matrix and a 3-dimensional frame")
    if frame.chart is None or not frame.chart.is_cartesian:
        raise FrameMismatch("check_curl_cartesian works in a Cartesian frame only")
    eps = tc.levi_civita(3).array()
    return TensorValue(3, (COVAR,), np.einsum("ijk,kj->i", eps, P), frame)
