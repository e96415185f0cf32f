"""Charts, frames and dense tensor values.

Conventions
-----------
* Charts map chart coordinates to ambient Cartesian coordinates.  The
  Jacobian column ``i`` (derivatives with respect to chart coordinate ``i``)
  is the covariant basis vector ``g_i`` in Cartesian components.
* Tensor components are stored flat in row-major order (rightmost index
  fastest).  Component indexes are 1-based at the API boundary; slot
  positions (for contraction, raising, lowering) are 0-based.
* A tensor whose ``frame`` is ``None`` is frame-independent (the
  "unspecified" frame): Kronecker delta and the permutation symbol.
"""

from __future__ import annotations

import contextlib
import dataclasses
import enum
import itertools
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import autodiff
from .autodiff import ScalarExpr, eval_dual, eval_scalar, max_slot
from .errors import (
    BadDimension,
    BadSlot,
    DimMismatch,
    FrameMismatch,
    PointMismatch,
    SingularChart,
    SizeLimit,
    UnspecifiedFrame,
    VarianceMismatch,
)

SINGULAR_DET = 1e-12
POINT_ATOL = 1e-9


@dataclass(frozen=True)
class Tolerances:
    """Numeric thresholds: ambient-point identity and chart singularity."""

    point_atol: float = POINT_ATOL
    singular_det: float = SINGULAR_DET

    def __post_init__(self):
        for name in ("point_atol", "singular_det"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"tolerance {name} must be >= 0")


_TOLERANCES = [Tolerances()]


def tolerances() -> Tolerances:
    return _TOLERANCES[-1]


@contextlib.contextmanager
def tolerance_overrides(**overrides):
    """Temporarily replace fields of the active :class:`Tolerances`."""
    _TOLERANCES.append(dataclasses.replace(_TOLERANCES[-1], **overrides))
    try:
        yield _TOLERANCES[-1]
    finally:
        _TOLERANCES.pop()


@dataclass(frozen=True)
class Limits:
    max_order: int = 8
    max_dim: int = 16
    max_levi_civita_dim: int = 6


def limits() -> Limits:
    """Active size caps; ``TENSOR1_MAX_ORDER`` overrides the order cap."""
    env = os.environ.get("TENSOR1_MAX_ORDER")
    if env:
        return Limits(max_order=int(env))
    return Limits()


class Variance(enum.Enum):
    CONTRA = "contra"
    COVAR = "covar"

    def flipped(self) -> Variance:
        return Variance.COVAR if self is Variance.CONTRA else Variance.CONTRA


CONTRA = Variance.CONTRA
COVAR = Variance.COVAR


@dataclass(frozen=True)
class IndexKind:
    variance: Variance
    value: int

    def __post_init__(self):
        if self.value < 1:
            raise ValueError(f"indexes are natural numbers, got {self.value}")


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------------------
# charts


@dataclass(frozen=True, eq=False)
class Chart:
    name: str
    dim: int
    to_cartesian: tuple[ScalarExpr, ...]
    from_cartesian: tuple[ScalarExpr, ...] | None = None
    coords: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise BadDimension(f"chart {self.name!r} needs dim >= 1")
        object.__setattr__(self, "to_cartesian", tuple(self.to_cartesian))
        if len(self.to_cartesian) != self.dim:
            raise BadDimension(f"chart {self.name!r}: {len(self.to_cartesian)} maps for dim {self.dim}")
        if self.from_cartesian is not None:
            object.__setattr__(self, "from_cartesian", tuple(self.from_cartesian))
            if len(self.from_cartesian) != self.dim:
                raise BadDimension(f"chart {self.name!r}: inverse map has wrong length")
        for e in self.to_cartesian + (self.from_cartesian or ()):
            if max_slot(e) >= self.dim:
                raise BadDimension(f"chart {self.name!r}: expression uses slot {max_slot(e)} >= dim {self.dim}")

    def cartesian_point(self, point: Sequence[float]) -> np.ndarray:
        self._check_len(point)
        return np.array([eval_scalar(e, point) for e in self.to_cartesian])

    def chart_point(self, cartesian: Sequence[float]) -> np.ndarray:
        if self.from_cartesian is None:
            raise ValueError(f"chart {self.name!r} has no inverse map")
        self._check_len(cartesian)
        return np.array([eval_scalar(e, cartesian) for e in self.from_cartesian])

    def jacobian(self, point: Sequence[float]) -> np.ndarray:
        """J[j, i] = d x^j / d x'^i; column i is the basis vector g_i."""
        self._check_len(point)
        return np.array([eval_dual(e, point).partials for e in self.to_cartesian])

    def _check_len(self, point):
        if len(point) != self.dim:
            raise DimMismatch(f"chart {self.name!r} takes {self.dim} coordinates, got {len(point)}")

    @property
    def is_cartesian(self) -> bool:
        return all(isinstance(e, autodiff.Var) and e.slot == i for i, e in enumerate(self.to_cartesian))

    def __repr__(self):
        return f"Chart({self.name!r}, dim={self.dim})"


def cartesian_chart(n: int) -> Chart:
    if n < 1:
        raise BadDimension("Cartesian chart needs n >= 1")
    ident = tuple(autodiff.Var(i) for i in range(n))
    names = ("x", "y", "z") if n == 3 else ("x", "y") if n == 2 else tuple(f"x{i + 1}" for i in range(n))
    return Chart(f"cartesian{n}", n, ident, ident, names)


def polar_chart() -> Chart:
    r, t = autodiff.Var(0), autodiff.Var(1)
    x, y = autodiff.Var(0), autodiff.Var(1)
    return Chart(
        "polar",
        2,
        (r * autodiff.Cos(t), r * autodiff.Sin(t)),
        (autodiff.Sqrt(x**2 + y**2), autodiff.Atan2(y, x)),
        ("r", "theta"),
    )


def spherical_chart() -> Chart:
    """(r, theta, phi) with theta the polar angle from +z."""
    r, t, p = autodiff.Var(0), autodiff.Var(1), autodiff.Var(2)
    x, y, z = autodiff.Var(0), autodiff.Var(1), autodiff.Var(2)
    sin, cos = autodiff.Sin, autodiff.Cos
    rho = autodiff.Sqrt(x**2 + y**2)
    return Chart(
        "spherical",
        3,
        (r * sin(t) * cos(p), r * sin(t) * sin(p), r * cos(t)),
        (autodiff.Sqrt(x**2 + y**2 + z**2), autodiff.Atan2(rho, z), autodiff.Atan2(y, x)),
        ("r", "theta", "phi"),
    )


# ---------------------------------------------------------------------------
# frames


@dataclass(frozen=True, eq=False)
class Frame:
    """A basis anchored at a point.

    ``chart`` and ``point`` are ``None`` for frames given directly as a
    basis tuple; those have no position and skip point identification.
    """

    chart: Chart | None
    point: np.ndarray | None
    basis: np.ndarray
    dual_basis: np.ndarray
    metric: np.ndarray
    inverse_metric: np.ndarray
    ambient_point: np.ndarray | None = None
    name: str | None = None
    det: float = field(default=float("nan"))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @classmethod
    def from_basis(cls, basis, name=None, chart=None, point=None, ambient_point=None) -> Frame:
        b = np.array(basis, dtype=float)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise DimMismatch(f"basis must be square, got shape {b.shape}")
        det = float(np.linalg.det(b))
        if abs(det) < tolerances().singular_det:
            where = f" at {list(point)}" if point is not None else ""
            raise SingularChart(f"basis is singular{where} (det={det:.3g})", point)
        dual = np.linalg.inv(b)
        g = b.T @ b
        g = 0.5 * (g + g.T)
        ginv = np.linalg.inv(g)
        ginv = 0.5 * (ginv + ginv.T)
        return cls(
            chart,
            None if point is None else _frozen(point),
            _frozen(b),
            _frozen(dual),
            _frozen(g),
            _frozen(ginv),
            None if ambient_point is None else _frozen(ambient_point),
            name,
            det,
        )

    def with_name(self, name: str) -> Frame:
        return Frame(self.chart, self.point, self.basis, self.dual_basis, self.metric,
                     self.inverse_metric, self.ambient_point, name, self.det)

    def same_as(self, other: Frame | None) -> bool:
        if other is None:
            return False
        if self is other:
            return True
        if self.dim != other.dim or not np.allclose(self.basis, other.basis, rtol=0, atol=1e-12):
            return False
        if self.ambient_point is None or other.ambient_point is None:
            return self.ambient_point is None and other.ambient_point is None
        return bool(np.allclose(self.ambient_point, other.ambient_point, rtol=0, atol=tolerances().point_atol))

    def label(self) -> str:
        if self.name:
            return self.name
        if self.chart is not None:
            return f"{self.chart.name}@{np.asarray(self.point).tolist()}"
        return "basis"

    def __repr__(self):
        return f"Frame({self.label()})"


def make_frame(chart: Chart, point: Sequence[float], name: str | None = None) -> Frame:
    point = np.asarray(point, dtype=float)
    jac = chart.jacobian(point)
    det = float(np.linalg.det(jac))
    if abs(det) < tolerances().singular_det:
        raise SingularChart(f"chart {chart.name!r} is singular at {point.tolist()} (det={det:.3g})", point.tolist())
    return Frame.from_basis(jac, name=name, chart=chart, point=point, ambient_point=chart.cartesian_point(point))


def cartesian_frame(point: Sequence[float], name: str | None = None) -> Frame:
    return make_frame(cartesian_chart(len(point)), point, name)


# ---------------------------------------------------------------------------
# tensor values


def row_major_offset(indexes: Sequence[int], dim: int) -> int:
    """0-based storage offset of 1-based ``indexes``."""
    off = 0
    for i in indexes:
        if not 1 <= i <= dim:
            raise IndexError(f"index {i} outside 1..{dim}")
        off = off * dim + (i - 1)
    return off


@dataclass(frozen=True, eq=False)
class TensorValue:
    dim: int
    signature: tuple[Variance, ...]
    components: np.ndarray
    frame: Frame | None = None

    def __post_init__(self):
        lim = limits()
        object.__setattr__(self, "signature", tuple(Variance(s) for s in self.signature))
        if self.dim < 1:
            raise BadDimension("tensor dimension must be >= 1")
        if self.dim > lim.max_dim:
            raise SizeLimit(f"dimension {self.dim} exceeds cap {lim.max_dim}")
        if self.order > lim.max_order:
            raise SizeLimit(f"order {self.order} exceeds cap {lim.max_order}")
        comps = _frozen(np.ravel(self.components))
        if comps.size != self.dim**self.order:
            raise DimMismatch(
                f"{comps.size} components for dim {self.dim} order {self.order} (need {self.dim ** self.order})"
            )
        object.__setattr__(self, "components", comps)
        if self.frame is not None and self.frame.dim != self.dim:
            raise DimMismatch(f"tensor of dim {self.dim} tagged with a {self.frame.dim}-dimensional frame")

    @property
    def order(self) -> int:
        return len(self.signature)

    def array(self) -> np.ndarray:
        """Components as an ``order``-dimensional C-ordered array (0-based)."""
        return self.components.reshape((self.dim,) * self.order)

    def component(self, *indexes: int) -> float:
        if len(indexes) != self.order:
            raise ValueError(f"{len(indexes)} indexes for a tensor of order {self.order}")
        return float(self.components[row_major_offset(indexes, self.dim)])

    def with_frame(self, frame: Frame | None) -> TensorValue:
        return TensorValue(self.dim, self.signature, self.components, frame)

    def __eq__(self, other):
        if not isinstance(other, TensorValue):
            return NotImplemented
        same_frame = (self.frame is None and other.frame is None) or (
            self.frame is not None and self.frame.same_as(other.frame)
        )
        return (
            self.dim == other.dim
            and self.signature == other.signature
            and np.array_equal(self.components, other.components)
            and same_frame
        )

    __hash__ = None

    def __repr__(self):
        sig = ",".join(s.value for s in self.signature)
        frame = self.frame.label() if self.frame is not None else "unspecified"
        return f"TensorValue(dim={self.dim}, [{sig}], {self.components.tolist()}, frame={frame})"


def scalar(value: float, frame: Frame | None = None) -> TensorValue:
    return TensorValue(frame.dim if frame is not None else 1, (), [value], frame)


def vector(components, frame: Frame | None = None, variance: Variance = CONTRA) -> TensorValue:
    c = np.asarray(components, dtype=float)
    return TensorValue(len(c), (variance,), c, frame)


def kronecker(n: int) -> TensorValue:
    if n < 1:
        raise BadDimension("Kronecker tensor needs n >= 1")
    return TensorValue(n, (CONTRA, COVAR), np.eye(n))


def permutation_sign(idx: Sequence[int]) -> int:
    """Sign of a permutation given as a sequence; 0 if any entry repeats."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return 0
    sign = 1
    seen = [False] * len(idx)
    order = sorted(idx)
    pos = {v: k for k, v in enumerate(order)}
    perm = [pos[v] for v in idx]
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def levi_civita(n: int, cap: int | None = None) -> TensorValue:
    """The pure permutation symbol (no sqrt(det g) weight), frame-independent."""
    if n < 1:
        raise BadDimension("Levi-Civita symbol needs n >= 1")
    cap = limits().max_levi_civita_dim if cap is None else cap
    if n > cap:
        raise SizeLimit(f"Levi-Civita symbol of dimension {n} has {n ** n} components (cap n <= {cap})")
    comps = np.zeros(n**n)
    for perm in itertools.permutations(range(n)):
        off = 0
        for p in perm:
            off = off * n + p
        comps[off] = permutation_sign(perm)
    return TensorValue(n, (COVAR,) * n, comps)


# ---------------------------------------------------------------------------
# algebra


def _common_frame(a: TensorValue, b: TensorValue) -> Frame | None:
    if a.frame is None:
        return b.frame
    if b.frame is None or a.frame.same_as(b.frame):
        return a.frame
    raise FrameMismatch(f"tensors live in different frames ({a.frame.label()} vs {b.frame.label()})")


def tensor_product(a: TensorValue, b: TensorValue) -> TensorValue:
    if a.dim != b.dim:
        raise DimMismatch(f"tensor product of dim {a.dim} and dim {b.dim}")
    frame = _common_frame(a, b)
    if a.order + b.order > limits().max_order:
        raise SizeLimit(f"product order {a.order + b.order} exceeds cap {limits().max_order}")
    comps = np.multiply.outer(a.components, b.components).ravel()
    return TensorValue(a.dim, a.signature + b.signature, comps, frame)


def contract(t: TensorValue, slot_a: int, slot_b: int) -> TensorValue:
    for s in (slot_a, slot_b):
        if not 0 <= s < t.order:
            raise BadSlot(f"slot {s} out of range for order {t.order}")
    if slot_a == slot_b:
        raise BadSlot("cannot contract a slot with itself")
    if t.signature[slot_a] == t.signature[slot_b]:
        raise VarianceMismatch(
            f"contraction pairs a contra slot with a covar slot; slots {slot_a} and {slot_b} are both "
            f"{t.signature[slot_a].value}"
        )
    out = np.trace(t.array(), axis1=slot_a, axis2=slot_b)
    sig = tuple(s for k, s in enumerate(t.signature) if k not in (slot_a, slot_b))
    return TensorValue(t.dim, sig, np.ravel(out), t.frame)


def add(a: TensorValue, b: TensorValue) -> TensorValue:
    if a.dim != b.dim or a.signature != b.signature:
        raise DimMismatch("sum of tensors with different dimension or signature")
    return TensorValue(a.dim, a.signature, a.components + b.components, _common_frame(a, b))


def scale(t: TensorValue, k: float) -> TensorValue:
    return TensorValue(t.dim, t.signature, k * t.components, t.frame)


def _apply_slot(arr: np.ndarray, mat: np.ndarray, slot: int) -> np.ndarray:
    """out[..., l, ...] = sum_k mat[l, k] arr[..., k, ...] along ``slot``."""
    moved = np.tensordot(mat, arr, axes=([1], [slot]))
    return np.moveaxis(moved, 0, slot)


def transform(t: TensorValue, target: Frame) -> TensorValue:
    """Components of ``t`` in ``target``.

    Contra slots take ``A = target.dual_basis @ source.basis`` (the
    Jacobian d x'/d x chained through Cartesian), covar slots take
    ``inv(A).T``.
    """
    source = t.frame
    if source is None:
        raise UnspecifiedFrame("cannot transform a tensor whose frame is unspecified")
    if source.dim != target.dim:
        raise DimMismatch(f"cannot transform a dim-{source.dim} tensor to a dim-{target.dim} frame")
    if source.ambient_point is not None and target.ambient_point is not None:
        if not np.allclose(source.ambient_point, target.ambient_point, rtol=0, atol=tolerances().point_atol):
            raise PointMismatch(
                f"frames {source.label()} and {target.label()} are anchored at different points "
                f"({source.ambient_point.tolist()} vs {target.ambient_point.tolist()})"
            )
    if source is target or t.order == 0:
        return t.with_frame(target)
    fwd = target.dual_basis @ source.basis
    back = (source.dual_basis @ target.basis).T
    arr = t.array()
    for slot, var in enumerate(t.signature):
        arr = _apply_slot(arr, fwd if var is CONTRA else back, slot)
    return TensorValue(t.dim, t.signature, np.ravel(arr), target)


def _in_frame(t: TensorValue, frame: Frame) -> TensorValue:
    if frame is None:
        raise UnspecifiedFrame("a frame is required")
    if t.frame is None:
        return t.with_frame(frame)
    if t.frame.same_as(frame):
        return t if t.frame is frame else t.with_frame(frame)
    return transform(t, frame)


def lower_index(t: TensorValue, slot: int, frame: Frame) -> TensorValue:
    if not 0 <= slot < t.order:
        raise BadSlot(f"slot {slot} out of range for order {t.order}")
    if t.signature[slot] is not CONTRA:
        raise VarianceMismatch(f"slot {slot} is already covariant")
    t = _in_frame(t, frame)
    arr = _apply_slot(t.array(), frame.metric, slot)
    sig = t.signature[:slot] + (COVAR,) + t.signature[slot + 1 :]
    return TensorValue(t.dim, sig, np.ravel(arr), frame)


def raise_index(t: TensorValue, slot: int, frame: Frame) -> TensorValue:
    if not 0 <= slot < t.order:
        raise BadSlot(f"slot {slot} out of range for order {t.order}")
    if t.signature[slot] is not COVAR:
        raise VarianceMismatch(f"slot {slot} is already contravariant")
    t = _in_frame(t, frame)
    arr = _apply_slot(t.array(), frame.inverse_metric, slot)
    sig = t.signature[:slot] + (CONTRA,) + t.signature[slot + 1 :]
    return TensorValue(t.dim, sig, np.ravel(arr), frame)


def norm_sq(v: TensorValue, frame: Frame) -> float:
    """g_ij v^i v^j in ``frame``."""
    if v.signature != (CONTRA,):
        raise VarianceMismatch(f"norm_sq takes a contravariant vector, got signature {[s.value for s in v.signature]}")
    v = _in_frame(v, frame)
    return float(v.components @ frame.metric @ v.components)


def cross_product(u: TensorValue, v: TensorValue, frame: Frame) -> TensorValue:
    """w_i = eps_ijk u^j v^k, using the bare permutation symbol."""
    if u.dim != 3 or v.dim != 3:
        raise DimMismatch("cross product is defined in dimension 3")
    for t in (u, v):
        if t.signature != (CONTRA,):
            raise VarianceMismatch("cross product takes contravariant vectors")
    if u.frame is not None and v.frame is not None and not u.frame.same_as(v.frame):
        raise FrameMismatch("cross product operands live in different frames")
    u, v = _in_frame(u, frame), _in_frame(v, frame)
    eps = levi_civita(3)
    # eps_ijk u^l v^m: contract k with m, then j with l
    return contract(contract(tensor_product(tensor_product(eps.with_frame(frame), u), v), 2, 4), 1, 2)
