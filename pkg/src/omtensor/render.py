"""Text, JSON and OpenMath renderings of evaluation results and frames."""

from __future__ import annotations

import numpy as np

from . import om
from .charts import builtin_chart
from .env import Environment
from .semantics import ChartRef, FrameRef, Index, Scalar, Tensor, Tuple, Value
from .tensor import Frame, IndexKind, TensorValue, Variance, make_frame


def _g6(x) -> str:
    return f"{float(x):.6g}"


def _num_json(x):
    # ints stay ints; floats go through repr, which round-trips exactly
    return x if isinstance(x, int) and not isinstance(x, bool) else float(x)


# -- frames ------------------------------------------------------------------


def frame_to_json(frame: Frame | None):
    if frame is None:
        return None
    if frame.chart is not None:
        return {"name": frame.name, "chart": frame.chart.name, "point": [float(x) for x in frame.point]}
    return {"name": frame.name, "basis": frame.basis.tolist()}


def frame_from_json(doc, env: Environment | None = None) -> Frame | None:
    if doc is None:
        return None
    name = doc.get("name")
    if "chart" in doc:
        if env is not None and name in env.frames:
            f = env.frames[name]
            if f.chart is not None and f.chart.name == doc["chart"] and np.array_equal(f.point, doc["point"]):
                return f
        chart = env.lookup_chart(doc["chart"]) if env is not None else builtin_chart(doc["chart"])
        return make_frame(chart, doc["point"], name)
    return Frame.from_basis(doc["basis"], name=name)


def frame_info(frame: Frame) -> dict:
    return {
        "name": frame.name,
        "chart": frame.chart.name if frame.chart is not None else None,
        "point": None if frame.point is None else frame.point.tolist(),
        "cartesian_point": None if frame.ambient_point is None else frame.ambient_point.tolist(),
        "basis": frame.basis.tolist(),
        "dual_basis": frame.dual_basis.tolist(),
        "metric": frame.metric.tolist(),
        "inverse_metric": frame.inverse_metric.tolist(),
        "det_basis": frame.det,
    }


def _matrix_text(m) -> list[str]:
    return ["  [" + ", ".join(_g6(x) for x in row) + "]" for row in np.asarray(m)]


def frame_info_text(frame: Frame) -> str:
    lines = [f"frame {frame.label()}"]
    if frame.chart is not None:
        lines.append(f"chart {frame.chart.name}")
        lines.append("point [" + ", ".join(_g6(x) for x in frame.point) + "]")
        lines.append("cartesian point [" + ", ".join(_g6(x) for x in frame.ambient_point) + "]")
    for title, m in (
        ("basis (columns g_i)", frame.basis),
        ("dual basis (rows g^i)", frame.dual_basis),
        ("metric g_ij", frame.metric),
        ("inverse metric g^ij", frame.inverse_metric),
    ):
        lines.append(title)
        lines.extend(_matrix_text(m))
    lines.append(f"det(basis) {_g6(frame.det)}")
    return "\n".join(lines) + "\n"


# -- values ------------------------------------------------------------------


def tensor_to_json(t: TensorValue) -> dict:
    return {
        "dim": t.dim,
        "signature": [s.value for s in t.signature],
        "components": [float(x) for x in t.components],
        "frame": frame_to_json(t.frame),
    }


def value_to_json(v: Value):
    if isinstance(v, Scalar):
        return {"type": "scalar", "value": _num_json(v.value)}
    if isinstance(v, Tensor):
        return {"type": "tensor", **tensor_to_json(v.tensor)}
    if isinstance(v, Tuple):
        return {"type": "tuple", "items": [value_to_json(x) for x in v.items]}
    if isinstance(v, Index):
        return {"type": "index", "variance": v.kind.variance.value, "value": v.kind.value}
    if isinstance(v, FrameRef):
        return {"type": "frame", "frame": frame_to_json(v.frame)}
    if isinstance(v, ChartRef):
        return {"type": "chart", "name": v.chart.name}
    raise TypeError(v)


def value_from_json(doc, env: Environment | None = None) -> Value:
    kind = doc["type"]
    if kind == "scalar":
        return Scalar(doc["value"])
    if kind == "tensor":
        frame = frame_from_json(doc["frame"], env)
        return Tensor(TensorValue(doc["dim"], tuple(doc["signature"]), doc["components"], frame))
    if kind == "tuple":
        return Tuple(tuple(value_from_json(x, env) for x in doc["items"]))
    if kind == "index":
        return Index(IndexKind(Variance(doc["variance"]), doc["value"]))
    if kind == "frame":
        return FrameRef(frame_from_json(doc["frame"], env))
    if kind == "chart":
        return ChartRef(env.lookup_chart(doc["name"]) if env is not None else builtin_chart(doc["name"]))
    raise ValueError(f"unknown value type {kind!r}")


def tensor_text(t: TensorValue) -> str:
    sig = ", ".join(s.value for s in t.signature)
    frame = t.frame.label() if t.frame is not None else "unspecified"
    comps = ", ".join(_g6(x) for x in t.components)
    return f"tensor dim={t.dim} signature=[{sig}] frame={frame} components=[{comps}]"


def value_text(v: Value) -> str:
    if isinstance(v, Scalar):
        return _g6(v.value) if isinstance(v.value, float) else str(v.value)
    if isinstance(v, Tensor):
        return tensor_text(v.tensor)
    if isinstance(v, Tuple):
        return "(" + ", ".join(value_text(x) for x in v.items) + ")"
    if isinstance(v, Index):
        return f"{v.kind.variance.value}_index({v.kind.value})"
    if isinstance(v, FrameRef):
        return "frame " + (v.frame.label() if v.frame is not None else "unspecified")
    if isinstance(v, ChartRef):
        return f"chart {v.chart.name}"
    raise TypeError(v)


def value_to_om(v: Value) -> om.OMNode:
    """OpenMath form of a value; tensors become a tuple of row-major components."""
    if isinstance(v, Scalar):
        if isinstance(v.value, int) and not isinstance(v.value, bool):
            return om.Integer(v.value)
        return om.Float(float(v.value))
    if isinstance(v, Tensor):
        return om.apply("tuple", *(om.Float(float(x)) for x in v.tensor.components))
    if isinstance(v, Tuple):
        return om.apply("tuple", *(value_to_om(x) for x in v.items))
    if isinstance(v, Index):
        return om.apply(f"{v.kind.variance.value}_index", om.Integer(v.kind.value))
    if isinstance(v, FrameRef):
        if v.frame is None:
            return om.sym(om.UNSPECIFIED)
        return om.Variable(v.frame.name or "basis")
    if isinstance(v, ChartRef):
        return om.Variable(v.chart.name)
    raise TypeError(v)
