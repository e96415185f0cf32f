"""Evaluation environments and the environment-file format.

Environment file (JSON)::

    {
      "charts":  ["polar", "my_chart.json", {"name": ..., "dim": ..., "to_cartesian": [...]}],
      "frames":  [{"name": "P", "chart": "polar", "point": [2.0, 0.0]}],
      "tensors": [{"name": "v", "dim": 2, "signature": ["contra"],
                   "components": [1.0, 0.0], "frame": "C"}],
      "tuples":  {"X": [1.0, 2.0]},
      "scalars": {"i": 1},
      "point":   [2.0, 0.0]
    }

Chart entries are built-in names, paths relative to the environment file,
or inline chart documents.  Built-in charts are always available to frames
even when not listed.  ``frame`` on a tensor may be a frame name, null, or
"unspecified".  ``point`` (optional) is the ambient Cartesian evaluation
point used by ``Cartesian`` and ``unit_Cartesian``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

import jsonschema
import numpy as np

from .charts import BUILTIN, builtin_chart, chart_from_json, load_chart
from .errors import EnvSchemaError, OMTensorError
from .tensor import Chart, Frame, TensorValue, make_frame, tolerances

ENV_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "charts": {"type": "array", "items": {"type": ["string", "object"]}},
        "frames": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "chart", "point"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string"},
                    "chart": {"type": "string"},
                    "point": {"type": "array", "items": {"type": "number"}},
                },
            },
        },
        "tensors": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "dim", "signature", "components"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string"},
                    "dim": {"type": "integer", "minimum": 1},
                    "signature": {"type": "array", "items": {"enum": ["contra", "covar"]}},
                    "components": {"type": "array", "items": {"type": "number"}},
                    "frame": {"type": ["string", "null"]},
                },
            },
        },
        "tuples": {"type": "object", "additionalProperties": {"type": "array", "items": {"type": "number"}}},
        "scalars": {"type": "object", "additionalProperties": {"type": "number"}},
        "point": {"type": "array", "items": {"type": "number"}},
    },
}


@dataclass(frozen=True)
class Environment:
    charts: Mapping[str, Chart] = field(default_factory=dict)
    frames: Mapping[str, Frame] = field(default_factory=dict)
    tensors: Mapping[str, TensorValue] = field(default_factory=dict)
    tuples: Mapping[str, tuple] = field(default_factory=dict)
    scalars: Mapping[str, float] = field(default_factory=dict)
    point: tuple[float, ...] | None = None

    def __post_init__(self):
        seen: dict[str, str] = {}
        for kind in ("charts", "frames", "tensors", "tuples", "scalars"):
            for name in getattr(self, kind):
                if name in seen:
                    raise ValueError(f"name {name!r} bound twice ({seen[name]} and {kind})")
                seen[name] = kind
            object.__setattr__(self, kind, MappingProxyType(dict(getattr(self, kind))))
        object.__setattr__(self, "tuples", MappingProxyType({k: tuple(v) for k, v in self.tuples.items()}))
        if self.point is not None:
            object.__setattr__(self, "point", tuple(float(x) for x in self.point))
        for name, t in self.tensors.items():
            if t.frame is not None and not any(t.frame is f for f in self.frames.values()):
                raise ValueError(f"tensor {name!r} refers to an unregistered frame")

    def lookup_chart(self, name: str) -> Chart:
        if name in self.charts:
            return self.charts[name]
        try:
            return builtin_chart(name)
        except KeyError:
            raise KeyError(f"unknown chart {name!r}") from None

    def ambient_point(self) -> np.ndarray | None:
        """Explicit ``point``, else the common anchor of all frames, else None."""
        if self.point is not None:
            return np.array(self.point)
        anchors = [f.ambient_point for f in self.frames.values() if f.ambient_point is not None]
        if not anchors:
            return None
        first = anchors[0]
        if all(a.shape == first.shape and np.allclose(a, first, rtol=0, atol=tolerances().point_atol) for a in anchors):
            return np.array(first)
        return None

    def ambient_dim(self) -> int | None:
        p = self.ambient_point()
        if p is not None:
            return len(p)
        dims = {f.dim for f in self.frames.values()}
        return dims.pop() if len(dims) == 1 else None


def environment_from_json(doc: dict, base_dir: str | Path = ".") -> Environment:
    try:
        jsonschema.validate(doc, ENV_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path)
        raise EnvSchemaError(f"environment {where or '(root)'}: {exc.message}") from None
    base_dir = Path(base_dir)
    charts: dict[str, Chart] = {}
    for entry in doc.get("charts", []):
        if isinstance(entry, dict):
            chart = chart_from_json(entry)
        elif entry in BUILTIN or entry.startswith("cartesian"):
            try:
                chart = builtin_chart(entry)
            except KeyError:
                raise EnvSchemaError(f"unknown built-in chart {entry!r}") from None
        else:
            try:
                chart = load_chart(base_dir / entry)
            except OSError as exc:
                raise EnvSchemaError(f"cannot read chart file {entry!r}: {exc.strerror}") from None
            except json.JSONDecodeError as exc:
                raise EnvSchemaError(f"chart file {entry!r} is not JSON: {exc}") from None
        charts[chart.name] = chart

    frames: dict[str, Frame] = {}
    for fd in doc.get("frames", []):
        name = fd["name"]
        if fd["chart"] in charts:
            chart = charts[fd["chart"]]
        else:
            try:
                chart = builtin_chart(fd["chart"])
            except KeyError:
                raise EnvSchemaError(f"frame {name!r} uses unknown chart {fd['chart']!r}") from None
        if len(fd["point"]) != chart.dim:
            raise EnvSchemaError(f"frame {name!r}: point has {len(fd['point'])} coordinates, chart needs {chart.dim}")
        # SingularChart / DomainError propagate: they are semantic, not schema, failures
        frames[name] = make_frame(chart, fd["point"], name)

    tensors: dict[str, TensorValue] = {}
    for td in doc.get("tensors", []):
        fname = td.get("frame")
        frame = None
        if fname not in (None, "unspecified"):
            if fname not in frames:
                raise EnvSchemaError(f"tensor {td['name']!r} refers to unknown frame {fname!r}")
            frame = frames[fname]
        try:
            tensors[td["name"]] = TensorValue(td["dim"], tuple(td["signature"]), td["components"], frame)
        except OMTensorError as exc:
            raise EnvSchemaError(f"tensor {td['name']!r}: {exc.message}") from None

    try:
        return Environment(
            charts=charts,
            frames=frames,
            tensors=tensors,
            tuples=doc.get("tuples", {}),
            scalars=doc.get("scalars", {}),
            point=doc.get("point"),
        )
    except ValueError as exc:
        raise EnvSchemaError(str(exc)) from None


def load_environment(path: str | Path) -> Environment:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise EnvSchemaError(f"environment file is not JSON: {exc}") from None
    return environment_from_json(doc, path.parent)
