"""Chart-definition files and the built-in chart library.

A chart file is JSON::

    {"name": "polar", "dim": 2, "coords": ["r", "theta"],
     "to_cartesian": ["r * cos(theta)", "r * sin(theta)"],
     "from_cartesian": ["sqrt(x0^2 + x1^2)", "atan2(x1, x0)"]}

Expressions use the infix grammar of :func:`omtensor.autodiff.parse_scalar`.
``coords`` names the chart coordinates in ``to_cartesian``; the inverse map
always refers to Cartesian inputs as ``x0, x1, ...``.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import jsonschema

from ..autodiff import ScalarSyntaxError, format_scalar, parse_scalar
from ..errors import BadDimension, EnvSchemaError
from ..tensor import Chart, cartesian_chart, polar_chart, spherical_chart

CHART_SCHEMA = {
    "type": "object",
    "required": ["name", "dim", "to_cartesian"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string", "pattern": "^[A-Za-z_][A-Za-z0-9_]*$"},
        "dim": {"type": "integer", "minimum": 1},
        "coords": {"type": "array", "items": {"type": "string"}},
        "to_cartesian": {"type": "array", "items": {"type": "string"}},
        "from_cartesian": {"type": "array", "items": {"type": "string"}},
    },
}

BUILTIN = ("cartesian2", "cartesian3", "polar", "spherical")


def builtin_chart(name: str) -> Chart:
    if name == "polar":
        return polar_chart()
    if name == "spherical":
        return spherical_chart()
    if name.startswith("cartesian") and name[len("cartesian"):].isdigit():
        return cartesian_chart(int(name[len("cartesian"):]))
    raise KeyError(name)


def chart_from_json(doc: dict) -> Chart:
    try:
        jsonschema.validate(doc, CHART_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise EnvSchemaError(f"chart definition: {exc.message}") from None
    coords = doc.get("coords")
    if coords is not None and len(coords) != doc["dim"]:
        raise EnvSchemaError(f"chart {doc['name']!r}: {len(coords)} coordinate names for dim {doc['dim']}")
    try:
        fwd = [parse_scalar(s, coords) for s in doc["to_cartesian"]]
        inv = None
        if "from_cartesian" in doc:
            inv = [parse_scalar(s) for s in doc["from_cartesian"]]
        return Chart(doc["name"], doc["dim"], tuple(fwd), None if inv is None else tuple(inv),
                     None if coords is None else tuple(coords))
    except (ScalarSyntaxError, ValueError, BadDimension) as exc:
        raise EnvSchemaError(f"chart {doc['name']!r}: {exc}") from None


def chart_to_json(chart: Chart) -> dict:
    doc = {"name": chart.name, "dim": chart.dim}
    if chart.coords:
        doc["coords"] = list(chart.coords)
    doc["to_cartesian"] = [format_scalar(e, chart.coords) for e in chart.to_cartesian]
    if chart.from_cartesian is not None:
        doc["from_cartesian"] = [format_scalar(e) for e in chart.from_cartesian]
    return doc


def load_chart(path: str | Path) -> Chart:
    with open(path, encoding="utf-8") as fh:
        return chart_from_json(json.load(fh))


def shipped_chart(name: str) -> Chart:
    """Load one of the chart files bundled with the package."""
    text = resources.files(__name__).joinpath(f"{name}.json").read_text(encoding="utf-8")
    return chart_from_json(json.loads(text))
