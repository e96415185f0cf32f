"""Parse, validate and evaluate tensor1 OpenMath formulas over concrete coordinate frames."""

from .compact import format_compact, parse_compact
from .env import Environment, environment_from_json, load_environment
from .om import parse_xml, serialize_xml
from .semantics import check_curl_cartesian, evaluate, validate
from .tensor import (
    COVAR,
    CONTRA,
    Chart,
    Frame,
    TensorValue,
    cartesian_chart,
    contract,
    cross_product,
    kronecker,
    levi_civita,
    lower_index,
    make_frame,
    norm_sq,
    polar_chart,
    raise_index,
    spherical_chart,
    tensor_product,
    transform,
)

__all__ = [
    "CONTRA",
    "COVAR",
    "Chart",
    "Environment",
    "Frame",
    "TensorValue",
    "cartesian_chart",
    "check_curl_cartesian",
    "contract",
    "cross_product",
    "environment_from_json",
    "evaluate",
    "format_compact",
    "kronecker",
    "levi_civita",
    "load_environment",
    "lower_index",
    "make_frame",
    "norm_sq",
    "parse_compact",
    "parse_xml",
    "polar_chart",
    "raise_index",
    "serialize_xml",
    "spherical_chart",
    "tensor_product",
    "transform",
    "validate",
]
