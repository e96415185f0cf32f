"""Command-line interface.

Exit codes: 0 ok, 1 semantic error, 2 parse error, 3 I/O error,
4 configuration or schema error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields

from . import render
from .cd import emit_cd
from .compact import format_compact, parse_compact
from .env import Environment, load_environment
from .errors import EnvSchemaError, OMTensorError, ParseError
from .om import Application, Float, Integer, OMNode, SumBinder, Symbol, Variable, parse_xml, serialize_xml
from .semantics import Diagnostic, Severity, Tensor, evaluate, validate
from .tensor import Tolerances, tolerance_overrides, transform

OK, SEMANTIC, PARSE, IO, CONFIG = 0, 1, 2, 3, 4


@dataclass
class RunConfig:
    command: str
    input_path: str | None = None
    env_path: str | None = None
    frame_name: str | None = None
    output_format: str = "text"
    compact: bool = False
    out_path: str | None = None
    tensor_name: str | None = None
    tolerance_overrides: dict[str, float] | None = None

    def __post_init__(self):
        known = {f.name for f in fields(Tolerances)}
        for key, val in (self.tolerance_overrides or {}).items():
            if key not in known:
                raise ValueError(f"unknown tolerance {key!r} (known: {', '.join(sorted(known))})")
            if not val >= 0:
                raise ValueError(f"tolerance {key} must be >= 0")
        if self.command in ("eval", "transform", "frame-info") and not self.env_path:
            raise ValueError(f"{self.command} requires --env")
        if self.command in ("transform", "frame-info") and not self.frame_name:
            raise ValueError(f"{self.command} requires --frame")


class _Exit(Exception):
    def __init__(self, code: int):
        self.code = code


def _diag_line(exc: OMTensorError) -> str:
    return Diagnostic(Severity.ERROR, exc.code, exc.message, exc.span).format()


def _fail(code: int, line: str):
    print(line, file=sys.stderr)
    raise _Exit(code)


def _read_input(path: str | None) -> str:
    try:
        if path in (None, "-"):
            return sys.stdin.buffer.read().decode("utf-8")
        with open(path, "rb") as fh:
            return fh.read().decode("utf-8")
    except OSError as exc:
        _fail(IO, f"error IOError 0:0 cannot read {path}: {exc.strerror}")
    except UnicodeDecodeError as exc:
        _fail(IO, f"error IOError 0:0 {path} is not UTF-8: {exc.reason}")


def _write_output(cfg: RunConfig, text: str):
    if cfg.out_path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(cfg.out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        _fail(IO, f"error IOError 0:0 cannot write {cfg.out_path}: {exc.strerror}")


def _parse(cfg: RunConfig) -> OMNode:
    text = _read_input(cfg.input_path)
    compact = cfg.compact or not text.lstrip().startswith("<")
    try:
        return parse_compact(text.strip()) if compact else parse_xml(text)
    except ParseError as exc:
        _fail(PARSE, _diag_line(exc))


def _env(cfg: RunConfig) -> Environment | None:
    if not cfg.env_path:
        return None
    try:
        return load_environment(cfg.env_path)
    except EnvSchemaError as exc:
        _fail(CONFIG, _diag_line(exc))
    except OSError as exc:
        _fail(IO, f"error IOError 0:0 cannot read {cfg.env_path}: {exc.strerror}")
    except OMTensorError as exc:
        _fail(SEMANTIC, _diag_line(exc))


def _dump_json(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def node_to_json(node) -> dict:
    if isinstance(node, Symbol):
        return {"kind": "symbol", "cd": node.cd, "name": node.name}
    if isinstance(node, Variable):
        return {"kind": "variable", "name": node.name}
    if isinstance(node, Integer):
        return {"kind": "integer", "value": node.value}
    if isinstance(node, Float):
        return {"kind": "float", "value": node.value}
    if isinstance(node, Application):
        return {"kind": "application", "head": node_to_json(node.head), "args": [node_to_json(a) for a in node.args]}
    if isinstance(node, SumBinder):
        return {
            "kind": "sum",
            "var": node.var,
            "lower": node_to_json(node.lower),
            "upper": node_to_json(node.upper),
            "body": node_to_json(node.body),
        }
    raise TypeError(node)


# ---------------------------------------------------------------------------
# commands


def cmd_parse(cfg: RunConfig) -> int:
    node = _parse(cfg)
    if cfg.output_format == "json":
        _write_output(cfg, _dump_json(node_to_json(node)))
    elif cfg.output_format == "text":
        _write_output(cfg, format_compact(node) + "\n")
    else:
        _write_output(cfg, serialize_xml(node))
    return OK


def _report(cfg: RunConfig, diags: list[Diagnostic]):
    if cfg.output_format == "json":
        doc = [
            {
                "severity": d.severity.value,
                "code": d.code,
                "line": d.span.line if d.span else 0,
                "column": d.span.column if d.span else 0,
                "message": d.message,
            }
            for d in diags
        ]
        _write_output(cfg, _dump_json(doc))
    elif diags:
        _write_output(cfg, "".join(d.format() + "\n" for d in diags))


def cmd_validate(cfg: RunConfig) -> int:
    node = _parse(cfg)
    env = _env(cfg)
    diags = validate(node, env)
    _report(cfg, diags)
    return SEMANTIC if any(d.is_error for d in diags) else OK


def cmd_eval(cfg: RunConfig) -> int:
    node = _parse(cfg)
    env = _env(cfg)
    diags = validate(node, env)
    errors = [d for d in diags if d.is_error]
    for d in diags:
        print(d.format(), file=sys.stderr)
    if errors:
        return SEMANTIC
    try:
        value = evaluate(node, env)
    except OMTensorError as exc:
        _fail(SEMANTIC, _diag_line(exc))
    if cfg.output_format == "json":
        _write_output(cfg, _dump_json(render.value_to_json(value)))
    elif cfg.output_format == "xml":
        _write_output(cfg, serialize_xml(render.value_to_om(value)))
    else:
        _write_output(cfg, render.value_text(value) + "\n")
    return OK


def _frame(env: Environment, name: str):
    if name not in env.frames:
        _fail(SEMANTIC, f"error UnknownFrame 0:0 no frame named {name!r} in the environment")
    return env.frames[name]


def cmd_frame_info(cfg: RunConfig) -> int:
    env = _env(cfg)
    frame = _frame(env, cfg.frame_name)
    if cfg.output_format == "json":
        _write_output(cfg, _dump_json(render.frame_info(frame)))
    else:
        _write_output(cfg, render.frame_info_text(frame))
    return OK


def cmd_transform(cfg: RunConfig) -> int:
    env = _env(cfg)
    target = _frame(env, cfg.frame_name)
    if cfg.tensor_name not in env.tensors:
        _fail(SEMANTIC, f"error UnboundVariable 0:0 no tensor named {cfg.tensor_name!r} in the environment")
    try:
        out = transform(env.tensors[cfg.tensor_name], target)
    except OMTensorError as exc:
        _fail(SEMANTIC, _diag_line(exc))
    value = Tensor(out)
    if cfg.output_format == "json":
        _write_output(cfg, _dump_json(render.value_to_json(value)))
    elif cfg.output_format == "xml":
        _write_output(cfg, serialize_xml(render.value_to_om(value)))
    else:
        _write_output(cfg, render.value_text(value) + "\n")
    return OK


def cmd_emit_cd(cfg: RunConfig) -> int:
    _write_output(cfg, emit_cd())
    return OK


COMMANDS = {
    "parse": cmd_parse,
    "validate": cmd_validate,
    "eval": cmd_eval,
    "frame-info": cmd_frame_info,
    "transform": cmd_transform,
    "emit-cd": cmd_emit_cd,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="omtensor", description="tensor1 OpenMath formula engine")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, input_arg=True, fmt=("text", "json", "xml"), default="text"):
        if input_arg:
            sp.add_argument("input", nargs="?", default="-", help="input file, or - for stdin")
            sp.add_argument("--compact", action="store_true", help="input uses the compact syntax")
        sp.add_argument("--env", dest="env_path", help="environment JSON file")
        sp.add_argument("--frame", dest="frame_name", help="frame name")
        sp.add_argument("--format", dest="output_format", choices=fmt, default=default)
        sp.add_argument("--out", dest="out_path", help="output file (default stdout)")
        sp.add_argument(
            "--tol", dest="tolerances", action="append", default=[], metavar="NAME=VALUE",
            help="override a numeric tolerance (point_atol, singular_det); repeatable",
        )

    common(sub.add_parser("parse", help="print canonical XML (text: compact form)"), default="xml")
    common(sub.add_parser("validate", help="check a formula"))
    common(sub.add_parser("eval", help="evaluate a formula"))
    common(sub.add_parser("frame-info", help="show a frame's basis and metric"), input_arg=False)
    tp = sub.add_parser("transform", help="transform a named tensor to a frame")
    tp.add_argument("tensor_name", metavar="TENSOR")
    common(tp, input_arg=False)
    common(sub.add_parser("emit-cd", help="write the tensor1 content dictionary"), input_arg=False, fmt=("xml",), default="xml")
    return p


def _parse_tolerances(items: list[str]) -> dict[str, float]:
    out = {}
    for item in items:
        key, sep, val = item.partition("=")
        if not sep:
            raise ValueError(f"--tol expects NAME=VALUE, got {item!r}")
        try:
            out[key.strip()] = float(val)
        except ValueError:
            raise ValueError(f"--tol {key.strip()}: {val!r} is not a number") from None
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(
            command=args.command,
            input_path=getattr(args, "input", None),
            env_path=args.env_path,
            frame_name=args.frame_name,
            output_format=args.output_format,
            compact=getattr(args, "compact", False),
            out_path=args.out_path,
            tensor_name=getattr(args, "tensor_name", None),
            tolerance_overrides=_parse_tolerances(args.tolerances),
        )
    except ValueError as exc:
        print(f"error Config 0:0 {exc}", file=sys.stderr)
        return CONFIG
    try:
        with tolerance_overrides(**(cfg.tolerance_overrides or {})):
            return COMMANDS[cfg.command](cfg)
    except _Exit as e:
        return e.code


if __name__ == "__main__":
    sys.exit(main())
