"""Run every corpus file through the library and compare with its manifest."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from omtensor.compact import parse_compact
from omtensor.env import load_environment
from omtensor.errors import OMTensorError
from omtensor.om import parse_xml
from omtensor.semantics import Scalar, Tensor, Tuple, evaluate, validate

ROOT = Path(__file__).resolve().parents[1] / "corpus"


def load(path: Path):
    text = path.read_text(encoding="utf-8")
    return parse_xml(text) if path.suffix == ".xml" else parse_compact(text.strip())


def flat(value):
    if isinstance(value, Scalar):
        return value.value
    if isinstance(value, Tuple):
        return [flat(v) for v in value.items]
    if isinstance(value, Tensor):
        t = value.tensor
        return {"signature": [s.value for s in t.signature], "components": list(t.components)}
    return value


def matches(got, want, tol) -> bool:
    if isinstance(want, dict):
        return got["signature"] == want["signature"] and np.allclose(got["components"], want["components"], rtol=0, atol=tol)
    if isinstance(want, list):
        return len(got) == len(want) and all(matches(g, w, tol) for g, w in zip(got, want))
    return abs(got - want) <= tol


def check_valid(verbose: bool) -> int:
    manifest = json.loads((ROOT / "valid" / "manifest.json").read_text())
    bad = 0
    for stem, entry in manifest.items():
        env = load_environment(ROOT / "envs" / entry["env"]) if "env" in entry else None
        for suffix in (".xml", ".omc"):
            node = load(ROOT / "valid" / f"{stem}{suffix}")
            errors = [d for d in validate(node, env) if d.is_error]
            ok = not errors
            got = None
            if ok:
                try:
                    got = flat(evaluate(node, env))
                except OMTensorError as exc:
                    ok, got = False, f"{exc.code}: {exc.message}"
            if ok and "expect" in entry:
                ok = matches(got, entry["expect"], entry.get("tol", 0.0))
            bad += not ok
            if verbose or not ok:
                print(f"{'ok  ' if ok else 'FAIL'} valid/{stem}{suffix} -> {errors or got}")
    return bad


def check_invalid(verbose: bool) -> int:
    manifest = json.loads((ROOT / "invalid" / "manifest.json").read_text())
    bad = 0
    for name, entry in manifest.items():
        env = load_environment(ROOT / "envs" / entry["env"]) if "env" in entry else None
        try:
            codes = {(d.code, d.severity.value) for d in validate(load(ROOT / "invalid" / name), env)}
        except OMTensorError as exc:
            codes = {(exc.code, "error")}
        ok = (entry["code"], entry.get("severity", "error")) in codes
        bad += not ok
        if verbose or not ok:
            print(f"{'ok  ' if ok else 'FAIL'} invalid/{name} -> {sorted(codes)}")
    return bad


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    bad = check_valid(args.verbose) + check_invalid(args.verbose)
    print(f"{bad} failure(s)")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
