import io
import json
import subprocess
import sys

import numpy as np
import pytest

from omtensor import cli, render
from omtensor.compact import parse_compact
from omtensor.env import load_environment
from omtensor.om import parse_xml
from omtensor.semantics import evaluate


@pytest.fixture
def run(capsys):
    def _run(*argv):
        code = cli.main([str(a) for a in argv])
        out, err = capsys.readouterr()
        return code, out, err

    return _run


@pytest.fixture
def envs(corpus_dir):
    return corpus_dir / "envs"


def test_parse_emits_canonical_xml(run, corpus_dir):
    path = corpus_dir / "valid" / "matvec.xml"
    code, out, _ = run("parse", path)
    assert code == 0
    assert parse_xml(out) == parse_xml(path.read_text())
    code, again, _ = run("parse", "--format", "xml", corpus_dir / "valid" / "matvec.omc")
    assert again == out


def test_parse_text_and_json(run, corpus_dir):
    path = corpus_dir / "valid" / "cartesian1.xml"
    code, out, _ = run("parse", "--format", "text", path)
    assert out == "tensor1:Cartesian(1)\n"
    code, out, _ = run("parse", "--format", "json", path)
    doc = json.loads(out)
    assert doc["kind"] == "application" and doc["head"]["name"] == "Cartesian"


def test_parse_reads_stdin(run, monkeypatch):
    monkeypatch.setattr(sys, "stdin", io.TextIOWrapper(io.BytesIO(b"tuple(1, 2)")))
    code, out, _ = run("parse", "--format", "text")
    assert (code, out) == (0, "tensor1:tuple(1, 2)\n")


def test_parse_error_exit_code(run, corpus_dir):
    code, _, err = run("parse", corpus_dir / "invalid" / "omstr.xml")
    assert code == cli.PARSE
    assert err.startswith("error UnsupportedElement 4:5 ")


def test_missing_input_is_io_error(run, tmp_path):
    code, _, err = run("parse", tmp_path / "nope.xml")
    assert code == cli.IO and "IOError" in err


def test_validate_ok_and_semantic_error(run, corpus_dir, envs):
    code, out, _ = run("validate", "--env", envs / "matvec.json", corpus_dir / "valid" / "matvec.xml")
    assert (code, out) == (0, "")
    code, out, _ = run("validate", "--env", envs / "matvec.json", corpus_dir / "invalid" / "implicit_einstein.omc")
    assert code == cli.SEMANTIC
    assert any(line.startswith("error ImplicitEinstein 1:") for line in out.splitlines())


def test_validate_warning_only_exits_zero(run, corpus_dir):
    code, out, _ = run("validate", "--format", "json", corpus_dir / "invalid" / "vector_selector_coords.omc")
    assert code == 0
    (d,) = json.loads(out)
    assert (d["severity"], d["code"], d["line"]) == ("warning", "CoordinateTupleNotVector", 1)


def test_eval_text(run, corpus_dir, envs):
    code, out, _ = run("eval", "--env", envs / "matvec.json", corpus_dir / "valid" / "matvec.omc")
    assert (code, out) == (0, "17\n")


def test_eval_requires_env(run, corpus_dir):
    code, _, err = run("eval", corpus_dir / "valid" / "matvec.omc")
    assert code == cli.CONFIG and "--env" in err


def test_eval_bad_env_schema(run, corpus_dir, envs):
    code, _, err = run("eval", "--env", envs / "bad_schema.json", corpus_dir / "valid" / "cartesian1.omc")
    assert code == cli.CONFIG and err.startswith("error EnvSchema")


def test_eval_singular_env_is_semantic(run, corpus_dir, envs):
    code, _, err = run("eval", "--env", envs / "polar_origin.json", corpus_dir / "valid" / "cartesian1.omc")
    assert code == cli.SEMANTIC and "SingularChart" in err


def test_eval_unbound_variable(run, corpus_dir, envs):
    code, _, err = run("eval", "--env", envs / "missing_v.json", corpus_dir / "valid" / "norm_sq.omc")
    assert code == cli.SEMANTIC and "UnboundVariable" in err


@pytest.mark.parametrize("stem,env", [("basis_vector", "polar_basis.json"), ("norm_sq", "polar_norm.json"),
                                      ("unit_vectors", "point3.json"), ("coordinate_tuple", "point3.json")])
def test_eval_json_roundtrip(run, corpus_dir, envs, stem, env):
    code, out, _ = run("eval", "--format", "json", "--env", envs / env, corpus_dir / "valid" / f"{stem}.xml")
    assert code == 0
    e = load_environment(envs / env)
    direct = evaluate(parse_xml((corpus_dir / "valid" / f"{stem}.xml").read_text()), e)
    assert render.value_from_json(json.loads(out), e) == direct


def test_eval_xml_output(run, corpus_dir, envs):
    code, out, _ = run("eval", "--format", "xml", "--env", envs / "polar_basis.json",
                       corpus_dir / "valid" / "basis_vector.omc")
    node = parse_xml(out)
    assert [a.value for a in node.args] == pytest.approx([0.0, 2.0], abs=1e-15)


def test_frame_info(run, envs):
    code, out, _ = run("frame-info", "--env", envs / "polar_basis.json", "--frame", "F", "--format", "json")
    assert code == 0
    info = json.loads(out)
    np.testing.assert_allclose(info["metric"], [[1.0, 0.0], [0.0, 4.0]], atol=1e-15)
    assert info["chart"] == "polar" and info["det_basis"] == pytest.approx(2.0)
    code, out, _ = run("frame-info", "--env", envs / "polar_basis.json", "--frame", "F")
    assert out.startswith("frame F\nchart polar\n")


def test_frame_info_unknown_frame(run, envs):
    code, _, err = run("frame-info", "--env", envs / "polar_basis.json", "--frame", "Z")
    assert code == cli.SEMANTIC


def test_transform(run, envs):
    code, out, _ = run("transform", "v", "--env", envs / "polar_frames.json", "--frame", "P", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    np.testing.assert_allclose(doc["components"], [1.0, 0.0], atol=1e-15)
    assert doc["frame"] == {"name": "P", "chart": "polar", "point": [2.0, 0.0]}


@pytest.mark.parametrize("tensor,frame,code_name", [("w", "P", "PointMismatch"), ("delta", "P", "UnspecifiedFrame")])
def test_transform_failures(run, envs, tensor, frame, code_name):
    code, _, err = run("transform", tensor, "--env", envs / "polar_frames.json", "--frame", frame)
    assert code == cli.SEMANTIC and code_name in err


def test_emit_cd_deterministic(run, tmp_path):
    a, b = tmp_path / "a.ocd", tmp_path / "b.ocd"
    assert run("emit-cd", "--out", a)[0] == 0
    assert run("emit-cd", "--out", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    _, out, _ = run("emit-cd")
    assert out.encode() == a.read_bytes()


def test_out_to_unwritable_path(run, tmp_path):
    code, _, err = run("emit-cd", "--out", tmp_path / "missing_dir" / "x.ocd")
    assert code == cli.IO


def test_module_entry_point(corpus_dir):
    proc = subprocess.run(
        [sys.executable, "-m", "omtensor", "parse", "--format", "text", str(corpus_dir / "valid" / "arithmetic.xml")],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert parse_compact(proc.stdout.strip()) == parse_xml((corpus_dir / "valid" / "arithmetic.xml").read_text())


@pytest.mark.parametrize("env", ["cartesian_norm.json", "polar_norm.json"])
def test_norm_sq_prints_25(run, corpus_dir, envs, env):
    code, out, _ = run("eval", "--env", envs / env, corpus_dir / "valid" / "norm_sq.omc")
    assert (code, out) == (0, "25\n")


def test_frame_info_singular(run, envs):
    code, _, err = run("frame-info", "--env", envs / "polar_origin.json", "--frame", "O")
    assert code == cli.SEMANTIC and "SingularChart" in err


def test_transform_to_same_frame_is_unchanged(run, envs):
    code, out, _ = run("transform", "v", "--env", envs / "polar_frames.json", "--frame", "C", "--format", "json")
    assert json.loads(out)["components"] == [1.0, 0.0]


def test_tolerance_override(run, envs):
    # Q sits one unit away from v's anchor; a loose point tolerance lets the transform through
    args = ("transform", "w", "--env", envs / "polar_frames.json", "--frame", "C")
    assert run(*args)[0] == cli.SEMANTIC
    code, out, _ = run(*args, "--tol", "point_atol=2.0", "--format", "json")
    assert code == 0
    np.testing.assert_allclose(json.loads(out)["components"], [0.0, 1.0], atol=1e-15)


@pytest.mark.parametrize("tol", ["nope=1", "point_atol", "point_atol=abc", "singular_det=-1"])
def test_bad_tolerance_is_config_error(run, envs, tol):
    code, _, err = run("frame-info", "--env", envs / "polar_basis.json", "--frame", "F", "--tol", tol)
    assert code == cli.CONFIG
