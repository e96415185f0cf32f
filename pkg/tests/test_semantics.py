import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from omtensor.charts import builtin_chart
from omtensor.compact import parse_compact
from omtensor.env import Environment, load_environment
from omtensor.errors import FrameMismatch, FrameRequired, IndexOutOfRange, PointMismatch, TypeMismatch, UnboundVariable
from omtensor.semantics import (
    FrameRef,
    Scalar,
    Severity,
    Tuple,
    check_curl_cartesian,
    evaluate,
    validate,
)
from omtensor.tensor import CONTRA, COVAR, TensorValue, cartesian_frame, make_frame, vector


def ev(text, env=None):
    return evaluate(parse_compact(text), env)


def codes(text, env=None):
    return [d.code for d in validate(parse_compact(text), env)]


@pytest.fixture
def polar_env():
    c = cartesian_frame([0.0, 2.0], "C")
    p = make_frame(builtin_chart("polar"), [2.0, math.pi / 2], "P")
    return Environment(
        frames={"C": c, "P": p},
        tensors={
            "v": vector([1.0, 0.0], c),
            "w": vector([0.0, 1.0], p),
            "g": TensorValue(2, (COVAR, COVAR), np.eye(2), c),
        },
        scalars={"i": 1},
    )


# -- validation --------------------------------------------------------------


def test_clean_formula_has_no_diagnostics(polar_env):
    assert codes("sum(j=1..2, tensor_selector(v, tuple(contra_index(j)), P))", polar_env) == []


def test_implicit_einstein_reported_at_second_use():
    diags = validate(parse_compact("times(tensor_selector(M, tuple(contra_index(i), covar_index(j)), F), "
                                   "tensor_selector(v, tuple(contra_index(j)), F))"))
    (d,) = [d for d in diags if d.code == "ImplicitEinstein"]
    assert d.severity is Severity.ERROR
    assert "'j'" in d.message
    assert d.span.column > 60


def test_free_einstein_index_reported_once(corpus_dir):
    env = load_environment(corpus_dir / "envs" / "matvec.json")
    text = (corpus_dir / "invalid" / "implicit_einstein.omc").read_text().strip()
    assert codes(text, env) == ["ImplicitEinstein"]


def test_explicit_sum_binds_index():
    text = "sum(j=1..2, times(tensor_selector(M, tuple(contra_index(1), covar_index(j)), F), " \
           "tensor_selector(v, tuple(contra_index(j)), F)))"
    assert "ImplicitEinstein" not in codes(text)


def test_index_count_needs_static_order(polar_env):
    assert codes("tensor_selector(v, tuple(contra_index(1), contra_index(1)), P)", polar_env) == ["IndexCountMismatch"]
    assert codes("tensor_selector(Levi-Civita(3), tuple(covar_index(1)), tensor1:unspecified)") == [
        "IndexCountMismatch"
    ]


@pytest.mark.parametrize(
    "text,code",
    [
        ("Cartesian(0)", "IndexOutOfRange"),
        ("Cartesian(2.0)", "NotNatural"),
        ("tuple_selector(tuple(1, 2), 3)", "IndexOutOfRange"),
        ("basis_selector(F, 1)", "BasisIndexKind"),
        ("metric_tensor(F, covar_index(1))", "ArityMismatch"),
        ("tensor_selector(v, contra_index(1), F)", "TypeMismatch"),
        ("tensor1:tuple", "ArityMismatch"),
        ("arith1:sin(1)", "UnsupportedSymbol"),
        ("sum(k=1.0..2, k)", "SumBounds"),
        ("tensor_selector(Kronecker_tensor(2), tuple(contra_index(3), covar_index(1)), tensor1:unspecified)",
         "IndexOutOfRange"),
    ],
)
def test_static_codes(text, code):
    assert code in codes(text)


def test_unbound_variable_only_with_env(polar_env):
    assert codes("plus(x, 1)") == []
    assert codes("plus(x, 1)", polar_env) == ["UnboundVariable"]


def test_vector_selector_on_coordinates_warns():
    (d,) = validate(parse_compact("linalg1:vector_selector(2, tuple(x, y))"))
    assert (d.code, d.severity) == ("CoordinateTupleNotVector", Severity.WARNING)
    assert not d.is_error


def test_diagnostic_format():
    (d,) = validate(parse_compact("tuple(\n  Cartesian(0))"))
    assert d.format().startswith("error IndexOutOfRange 2:13 ")


# -- evaluation --------------------------------------------------------------


def test_arithmetic():
    assert ev("plus(1, times(2, 3), minus(10, 4))") == Scalar(13)
    assert ev("divide(1, 4)") == Scalar(0.25)
    assert ev("root(-27, 3)") == Scalar(-3.0)
    assert ev("abs(unary_minus(2.5))") == Scalar(2.5)


def test_tuple_selector_both_orders():
    assert ev("tuple_selector(tuple(4, 5, 6), 2)") == Scalar(5)
    assert ev("tuple_selector(2, tuple(4, 5, 6))") == Scalar(5)


def test_sum_binder_accumulates():
    assert ev("sum(k=1..4, power(k, 2))") == Scalar(30)
    assert ev("sum(k=3..2, k)") == Scalar(0)


def test_cartesian_reads_point():
    env = Environment(point=(3.0, 4.0))
    assert ev("tuple(Cartesian(1), Cartesian(2))", env) == Tuple((Scalar(3.0), Scalar(4.0)))
    with pytest.raises(FrameRequired):
        ev("Cartesian(1)")
    with pytest.raises(IndexOutOfRange):
        ev("Cartesian(3)", env)


def test_tensor_selector_transforms(polar_env):
    # v = e_x at the point (0, 2): radial direction is +y, so v is purely angular
    assert ev("tensor_selector(v, tuple(contra_index(1)), P)", polar_env).value == pytest.approx(0.0, abs=1e-15)
    assert ev("tensor_selector(v, tuple(contra_index(2)), P)", polar_env).value == pytest.approx(-0.5)


def test_tensor_selector_lowers(polar_env):
    # w = d/dtheta in P; g_thetatheta = r^2 = 4
    assert ev("tensor_selector(w, tuple(covar_index(2)), P)", polar_env).value == pytest.approx(4.0)


def test_unspecified_frame_rules(polar_env):
    assert ev("tensor_selector(w, tuple(contra_index(2)), tensor1:unspecified)", polar_env) == Scalar(1.0)
    with pytest.raises(FrameRequired):
        ev("plus(tensor_selector(v, tuple(contra_index(1)), tensor1:unspecified), "
           "tensor_selector(w, tuple(contra_index(1)), tensor1:unspecified))", polar_env)


def test_frame_independent_tensors_read_directly(polar_env):
    assert ev("tensor_selector(Kronecker_tensor(2), tuple(contra_index(1), covar_index(1)), P)", polar_env) == Scalar(1.0)
    assert ev("tensor_selector(Levi-Civita(3), tuple(covar_index(2), covar_index(1), covar_index(3)), "
              "tensor1:unspecified)") == Scalar(-1.0)


def test_metric_component_access(polar_env):
    assert ev("metric_tensor(P, covar_index(2), covar_index(2))", polar_env).value == pytest.approx(4.0)
    assert ev("metric_tensor(P, contra_index(2), contra_index(2))", polar_env).value == pytest.approx(0.25)
    assert ev("metric_tensor(P, contra_index(1), covar_index(1))", polar_env) == Scalar(1.0)
    with pytest.raises(FrameRequired):
        ev("metric_tensor(tensor1:unspecified)", polar_env)


def test_basis_selector_returns_cartesian_components(polar_env):
    g2 = ev("basis_selector(P, covar_index(2))", polar_env).tensor
    np.testing.assert_allclose(g2.components, [-2.0, 0.0], atol=1e-15)
    assert g2.signature == (CONTRA,)
    dual2 = ev("basis_selector(P, contra_index(2))", polar_env).tensor
    assert dual2.signature == (COVAR,)
    assert float(dual2.components @ g2.components) == pytest.approx(1.0)


def test_basis_tuple_literal_frame():
    env = Environment(point=(0.0, 0.0))
    text = "tensor_selector(unit_Cartesian(2), tuple(contra_index(2)), tuple(tuple(2, 0), tuple(1, 1)))"
    assert ev(text, env).value == pytest.approx(1.0)


def test_times_of_tensors_is_tensor_product(polar_env):
    t = ev("times(Kronecker_tensor(2), Kronecker_tensor(2))", polar_env).tensor
    assert t.order == 4
    assert t.component(1, 1, 2, 2) == 1.0


def test_point_mismatch_surfaces():
    c = cartesian_frame([1.0, 0.0], "C")
    env = Environment(frames={"C": c, "Q": cartesian_frame([0.0, 1.0], "Q")}, tensors={"v": vector([1.0, 0.0], c)})
    with pytest.raises(PointMismatch) as info:
        ev("tensor_selector(v, tuple(contra_index(1)), Q)", env)
    assert info.value.span is not None


def test_evaluation_errors_carry_spans():
    with pytest.raises(UnboundVariable) as info:
        ev("plus(1, nope)")
    assert info.value.span.column == 9
    with pytest.raises(TypeMismatch):
        ev("plus(1, tuple(1, 2))")


def test_frame_ref_equality(polar_env):
    assert FrameRef(polar_env.frames["C"]) == FrameRef(cartesian_frame([0.0, 2.0]))
    assert FrameRef(None) != FrameRef(polar_env.frames["C"])


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=6))
def test_plus_matches_python_sum(xs):
    assert ev("plus(" + ", ".join(map(str, xs)) + ")") == Scalar(sum(xs))


# -- curl -----------------------------------------------------------------


def test_curl_of_rotation_field():
    P = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    curl = check_curl_cartesian(P, cartesian_frame([1.0, 2.0, 3.0]))
    assert curl.components.tolist() == [0.0, 0.0, 2.0]


def test_curl_of_gradient_field_vanishes():
    H = np.array([[2.0, 1.0, 0.5], [1.0, -3.0, 4.0], [0.5, 4.0, 1.0]])  # symmetric Hessian
    assert np.all(check_curl_cartesian(H, cartesian_frame([0.0, 0.0, 0.0])).components == 0.0)


def test_curl_rejects_curvilinear():
    f = make_frame(builtin_chart("spherical"), [1.0, 1.0, 1.0])
    with pytest.raises(FrameMismatch):
        check_curl_cartesian(np.zeros((3, 3)), f)
