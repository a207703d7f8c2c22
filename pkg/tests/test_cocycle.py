import csv
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qpflab.circle import RotationSpec
from qpflab.cocycle import (LambdaC, Mat2, cocycle_lyapunov, cocycle_run, lambda_c, monotone_onset,
                            projective_derivative_identity, schrodinger_matrix, two_graphs_persist, write_curve_csv)
from qpflab.systems import cos_2pi, peak

finite = st.floats(-5, 5)


@given(finite, finite, finite, finite, finite, finite, finite, finite)
def test_mat2_product_matches_numpy(a, b, c, d, e, f, g, h):
    A, B = Mat2(a, b, c, d), Mat2(e, f, g, h)
    ref = np.array([[a, b], [c, d]]) @ np.array([[e, f], [g, h]])
    assert np.allclose(np.array(A @ B).reshape(2, 2), ref)
    assert A.det() == pytest.approx(np.linalg.det(np.array([[a, b], [c, d]])), abs=1e-9)


@given(st.floats(0, 1, exclude_max=True), st.floats(-6, 6), st.floats(-6, 6))
def test_schrodinger_matrix_is_unimodular(theta, E, lam):
    M = schrodinger_matrix(theta, E, lam)
    assert M.det() == 1.0
    assert M.norm() >= 1.0 - 1e-12


def test_cocycle_run_matches_explicit_product():
    spec = RotationSpec.golden()
    E, lam, th0, n = 4.4, 4.0, 0.123, 60
    P = np.eye(2)
    for k in range(n):
        th = (th0 + k * spec.omega) % 1.0
        P = np.array([[E - lam * math.cos(2 * math.pi * th), -1.0], [1.0, 0.0]]) @ P
    ref = math.log(np.linalg.norm(P @ np.array([1.0, 0.0])))
    run = cocycle_run(th0, E, lam, cos_2pi(), spec, n)
    assert run.log_norm_trace[-1] == pytest.approx(ref, rel=1e-10)
    assert run.log_norm_trace[0] == 0.0


@pytest.mark.parametrize("E,ref", [(3.0, math.acosh(1.5)), (6.0, math.acosh(3.0)), (1.0, 0.0)])
def test_free_laplacian_exponent(E, ref):
    est = cocycle_lyapunov(E, 0.0, n=20000, samples=4)
    assert est.value == pytest.approx(ref, abs=2e-3)


def test_herman_bound_single_energy():
    est = cocycle_lyapunov(0.0, 4.0, n=20000, samples=8)
    assert est.value >= math.log(2.0) - 0.01
    assert est.stderr < 0.01 and est.samples == 8


def test_cocycle_estimate_is_seeded():
    a = cocycle_lyapunov(2.0, 4.0, n=2000, samples=4, seed=3)
    b = cocycle_lyapunov(2.0, 4.0, n=2000, samples=4, seed=3)
    assert a == b


def test_cocycle_needs_long_runs():
    with pytest.raises(ValueError):
        cocycle_lyapunov(2.0, 4.0, n=999)


@given(st.floats(0, 1, exclude_max=True), st.floats(-math.pi, math.pi))
def test_projective_derivative_identity(theta, phi):
    chk = projective_derivative_identity(theta, (math.cos(phi), math.sin(phi)), 4.4, 4.0, n=100)
    assert chk.gap < 1e-8


def test_identity_rejects_zero_vector():
    with pytest.raises(ValueError):
        projective_derivative_identity(0.1, (0.0, 0.0), 4.4, 4.0)


def test_lambda_c_bracket_and_persistence():
    lc = lambda_c(8.0, peak(2.0), tol=1e-2, N=4000, G=256)
    assert lc.lo < lc.hi and lc.hi - lc.lo <= 1.1e-2
    assert two_graphs_persist(8.0, lc.lo - 0.05, N=4000, G=256)
    assert not two_graphs_persist(8.0, lc.hi + 0.05, N=4000, G=256)


def test_curve_csv(tmp_path):
    rows = [LambdaC(6.0, 5.5, 5.6), LambdaC(8.0, 7.6, 7.7)]
    write_curve_csv(rows, tmp_path / "c.csv")
    data = list(csv.reader(open(tmp_path / "c.csv")))
    assert data[0] == ["E", "lambda_c_low", "lambda_c_high"]
    assert float(data[2][1]) == 7.6 and rows[0].mid == pytest.approx(5.55)


def test_monotone_onset():
    rows = [LambdaC(2.0, 1.0, 1.1), LambdaC(3.0, 0.8, 0.9), LambdaC(4.0, 1.5, 1.6), LambdaC(5.0, 1.9, 2.0)]
    assert monotone_onset(rows) == 3.0
    # overlapping brackets do not count as increasing
    assert monotone_onset(rows[:2] + [LambdaC(4.0, 0.85, 1.0)]) == 4.0
    assert monotone_onset(rows[::-1]) == 3.0
    with pytest.raises(ValueError):
        monotone_onset([])
