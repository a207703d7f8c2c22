import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qpflab.circle import (CircleAngle, RotationSpec, circle_dist, continued_fraction, dist_to_set,
                           estimate_dioph, orbit_point, orbit_point_mp, orbit_points, record_returns, rotate,
                           wrap)

reals = st.floats(-1e6, 1e6, allow_nan=False)
unit = st.floats(0.0, 1.0, exclude_max=True)


@given(reals)
def test_wrap_lands_in_unit_interval(x):
    y = float(wrap(x))
    assert 0.0 <= y < 1.0
    assert abs(math.remainder(y - x, 1.0)) < 1e-9


@given(unit, unit)
def test_circle_dist_symmetric_and_bounded(a, b):
    d = float(circle_dist(a, b))
    assert d == float(circle_dist(b, a))
    assert 0.0 <= d <= 0.5


@given(unit, unit, unit)
def test_circle_dist_triangle(a, b, c):
    assert circle_dist(a, c) <= circle_dist(a, b) + circle_dist(b, c) + 1e-15


def test_circle_dist_wraps_across_zero():
    assert circle_dist(0.95, 0.05) == pytest.approx(0.1)
    assert dist_to_set(0.49, (0.0, 0.5)) == pytest.approx(0.01)


def test_circle_angle_arithmetic():
    a = CircleAngle(0.75) + CircleAngle(0.5)
    assert float(a) == pytest.approx(0.25)
    assert a.dist(CircleAngle(0.2)) == pytest.approx(0.05)


def test_continued_fraction_golden_and_silver():
    g = continued_fraction(RotationSpec.golden().omega, 20)
    assert g.quotients == [1] * 20 and not g.truncated
    s = continued_fraction(RotationSpec.silver().omega, 15)
    assert s.quotients == [2] * 15


def test_continued_fraction_truncates_at_double_precision():
    r = continued_fraction(RotationSpec.golden().omega, 200)
    assert r.truncated
    assert 30 <= len(r.quotients) < 200


def test_continued_fraction_rational_input():
    # 3/8 = [0; 2, 1, 2] exactly; with zero tolerance the expansion stops there
    r = continued_fraction(0.375, 5, tol=0.0)
    assert r.quotients == [2, 1, 2] and r.truncated
    # the last quotient sits on an integer, so any uncertainty leaves it undetermined
    assert continued_fraction(0.375, 3).quotients == [2, 1]


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.3, 1.5])
def test_continued_fraction_rejects_out_of_range(bad):
    with pytest.raises(ValueError):
        continued_fraction(bad, 3)


@pytest.mark.parametrize("n", [1, 13, 6765, 10**5, -832040, 2**25 - 1])
def test_orbit_point_exact_for_the_stored_omega(n):
    # oracle: n times the double omega, reduced in 60-digit arithmetic
    spec = RotationSpec.golden()
    with mpmath.workdps(60):
        v = n * mpmath.mpf(spec.omega)
        ref = float(v - mpmath.floor(v))
    assert circle_dist(orbit_point(spec, n), ref) <= 4 * 2.0**-53


@pytest.mark.parametrize("n", [13, 6765, 2**25 - 1])
def test_orbit_point_drift_from_true_golden_mean(n):
    # the stored omega differs from the irrational by < 1 ulp; the drift grows like n ulp
    spec = RotationSpec.golden()
    with mpmath.workdps(40):
        ref = float(orbit_point_mp(spec, n))
    assert circle_dist(orbit_point(spec, n), ref) <= abs(n) * 2.0**-53 + 2.0**-52


def test_split_is_exact():
    hi, lo = RotationSpec.golden().split
    assert hi + lo == RotationSpec.golden().omega
    # m*hi is exact for |m| < 2^26
    m = 2**25 + 3
    assert math.fsum([m * hi]) == float(mpmath.mpf(m) * mpmath.mpf(hi))


def test_rotate_theta0_zero_gives_zero_at_m0():
    assert rotate(RotationSpec.golden(), 0.0, 0) == 0.0
    pts = orbit_points(RotationSpec.golden(), np.arange(-3, 4))
    assert pts[3] == 0.0


@given(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6))
def test_rotate_is_additive(m, k):
    spec = RotationSpec.golden()
    a = rotate(spec, rotate(spec, 0.0, m), k)
    b = rotate(spec, 0.0, m + k)
    assert circle_dist(a, b) < 1e-9


def test_record_returns_are_fibonacci_numbers():
    rec = record_returns(RotationSpec.golden(), 10**4)
    fib = [1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 610, 987, 1597, 2584, 4181, 6765]
    assert list(rec) == fib


def test_dioph_estimate_golden():
    est = estimate_dioph(RotationSpec.golden(), 10**4)
    assert est.d == pytest.approx(1.0, abs=0.05)
    # ||n omega|| ~ 1/(sqrt5 n) along the Fibonacci records
    assert est.c == pytest.approx(1 / math.sqrt(5), rel=0.2)
    assert est.holds


def test_rotation_spec_validation():
    with pytest.raises(ValueError):
        RotationSpec(1.2)
    with pytest.raises(ValueError):
        RotationSpec(0.3, dioph_c=-1.0)


def test_omega_mp_uses_exact_expression():
    with mpmath.workdps(50):
        w = RotationSpec.golden().omega_mp()
        assert abs(w - (mpmath.sqrt(5) - 1) / 2) < mpmath.mpf(10) ** -48
