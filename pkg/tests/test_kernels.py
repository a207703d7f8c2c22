import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qpflab import kernels
from qpflab.circle import RotationSpec
from qpflab.systems import (cos_2pi, make_arctan_family, make_arnold, make_custom, make_harper,
                            make_harper_interval, make_pinched, make_rescaled_arctan, make_symmetric)

needs_core = pytest.mark.skipif(not kernels.compiled_available(), reason="compiled core not built")

SYSTEMS = {
    "arctan": lambda: make_arctan_family(10.0, 0.9),
    "rescaled": lambda: make_rescaled_arctan(100.0, beta=1.19),
    "symmetric": lambda: make_symmetric(10.0, 1.645),
    "pinched": lambda: make_pinched(10.0),
    "arnold": lambda: make_arnold(0.337, 0.99, 0.6),
    "arnold_peak": lambda: make_arnold(0.0, 0.99, -0.45, forcing="peak"),
    "harper": lambda: make_harper(4.4, 4.0),
    "harper_interval": lambda: make_harper_interval(8.0, 7.0),
}


@pytest.fixture
def python_backend():
    prev = kernels.backend()
    kernels.set_backend("python")
    yield
    if prev == "compiled":
        kernels.set_backend("compiled")


def _both(fn):
    prev = kernels.backend()
    try:
        kernels.set_backend("compiled")
        a = fn()
        kernels.set_backend("python")
        b = fn()
    finally:
        kernels.set_backend(prev)
    return a, b


def _close(a, b, wraps):
    d = np.abs(a - b)
    if wraps:
        d = np.minimum(d, 1.0 - d) if np.max(np.abs(a)) <= 1 else np.minimum(d % np.pi, np.pi - d % np.pi)
    return d


@needs_core
@pytest.mark.parametrize("name", sorted(SYSTEMS))
def test_orbit_final_backends_agree(name):
    s = SYSTEMS[name]()
    G = 64
    t0 = np.arange(G) / G
    m0 = np.full(G, -200)
    x0 = np.full(G, 0.3)
    (a, ea), (b, eb) = _both(lambda: kernels.orbit_final(s, t0, m0, x0, 200))
    assert np.max(_close(a, b, s.wraps)) < 1e-9
    assert np.array_equal(ea, eb)


@needs_core
@pytest.mark.parametrize("name", ["arctan", "pinched", "harper", "symmetric"])
def test_orbit_logsum_backends_agree(name):
    s = SYSTEMS[name]()
    t0 = np.linspace(0, 1, 17, endpoint=False) + 0.01
    (xa, sa), (xb, sb) = _both(lambda: kernels.orbit_logsum(s, t0, np.zeros(17, dtype=np.int64),
                                                            np.full(17, 0.2), 300))
    assert np.allclose(sa, sb, rtol=1e-10, atol=1e-8)


@needs_core
@given(st.floats(0.0, 1.2), st.floats(0.0, 1.0, exclude_max=True), st.floats(-3.0, 3.0))
def test_trajectory_backends_agree(beta, theta, x):
    s = make_arctan_family(10.0, beta)
    a, b = _both(lambda: kernels.trajectory(s, theta, 5, x, 50))
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


@needs_core
def test_escape_steps_agree():
    s = make_arctan_family(10.0, 1.0)
    G = 128
    t0 = np.arange(G) / G
    (a, ea), (b, eb) = _both(lambda: kernels.orbit_final(s, t0, np.full(G, -500), np.full(G, 3.0), 500,
                                                         escape_at=0.0))
    assert np.array_equal(ea, eb)
    assert (ea >= 0).any()


@needs_core
def test_cocycle_backends_agree():
    th = np.array([0.1, 0.7])
    a, b = _both(lambda: kernels.cocycle_lognorm(cos_2pi(), 4.4, 4.0, RotationSpec.golden(), th, 5000, True))
    assert np.allclose(a, b, rtol=1e-12)


def test_trajectory_matches_direct_iteration():
    s = make_arctan_family(10.0, 0.8)
    xs = kernels.trajectory(s, 0.2, 3, 1.5, 20)
    spec = s.spec
    x = 1.5
    for i in range(20):
        th = (0.2 + (3 + i) * spec.omega) % 1.0
        x = float(s.fibre(th, x))
        assert xs[i + 1] == pytest.approx(x, rel=1e-10, abs=1e-12)


def test_backward_trajectory_inverts_forward():
    # forward steps near 0 expand, so the backward steps are well conditioned
    s = make_arctan_family(10.0, 0.0)
    xs = kernels.trajectory(s, 0.0, -6, 1e-6, 6)
    ys = kernels.backward_trajectory(s, 0.0, 0, xs[-1], 6)
    assert ys == pytest.approx(xs[::-1], rel=1e-10, abs=1e-18)


@pytest.mark.parametrize("workers", [2, 3, 8])
def test_workers_do_not_change_results(workers):
    s = make_arctan_family(10.0, 0.95)
    G = 257
    t0 = np.arange(G) / G
    m0 = np.full(G, -300)
    a, ea = kernels.orbit_final(s, t0, m0, np.full(G, 3.0), 300)
    b, eb = kernels.orbit_final(s, t0, m0, np.full(G, 3.0), 300, workers=workers)
    assert np.array_equal(a, b) and np.array_equal(ea, eb)
    _, la = kernels.orbit_logsum(s, t0, m0, np.full(G, 3.0), 100)
    _, lb = kernels.orbit_logsum(s, t0, m0, np.full(G, 3.0), 100, workers=workers)
    assert np.array_equal(la, lb)


def test_custom_system_runs_on_fallback():
    s = make_custom(lambda x: np.tanh(3 * x), lambda x: 3 / np.cosh(3 * x) ** 2,
                    lambda t: np.sin(2 * np.pi * t), 0.2)
    x, _ = kernels.orbit_final(s, np.array([0.0, 0.5]), np.array([0, 0]), np.array([0.1, 0.1]), 10)
    assert np.all(np.isfinite(x))


def test_fallback_orbit_final(python_backend):
    s = make_pinched(10.0)
    x, _ = kernels.orbit_final(s, np.array([0.0]), np.array([0]), np.array([1.0]), 1)
    # the map on fibre 0 vanishes, so the image over omega_1 is 0
    assert x[0] == 0.0


def test_set_backend_validation():
    with pytest.raises(ValueError):
        kernels.set_backend("gpu")
    assert kernels.backend() in ("compiled", "python")


def test_pinched_logsum_oracle():
    # (1/n) sum log(alpha sin(pi theta_i)) -> log alpha - log 2 along the zero line
    s = make_pinched(10.0)
    n = 200000
    _, ls = kernels.orbit_logsum(s, np.array([math.sqrt(2) - 1]), np.array([0]), np.array([0.0]), n)
    assert ls[0] / n == pytest.approx(math.log(5.0), abs=2e-3)
