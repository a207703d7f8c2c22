import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qpflab.errors import GridMismatch, InverseOutOfRange, NoBasinBoundary, NotInvariant
from qpflab.graphs import (GraphSample, constant_graph, finite_time_exponents, graph_lyapunov, invariance_residual,
                           iterate_boundary, make_grid, middle_graph, min_graph_distance, pinched_fraction,
                           pullback_graph)
from qpflab.systems import make_arctan_family, make_pinched

ALPHA = 10.0
DF0 = ALPHA / math.atan(ALPHA)          # slope of the base map at 0
DF1 = DF0 / (1 + ALPHA**2)              # slope at the fixed points +-1


def test_grid_contains_orbit_points_and_is_sorted():
    s = make_arctan_family(ALPHA, 0.5)
    g, t0, m = make_grid(64, s, 10)
    assert g.size == 74 and np.all(np.diff(g) > 0)
    assert set(m[m > 0]) == set(range(1, 11))
    k = np.flatnonzero(m == 1)[0]
    assert g[k] == pytest.approx(s.spec.omega)


def test_grid_sample_validation():
    with pytest.raises(ValueError):
        GraphSample(np.array([0.5, 0.2]), np.zeros(2), "upper")
    with pytest.raises(ValueError):
        GraphSample(np.array([0.1, 0.2]), np.zeros(3), "upper")


def test_unforced_arctan_graphs_are_fixed_points():
    s = make_arctan_family(ALPHA, 0.0)
    up = iterate_boundary(s, "upper", 200, G=64)
    lo = iterate_boundary(s, "lower", 200, G=64)
    assert np.allclose(up.values, 1.0, atol=1e-12)
    assert np.allclose(lo.values, -1.0, atol=1e-12)
    lam, res = graph_lyapunov(s, up)
    assert lam == pytest.approx(math.log(DF1), rel=1e-10)
    assert res < 1e-12


def test_unforced_middle_graph_is_zero():
    s = make_arctan_family(ALPHA, 0.0)
    mid = middle_graph(s, G=32)
    assert np.allclose(mid.values, 0.0, atol=1e-9)
    lam, _ = graph_lyapunov(s, mid, tol=None)
    assert lam == pytest.approx(math.log(DF0), rel=1e-6)


def test_upper_iterates_decrease_monotonically():
    s = make_arctan_family(ALPHA, 0.9)
    prev = None
    for n in (1, 5, 20, 80):
        g = iterate_boundary(s, "upper", n, G=128)
        if prev is not None:
            assert np.all(g.values <= prev + 1e-15)
        prev = g.values


def test_invariance_residual_shrinks_and_lyapunov_negative():
    s = make_arctan_family(ALPHA, 0.9)
    r1 = invariance_residual(s, iterate_boundary(s, "upper", 10, G=128))
    g = iterate_boundary(s, "upper", 400, G=128)
    r2 = invariance_residual(s, g)
    assert r2 < 1e-12 < r1
    lam, _ = graph_lyapunov(s, g)
    assert lam < 0


def test_graph_lyapunov_rejects_non_invariant():
    s = make_arctan_family(ALPHA, 0.9)
    with pytest.raises(NotInvariant):
        graph_lyapunov(s, iterate_boundary(s, "upper", 3, G=32))


def test_pinched_iterates_vanish_on_orbit_points():
    s = make_pinched(ALPHA)
    for n in (1, 7, 30):
        g = iterate_boundary(s, "upper", n, G=512, orbit_points=30)
        orb = g.base_m > 0
        hit = orb & (g.base_m <= n)
        assert np.all(np.abs(g.values[hit]) <= 1e-12)
        assert np.all(g.values[orb & (g.base_m > n)] > 0)


def test_middle_graph_lies_between_bounding_graphs():
    s = make_arctan_family(ALPHA, 0.9)
    grid = make_grid(256, s)
    up = iterate_boundary(s, "upper", 2000, grid=grid)
    lo = iterate_boundary(s, "lower", 2000, grid=grid)
    mid = middle_graph(s, grid=grid)
    assert np.all(lo.values < mid.values) and np.all(mid.values < up.values)
    assert mid.meta["undecided"] == 0
    # the pullback of 0 converges to the same repelling graph
    pb = pullback_graph(s, 400, 0.0, grid=grid)
    assert np.max(np.abs(pb.values - mid.values)) < 1e-6


def test_middle_graph_absent_past_the_bifurcation():
    with pytest.raises(NoBasinBoundary):
        middle_graph(make_arctan_family(ALPHA, 1.0), G=32)


def test_min_graph_distance_and_pinching():
    s = make_arctan_family(ALPHA, 0.9)
    grid = make_grid(128, s)
    a = constant_graph(s, 0.0, grid=grid)
    b = iterate_boundary(s, "upper", 500, grid=grid)
    d, th = min_graph_distance(a, b)
    assert d == pytest.approx(b.values.min())
    assert b.at(th) == pytest.approx(d)
    assert pinched_fraction(a, a, 1e-12) == 1.0
    other = constant_graph(s, 0.0, G=64)
    with pytest.raises(GridMismatch):
        min_graph_distance(a, other)


def test_finite_time_exponents_at_repelling_fixed_point():
    s = make_arctan_family(ALPHA, 0.0)
    prof = finite_time_exponents(s, 0.3, 0.0, [1, 10, 100])
    assert prof.forward == pytest.approx([math.log(DF0)] * 3, rel=1e-12)
    assert prof.backward == pytest.approx([-math.log(DF0)] * 3, rel=1e-12)


def test_finite_time_backward_out_of_range():
    with pytest.raises(InverseOutOfRange):
        finite_time_exponents(make_arctan_family(ALPHA, 0.9), 0.0, 1.0, [100])


def test_finite_time_rejects_bad_horizons():
    with pytest.raises(ValueError):
        finite_time_exponents(make_arctan_family(ALPHA, 0.0), 0.0, 0.0, [0])


def test_csv_and_npz_round_trip(tmp_path):
    s = make_arctan_family(ALPHA, 0.8)
    g = iterate_boundary(s, "upper", 50, G=64, orbit_points=5)
    g.to_csv(tmp_path / "g.csv")
    data = np.loadtxt(tmp_path / "g.csv", delimiter=",", skiprows=1)
    assert np.array_equal(data[:, 1], g.values)
    assert (tmp_path / "g.csv").read_text().splitlines()[0] == "theta,value"
    g.to_npz(tmp_path / "g.npz")
    h = GraphSample.from_npz(tmp_path / "g.npz")
    assert h.same_grid(g) and np.array_equal(h.values, g.values) and h.kind == "upper"


@given(st.floats(0.0, 1.0, exclude_max=True))
def test_at_returns_nearest_value(theta):
    g = GraphSample(np.arange(8) / 8, np.arange(8.0), "upper")
    k = round(theta * 8) % 8
    assert g.at(theta) == float(k)
