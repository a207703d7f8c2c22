import csv

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qpflab.circle import RotationSpec, circle_dist
from qpflab.errors import ChainTooShort
from qpflab.graphs import GraphSample, iterate_boundary, make_grid
from qpflab.peaks import Peak, detect_peaks, noise_level, sharpening_rate, track_peaks, write_peaks_csv
from qpflab.systems import make_pinched

G = 4096
SPEC = RotationSpec.golden()
W = SPEC.omega


def dipped(dips, G=G):
    """A flat graph at 1 with triangular dips ``(center, depth, half_width)``."""
    th = np.arange(G) / G
    v = np.ones(G)
    for c, d, w in dips:
        v -= d * np.maximum(0.0, 1.0 - circle_dist(th, c % 1.0) / w)
    return GraphSample(th, v, "upper")


# a chain along the rotation with steepness doubling each step, one stray dip and one shallow dip
CHAIN = [(0.1 + j * W, 0.5, 0.02 / 2**j) for j in range(4)]
GRAPH = dipped(CHAIN + [(0.6, 0.5, 0.02), (0.25, 0.01, 0.01)])


def test_detect_finds_deep_dips_only():
    peaks = detect_peaks(GRAPH, min_depth=0.1)
    assert len(peaks) == 5
    centers = sorted([c % 1.0 for c, _, _ in CHAIN] + [0.6])
    for p, c in zip(peaks, centers):
        assert circle_dist(p.location, c) <= 0.5 / G
        assert p.depth == pytest.approx(0.5, abs=0.5 / G / 0.0025)


def test_steepness_is_the_dip_slope():
    peaks = {round(p.location, 2): p for p in detect_peaks(GRAPH, min_depth=0.1)}
    assert peaks[0.1].steepness == pytest.approx(25.0, rel=1e-9)
    assert peaks[0.95].steepness == pytest.approx(200.0, rel=1e-9)


def test_tracking_and_rate():
    chains = track_peaks(detect_peaks(GRAPH, min_depth=0.1), SPEC, 2.0 / G)
    assert [len(c) for c in chains] == [4, 1]
    assert [p.generation for p in chains[0]] == [1, 2, 3, 4]
    assert sharpening_rate(chains[0]) == pytest.approx(2.0, rel=1e-9)
    with pytest.raises(ChainTooShort):
        sharpening_rate(chains[1])


def test_flat_peak_rejected():
    flat = Peak(0.1, 1.0, 0.0, 0.0, 0.01, 0)
    with pytest.raises(ChainTooShort):
        sharpening_rate([flat, flat])


def test_degenerate_graphs():
    assert detect_peaks(GraphSample(np.arange(8) / 8, np.ones(8), "upper")) == []
    assert track_peaks([], SPEC, 0.01) == []
    assert noise_level(GraphSample(np.array([0.0, 0.5]), np.zeros(2), "upper")) == 0.0


def test_default_threshold_ignores_noise():
    rng = np.random.default_rng(3)
    g = dipped([(0.3, 0.5, 0.02)])
    g = GraphSample(g.grid, g.values + 1e-6 * rng.standard_normal(G), "upper")
    peaks = detect_peaks(g)
    assert len(peaks) == 1 and circle_dist(peaks[0].location, 0.3) <= 1.0 / G


@given(st.floats(0.0, 1.0, exclude_max=True), st.floats(0.05, 2.0), st.floats(0.005, 0.1))
def test_single_dip_located(c, d, w):
    peaks = detect_peaks(dipped([(c, d, w)], G=1024), min_depth=0.01)
    assert len(peaks) == 1
    assert circle_dist(peaks[0].location, c) <= 0.5 / 1024 + 1e-12
    assert peaks[0].steepness == pytest.approx(d / w, rel=1e-6)


@pytest.mark.parametrize("n", [1, 3, 5])
def test_pinched_chain_length(n):
    sys_ = make_pinched(3.0)
    grid = make_grid(1024, sys_, n + 1)
    g = iterate_boundary(sys_, "upper", n, grid=grid)
    chains = track_peaks(detect_peaks(g, 0.1), SPEC, 2.0 / 1024)
    assert len(chains[0]) == n


def test_csv_round_trip(tmp_path):
    chains = track_peaks(detect_peaks(GRAPH, min_depth=0.1), SPEC, 2.0 / G)
    path = tmp_path / "p.csv"
    write_peaks_csv(chains, path)
    rows = list(csv.DictReader(open(path)))
    assert len(rows) == 5
    assert float(rows[0]["theta"]) == chains[0][0].location
    assert [int(r["generation"]) for r in rows] == [1, 2, 3, 4, 1]
