"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``.  The whole suite
takes a few minutes on one core.
"""
import math
import time
from pathlib import Path

import numpy as np
import pytest

from qpflab import kernels
from qpflab.bifurcation import (critical_beta, graph_exponents, no_close_return, scaling_fit,
                                sink_source_search, symmetric_zeta_check, verify_induction)
from qpflab.circle import RotationSpec
from qpflab.cli import main
from qpflab.cocycle import cocycle_lyapunov, energy_c, lambda_c, projective_derivative_identity
from qpflab.graphs import invariance_residual, iterate_boundary, make_grid
from qpflab.peaks import detect_peaks, track_peaks
from qpflab.systems import (cos_2pi, make_arctan_family, make_pinched, make_rescaled_arctan, make_symmetric,
                            peak)
from qpflab.timesets import TimeSetParams, TimeSetTable, verify_timeset_lemmas

RECIPES = Path(__file__).resolve().parent.parent / "recipes"


@pytest.fixture
def verdict(capsys):
    def report(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail
    return report


def arctan10(b):
    return make_arctan_family(10.0, b)


@pytest.fixture(scope="module")
def bracket10():
    t = time.perf_counter()
    br = critical_beta(arctan10, 0.9, 1.0, tol=1e-5)
    return br, time.perf_counter() - t


def test_criterion_01_cocycle_derivative_identity(verdict):
    rng = np.random.default_rng(1)
    t = time.perf_counter()
    gaps = [projective_derivative_identity(rng.random(), rng.standard_normal(2), 4.4, 4.0, cos_2pi(), n=100).gap
            for _ in range(100)]
    dt = time.perf_counter() - t
    verdict(1, max(gaps) < 1e-8 and dt < 1.0, f"max relative gap {max(gaps):.2e}, {dt:.2f} s")


def test_criterion_02_herman_bound(verdict):
    t = time.perf_counter()
    est = {E: cocycle_lyapunov(E, 4.0, cos_2pi(), n=10**5, samples=64).value for E in (0.0, 2.0, 4.3, 4.4)}
    dt = time.perf_counter() - t
    ok = min(est.values()) >= math.log(2.0) - 0.05 and dt < 10.0
    verdict(2, ok, ", ".join(f"E={E}: {v:.4f}" for E, v in est.items()) + f", {dt:.1f} s")


def test_criterion_03_beta_c_bracket(verdict, bracket10):
    br, dt = bracket10
    ok = 0.9710325 < br.lo and br.hi < 1.0 and br.width <= 1e-5 and dt < 120
    verdict(3, ok, f"bracket [{br.lo:.8f}, {br.hi:.8f}], {dt:.1f} s")


def test_criterion_04_beta_c_monotone_in_alpha(verdict):
    t = time.perf_counter()
    brs = [critical_beta(lambda b, a=a: make_arctan_family(a, b), 0.5, 1.0, tol=1e-4) for a in (10.0, 20.0, 40.0)]
    dt = time.perf_counter() - t
    ok = brs[0].hi < brs[1].lo and brs[1].hi < brs[2].lo and dt < 600
    verdict(4, ok, ", ".join(f"[{b.lo:.5f}, {b.hi:.5f}]" for b in brs) + f", {dt:.0f} s")


def test_criterion_05_non_smooth_classification(verdict, bracket10):
    br, _ = bracket10
    lu, lm = graph_exponents(arctan10(br.mid), n=10**5)
    verdict(5, lu < -0.05 and lm > 0.05, f"lambda(phi+) = {lu:.4f}, lambda(psi) = {lm:.4f} at {br.mid:.8f}")


def test_criterion_06_gap_scaling(verdict, bracket10):
    br, _ = bracket10
    offs = 10.0 ** np.array([-2.0, -2.5, -3.0, -3.5])
    fit = scaling_fit(arctan10, br.mid, offs)
    ok = 0.8 <= fit.exponent <= 1.2 and fit.r2 > 0.95
    verdict(6, ok, f"exponent {fit.exponent:.4f}, R^2 {fit.r2:.6f}")


def test_criterion_07_pinched_exactness(verdict):
    n_max, G = 30, 4096
    sys_ = make_pinched(10.0)
    grid = make_grid(G, sys_, n_max)
    resident = grid[2] > 0
    worst, counts = 0.0, []
    for n in range(1, n_max + 1):
        g = iterate_boundary(sys_, "upper", n, grid=grid)
        hit = resident & (grid[2] <= n)
        worst = max(worst, float(np.max(np.abs(g.values[hit]))))
        chains = track_peaks(detect_peaks(g, 0.1), sys_.spec, 2.0 / G)
        counts.append(len(chains[0]))
    ok = worst <= 1e-12 and counts == list(range(1, n_max + 1))
    verdict(7, ok, f"max |phi_n(omega_j)| = {worst:.1e}, chain lengths {counts[:3]}..{counts[-1]}")


def test_criterion_08_zero_line_exponent(verdict):
    n = 10**6
    _, s = kernels.orbit_logsum(make_pinched(10.0), np.array([math.sqrt(2.0) - 1.0]), np.array([0]),
                                np.array([0.0]), n)
    lam = float(s[0]) / n
    target = math.log(10.0) - math.log(2.0)
    verdict(8, abs(lam - target) <= 0.02, f"lambda = {lam:.6f}, log(alpha/2) = {target:.6f}")


SETTINGS_9 = [(1e12, 1e-5), (1e8, 1e-4), (1e6, 1e-3)]
STRUCTURAL_9 = ("pjestimates", "jmndisjointness", "omegatransition", "regularstabilized")


def test_criterion_09_time_set_structure(verdict):
    t = time.perf_counter()
    lines, ok = [], True
    for i, (a, g) in enumerate(SETTINGS_9):
        rep = verify_timeset_lemmas(TimeSetTable(TimeSetParams(a, g, u=8, v=58), 10**4, 10**4))
        strict = all(rep.predicates[k] for k in ("gamma0", "alphagamma0", "u", "v", "sigma"))
        ok &= strict == (i == 0)
        ok &= all(rep.results[k].ok for k in STRUCTURAL_9)
        if rep.predicates["hfunctions2"]:
            ok &= rep.results["regsets_a"].ok
        checked = "/".join(str(rep.results[k].checked) for k in STRUCTURAL_9)
        n_j = rep.results["j_in_omega0"].checked
        lines.append(f"({a:.0e},{g:.0e}) strict={strict} J-intervals={n_j} checked={checked}")
    dt = time.perf_counter() - t
    verdict(9, ok and dt < 60, "; ".join(lines) + f", {dt:.1f} s")


def test_criterion_10_symmetric_identity(verdict):
    G = 2048
    grid = make_grid(G, make_symmetric(10.0))
    zmax, gap_ratio = 0.0, 0.0
    for b in (1.5, 1.645, 1.66):
        sys_ = make_symmetric(10.0, b)
        zmax = max(zmax, symmetric_zeta_check(lambda x: make_symmetric(10.0, x), b, 0, 500))
        up = iterate_boundary(sys_, "upper", 3000, grid=grid)
        lo = iterate_boundary(sys_, "lower", 3000, grid=grid)
        gap = float(np.max(np.abs(lo.values + np.roll(up.values, -G // 2))))
        err = max(invariance_residual(sys_, up), invariance_residual(sys_, lo), np.finfo(float).eps)
        gap_ratio = max(gap_ratio, gap / err)
    verdict(10, zmax <= 1e-11 and gap_ratio <= 2.0, f"max |zeta + xi| = {zmax:.1e}, graph gap / grid error = "
                                                     f"{gap_ratio:.2f}")


def test_criterion_11_sink_source_orbits(verdict):
    t = time.perf_counter()
    tab = TimeSetTable(TimeSetParams(100.0, 1 / 16), 10**5, 10**5)
    cands = sink_source_search(lambda b: make_rescaled_arctan(100.0, beta=b), tab, 3)
    dt = time.perf_counter() - t
    ok = len(cands) == 4 and all(c.forward_ok and c.backward_ok for c in cands) and dt < 300
    parts = []
    for c in cands:
        d = c.as_dict()
        m = "" if d["forward_margin"] is None else f" margins {d['forward_margin']:.2f}/{d['backward_margin']:.2f}"
        parts.append(f"p={c.p} l=({c.l_minus},{c.l_plus}) beta={c.beta_p:.10f}{m}")
    verdict(11, ok, "; ".join(parts) + f", {dt:.0f} s")


def test_criterion_12_induction_start(verdict):
    alpha, gamma = 1e4, 1 / 32
    spec = RotationSpec.golden()
    pairs = [(l, n) for l in range(31) for n in range(1, 31) if no_close_return(spec, l, n, gamma, 2.0)]
    rng = np.random.default_rng(12)
    picks = [pairs[i] for i in rng.choice(len(pairs), size=200)]
    bad = []
    for l, n in picks:
        rep = verify_induction(lambda b: make_rescaled_arctan(alpha, beta=b), n, alpha, gamma, l=l, samples=1)
        if not (rep.precondition and all(rep.past_ok) and all(rep.regular_ok) and all(rep.window_ok)):
            bad.append((l, n))
    L = max(l for l, _ in pairs)
    N = max(n for _, n in pairs)
    verdict(12, not bad, f"200 cases from {len(pairs)} pairs (l <= {L}, n <= {N}), failures {bad[:5]}")


def test_criterion_13_harper_lambda_c(verdict):
    t = time.perf_counter()
    V = peak(2.0)
    rows = [lambda_c(E, V, tol=1e-3) for E in (6.0, 8.0, 10.0)]
    mono = rows[0].hi < rows[1].lo and rows[1].hi < rows[2].lo
    inverse = []
    for r in rows:
        w = r.hi - r.lo
        lo, hi = energy_c(r.mid, r.E - 0.5, r.E + 0.5, V, tol=1e-3)
        inverse.append(lo - w <= r.E <= hi + w)
    dt = time.perf_counter() - t
    ok = mono and all(inverse) and dt < 600
    verdict(13, ok, ", ".join(f"lambda_c({r.E:g}) in [{r.lo:.4f}, {r.hi:.4f}]" for r in rows) +
            f", inverse {inverse}, {dt:.0f} s")


def _run_recipe(path: Path, out: Path) -> int:
    command = path.read_text().splitlines()[0].split()[2]
    return main([command, "--config", str(path), "--out", str(out)])


def test_criterion_14_recipe_determinism(verdict, tmp_path):
    names = ["arctan_beta_0.65", "harper_lam4_E_4.4", "arnold_peak_beta_-0.4", "pinched_alpha10_n6",
             "symmetric_beta_1.645"]
    same = []
    for name in names:
        a, b = tmp_path / (name + "_a"), tmp_path / (name + "_b")
        codes = (_run_recipe(RECIPES / f"{name}.ini", a), _run_recipe(RECIPES / f"{name}.ini", b))
        files = sorted(p.name[len(a.name):] for p in tmp_path.glob(a.name + ".*"))
        same.append(codes == (0, 0) and files and all(
            (tmp_path / (a.name + s)).read_bytes() == (tmp_path / (b.name + s)).read_bytes() for s in files))
    verdict(14, all(same), ", ".join(f"{n}: {'identical' if s else 'DIFFERENT'}" for n, s in zip(names, same)))
