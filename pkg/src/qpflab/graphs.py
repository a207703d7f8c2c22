"""Invariant graphs, their Lyapunov exponents and pinching diagnostics.

A grid point is stored as a pair ``(theta0, m)`` standing for the angle
``theta0 + m*omega``.  Uniform points are ``(k/G, 0)``; orbit points of 0 are
``(0, j)``.  Keeping the pair lets every kernel reproduce the exact angle of
an orbit point instead of a rounded copy of it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from ._pycore import angles
from .errors import GridMismatch, InverseOutOfRange, NoBasinBoundary, NotInvariant
from .systems import QpfSystem


@dataclass
class GraphSample:
    """Values of a graph on a sorted grid of fibres."""

    grid: np.ndarray
    values: np.ndarray
    kind: str
    iterates_used: int = 0
    lyap: float | None = None
    base_theta0: np.ndarray | None = None
    base_m: np.ndarray | None = None
    resolution: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.base_theta0 is None:
            self.base_theta0 = self.grid.copy()
        if self.base_m is None:
            self.base_m = np.zeros(self.grid.shape, dtype=np.int64)
        if self.grid.shape != self.values.shape:
            raise ValueError("grid and values differ in shape")
        if self.grid.size and (np.any(np.diff(self.grid) <= 0) or self.grid[0] < 0 or self.grid[-1] >= 1):
            raise ValueError("grid must be strictly increasing in [0, 1)")

    @property
    def uniform(self) -> np.ndarray:
        """Mask of the uniform (non-orbit) grid points."""
        return self.base_m == 0

    def __len__(self) -> int:
        return self.grid.size

    def same_grid(self, other: "GraphSample") -> bool:
        return (self.grid.shape == other.grid.shape and np.array_equal(self.base_theta0, other.base_theta0)
                and np.array_equal(self.base_m, other.base_m))

    def at(self, theta: float) -> float:
        """Value at the grid point nearest to ``theta`` (circle distance)."""
        d = np.abs(self.grid - (theta % 1.0))
        d = np.minimum(d, 1.0 - d)
        return float(self.values[np.argmin(d)])

    def to_csv(self, path) -> None:
        np.savetxt(path, np.column_stack([self.grid, self.values]), delimiter=",",
                   header="theta,value", comments="", fmt="%.17g")

    def to_npz(self, path) -> None:
        np.savez(path, grid=self.grid, values=self.values, base_theta0=self.base_theta0, base_m=self.base_m,
                 kind=np.array(self.kind), iterates_used=np.array(self.iterates_used))

    @classmethod
    def from_npz(cls, path) -> "GraphSample":
        with np.load(path) as z:
            return cls(z["grid"], z["values"], str(z["kind"]), int(z["iterates_used"]),
                       base_theta0=z["base_theta0"], base_m=z["base_m"])


def make_grid(G: int, sys_or_spec, orbit_points: int = 0):
    """Uniform grid ``k/G`` plus the orbit points ``omega_1..omega_J``.

    Returns ``(grid, base_theta0, base_m)`` sorted by angle.
    """
    if G < 2:
        raise ValueError("G must be at least 2")
    spec = getattr(sys_or_spec, "spec", sys_or_spec)
    hi, lo = spec.split
    t0 = np.concatenate([np.arange(G) / G, np.zeros(orbit_points)])
    m = np.concatenate([np.zeros(G, dtype=np.int64), np.arange(1, orbit_points + 1, dtype=np.int64)])
    grid = angles(t0, m, hi, lo)
    order = np.argsort(grid, kind="stable")
    grid, t0, m = grid[order], t0[order], m[order]
    if np.any(np.diff(grid) <= 0):
        raise ValueError("orbit points collide with the uniform grid")
    return grid, t0, m


def _resolve_grid(sys, G, grid, orbit_points):
    if grid is not None:
        if isinstance(grid, GraphSample):
            return grid.grid, grid.base_theta0, grid.base_m
        if isinstance(grid, tuple):
            return grid
        g = np.asarray(grid, dtype=float)
        return g, g.copy(), np.zeros(g.shape, dtype=np.int64)
    return make_grid(G if G is not None else 1024, sys, orbit_points)


def constant_graph(sys: QpfSystem, value: float, G: int | None = None, grid=None, kind: str = "lower",
                   orbit_points: int = 0) -> GraphSample:
    g, t0, m = _resolve_grid(sys, G, grid, orbit_points)
    return GraphSample(g, np.full(g.shape, float(value)), kind, 0, base_theta0=t0, base_m=m,
                       meta={"start": float(value)})


def iterate_boundary(sys: QpfSystem, which: str, n: int, G: int | None = None, grid=None,
                     orbit_points: int = 0, workers: int = 1) -> GraphSample:
    """``phi_n(theta) = T^n_{theta - n omega}(boundary)`` on every grid fibre."""
    if which not in ("upper", "lower"):
        raise ValueError("which must be 'upper' or 'lower'")
    if n < 0:
        raise ValueError("n must be non-negative")
    g, t0, m = _resolve_grid(sys, G, grid, orbit_points)
    start = sys.top if which == "upper" else sys.bottom
    x, _ = kernels.orbit_final(sys, t0, m - n, np.full(g.shape, start), n, workers=workers)
    return GraphSample(g, x, which, n, base_theta0=t0, base_m=m, meta={"start": start})


def invariance_residual(sys: QpfSystem, graph: GraphSample, workers: int = 1) -> float:
    """``max |phi_{n+1} - phi_n|`` for a graph produced by boundary iteration."""
    if "start" not in graph.meta:
        raise ValueError("residual needs a graph built from a boundary line")
    n = graph.iterates_used
    x, _ = kernels.orbit_final(sys, graph.base_theta0, graph.base_m - n - 1,
                               np.full(graph.grid.shape, graph.meta["start"]), n + 1, workers=workers)
    return float(np.max(np.abs(x - graph.values)))


def graph_lyapunov(sys: QpfSystem, graph: GraphSample, tol: float | None = 1e-8,
                   workers: int = 1) -> tuple[float, float]:
    """Grid average of ``log DT_theta(phi(theta))`` over the uniform points.

    Returns ``(lambda, residual)``.  The residual is only available for graphs
    built by boundary iteration; otherwise it is ``nan`` and not checked.
    """
    u = graph.uniform
    with np.errstate(divide="ignore"):
        lam = float(np.mean(np.log(sys.dfibre(graph.grid[u], graph.values[u]))))
    res = invariance_residual(sys, graph, workers) if "start" in graph.meta else float("nan")
    if tol is not None and res > tol:
        raise NotInvariant(f"invariance residual {res:.3g} exceeds {tol:.3g}")
    graph.lyap = lam
    return lam, res


@dataclass
class ExponentProfile:
    horizons: np.ndarray
    forward: np.ndarray
    backward: np.ndarray | None
    theta0: float = 0.0
    m: int = 0
    x: float = 0.0


def _step_angles(sys, theta0, m, steps):
    hi, lo = sys.spec.split
    return angles(theta0, m + steps, hi, lo)


def finite_time_exponents(sys: QpfSystem, theta0: float, x: float, horizons, m: int = 0,
                          backward: bool = True, check: float = 1e-10) -> ExponentProfile:
    """Forward and backward finite-time exponents at ``(theta0 + m omega, x)``.

    ``forward[k] = (1/n) sum_{i<n} log DT_{theta+i omega}(T^i x)`` and
    ``backward[k] = -(1/n) sum_{1<=i<=n} log DT_{theta-i omega}(T^{-i} x)``
    with ``n = horizons[k]``.
    """
    hz = np.asarray(horizons, dtype=np.int64)
    if hz.size == 0 or hz.min() < 1:
        raise ValueError("horizons must be positive")
    N = int(hz.max())
    xs = kernels.trajectory(sys, theta0, m, x, N)
    t = _step_angles(sys, theta0, m, np.arange(N))
    with np.errstate(divide="ignore", invalid="ignore"):
        fwd = np.cumsum(np.log(sys.dfibre(t, xs[:-1])))
    forward = fwd[hz - 1] / hz
    bwd = None
    if backward:
        ys = kernels.backward_trajectory(sys, theta0, m, x, N)
        tb = _step_angles(sys, theta0, m, -np.arange(1, N + 1))
        bad = ~np.isfinite(ys)
        if not sys.wraps:
            bad |= (ys < sys.base.domain[0]) | (ys > sys.base.domain[1])
        if bad.any():
            k = int(np.argmax(bad))
            raise InverseOutOfRange(f"preimage {k} of x={x} leaves the domain")
        back = sys.fibre(tb, ys[1:])
        err = np.abs(back - ys[:-1])
        if sys.wraps:
            err = np.minimum(err, 1.0 - err)
        if check is not None and err.max() > check * max(1.0, np.abs(ys).max()):
            raise InverseOutOfRange(f"inverse round trip error {err.max():.3g}")
        with np.errstate(divide="ignore", invalid="ignore"):
            b = np.cumsum(np.log(sys.dfibre(tb, ys[1:])))
        bwd = -b[hz - 1] / hz
    return ExponentProfile(hz, forward, bwd, float(theta0), int(m), float(x))


def middle_graph(sys: QpfSystem, G: int | None = None, n_test: int = 200, grid=None, orbit_points: int = 0,
                 escape_at: float = 0.0, steps: int = 60, max_doublings: int = 6, close: float = 1e-9,
                 workers: int = 1) -> GraphSample:
    """Basin boundary of the lower graph by per-fibre bisection.

    A start value counts as "down" once its orbit reaches ``x <= escape_at``
    (the region below ``escape_at`` is trapped) and as "up" once it is within
    ``close`` of the orbit of the upper boundary value.  Undecided points get
    twice the horizon, up to ``max_doublings`` times; the rest count as up and
    are reported in ``meta["undecided"]``.
    """
    g, t0, m = _resolve_grid(sys, G, grid, orbit_points)
    top = np.full(g.shape, sys.top)
    horizon = n_test * 2 ** max_doublings
    utop, esc = kernels.orbit_final(sys, t0, m, top, horizon, escape_at=escape_at, workers=workers)
    if np.any(esc >= 0):
        raise NoBasinBoundary("the upper boundary line falls into the lower trapping region")
    lo = np.full(g.shape, float(sys.bottom))
    hi = top.copy()
    undecided = np.zeros(g.shape, dtype=bool)
    upper_cache: dict[int, np.ndarray] = {}

    def upper_orbit(n):
        if n not in upper_cache:
            upper_cache[n] = kernels.orbit_final(sys, t0, m, top, n, workers=workers)[0]
        return upper_cache[n]

    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        live = (mid > lo) & (mid < hi)
        if not live.any():
            break
        idx = np.flatnonzero(live)
        down = np.zeros(idx.size, dtype=bool)
        todo = np.ones(idx.size, dtype=bool)
        n = n_test
        for _d in range(max_doublings + 1):
            j = idx[todo]
            xn, e = kernels.orbit_final(sys, t0[j], m[j], mid[j], n, escape_at=escape_at, workers=workers)
            d = e >= 0
            up = ~d & (np.abs(xn - upper_orbit(n)[j]) < close)
            sub = np.flatnonzero(todo)
            down[sub[d]] = True
            todo[sub[d | up]] = False
            if not todo.any():
                break
            n *= 2
        undecided[idx[todo]] = True
        lo[idx[down]] = mid[idx[down]]
        hi[idx[~down]] = mid[idx[~down]]
    psi = 0.5 * (lo + hi)
    return GraphSample(g, psi, "middle", n_test, base_theta0=t0, base_m=m,
                       resolution=float(np.max(hi - lo)),
                       meta={"undecided": int(undecided.sum()), "escape_at": escape_at})


def pullback_graph(sys: QpfSystem, n: int, x0: float = 0.0, G: int | None = None, grid=None,
                   orbit_points: int = 0) -> GraphSample:
    """``T^{-n}_{theta}(x0)`` taken from fibre ``theta + n omega`` back to ``theta``.

    For a repelling middle graph the backward iterates of any value between
    the bounding graphs converge to it.
    """
    g, t0, m = _resolve_grid(sys, G, grid, orbit_points)
    y = np.full(g.shape, float(x0))
    hi, lo = sys.spec.split
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for k in range(n - 1, -1, -1):
            y = sys.inverse(angles(t0, m + k, hi, lo), y)
    return GraphSample(g, y, "middle", n, base_theta0=t0, base_m=m, meta={"pullback_from": float(x0)})


def min_graph_distance(a: GraphSample, b: GraphSample) -> tuple[float, float]:
    """``min(b - a)`` over the grid and the angle where it occurs."""
    if not a.same_grid(b):
        raise GridMismatch("graphs are sampled on different grids")
    d = b.values - a.values
    k = int(np.argmin(d))
    return float(d[k]), float(a.grid[k])


def pinched_fraction(a: GraphSample, b: GraphSample, tol: float) -> float:
    """Fraction of fibres where the two graphs are within ``tol``."""
    if not a.same_grid(b):
        raise GridMismatch("graphs are sampled on different grids")
    return float(np.mean(np.abs(a.values - b.values) < tol))
