"""Critical parameters, the orbit family ``xi_n(beta, l)`` and sink-source searches.

``xi_n(beta, l)`` is the orbit of the upper bound started on fibre
``omega_{-l}``: ``xi_{-l} = 3`` and ``xi_{k+1} = T_{beta, omega_k}(xi_k)``.
Near a sink-source parameter these orbits expand by ``DF(0)`` per step, so
``beta`` must be resolved far below double precision; the solvers switch
to mpmath with a working precision derived from that expansion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import mpmath
import numpy as np

from . import kernels
from ._pycore import angles
from .circle import circle_dist, orbit_point_mp, orbit_points
from .errors import Inconclusive, NoCrossing, NotMonotone, SolveFailed, TargetUnreachable
from .graphs import ExponentProfile, finite_time_exponents, iterate_boundary, make_grid, pullback_graph
from .systems import FCode, QpfSystem, k_constant, s_inf
from .timesets import INF, TimeSetTable

Factory = Callable[[float], QpfSystem]


# ---------------------------------------------------------------- critical beta


@dataclass
class BetaBracket:
    lo: float
    hi: float
    target: str
    width: float = field(init=False)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.width = float(self.hi - self.lo)

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def as_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "width": self.width, "target": self.target,
                **{k: v for k, v in self.meta.items() if not k.endswith("_mp")}}


def persists(sys: QpfSystem, N: int = 20000, G: int = 2048, escape_at: float = 0.0, workers: int = 1) -> bool:
    """True if the upper boundary line stays above ``escape_at`` for ``N`` steps on ``G`` fibres."""
    t0 = np.arange(G) / G
    _, esc = kernels.orbit_final(sys, t0, np.full(G, -N, dtype=np.int64), np.full(G, sys.top), N,
                                 escape_at=escape_at, stop_any=workers <= 1, workers=workers)
    return not bool(np.any(esc >= 0))


def critical_beta(factory: Factory, lo: float, hi: float, tol: float = 1e-5, N: int = 20000, G: int = 2048,
                  escape_at: float = 0.0, workers: int = 1) -> BetaBracket:
    """Bisect ``beta`` for the loss of the upper invariant graph.

    The predicate holds at ``lo`` (two graphs above ``escape_at``) and fails
    at ``hi``; both ends are checked.
    """
    def ok(b):
        return persists(factory(b), N, G, escape_at, workers)

    if not ok(lo):
        raise NoCrossing(f"upper graph already lost at beta={lo}")
    if ok(hi):
        raise NoCrossing(f"upper graph persists at beta={hi}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return BetaBracket(lo, hi, "loss of the upper graph", meta={"N": N, "G": G, "escape_at": escape_at})


# ---------------------------------------------------------------- xi family


@dataclass(frozen=True)
class XiRequest:
    factory: Factory
    l: int
    n: int
    start: float = 3.0

    def __post_init__(self):
        if self.l < 0 or self.n < -self.l:
            raise ValueError("need l >= 0 and n >= -l")

    @property
    def steps(self) -> int:
        return self.n + self.l


def auto_dps(sys: QpfSystem, n: int, margin: int = 20) -> int:
    """Digits needed to resolve ``beta`` for a target reached after ``n`` expanding steps."""
    d0 = float(sys.base.deriv(0.0))
    return margin + max(0, int(math.ceil(max(n, 1) * math.log10(max(d0, 2.0)))))


class _MpOrbit:
    """Forcing values along ``omega_{-l} .. omega_{n-1}`` cached at one precision."""

    def __init__(self, req: XiRequest, dps: int):
        self.req, self.dps = req, dps
        sys = req.factory(0.0)
        self.base = sys.base
        with mpmath.workdps(dps):
            self.g = [sys.forcing.mp(orbit_point_mp(sys.spec, k)) for k in range(-req.l, req.n)]

    def run(self, beta):
        with mpmath.workdps(self.dps):
            b = mpmath.mpf(beta)
            x = mpmath.mpf(self.req.start)
            out = [x]
            for g in self.g:
                x = self.base.mp(x) - b * g
                out.append(x)
            return out


def xi(req: XiRequest, beta, trajectory: bool = False, dps: int | None = None):
    """``xi_n(beta, l)``; with ``trajectory`` all of ``xi_{-l} .. xi_n``.

    ``dps`` switches to mpmath at that many digits.
    """
    if dps is None:
        sys = req.factory(float(beta))
        xs = kernels.trajectory(sys, 0.0, -req.l, req.start, req.steps)
    else:
        xs = _MpOrbit(req, dps).run(beta)
    return xs if trajectory else xs[-1]


def solve_beta(req: XiRequest, target: float, lo: float = 0.0, hi: float = 1.5, dps: int | str | None = None,
               rel: float = 2.0 ** -60) -> BetaBracket:
    """Bracket the ``beta`` with ``xi_n(beta, l) = target`` by bisection.

    ``xi_n`` is non-increasing in ``beta`` for one-sided forcing.  In double
    precision bisection stops at ``rel`` times the initial width or at
    adjacent floats; with ``dps`` it continues until the bracket is below the
    working precision.  Exact endpoints live in ``meta["lo_mp"]``/``["hi_mp"]``.
    """
    if not np.isfinite(target):
        raise TargetUnreachable("target must be finite")
    sys0 = req.factory(lo)
    if not sys0.one_sided:
        raise NotMonotone("xi is not monotone in beta for this family; use solve_beta_symmetric")
    if dps == "auto":
        dps = auto_dps(sys0, req.n)
    if dps is None:
        f = lambda b: float(xi(req, b)) - target  # noqa: E731
        a, b = float(lo), float(hi)
        fa, fb = f(a), f(b)
        if not (fa >= 0.0 >= fb):
            raise TargetUnreachable(f"xi_n - target has signs ({fa:.3g}, {fb:.3g}) at the bracket ends")
        stop = rel * (b - a)
        while b - a > stop:
            m = 0.5 * (a + b)
            if m <= a or m >= b:
                break
            fm = f(m)
            if not np.isfinite(fm):
                raise SolveFailed(f"non-finite orbit at beta={m}")
            if fm >= 0.0:
                a = m
            else:
                b = m
        return BetaBracket(a, b, f"xi_{req.n}(beta, {req.l}) = {target:.6g}", meta={"dps": None})
    orb = _MpOrbit(req, int(dps))
    with mpmath.workdps(orb.dps):
        t = mpmath.mpf(target)
        a, b = mpmath.mpf(lo), mpmath.mpf(hi)
        if not (orb.run(a)[-1] >= t >= orb.run(b)[-1]):
            raise TargetUnreachable("target not bracketed")
        stop = (b - a) * mpmath.mpf(2) ** (-int(orb.dps * 3.32) + 8)
        while b - a > stop:
            m = (a + b) / 2
            if orb.run(m)[-1] >= t:
                a = m
            else:
                b = m
        return BetaBracket(float(a), float(b), f"xi_{req.n}(beta, {req.l}) = {target:.6g}",
                           meta={"dps": orb.dps, "lo_mp": a, "hi_mp": b})


def _xi_batch(req: XiRequest, betas: np.ndarray) -> np.ndarray:
    """``xi_n`` for many ``beta`` at once (double precision)."""
    sys = req.factory(0.0)
    hi, lo = sys.spec.split
    g = sys.forcing(angles(0.0, np.arange(-req.l, req.n), hi, lo))
    x = np.full(betas.shape, req.start)
    for gk in g:
        x = sys.base(x) - betas * gk
    return x


def solve_beta_symmetric(req: XiRequest, alpha: float, parent: tuple[float, float],
                         step: float = 2.0 ** -20) -> BetaBracket:
    """Interval ``[beta+, beta-]`` inside ``parent`` with ``xi_n = 1/alpha`` and ``-1/alpha`` at its ends.

    ``beta+`` is the smallest scanned parameter where ``xi_n`` drops to
    ``1/alpha``; ``beta-`` the first one after it where ``xi_n`` reaches
    ``-1/alpha``.  Both ends are refined by bisection.
    """
    a, b = map(float, parent)
    grid = np.arange(a, b + step, step)
    grid[-1] = min(grid[-1], b)
    vals = _xi_batch(req, grid)
    up, dn = 1.0 / alpha, -1.0 / alpha

    def refine(i, target):
        x0, x1 = grid[i - 1], grid[i]
        for _ in range(80):
            m = 0.5 * (x0 + x1)
            if m <= x0 or m >= x1:
                break
            if _xi_batch(req, np.array([m]))[0] > target:
                x0 = m
            else:
                x1 = m
        return x0, x1

    i_plus = np.flatnonzero((vals[1:] <= up) & (vals[:-1] > up))
    if i_plus.size == 0:
        raise NoCrossing(f"xi_{req.n} does not cross 1/alpha inside {parent}")
    i0 = int(i_plus[0]) + 1
    after = np.flatnonzero((vals[i0:] <= dn) & (vals[i0 - 1:-1] > dn))
    if after.size == 0:
        raise NoCrossing(f"xi_{req.n} does not reach -1/alpha after beta+ inside {parent}")
    i1 = i0 + int(after[0])
    bp = refine(i0, up)
    bm = refine(i1, dn)
    return BetaBracket(bp[0], bm[1], f"[beta+, beta-] for n={req.n}, l={req.l}",
                       meta={"beta_plus": list(bp), "beta_minus": list(bm)})


def symmetric_zeta_check(factory: Factory, beta: float, l: int, n: int, start: float = 3.0) -> float:
    """``max_k |zeta_k + xi_k|`` where ``zeta`` starts at ``-start`` on fibre ``omega_{-l} + 1/2``."""
    sys = factory(beta)
    xs = kernels.trajectory(sys, 0.0, -l, start, n + l)
    zs = kernels.trajectory(sys, 0.5, -l, -start, n + l)
    return float(np.max(np.abs(zs + xs)))


# ---------------------------------------------------------------- induction checks


@dataclass
class InductionReport:
    alpha: float
    gamma: float
    l: int
    n: int
    precondition: bool
    betas: list
    window_ok: list
    past_ok: list
    regular_ok: list
    slope: float | None = None
    slope_bound: float | None = None
    witnesses: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        slope_ok = self.slope is None or self.slope <= self.slope_bound
        return all(self.window_ok) and all(self.past_ok) and all(self.regular_ok) and slope_ok

    def as_dict(self) -> dict:
        return {"alpha": self.alpha, "gamma": self.gamma, "l": self.l, "n": self.n,
                "precondition": self.precondition, "betas": self.betas, "window_ok": self.window_ok,
                "past_ok": self.past_ok, "regular_ok": self.regular_ok, "slope": self.slope,
                "slope_bound": self.slope_bound, "witnesses": self.witnesses, "ok": self.ok}


def no_close_return(spec, l: int, n: int, gamma: float, L2: float) -> bool:
    """``d(omega_j, 0) >= 3 gamma / L2`` for ``j`` in ``[-l, -1]`` and ``[1, n-1]``."""
    js = np.concatenate([np.arange(-l, 0), np.arange(1, n)])
    if js.size == 0:
        return True
    return bool(np.all(circle_dist(orbit_points(spec, js), 0.0) >= 3 * gamma / L2))


def verify_induction(factory: Factory, n: int, alpha: float, gamma: float, l: int | None = None,
                     table: TimeSetTable | None = None, q: int = 0, samples: int = 3,
                     dps: int | str = "auto", seed: int = 0) -> InductionReport:
    """Check the orbit statements for parameters with ``xi_n(beta, l) in [-1/alpha, 1/alpha]``.

    With ``q = 0`` the past is ``[-l, 0]`` and the regular times are
    ``[1, n]``.  With a table and ``q >= 1``, ``l = l^-_q``, past times in
    ``Omega_inf`` are skipped and regular times are ``R_n``.
    """
    if q >= 1:
        if table is None:
            raise ValueError("q >= 1 needs a time-set table")
        l = table.l_minus[q]
    if l is None:
        raise ValueError("l is required for q = 0")
    req = XiRequest(factory, l, n)
    sys0 = factory(0.0)
    L2 = sys0.forcing.peak_L2 or 2.0
    if dps == "auto":
        dps = auto_dps(sys0, n)
    b_up = solve_beta(req, 1.0 / alpha, dps=dps)
    b_dn = solve_beta(req, -1.0 / alpha, dps=dps)
    rng = np.random.default_rng(seed)
    with mpmath.workdps(int(dps)):
        lo_mp, hi_mp = b_up.meta["lo_mp"], b_dn.meta["hi_mp"]
        betas = [lo_mp, hi_mp] + [lo_mp + (hi_mp - lo_mp) * mpmath.mpf(float(u)) for u in rng.random(samples)]
    js = np.arange(-l, n + 1)
    past = js <= 0
    if q >= 1:
        om = table.omega(INF, lo=-l, hi=0)
        past = past & np.concatenate([~om, np.zeros(n, dtype=bool)])
        reg = np.concatenate([np.zeros(l + 1, dtype=bool), table.regular_set(n)[0]])
    else:
        reg = js >= 1
    orb = _MpOrbit(req, int(dps))
    rep = InductionReport(alpha, gamma, l, n, no_close_return(sys0.spec, l, n, gamma, L2), [], [], [], [])
    w_lo, w_hi = 1 + 1 / math.sqrt(alpha), 1 + 3 / math.sqrt(alpha)
    for b in betas:
        xs = np.array([float(v) for v in orb.run(b)])
        bf = float(b)
        rep.betas.append(bf)
        rep.window_ok.append(w_lo <= bf <= w_hi)
        bad_past = js[past & (xs < gamma)]
        bad_reg = js[reg & (np.abs(xs) > 1.0 / alpha * (1 + 1e-12))]
        rep.past_ok.append(bad_past.size == 0)
        rep.regular_ok.append(bad_reg.size == 0)
        if bad_past.size or bad_reg.size:
            rep.witnesses.append({"beta": bf, "past": bad_past[:5].tolist(), "regular": bad_reg[:5].tolist()})
    with mpmath.workdps(int(dps)):
        mid = (lo_mp + hi_mp) / 2
        h = (hi_mp - lo_mp) * mpmath.mpf("1e-6")
        slope = (orb.run(mid + h)[-1] - orb.run(mid - h)[-1]) / (2 * h)
    rep.slope = float(slope)
    rep.slope_bound = -float(alpha) ** ((n - 1) / 4)
    return rep


# ---------------------------------------------------------------- comparison oracles


def error_term(g, beta1: float, beta2: float, theta1: float, theta2: float, spec, N: int = 1000) -> float:
    """``sup_{|k| <= N} |beta1 g(theta1 + omega_k) - beta2 g(theta2 + omega_k)|``."""
    ks = np.arange(-N, N + 1)
    hi, lo = spec.split
    return float(np.max(np.abs(beta1 * g(angles(theta1, ks, hi, lo)) - beta2 * g(angles(theta2, ks, hi, lo)))))


def comparison_oracles(x1, x2, alpha: float, gamma: float, eps: float, err: float, L1: float, L2: float,
                       q: int | None = None) -> dict:
    """Evaluate the orbit-comparison bounds on two given trajectories.

    ``x1[0], x2[0]`` are the start values ``x_1`` and ``x[n]`` is ``x_{n+1}``.
    Each entry reports whether its hypotheses hold and, if so, whether the
    conclusion is observed; ``ok`` is false only for a violated conclusion.
    """
    x1, x2 = np.asarray(x1, dtype=float), np.asarray(x2, dtype=float)
    n = x1.size - 1
    K = k_constant(L1, L2)
    B = 1.0 / alpha
    out = {"err": err, "K": K, "err_le_K_eps": err <= K * eps}
    # contraction
    below = (x1[:n] < gamma) | (x2[:n] < gamma)
    eta = np.cumsum(below[::-1])[::-1]  # eta(j, n) for j = 1..n
    lengths = n + 1 - np.arange(1, n + 1)
    hyp = bool(out["err_le_K_eps"] and n >= 1 and np.all(eta <= lengths / 10) and alpha ** (-n / 4) <= eps)
    bound = eps * (6 + K * s_inf(alpha ** 0.25))
    concl = bool(abs(x1[n] - x2[n]) <= bound) if hyp else None
    out["contraction"] = {"hypotheses": hyp, "bound": bound, "observed": float(abs(x1[n] - x2[n])),
                          "conclusion": concl, "ok": concl is not False}
    # throw-out
    outside = np.abs(x1[:n]) > B
    tau = np.concatenate([[0], np.cumsum(outside)])  # tau[j] = tau(j), j = 0..n
    if q is None:
        q = int(math.floor(-math.log(eps) / math.log(alpha))) if eps < 1 else 0
    in_q = q >= 1 and alpha ** (-(q + 1)) <= eps < alpha ** (-q)
    j = np.arange(1, n + 1)
    base_hyp = bool(out["err_le_K_eps"] and in_q and n >= 1 and abs(x1[n]) <= B
                    and tau[n] <= max(0.0, (2 * q - 3) / 4) and np.all(tau[n] - tau[j] <= (n - j) / 6))
    hyp_a = base_hyp and abs(x1[0]) <= B and x2[0] >= 2 * B
    concl_a = bool(x2[n] >= 2 * B) if hyp_a else None
    out["throwout_a"] = {"hypotheses": hyp_a, "conclusion": concl_a, "ok": concl_a is not False}
    hyp_b = base_hyp and n >= 5 * q and bool(np.all(tau[j] <= j / 8)) and x2[0] >= x1[0] + eps / 2
    concl_b = bool(x2[n] >= 2 * B) if hyp_b else None
    out["throwout_b"] = {"hypotheses": hyp_b, "conclusion": concl_b, "ok": concl_b is not False}
    return out


# ---------------------------------------------------------------- sink-source orbits


@dataclass
class SinkSourceCandidate:
    p: int
    beta_p: float
    theta_p: float
    x_p: float
    profile: ExponentProfile
    l_minus: int
    l_plus: int
    floor: float
    dps: int

    @property
    def forward_ok(self) -> bool:
        return bool(np.all(self.profile.forward > self.floor))

    @property
    def backward_ok(self) -> bool:
        return bool(np.all(self.profile.backward > self.floor))

    @property
    def ok(self) -> bool:
        return self.forward_ok and self.backward_ok

    def as_dict(self) -> dict:
        return {"p": self.p, "beta_p": self.beta_p, "theta_p": self.theta_p, "x_p": self.x_p,
                "l_minus": self.l_minus, "l_plus": self.l_plus, "floor": self.floor, "dps": self.dps,
                "forward": self.profile.forward.tolist(), "backward": self.profile.backward.tolist(),
                "forward_margin": _margin(self.profile.forward, self.floor),
                "backward_margin": _margin(self.profile.backward, self.floor), "ok": self.ok}


def _margin(vals, floor):
    return float(np.min(vals) - floor) if len(vals) else None


def sink_source_search(factory: Factory, table: TimeSetTable, p_max: int, mode: str = "empirical",
                       hypotheses=None) -> list[SinkSourceCandidate]:
    """Solve ``beta_p`` with ``xi_{l+_p + 1}(beta_p, l-_p) = 1/alpha`` and measure exponents at ``x_p = xi_1``.

    The forward profile covers horizons ``1..l+_p`` along ``xi_1, xi_2, ...``
    and the backward profile horizons ``1..l-_p`` along ``xi_0, xi_{-1}, ...``.
    Strict mode demands ``(7/24) log alpha`` and passing hypotheses.
    """
    P = table.params
    alpha = P.alpha
    if mode not in ("strict", "empirical"):
        raise ValueError("mode must be 'strict' or 'empirical'")
    if mode == "strict":
        preds = {k: v for k, v in P.predicates().items() if not v}
        if hypotheses is not None:
            preds.update({f"F:{k}": False for k in hypotheses.failing()})
        if preds or not all(table.l_in_range[: p_max + 1]):
            raise NotMonotone(f"strict mode refused; failing predicates: {sorted(preds) or 'l ranges'}")
        floor = 7.0 / 24.0 * math.log(alpha)
    else:
        floor = 0.0
    out = []
    for p in range(p_max + 1):
        lm, lp = table.l_minus[p], table.l_plus[p]
        n = lp + 1
        req = XiRequest(factory, lm, n)
        sys = factory(0.0)
        dps = auto_dps(sys, n)
        br = solve_beta(req, 1.0 / alpha, dps=dps)
        orb = _MpOrbit(req, dps)
        with mpmath.workdps(dps):
            bmid = (br.meta["lo_mp"] + br.meta["hi_mp"]) / 2
            xs = orb.run(bmid)  # xi_{-lm} .. xi_n
            logs = [mpmath.log(_mp_deriv(sys, x)) for x in xs]
        logd = np.array([float(v) for v in logs])
        i1 = lm + 1  # index of xi_1
        fwd = np.cumsum(logd[i1:i1 + lp]) / np.arange(1, lp + 1)
        bwd = -np.cumsum(logd[i1 - 1::-1][:lm]) / np.arange(1, lm + 1)
        prof = ExponentProfile(np.arange(1, max(lp, lm) + 1), fwd, bwd,
                               float(orbit_point_mp(sys.spec, 1)), 1, float(xs[i1]))
        out.append(SinkSourceCandidate(p, float(bmid), prof.theta0, prof.x, prof, lm, lp, floor, dps))
    return out


def _mp_deriv(sys: QpfSystem, x):
    """``DF(x)`` in mpmath for the coded additive bases."""
    c, p = sys.base.code, sys.base.params
    if c == FCode.ATAN_NORM:
        a = mpmath.mpf(p[0])
        return a / mpmath.atan(a) / (1 + a * a * x * x)
    if c == FCode.ATAN_SCALED:
        C, a = mpmath.mpf(p[0]), mpmath.mpf(p[1])
        return C * a / (1 + a * a * x * x)
    h = mpmath.mpf(2) ** (-mpmath.mp.prec // 2)
    return (sys.base.mp(x + h) - sys.base.mp(x - h)) / (2 * h)


# ---------------------------------------------------------------- classification and scaling


class ScalingFit(NamedTuple):
    offsets: np.ndarray
    deltas: np.ndarray
    argmins: np.ndarray
    exponent: float
    r2: float


@dataclass
class Classification:
    beta: float
    lyap_upper: float
    lyap_middle: float
    label: str
    scaling: ScalingFit | None = None

    def as_dict(self) -> dict:
        d = {"beta": self.beta, "lyap_upper": self.lyap_upper, "lyap_middle": self.lyap_middle,
             "label": self.label}
        if self.scaling is not None:
            s = self.scaling
            d["scaling"] = {"offsets": s.offsets.tolist(), "deltas": s.deltas.tolist(),
                            "argmins": s.argmins.tolist(), "exponent": s.exponent, "r2": s.r2}
        return d


def graph_exponents(sys: QpfSystem, n: int = 10**5, burn: int = 1000,
                    theta0: float = math.sqrt(2.0) - 1.0) -> tuple[float, float]:
    """``(lambda(phi+), lambda(psi))`` from orbit averages.

    The upper graph attracts forward orbits started at the top; the middle
    graph attracts backward orbits started at 0, whose backward exponent is
    ``-lambda(psi)``.  The default start fibre is generic: the orbit of 0
    passes the tips where the two graphs nearly touch, and backward orbits
    there can overshoot the upper graph.
    """
    x, _ = kernels.orbit_final(sys, np.array([theta0]), np.array([-burn]), np.array([sys.top]), burn)
    fwd = finite_time_exponents(sys, theta0, float(x[0]), [n], backward=False).forward[0]
    y = kernels.backward_trajectory(sys, theta0, burn, 0.0, burn)[-1]
    bwd = finite_time_exponents(sys, theta0, float(y), [n], check=None).backward[0]
    return float(fwd), float(-bwd)


def scaling_fit(factory: Factory, beta_c: float, offsets, G: int = 4096, orbit_points: int = 39,
                n: int = 3000, workers: int = 1) -> ScalingFit:
    """Fit ``Delta(beta) = min(phi+ - psi)`` against ``beta_c - beta`` on a log-log scale."""
    offsets = np.asarray(offsets, dtype=float)
    sys = factory(beta_c)
    grid = make_grid(G, sys, orbit_points)
    deltas, args = [], []
    for d in offsets:
        s = factory(beta_c - d)
        up = iterate_boundary(s, "upper", n, grid=grid, workers=workers)
        mid = pullback_graph(s, n, 0.0, grid=grid)
        diff = up.values - mid.values
        k = int(np.argmin(diff))
        deltas.append(diff[k])
        args.append(up.grid[k])
    deltas = np.array(deltas)
    if np.any(deltas <= 0):
        raise Inconclusive("graphs not separated at every offset")
    x, y = np.log(offsets), np.log(deltas)
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    r2 = 1.0 - float(resid @ resid) / float(((y - y.mean()) ** 2).sum())
    return ScalingFit(offsets, deltas, np.array(args), float(slope), r2)


def classify_and_scale(factory: Factory, bracket: BetaBracket, offsets=None, eps_cls: float = 0.05,
                       n: int = 10**5, **scaling_kw) -> Classification:
    """Label the bifurcation at the bracket midpoint and fit the approach of the graphs."""
    b = bracket.mid
    lu, lm = graph_exponents(factory(b), n)
    if lu < -eps_cls and lm > eps_cls:
        label = "non-smooth"
    elif abs(lu) < eps_cls and abs(lm) < eps_cls:
        label = "smooth"
    else:
        raise Inconclusive(f"exponents ({lu:.4f}, {lm:.4f}) straddle the threshold {eps_cls}")
    fit = scaling_fit(factory, b, offsets, **scaling_kw) if offsets is not None else None
    return Classification(b, lu, lm, label, fit)
