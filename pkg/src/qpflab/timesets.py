"""Recurrence-time combinatorics of the rotation orbit.

Close returns of ``omega_j`` to the critical point (``0``, or ``{0, 1/2}`` in
the symmetric setting) are graded by an integer depth ``Q_p(j)``.  From these
the module builds the approximating sets ``Omega_p``, the exceptional
intervals ``J(m)``, the admissible-time sets ``A_N`` and the regular-time sets
``R_N``, and checks their structural properties by exhaustive scans.

All sets are computed for any parameters.  Whether the sufficiency
predicates (``gamma <= 1/16``, ``sqrt(alpha) > 4/gamma``, the density
conditions) hold is reported separately, and lemmas are only asserted when
their preconditions do.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .circle import RotationSpec, circle_dist, orbit_points
from .errors import NotAdmissible, NoValidL

INF = math.inf
SCHEMA = "qpflab.timesets/1"


def s_alpha(n, alpha: float) -> float:
    """Geometric partial sum ``sum_{i<n} alpha^-i``; ``1`` for ``n <= 0``."""
    if alpha <= 1:
        raise ValueError("alpha must exceed 1")
    if n == INF:
        return alpha / (alpha - 1.0)
    if n <= 0:
        return 1.0
    r = 1.0 / alpha
    return (1.0 - r**n) / (1.0 - r)


@dataclass(frozen=True)
class TimeSetParams:
    """Constants of the recurrence combinatorics.

    ``strict`` turns the basic parameter predicates into construction-time
    errors; ``symmetric`` measures returns to ``{0, 1/2}`` instead of ``0``.
    """

    alpha: float
    gamma: float
    L2: float = 2.0
    u: int = 8
    v: int = 58
    spec: RotationSpec = field(default_factory=RotationSpec.golden)
    symmetric: bool = False
    strict: bool = False

    def __post_init__(self):
        if self.alpha <= 1 or not 0 < self.gamma <= 1 or self.L2 <= 0:
            raise ValueError("need alpha > 1, 0 < gamma <= 1, L2 > 0")
        if self.u < 1 or self.v < 1:
            raise ValueError("u and v must be positive integers")
        if self.strict:
            bad = [k for k, ok in self.predicates().items() if not ok]
            if bad:
                raise ValueError(f"strict mode: predicate(s) violated: {', '.join(bad)}")

    @property
    def ut(self) -> int:
        return self.u + 2

    @property
    def vt(self) -> int:
        return self.v + 2

    @property
    def w(self) -> int:
        return self.u + self.v + 5

    @property
    def sigma(self) -> float:
        return (self.u + 3) / (self.u + self.v)

    @property
    def targets(self) -> tuple:
        return (0.0, 0.5) if self.symmetric else (0.0,)

    def predicates(self) -> dict[str, bool]:
        """Parameter-only sufficiency predicates (no orbit data needed)."""
        return {
            "gamma0": self.gamma <= 1 / 16,
            "alphagamma0": math.sqrt(self.alpha) > 4 / self.gamma,
            "u": self.u >= 8,
            "v": self.v >= 8,
            "sigma": self.sigma <= 1 / 6 + 1e-15,
        }

    def as_dict(self) -> dict:
        return {"alpha": self.alpha, "gamma": self.gamma, "L2": self.L2, "u": self.u, "v": self.v,
                "omega": self.spec.omega, "symmetric": self.symmetric, "strict": self.strict}


def return_distance(j, params: TimeSetParams):
    """``d(omega_j, 0)`` or ``d(omega_j, {0, 1/2})``."""
    pts = orbit_points(params.spec, np.asarray(j))
    d = circle_dist(pts, 0.0)
    if params.symmetric:
        d = np.minimum(d, circle_dist(pts, 0.5))
    return d


def q_from_distance(d, p, params: TimeSetParams) -> np.ndarray:
    """Depth ``Q_p`` for return distances ``d`` (entries with ``d == 0`` give 0)."""
    d = np.atleast_1d(np.asarray(d, dtype=float))
    a, L2 = params.alpha, params.L2
    sp = s_alpha(p, a)
    top = 4 * params.gamma / L2 + (sp / (a * L2) if p != 0 else 0.0)
    out = np.zeros(d.shape, dtype=np.int64)
    todo = (d > 0) & (d < top)
    one = todo & (d >= sp / (a * L2))
    out[one] = 1
    todo &= ~one
    q = 2
    while todo.any():
        lower = s_alpha(p - q + 1 if p != INF else INF, a) * a ** (-q) / L2
        hit = todo & (d >= lower)
        out[hit] = q
        todo &= ~hit
        q += 1
        if q > 4096:  # only reachable for distances below the float range
            out[todo] = q
            break
    return out


def q_p(j: int, p, params: TimeSetParams) -> int:
    """``Q_p(j)``; ``p`` may be ``math.inf``."""
    if j == 0:
        return 0
    return int(q_from_distance(return_distance(j, params), p, params)[0])


class LChoice(NamedTuple):
    l_minus: int
    l_plus: int
    in_range: bool


def choose_l(q: int, params: TimeSetParams, omega_inf, prev: tuple[int, int] = (0, 0),
             allow_fallback: bool = False) -> LChoice:
    """Smallest valid pair ``(l^-_q, l^+_q)`` not below ``prev``.

    ``omega_inf(j)`` must answer membership in ``Omega_inf``.  The mandated
    ranges are ``u q <= l^- < (u+2) q`` and ``v q <= l^+ < (v+2) q``; with
    ``allow_fallback`` the scan continues past them, and if ``Omega_inf``
    leaves no gap at all the unconstrained minimum ``(u q, v q)`` is used.
    Either way ``in_range`` is False.
    """
    if q == 0:
        return LChoice(0, 0, True)

    def scan(lo, hi, ok):
        try:
            for l in range(lo, hi):
                if ok(l):
                    return l
        except IndexError:  # ran past the computed membership range
            pass
        return None

    ok_m = lambda l: not omega_inf(-l) and not omega_inf(-l - 1)  # noqa: E731
    ok_p = lambda l: not omega_inf(l) and not omega_inf(l + 1)  # noqa: E731
    lm = scan(max(params.u * q, prev[0]), params.ut * q, ok_m)
    lp = scan(max(params.v * q, prev[1]), params.vt * q, ok_p)
    in_range = lm is not None and lp is not None
    if not in_range:
        if not allow_fallback:
            side = "-" if lm is None else "+"
            raise NoValidL(f"no admissible l^{side}_{q} in the mandated range")
        limit = 64 * params.vt * (q + 1)
        if lm is None:
            lm = scan(params.ut * q, limit, ok_m)
        if lp is None:
            lp = scan(params.vt * q, limit, ok_p)
        # Omega_inf may cover everything (large gamma): use the unconstrained minimum
        if lm is None:
            lm = max(params.u * q, prev[0])
        if lp is None:
            lp = max(params.v * q, prev[1])
    return LChoice(lm, lp, in_range)


def _mark(lo: int, hi: int, starts, ends) -> np.ndarray:
    """Boolean array over ``[lo, hi]`` covering the union of ``[starts, ends]``."""
    n = hi - lo + 1
    s = np.clip(np.asarray(starts) - lo, 0, n)
    e = np.clip(np.asarray(ends) - lo + 1, 0, n)
    keep = s < e
    diff = np.zeros(n + 1, dtype=np.int64)
    np.add.at(diff, s[keep], 1)
    np.add.at(diff, e[keep], -1)
    return np.cumsum(diff[:-1]) > 0


def rle(mask) -> list[list[int]]:
    """Runs of ``True`` as ``[start_index, length]`` pairs."""
    m = np.concatenate([[False], np.asarray(mask, dtype=bool), [False]])
    edges = np.flatnonzero(m[1:] != m[:-1])
    return [[int(a), int(b - a)] for a, b in zip(edges[::2], edges[1::2])]


class Interval(NamedTuple):
    """A maximal interval of ``Lambda_N`` with its central point."""

    a: int
    b: int
    m: int
    p: int


class TimeSetTable:
    """Recurrence data over the window ``[-M, N]``.

    Parameters
    ----------
    params : TimeSetParams
    M, N : int
        Window bounds; sets are reported on ``[-M, N]``.
    allow_fallback : bool, optional
        Permit ``l^pm_q`` outside the mandated ranges (empirical mode).  By
        default this follows ``not params.strict``.
    """

    def __init__(self, params: TimeSetParams, M: int, N: int, allow_fallback: bool | None = None):
        if N < 1 or M < 0:
            raise ValueError("window must contain [1, N] with N >= 1")
        self.params = params
        self.lo, self.hi = -int(M), int(N)
        self.allow_fallback = (not params.strict) if allow_fallback is None else allow_fallback
        self.anomalies: list[str] = []
        self._Q: dict = {}
        self._setup_range()
        self._choose_ls()
        self._R: dict[int, np.ndarray] = {}
        self._lam_plus_max = None

    # -- data over an extended index range

    def _setup_range(self):
        P = self.params
        qmax = 1
        while True:
            span = P.vt * (qmax + 2) * 4 + 4
            lo, hi = min(self.lo, -span) - span, max(self.hi, span) + span
            self._xlo, self._xhi = lo, hi
            self._j = np.arange(lo, hi + 1)
            self._d = return_distance(self._j, P)
            self._d[self._j == 0] = 0.0
            self._Q = {}
            new = max(int(self.Qx(INF).max(initial=0)), 1)
            if P.vt * (new + 1) + 4 <= span:
                break
            qmax = new
        # Omega membership is exact where every contributing j lies in range
        reach = max(P.ut, P.vt) * (new + 1)
        self._mlo, self._mhi = lo + reach, hi - reach

    def Qx(self, p) -> np.ndarray:
        """``Q_p`` over the extended index range."""
        key = INF if p == INF else int(p)
        if key not in self._Q:
            self._Q[key] = q_from_distance(self._d, key, self.params)
        return self._Q[key]

    def _idx(self, j):
        return np.asarray(j) - self._xlo

    def Q(self, p, j=None):
        """``Q_p`` on the window, or at the given indices."""
        q = self.Qx(p)
        if j is None:
            return q[self._idx(self.lo): self._idx(self.hi) + 1]
        return q[self._idx(j)]

    def p_of(self, j):
        return self.Q(0, j)

    @property
    def window(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def omega(self, p, tilde: bool = False, side: str = "both", lo: int | None = None,
              hi: int | None = None) -> np.ndarray:
        """Membership bitset of ``Omega^(side)_p`` (or its tilde version) over ``[lo, hi]``.

        ``p = -1`` gives the empty set, as does ``tilde`` with ``p = 0``.
        """
        lo = self.lo if lo is None else lo
        hi = self.hi if hi is None else hi
        if p == -1 or (tilde and p == 0):
            return np.zeros(hi - lo + 1, dtype=bool)
        q = self.Qx(p)
        sel = q > 0
        if tilde:
            sel &= q <= p
        js, qs = self._j[sel], q[sel]
        starts, ends = [], []
        if side in ("both", "-"):
            starts.append(js - self.params.ut * qs)
            ends.append(js)
        if side in ("both", "+"):
            starts.append(js + 1)
            ends.append(js + self.params.vt * qs)
        return _mark(lo, hi, np.concatenate(starts), np.concatenate(ends))

    def _omega_inf_oracle(self):
        mem = self.omega(INF, lo=self._mlo, hi=self._mhi)
        lo, hi = self._mlo, self._mhi

        def contains(j: int) -> bool:
            if not lo <= j <= hi:
                raise IndexError(f"index {j} outside the computed range [{lo}, {hi}]")
            return bool(mem[j - lo])

        return contains

    # -- exceptional intervals

    def _choose_ls(self):
        pmax = int(self.Q(0).max(initial=0))
        oracle = self._omega_inf_oracle()
        self.l_minus, self.l_plus, self.l_in_range = [0], [0], [True]
        for q in range(1, pmax + 1):
            c = choose_l(q, self.params, oracle, (self.l_minus[-1], self.l_plus[-1]), self.allow_fallback)
            self.l_minus.append(c.l_minus)
            self.l_plus.append(c.l_plus)
            self.l_in_range.append(c.in_range)
            if not c.in_range:
                self.anomalies.append(f"l_{q} chosen outside the mandated range: ({c.l_minus}, {c.l_plus})")
        # close returns with p >= 1 at positive times, in order
        pos = np.arange(1, self.hi + 1)
        pp = self.p_of(pos)
        self._cr = pos[pp > 0]
        self._cr_p = pp[pp > 0]
        self._cr_lm = self._cr - np.asarray(self.l_minus)[self._cr_p]
        self._cr_lp = self._cr + np.asarray(self.l_plus)[self._cr_p]

    def exceptional(self, m: int) -> tuple[int, int] | None:
        """``J(m) = [m - l^-_p, m + l^+_p]`` with ``p = p(m)``; ``None`` when ``p(m) = 0``."""
        p = int(self.p_of(m))
        if p == 0:
            return None
        return m - self.l_minus[p], m + self.l_plus[p]

    def lam(self, m: int) -> tuple[int, int]:
        """``(lambda^-(m), lambda^+(m))``."""
        p = int(self.p_of(m))
        return m - self.l_minus[p], m + self.l_plus[p]

    # -- admissible and regular times

    def admissible_set(self, N: int) -> np.ndarray:
        """``A_N`` as a boolean array indexed by ``j - 1``."""
        self._check_N(N)
        sel = self._cr < N
        return ~_mark(1, N, self._cr_lm[sel], self._cr_lp[sel])

    def lambda_set(self, N: int) -> np.ndarray:
        return ~self.admissible_set(N)

    def is_admissible(self, N: int) -> bool:
        if self._lam_plus_max is None:
            # running max of lambda^+(m) over close returns m < N
            arr = np.full(self.hi + 2, -1, dtype=np.int64)
            np.maximum.at(arr, self._cr + 1, self._cr_lp)
            self._lam_plus_max = np.maximum.accumulate(arr)
        self._check_N(N)
        return bool(self._lam_plus_max[N] < N)

    def admissible_times(self) -> np.ndarray:
        """All admissible ``N`` in ``[1, hi]``."""
        self.is_admissible(1)
        n = np.arange(1, self.hi + 1)
        return n[self._lam_plus_max[n] < n]

    def central_intervals(self, N: int) -> list[Interval]:
        """Maximal intervals of ``Lambda_N`` with central points (first maximiser on ties)."""
        lam = self.lambda_set(N)
        out = []
        for start, length in rle(lam):
            a, b = start + 1, start + length
            ps = self.p_of(np.arange(a, b + 1))
            k = int(np.argmax(ps))
            if np.count_nonzero(ps == ps[k]) > 1:
                self.anomalies.append(f"central point of [{a},{b}] not unique")
            out.append(Interval(a, b, a + k, int(ps[k])))
        return out

    def _regular_raw(self, N: int) -> np.ndarray:
        if N in self._R:
            return self._R[N]
        A = self.admissible_set(N)
        R = A.copy()
        for J in self.central_intervals(N):
            if J.p == 0:
                continue
            l = self.l_plus[J.p]
            if l >= N:
                self.anomalies.append(f"R(J) for J=[{J.a},{J.b}] needs R_{l} with l >= N={N}")
                continue
            sub = self._regular_raw(l)
            # R(J) = R_{l} + m_J, kept inside J
            top = min(J.m + l, J.b)
            if top > J.m:
                R[J.m: top] |= sub[: top - J.m]
        self._R[N] = R
        return R

    def regular_set(self, N: int) -> tuple[np.ndarray, np.ndarray]:
        """``(R_N, Gamma_N)`` as boolean arrays indexed by ``j - 1``."""
        if not self.is_admissible(N):
            raise NotAdmissible(f"N={N} is not admissible")
        R = self._regular_raw(N)
        return R.copy(), ~R

    def _check_N(self, N: int):
        if not 1 <= N <= self.hi:
            raise ValueError(f"N={N} outside the table window [1, {self.hi}]")

    # -- first returns

    def nu(self, q: int) -> int | None:
        """``min{j >= 1 : p(j) >= q}`` within the window."""
        hit = np.flatnonzero(self.Q(0)[-self.lo + 1:] >= q)
        return int(hit[0]) + 1 if hit.size else None

    def nu_tilde(self, q: int) -> int | None:
        P = self.params
        a, L2, s = P.alpha, P.L2, s_alpha(INF, P.alpha)
        if q >= 2:
            thr = 3 * s * a ** (-(q - 1)) / L2
        else:
            thr = 3 * (4 * P.gamma / L2 + s / (a * L2))
        d = self._d[self._idx(1): self._idx(self.hi) + 1]
        hit = np.flatnonzero(d < thr)
        return int(hit[0]) + 1 if hit.size else None

    # -- export

    def to_json(self, regular_for=()) -> str:
        js = self.window
        om0 = self.omega(0)
        omi = self.omega(INF)
        rows = [[int(j), int(p), int(qi), bool(a), bool(b)]
                for j, p, qi, a, b in zip(js, self.Q(0), self.Q(INF), om0, omi)]
        doc = {
            "schema": SCHEMA,
            "params": self.params.as_dict(),
            "window": [self.lo, self.hi],
            "columns": ["j", "p", "Q_inf", "in_Omega_0", "in_Omega_inf"],
            "rows": rows,
            "l_minus": self.l_minus,
            "l_plus": self.l_plus,
            "admissible_rle": rle(np.isin(np.arange(1, self.hi + 1), self.admissible_times())),
            "regular_rle": {str(N): rle(self.regular_set(N)[0]) for N in regular_for},
            "anomalies": sorted(set(self.anomalies)),
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def admissible_set(N: int, table: TimeSetTable) -> np.ndarray:
    """``A_N`` over ``[1, N]`` (index ``j - 1``)."""
    return table.admissible_set(N)


def regular_set(N: int, table: TimeSetTable) -> tuple[np.ndarray, np.ndarray]:
    """``(R_N, Gamma_N)``; raises :class:`NotAdmissible` unless ``N`` is admissible."""
    return table.regular_set(N)


# ---------------------------------------------------------------- density


class DensityReport(NamedTuple):
    h_emp: float
    H_emp: float
    hfunctions_hold: bool
    h_holds: bool
    H_holds: bool
    witness: dict


def _density(table: TimeSetTable, N: int) -> DensityReport:
    P = table.params
    w = P.w
    omi = table.omega(INF, lo=-N, hi=N)
    pos = np.cumsum(omi[N + 1:])  # [1, N]
    neg = np.cumsum(omi[:N][::-1])  # [-1, -N]
    n = np.arange(1, N + 1)
    ratio = np.maximum(pos, neg) / n
    H = float(ratio.max(initial=0.0))
    H_ok = bool(np.all(np.maximum(pos, neg) <= n / (12 * w)))
    h_vals, h_ok, wit = [], True, {}
    q = 1
    while (q + 2) * w <= N:
        nt = table.nu_tilde(q)
        if nt is None:
            nt = N + 1
        h_vals.append(nt / ((q + 2) * w))
        if nt < (q + 2) * w and h_ok:
            h_ok = False
            wit["hfunctions1_q"] = q
        q += 1
    if not H_ok:
        wit["hfunctions2_N"] = int(n[np.argmax(np.maximum(pos, neg) > n / (12 * w))])
    h = float(min(h_vals)) if h_vals else float("inf")
    return DensityReport(h, H, h_ok and H_ok, h_ok, H_ok, wit)


def density_functions(params: TimeSetParams, N: int, table: TimeSetTable | None = None) -> DensityReport:
    """Empirical ``h`` and ``H`` on ``[1, N]`` and whether the density conditions hold there.

    ``h_emp`` is the least ratio ``nu~(q) / ((q+2) w)`` over the ``q`` whose
    bound is testable on the window; ``H_emp`` the largest one-sided
    density ``#([1,n] cap Omega_inf)/n`` (or its mirror) for ``n <= N``.
    """
    if N < params.w:
        raise ValueError("N must be at least w")
    if table is None or table.hi < N or table.lo > -N:
        table = TimeSetTable(params, N, N, allow_fallback=True)
    return _density(table, N)


# ---------------------------------------------------------------- lemma checks


@dataclass
class LemmaResult:
    asserted: bool
    ok: bool = True
    checked: int = 0
    counterexample: object = None
    note: str = ""

    def fail(self, witness):
        if self.ok:
            self.counterexample = witness
        self.ok = False

    def as_dict(self) -> dict:
        return {"asserted": self.asserted, "ok": self.ok, "checked": self.checked,
                "counterexample": self.counterexample, "note": self.note}


@dataclass
class LemmaReport:
    predicates: dict
    results: dict

    @property
    def all_ok(self) -> bool:
        """True when no asserted lemma has a counterexample."""
        return all(r.ok for r in self.results.values() if r.asserted)

    def failures(self) -> list[str]:
        return [k for k, r in self.results.items() if r.asserted and not r.ok]

    def as_dict(self) -> dict:
        return {"schema": SCHEMA, "predicates": self.predicates,
                "results": {k: r.as_dict() for k, r in self.results.items()}, "all_ok": self.all_ok}


def _interval_pairs(starts, ends, budget):
    """Index pairs of overlapping closed intervals, by a sorted sweep."""
    order = np.argsort(starts, kind="stable")
    active: list[int] = []
    out = []
    for i in order:
        active = [k for k in active if ends[k] >= starts[i]]
        for k in active:
            out.append((k, i))
            if len(out) >= budget:
                return out
        active.append(i)
    return out


def verify_timeset_lemmas(table: TimeSetTable, budget: int = 200, seed: int = 0) -> LemmaReport:
    """Exhaustive or sampled scans of the structural properties of the sets.

    Parameters
    ----------
    table : TimeSetTable
    budget : int
        Upper bound on sampled times ``N`` and on per-lemma pair counts.
    seed : int
        Seed for the sampled checks.
    """
    P = table.params
    rng = np.random.default_rng(seed)
    a, L2, S = P.alpha, P.L2, s_alpha(INF, P.alpha)
    N = table.hi
    dens = _density(table, N) if N >= P.w else DensityReport(float("inf"), 0.0, True, True, True, {})
    preds = dict(P.predicates())
    preds["alpha2"] = a >= S + 1
    preds["alphagamma1"] = P.gamma >= (S + 1) / a
    preds["hfunctions1"] = dens.h_holds
    preds["hfunctions2"] = dens.H_holds
    standing = all(preds[k] for k in ("gamma0", "alphagamma0", "hfunctions1", "hfunctions2"))
    basic = preds["gamma0"] and preds["alphagamma0"]
    res: dict[str, LemmaResult] = {}
    js = table.window
    Qs = {p: table.Q(p) for p in list(range(0, 7)) + [INF]}
    pmax = int(Qs[0].max(initial=0))

    # monotonicity in p and the p(j) <= Q_p <= Q_inf <= p(j)+1 chain
    r = res["q_monotone"] = LemmaResult(True)
    for p in range(1, 7):
        bad = np.flatnonzero(Qs[p - 1] > Qs[p])
        r.checked += js.size
        if bad.size:
            r.fail({"j": int(js[bad[0]]), "p": p})
    r = res["pjestimates"] = LemmaResult(preds["alpha2"] and preds["alphagamma1"])
    for p in range(0, 7):
        chain = (Qs[0] <= Qs[p]) & (Qs[p] <= Qs[INF]) & (Qs[INF] <= Qs[0] + 1)
        r.checked += js.size
        bad = np.flatnonzero(~chain)
        if bad.size:
            r.fail({"j": int(js[bad[0]]), "p": p, "p(j)": int(Qs[0][bad[0]]),
                    "Q_p": int(Qs[p][bad[0]]), "Q_inf": int(Qs[INF][bad[0]])})

    # origin avoidance and disjointness of equal-depth Omega_inf(j)
    r = res["origin"] = LemmaResult(preds["hfunctions1"])
    omi = table.omega(INF, lo=-2, hi=2)
    r.checked = 5
    if omi.any():
        r.fail({"j": int(np.flatnonzero(omi)[0]) - 2})
    r = res["omega_disjoint"] = LemmaResult(preds["hfunctions1"])
    qi = table.Qx(INF)
    sel = np.flatnonzero(qi > 0)
    st = table._j[sel] - P.ut * qi[sel]
    en = table._j[sel] + P.vt * qi[sel]
    inwin = (en >= table.lo) & (st <= table.hi)
    sel, st, en = sel[inwin], st[inwin], en[inwin]
    q0x = table.Qx(0)
    for i, k in _interval_pairs(st, en, 50 * budget):
        m, n = sel[i], sel[k]
        r.checked += 1
        near = abs(int(qi[m]) - int(qi[n])) <= 2 or abs(int(q0x[m]) - int(q0x[n])) <= 1
        if near:
            r.fail({"m": int(table._j[m]), "n": int(table._j[n])})

    # translation lemma (a) and (b)
    r = res["omegatransition"] = LemmaResult(basic)
    cr_all = table._j[q0x >= 2]
    for p in range(2, pmax + 1):
        ms = cr_all[(q0x[q0x >= 2] >= p)]
        ms = ms[(ms >= table.lo) & (ms <= table.hi)]
        if ms.size > budget:
            ms = rng.choice(ms, budget, replace=False)
        qa, qb = table.Qx(p - 2), table.Qx(p - 1)
        for m in ms:
            for sgn in (1, -1):
                # (a): Q_{p-2}(k) <= Q_{p-1}(k +- m) <= Q_{p-2}(k) + 1 when Q_{p-2}(k) <= p-2
                k = table.window
                kk = k + sgn * m
                ok_rng = (kk >= table._xlo) & (kk <= table._xhi)
                k, kk = k[ok_rng], kk[ok_rng]
                qk, qkk = qa[table._idx(k)], qb[table._idx(kk)]
                # k = 0 is excluded: Q(0) = 0 is a convention, not a distance bound
                cond = (qk <= p - 2) & (k != 0)
                bad = np.flatnonzero(cond & ((qkk < qk) | (qkk > qk + 1)))
                r.checked += int(cond.sum())
                if bad.size:
                    r.fail({"part": "a", "p": p, "m": int(m), "k": int(k[bad[0]]), "sign": sgn})
                # (b): Omega~^(s)_{p-2} +- m within Omega~^(s)_{p-1}
                for side in ("-", "+", "both"):
                    src = table.omega(p - 2, tilde=True, side=side)
                    dst = table.omega(p - 1, tilde=True, side=side, lo=table.lo + sgn * m, hi=table.hi + sgn * m)
                    bad = np.flatnonzero(src & ~dst)
                    r.checked += int(src.sum())
                    if bad.size:
                        r.fail({"part": "b", "p": p, "m": int(m), "x": int(table.lo + bad[0]),
                                "side": side, "sign": sgn})

    # exceptional intervals
    cr, crp = table._cr, table._cr_p
    lm, lp = table._cr_lm, table._cr_lp
    r = res["j_in_omega0"] = LemmaResult(standing)
    for m, p, x, y in zip(cr, crp, lm, lp):
        r.checked += 1
        if not (x - 1 >= m - P.ut * p and y + 1 <= m + P.vt * p):
            r.fail({"m": int(m)})
    r = res["jmndisjointness"] = LemmaResult(standing)
    for i, k in _interval_pairs(lm - 1, lp + 1, 50 * budget):
        r.checked += 1
        if abs(int(crp[i]) - int(crp[k])) <= 1:
            r.fail({"m": int(cr[i]), "n": int(cr[k])})
    r = res["lplusestimates"] = LemmaResult(standing)
    for q in range(1, len(table.l_plus)):
        r.checked += 1
        nt = table.nu_tilde(max(1, q - 2))
        lo_ok = min(P.u, P.v) * q <= min(table.l_minus[q], table.l_plus[q])
        hi_ok = nt is None or max(table.l_minus[q], table.l_plus[q]) < nt
        if not (lo_ok and hi_ok):
            r.fail({"q": q, "l_minus": table.l_minus[q], "l_plus": table.l_plus[q], "nu_tilde": nt})

    # admissible-time structure
    adm = table.admissible_times()
    Ns = np.arange(1, N + 1)
    sample = rng.choice(Ns, min(budget, Ns.size), replace=False)
    r = res["stabilizingeffect"] = LemmaResult(True)
    for N2 in sample:
        A2 = table.admissible_set(int(N2))
        cand = np.flatnonzero(A2) + 1
        if cand.size == 0:
            continue
        N0 = int(rng.choice(cand))
        N1 = int(rng.integers(N0, N2 + 1))
        A0, A1 = table.admissible_set(N0), table.admissible_set(N1)
        r.checked += 1
        if not (np.array_equal(A1[:N0], A2[:N0]) and np.array_equal(A2[:N0], A0)):
            r.fail({"N0": N0, "N1": N1, "N2": int(N2)})
    r = res["admissible_outside_omega0"] = LemmaResult(standing)
    om0 = table.omega(0, lo=1, hi=N)
    outside = np.flatnonzero(~om0) + 1
    r.checked = outside.size
    bad = outside[~np.isin(outside, adm)]
    if bad.size:
        r.fail({"N": int(bad[0])})

    adm_sample = adm if adm.size <= budget else np.sort(rng.choice(adm, budget, replace=False))
    r_cent = res["centralpoints"] = LemmaResult(standing)
    r_end = res["endpoints_a"] = LemmaResult(standing)
    r_endc = res["endpoints_c"] = LemmaResult(standing)
    r_rsb = res["regularsetsbasic_b"] = LemmaResult(standing)
    r_ra = res["regsets_a"] = LemmaResult(preds["hfunctions2"])
    seen = set()
    for Nn in adm_sample:
        Nn = int(Nn)
        R, G = table.regular_set(Nn)
        cum = np.cumsum(G)
        r_ra.checked += Nn
        bad = np.flatnonzero(cum > np.arange(1, Nn + 1) / (12 * P.w))
        if bad.size:
            r_ra.fail({"N": Nn, "j": int(bad[0]) + 1})
        for J in table.central_intervals(Nn):
            if (J.a, J.b) in seen:
                continue
            seen.add((J.a, J.b))
            ps = table.p_of(np.arange(J.a, J.b + 1))
            lam_m, lam_p = table.lam(J.m)
            r_cent.checked += 1
            others = np.delete(ps, J.m - J.a)
            if (lam_m, lam_p) != (J.a, J.b) or (others.size and np.any(others >= J.p - 1)):
                r_cent.fail({"J": [J.a, J.b], "m": J.m})
            r_end.checked += 1
            pts = [x for x in (lam_m - 1, lam_m, J.m) if x >= 1]
            Am = table.admissible_set(J.m)
            qinf = table.Q(INF, np.arange(J.a, J.b + 1))
            qinf = np.delete(qinf, J.m - J.a)
            if not all(Am[x - 1] for x in pts) or np.any(qinf > max(0, J.p - 2)):
                r_end.fail({"J": [J.a, J.b], "m": J.m})
            if lam_p + 1 <= table.hi:
                r_endc.checked += 1
                if not table.is_admissible(lam_p + 1):
                    r_endc.fail({"J": [J.a, J.b], "m": J.m})
            # R(J) distance bound
            l = table.l_plus[J.p]
            if l < Nn and table.is_admissible(l):
                sub = table.regular_set(l)[0]
                jj = J.m + 1 + np.flatnonzero(sub)
                jj = jj[jj <= J.b]
                bound = 4 * P.gamma / L2 - s_alpha(J.p - 1, a) / (a * L2)
                dd = table._d[table._idx(jj)]
                r_rsb.checked += jj.size
                bad = np.flatnonzero((dd < bound - 1e-15) | (dd < 3 * P.gamma / L2 - 1e-15))
                if bad.size:
                    r_rsb.fail({"J": [J.a, J.b], "j": int(jj[bad[0]])})

    r = res["admissiblecentral"] = LemmaResult(standing)
    for m in cr:
        if not table.is_admissible(int(m)):
            continue
        x, y = table.lam(int(m))
        pts = [t for t in (x - 1, x, y + 1) if 1 <= t <= table.hi]
        r.checked += 1
        if not all(table.is_admissible(t) for t in pts):
            r.fail({"m": int(m)})

    # regular sets at l^+_q
    r_lp = res["lpminrn"] = LemmaResult(standing)
    r_gl = res["gammalqplus"] = LemmaResult(standing)
    r_rb = res["regsets_b"] = LemmaResult(standing)
    r_stab = res["regularstabilized"] = LemmaResult(True)
    for q in range(1, len(table.l_plus)):
        l = table.l_plus[q]
        if l + 1 > table.hi or not (table.is_admissible(l) and table.is_admissible(l + 1)):
            continue
        G0, G1 = table.regular_set(l)[1], table.regular_set(l + 1)[1]
        r_gl.checked += 1
        if not np.array_equal(G0, G1[:l]) or G1[l]:
            r_gl.fail({"q": q})
        cnt = np.cumsum(G0[::-1])  # #([j+1, l] cap Gamma) for j = l-1 .. 0
        r_rb.checked += l
        bad = np.flatnonzero(cnt > P.sigma * np.arange(1, l + 1) + 1e-12)
        if bad.size:
            r_rb.fail({"q": q, "j": int(l - 1 - bad[0])})
        for Nn in adm_sample[adm_sample >= l + 1][:budget // 4 + 1]:
            R = table.regular_set(int(Nn))[0]
            r_lp.checked += 1
            need = [1, 2, l, l + 1] if Nn >= 2 else [1]
            if not all(R[x - 1] for x in need if x <= Nn):
                r_lp.fail({"q": q, "N": int(Nn)})
    for N2 in adm_sample[: budget // 2 + 1]:
        N2 = int(N2)
        A2 = table.admissible_set(N2)
        cand = adm[(adm <= N2)]
        cand = cand[A2[cand - 1]]
        if cand.size == 0:
            continue
        N0 = int(rng.choice(cand))
        mids = adm[(adm >= N0) & (adm <= N2)]
        N1 = int(rng.choice(mids))
        R0, R1, R2 = (table.regular_set(x)[0] for x in (N0, N1, N2))
        r_stab.checked += 1
        if not (np.array_equal(R1[:N0], R2[:N0]) and np.array_equal(R2[:N0], R0)):
            r_stab.fail({"N0": N0, "N1": N1, "N2": N2})

    r = res["regsets_d"] = LemmaResult(standing)
    for m, p in zip(cr, crp):
        m = int(m)
        if not table.is_admissible(m):
            continue
        Rm = table.regular_set(m)[0]
        for q in range(1, int(p) + 1):
            lo = m - table.l_minus[q]
            if lo < 1:
                continue
            r.checked += 1
            if np.count_nonzero(~Rm[lo - 1: m]) > q / 12:
                r.fail({"m": m, "q": q})

    return LemmaReport(preds, res)
