"""Quasiperiodic Schrodinger cocycles and their projective action."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .bifurcation import critical_beta, persists
from ._pycore import angles
from .circle import RotationSpec
from .systems import ForcingFunction, cos_2pi, harper_interval_model, make_harper, make_harper_interval, peak


class Mat2(NamedTuple):
    a: float
    b: float
    c: float
    d: float

    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, o: "Mat2") -> "Mat2":
        return Mat2(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                    self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d)

    def apply(self, v):
        return (self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1])

    def norm(self) -> float:
        """Operator 2-norm."""
        return float(np.linalg.norm(np.array([[self.a, self.b], [self.c, self.d]]), 2))


def schrodinger_matrix(theta: float, E: float, lam: float, V: ForcingFunction | None = None) -> Mat2:
    """``((E - lam V(theta), -1), (1, 0))``."""
    V = V or cos_2pi()
    return Mat2(E - lam * float(V(theta)), -1.0, 1.0, 0.0)


@dataclass
class CocycleRun:
    theta0: float
    n: int
    log_norm_trace: np.ndarray


def cocycle_run(theta0: float, E: float, lam: float, V: ForcingFunction | None = None,
                spec: RotationSpec | None = None, n: int = 1000, v0=(1.0, 0.0), renorm: int = 32) -> CocycleRun:
    """``log |A_k(theta0) v0|`` for ``k = 0..n``, renormalising every ``renorm`` steps."""
    V = V or cos_2pi()
    spec = spec or RotationSpec.golden()
    hi, lo = spec.split
    a = E - lam * V(angles(theta0, np.arange(n), hi, lo))
    v1, v2 = map(float, v0)
    acc = 0.0
    trace = np.empty(n + 1)
    trace[0] = 0.5 * math.log(v1 * v1 + v2 * v2)
    for i in range(n):
        v1, v2 = a[i] * v1 - v2, v1
        r = v1 * v1 + v2 * v2
        trace[i + 1] = acc + 0.5 * math.log(r)
        if (i + 1) % renorm == 0:
            nrm = math.sqrt(r)
            acc += math.log(nrm)
            v1, v2 = v1 / nrm, v2 / nrm
    return CocycleRun(float(theta0), n, trace)


class CocycleEstimate(NamedTuple):
    value: float
    stderr: float
    samples: int
    n: int


def cocycle_lyapunov(E: float, lam: float, V: ForcingFunction | None = None, spec: RotationSpec | None = None,
                     n: int = 10**5, samples: int = 64, seed: int = 0, matrix_norm: bool = True) -> CocycleEstimate:
    """Mean of ``(1/n) log |A_n(theta)|`` over random ``theta`` with its standard error."""
    if n < 1000:
        raise ValueError("n must be at least 1000")
    V = V or cos_2pi()
    spec = spec or RotationSpec.golden()
    th = np.random.default_rng(seed).random(samples)
    vals = kernels.cocycle_lognorm(V, E, lam, spec, th, n, matrix_norm) / n
    se = float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else float("nan")
    return CocycleEstimate(float(vals.mean()), se, samples, n)


class IdentityCheck(NamedTuple):
    lhs: float
    rhs: float
    gap: float


def projective_derivative_identity(theta: float, v0, E: float, lam: float, V: ForcingFunction | None = None,
                                   n: int = 100, spec: RotationSpec | None = None) -> IdentityCheck:
    """Compare ``prod DT`` along the projective orbit with ``|v0|^2 / |v_n|^2``.

    The projective coordinate is ``x = -arctan(v2/v1)``, the orientation
    preserving chart used by :func:`qpflab.systems.make_harper`.
    """
    V = V or cos_2pi()
    spec = spec or RotationSpec.golden()
    v1, v2 = map(float, v0)
    if v1 == 0.0 and v2 == 0.0:
        raise ValueError("v0 must be non-zero")
    sys = make_harper(E, lam, V, spec)
    hi, lo = spec.split
    t = angles(theta, np.arange(n), hi, lo)
    x = -math.atan2(v2, v1)
    x = x - math.pi * round(x / math.pi)  # chart on (-pi/2, pi/2]
    log_lhs = 0.0
    log_rhs = math.log(v1 * v1 + v2 * v2)
    for i in range(n):
        log_lhs += math.log(float(sys.dfibre(t[i], x)))
        x = float(sys.fibre(t[i], x))
        a = E - lam * float(V(t[i]))
        v1, v2 = a * v1 - v2, v1
        r = math.hypot(v1, v2)
        log_rhs -= 2.0 * math.log(r)
        v1, v2 = v1 / r, v2 / r
    return IdentityCheck(math.exp(log_lhs), math.exp(log_rhs), abs(math.expm1(log_lhs - log_rhs)))


# ---------------------------------------------------------------- critical coupling


class LambdaC(NamedTuple):
    E: float
    lo: float
    hi: float

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)


def two_graphs_persist(E: float, lam: float, V: ForcingFunction | None = None, spec: RotationSpec | None = None,
                       N: int = 20000, G: int = 2048) -> bool:
    """Whether the interval model keeps an upper invariant graph above 0."""
    return persists(make_harper_interval(E, lam, V or peak(2.0), spec), N=N, G=G)


def lambda_c(E: float, V: ForcingFunction | None = None, spec: RotationSpec | None = None, tol: float = 1e-3,
             N: int = 20000, G: int = 2048) -> LambdaC:
    """Bracket of the critical coupling at energy ``E`` (interval model, bisection in ``beta``)."""
    V = V or peak(2.0)
    m = harper_interval_model(E)
    factory = lambda beta: make_harper_interval(E, m.lam(beta), V, spec)  # noqa: E731
    hi = 1.0
    while persists(factory(hi), N=N, G=G):
        hi *= 2.0
    br = critical_beta(factory, 0.0, hi, tol=tol * m.s, N=N, G=G)
    return LambdaC(E, m.lam(br.lo), m.lam(br.hi))


def lambda_c_curve(E_values, V: ForcingFunction | None = None, spec: RotationSpec | None = None,
                   tol: float = 1e-3, N: int = 20000, G: int = 2048) -> list[LambdaC]:
    return [lambda_c(float(E), V, spec, tol, N, G) for E in E_values]


def monotone_onset(rows: list[LambdaC]) -> float:
    """Smallest sampled ``E`` from which the sampled ``lambda_c`` increases strictly.

    An empirical stand-in for the energy above which the critical coupling
    is monotone in ``E``.  Consecutive brackets must be disjoint to count as
    increasing.
    """
    if not rows:
        raise ValueError("no rows")
    rows = sorted(rows, key=lambda r: r.E)
    k = len(rows) - 1
    while k > 0 and rows[k - 1].hi < rows[k].lo:
        k -= 1
    return rows[k].E


def energy_c(lam: float, E_lo: float, E_hi: float, V: ForcingFunction | None = None,
             spec: RotationSpec | None = None, tol: float = 1e-3, N: int = 20000, G: int = 2048):
    """Bracket ``(lo, hi)`` of the energy where two graphs appear at coupling ``lam``.

    Needs no persistence at ``E_lo`` and persistence at ``E_hi``.
    """
    lo, hi = float(E_lo), float(E_hi)
    if two_graphs_persist(lo, lam, V, spec, N, G) or not two_graphs_persist(hi, lam, V, spec, N, G):
        raise ValueError("energy bracket does not straddle the transition")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if two_graphs_persist(mid, lam, V, spec, N, G):
            hi = mid
        else:
            lo = mid
    return lo, hi


def write_curve_csv(rows: list[LambdaC], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["E", "lambda_c_low", "lambda_c_high"])
        for r in rows:
            w.writerow([repr(r.E), repr(r.lo), repr(r.hi)])
