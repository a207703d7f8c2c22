"""Circle arithmetic, rotation orbits and Diophantine utilities."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

GOLDEN_MEAN = (math.sqrt(5.0) - 1.0) / 2.0
SILVER_MEAN = math.sqrt(2.0) - 1.0

# 26 significant bits: m * _hi is exact for |m| < 2**26
_SPLIT_BITS = 26


def wrap(x):
    """Reduce angles into [0, 1). Works on scalars and arrays."""
    y = np.mod(x, 1.0)
    # np.mod may return exactly 1.0 for tiny negative inputs
    if np.ndim(y) == 0:
        return 0.0 if float(y) >= 1.0 else float(y)
    y[y >= 1.0] = 0.0
    return y


def circle_dist(a, b):
    """Euclidean distance on the circle, a value in [0, 1/2].

    >>> circle_dist(0.125, 0.875)
    0.25
    """
    # |a - b| first so that the result is symmetric in a and b bit for bit
    d = np.mod(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)), 1.0)
    d = np.minimum(d, 1.0 - d)
    if np.ndim(d) == 0:
        return float(d)
    return d


def dist_to_set(theta, targets=(0.0,)):
    """Distance from ``theta`` to the nearest of ``targets``."""
    out = None
    for t in targets:
        d = circle_dist(theta, t)
        out = d if out is None else np.minimum(out, d)
    return out


@dataclass(frozen=True)
class CircleAngle:
    """A point of the circle, always stored in [0, 1)."""

    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", wrap(float(self.value)))

    def __add__(self, other):
        v = other.value if isinstance(other, CircleAngle) else float(other)
        return CircleAngle(self.value + v)

    def __sub__(self, other):
        v = other.value if isinstance(other, CircleAngle) else float(other)
        return CircleAngle(self.value - v)

    def __float__(self):
        return self.value

    def dist(self, other) -> float:
        v = other.value if isinstance(other, CircleAngle) else float(other)
        return circle_dist(self.value, v)


class CFResult(NamedTuple):
    quotients: list[int]
    truncated: bool


def continued_fraction(omega: float, k: int, tol: float | None = None) -> CFResult:
    """First ``k`` partial quotients of ``omega`` in (0, 1).

    Terms are only reported while they are determined by the input, i.e.
    while the expansions of ``omega - tol`` and ``omega + tol`` agree.  When
    fewer than ``k`` terms survive, ``truncated`` is set.

    Parameters
    ----------
    omega : float
        Number in (0, 1).
    k : int
        Number of requested partial quotients, ``k >= 1``.
    tol : float, optional
        Half-width of the uncertainty interval, by default four ulps.
    """
    if not 0.0 < omega < 1.0:
        raise ValueError("omega must lie in (0, 1)")
    if k < 1:
        raise ValueError("k must be positive")
    if tol is None:
        tol = 4.0 * math.ulp(omega)
    lo = Fraction(omega) - Fraction(tol)
    hi = Fraction(omega) + Fraction(tol)
    out: list[int] = []
    while len(out) < k:
        if lo <= 0 or hi <= 0:
            break
        a_lo, a_hi = (1 / lo), (1 / hi)
        # reciprocal reverses the order
        q_lo, q_hi = math.floor(a_hi), math.floor(a_lo)
        if q_lo != q_hi:
            break
        out.append(int(q_lo))
        lo, hi = a_hi - q_lo, a_lo - q_lo
    return CFResult(out, len(out) < k)


@dataclass(frozen=True)
class RotationSpec:
    """Irrational rotation number with Diophantine metadata.

    ``expr`` optionally records an exact expression (an mpmath-evaluable
    string) so that orbits can be recomputed in extended precision.
    """

    omega: float
    dioph_c: float = 0.1
    dioph_d: float = 1.0
    expr: str | None = None
    name: str = "custom"
    _hi: float = field(init=False, repr=False, compare=False)
    _lo: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0.0 < self.omega < 1.0:
            raise ValueError("omega must lie in (0, 1)")
        if self.dioph_c <= 0 or self.dioph_d <= 0:
            raise ValueError("Diophantine constants must be positive")
        m, e = math.frexp(self.omega)
        hi = math.ldexp(math.floor(math.ldexp(m, _SPLIT_BITS)), e - _SPLIT_BITS)
        object.__setattr__(self, "_hi", hi)
        object.__setattr__(self, "_lo", self.omega - hi)

    @classmethod
    def golden(cls) -> "RotationSpec":
        return cls(GOLDEN_MEAN, dioph_c=0.3, dioph_d=1.0, expr="(sqrt(5)-1)/2", name="golden")

    @classmethod
    def silver(cls) -> "RotationSpec":
        return cls(SILVER_MEAN, dioph_c=0.3, dioph_d=1.0, expr="sqrt(2)-1", name="silver")

    @property
    def split(self) -> tuple[float, float]:
        """``(hi, lo)`` with ``hi + lo == omega`` and ``hi`` short."""
        return self._hi, self._lo

    @property
    def cf_partial_quotients(self) -> list[int]:
        return continued_fraction(self.omega, 40).quotients

    def omega_mp(self):
        """The rotation number as an mpmath value at the current precision."""
        import mpmath

        if self.expr is not None:
            return mpmath.mpf(eval(self.expr, {"__builtins__": {}}, {"sqrt": mpmath.sqrt}))
        return mpmath.mpf(self.omega)


def rotate(spec: RotationSpec, theta0, m):
    """``theta0 + m*omega`` mod 1 with the rotation part compensated.

    ``m`` may be an integer array.  ``theta0 = 0`` gives exactly 0 at ``m = 0``.
    """
    m = np.asarray(m, dtype=np.int64)
    hi, lo = spec.split
    mf = m.astype(float)
    a = mf * hi
    a = a - np.floor(a)
    r = a + mf * lo
    out = wrap(np.asarray(theta0, dtype=float) + r)
    return out


def orbit_point(spec: RotationSpec, n: int) -> float:
    """``n * omega`` mod 1, accurate to a few ulps for ``|n| < 2**26``."""
    return float(rotate(spec, 0.0, np.array([n]))[0])


def orbit_points(spec: RotationSpec, ns) -> np.ndarray:
    return rotate(spec, np.zeros(np.shape(ns)), ns)


def orbit_point_mp(spec: RotationSpec, n: int):
    """Extended-precision ``n * omega`` mod 1 (mpmath)."""
    import mpmath

    v = n * spec.omega_mp()
    return v - mpmath.floor(v)


class DiophEstimate(NamedTuple):
    c: float
    d: float
    holds: bool


def return_distances(spec: RotationSpec, N: int) -> np.ndarray:
    """``d(omega_n, 0)`` for ``n = 1..N``."""
    return circle_dist(orbit_points(spec, np.arange(1, N + 1)), 0.0)


def record_returns(spec: RotationSpec, N: int) -> np.ndarray:
    """Indices ``n <= N`` at which ``d(omega_n, 0)`` attains a new minimum."""
    d = return_distances(spec, N)
    running = np.minimum.accumulate(d)
    new = np.ones(N, dtype=bool)
    new[1:] = d[1:] < running[:-1]
    return np.flatnonzero(new) + 1


def estimate_dioph(spec: RotationSpec, N: int) -> DiophEstimate:
    """Fit ``d(omega_n, 0) >= c * n**(-d)`` on ``1 <= n <= N``.

    The exponent is the least-squares slope of the record minima on a
    log-log scale; ``c`` is then the largest constant making the bound hold.
    ``holds`` reports whether the stored constants of ``spec`` are valid on
    the same range.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    n = np.arange(1, N + 1, dtype=float)
    dist = return_distances(spec, N)
    rec = record_returns(spec, N)
    if len(rec) >= 2:
        slope = np.polyfit(np.log(rec), np.log(dist[rec - 1]), 1)[0]
        d = max(float(-slope), 1e-12)
    else:
        d = 1.0
    c = float(np.min(dist * n**d))
    holds = bool(np.all(dist >= spec.dioph_c * n ** (-spec.dioph_d)))
    return DiophEstimate(c, d, holds)
