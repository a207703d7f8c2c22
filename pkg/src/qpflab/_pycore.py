"""Pure NumPy implementations of the orbit kernels.

Used when the compiled extension is unavailable and for systems built from
arbitrary Python callables.  Loops run over time; the grid is vectorised.
"""
from __future__ import annotations

import numpy as np

from . import systems as S


def angles(theta0, m, hi: float, lo: float):
    """``theta0 + m*(hi+lo) mod 1`` with the same rounding as the compiled core."""
    mf = np.asarray(m, dtype=float)
    a = mf * hi
    a = a - np.floor(a)
    t = np.asarray(theta0, dtype=float) + (a + mf * lo)
    t = t - np.floor(t)
    return np.where(t >= 1.0, 0.0, t)


class CodedSystem:
    """Fibre callables reconstructed from integer codes."""

    def __init__(self, kind, fc, gc, fp, gp, beta):
        self.kind, self.fc, self.gc, self.beta = kind, fc, gc, beta
        self.fp, self.gp = np.asarray(fp, dtype=float), np.asarray(gp, dtype=float)

    def fibre(self, t, x):
        g = S.forcing_eval(self.gc, self.gp, t)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == S.Kind.ADDITIVE:
                return S.base_eval(self.fc, self.fp, x) - self.beta * g
            if self.kind == S.Kind.PRODUCT:
                return S.base_eval(self.fc, self.fp, x) * g
            if self.kind == S.Kind.CIRCLE:
                y = S.base_eval(self.fc, self.fp, x) - self.beta * g
                y = y - np.floor(y)
                return np.where(y >= 1.0, 0.0, y)
            return np.arctan(1.0 / (np.tan(-np.asarray(x)) - self.fp[0] + self.beta * g))

    def dfibre(self, t, x):
        if self.kind in (S.Kind.ADDITIVE, S.Kind.CIRCLE):
            return S.base_deriv(self.fc, self.fp, x) * np.ones(np.shape(t))
        if self.kind == S.Kind.PRODUCT:
            return S.base_deriv(self.fc, self.fp, x) * S.forcing_eval(self.gc, self.gp, t)
        x = np.asarray(x, dtype=float)
        y = np.tan(-x) - self.fp[0] + self.beta * S.forcing_eval(self.gc, self.gp, t)
        return (1.0 + np.tan(x) ** 2) / (1.0 + y * y)

    def inverse(self, t, y):
        g = S.forcing_eval(self.gc, self.gp, t)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == S.Kind.ADDITIVE:
                return S.base_inverse(self.fc, self.fp, np.asarray(y) + self.beta * g)
            if self.kind == S.Kind.PRODUCT:
                return S.base_inverse(self.fc, self.fp, np.asarray(y) / g)
            return -np.arctan(1.0 / np.tan(y) + self.fp[0] - self.beta * g)


# -- generic loops over any object exposing fibre/dfibre/inverse


def orbit_final_generic(sys, theta0, m0, x0, n, hi, lo, escape_at=-np.inf, stop_any=False):
    theta0 = np.asarray(theta0, dtype=float)
    m0 = np.asarray(m0, dtype=np.int64)
    x = np.array(x0, dtype=float)
    esc = np.where(x <= escape_at, 0, -1).astype(np.int64)
    if stop_any and (esc >= 0).any():
        return x, esc
    live = esc < 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for i in range(n):
            if not live.any():
                break
            idx = np.flatnonzero(live)
            xi = sys.fibre(angles(theta0[idx], m0[idx] + i, hi, lo), x[idx])
            x[idx] = xi
            hit = xi <= escape_at
            if hit.any():
                esc[idx[hit]] = i + 1
                live[idx[hit]] = False
                if stop_any:
                    break
    return x, esc


def orbit_logsum_generic(sys, theta0, m0, x0, n, hi, lo):
    theta0 = np.asarray(theta0, dtype=float)
    m0 = np.asarray(m0, dtype=np.int64)
    x = np.array(x0, dtype=float)
    s = np.zeros_like(x)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for i in range(n):
            t = angles(theta0, m0 + i, hi, lo)
            s += np.log(sys.dfibre(t, x))
            x = sys.fibre(t, x)
    return x, s


def trajectory_generic(sys, theta0, m0, x0, n, hi, lo):
    t = angles(theta0, np.arange(m0, m0 + n), hi, lo)
    xs = np.empty(n + 1)
    xs[0] = x = float(x0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for i in range(n):
            x = float(sys.fibre(t[i], x))
            xs[i + 1] = x
    return xs


def backward_trajectory_generic(sys, theta0, m0, x0, n, hi, lo):
    t = angles(theta0, m0 - np.arange(1, n + 1), hi, lo)
    ys = np.empty(n + 1)
    ys[0] = y = float(x0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for k in range(n):
            y = float(np.asarray(sys.inverse(t[k], y)).reshape(-1)[0])
            ys[k + 1] = y
    return ys


# -- code-based API, signature-compatible with the compiled core


def orbit_final(kind, fc, gc, fp, gp, beta, theta0, m0, x0, n, hi, lo, escape_at=-np.inf, stop_any=False):
    return orbit_final_generic(CodedSystem(kind, fc, gc, fp, gp, beta), theta0, m0, x0, n, hi, lo,
                               escape_at, stop_any)


def orbit_logsum(kind, fc, gc, fp, gp, beta, theta0, m0, x0, n, hi, lo):
    return orbit_logsum_generic(CodedSystem(kind, fc, gc, fp, gp, beta), theta0, m0, x0, n, hi, lo)


def trajectory(kind, fc, gc, fp, gp, beta, theta0, m0, x0, n, hi, lo):
    return trajectory_generic(CodedSystem(kind, fc, gc, fp, gp, beta), theta0, m0, x0, n, hi, lo)


def backward_trajectory(kind, fc, gc, fp, gp, beta, theta0, m0, x0, n, hi, lo):
    return backward_trajectory_generic(CodedSystem(kind, fc, gc, fp, gp, beta), theta0, m0, x0, n, hi, lo)


def cocycle_lognorm(gc, gp, E, lam, theta0, n, hi, lo, matrix_norm=False, renorm=32):
    theta0 = np.asarray(theta0, dtype=float)
    gp = np.asarray(gp, dtype=float)
    starts = [(1.0, 0.0), (0.0, 1.0)] if matrix_norm else [(1.0, 0.0)]
    best = np.full(theta0.shape, -np.inf)
    for b1, b2 in starts:
        v1 = np.full(theta0.shape, b1)
        v2 = np.full(theta0.shape, b2)
        acc = np.zeros(theta0.shape)
        for i in range(n):
            a = E - lam * S.forcing_eval(gc, gp, angles(theta0, i, hi, lo))
            v1, v2 = a * v1 - v2, v1
            if (i + 1) % renorm == 0:
                nrm = np.sqrt(v1 * v1 + v2 * v2)
                acc += np.log(nrm)
                v1, v2 = v1 / nrm, v2 / nrm
        acc += 0.5 * np.log(v1 * v1 + v2 * v2)
        best = np.maximum(best, acc)
    return best
