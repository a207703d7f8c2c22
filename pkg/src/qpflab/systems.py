"""Quasiperiodically forced fibre-map families.

Every built-in family is described by a triple of integer codes (composition
kind, fibre base, forcing) plus two short parameter vectors.  The same codes
drive the compiled kernels in ``qpflab._core``; the NumPy formulas below are
the reference implementation and the fallback.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import Callable, NamedTuple

import numpy as np
from scipy.optimize import brentq

from .circle import RotationSpec, circle_dist
from .errors import DomainExit, EBelowThreshold

TWO_PI = 2.0 * math.pi


class Kind(IntEnum):
    ADDITIVE = 0  # F(x) - beta g(theta)
    PRODUCT = 1  # F(x) * g(theta)
    CIRCLE = 2  # additive, values taken mod 1
    PROJECTIVE = 3  # arctan(1/(tan(-x) - E + beta V(theta)))


class FCode(IntEnum):
    ATAN_NORM = 0  # atan(a x)/atan(a)
    ATAN_SCALED = 1  # c atan(k x)
    TANH = 2  # tanh(a x)
    MOBIUS = 3  # -1/x + E
    MOBIUS_INTERVAL = 4  # -s/(x/s + x1) + s(E - x1)
    ARNOLD = 5  # x + tau + a/(2 pi) sin(2 pi x)
    IDENTITY = 6
    CUSTOM = -1


class GCode(IntEnum):
    ONE_MINUS_SINPI = 0  # 1 - sin(pi t)
    SINPI = 1  # sin(pi t)
    SIN2PI = 2  # amp sin(2 pi t)
    COS2PI = 3  # cos(2 pi t)
    TENT = 4  # 1 - c d(t, 0)
    PEAK = 5  # max(0, 1 - c d(t, center))
    ZERO = 6
    CUSTOM = -1


def _pad(p) -> np.ndarray:
    out = np.zeros(4)
    out[: len(p)] = p
    return out


# ---------------------------------------------------------------- formulas


def base_eval(code: int, p, x):
    x = np.asarray(x, dtype=float)
    if code == FCode.ATAN_NORM:
        return np.arctan(p[0] * x) / math.atan(p[0])
    if code == FCode.ATAN_SCALED:
        return p[0] * np.arctan(p[1] * x)
    if code == FCode.TANH:
        return np.tanh(p[0] * x)
    if code == FCode.MOBIUS:
        with np.errstate(divide="ignore"):
            return -1.0 / x + p[0]
    if code == FCode.MOBIUS_INTERVAL:
        s, x1, e = p[0], p[1], p[2]
        return -s / (x / s + x1) + s * (e - x1)
    if code == FCode.ARNOLD:
        return x + p[0] + p[1] / TWO_PI * np.sin(TWO_PI * x)
    if code == FCode.IDENTITY:
        return x.copy()
    raise ValueError(f"unknown base code {code}")


def base_deriv(code: int, p, x):
    x = np.asarray(x, dtype=float)
    if code == FCode.ATAN_NORM:
        return p[0] / math.atan(p[0]) / (1.0 + (p[0] * x) ** 2)
    if code == FCode.ATAN_SCALED:
        return p[0] * p[1] / (1.0 + (p[1] * x) ** 2)
    if code == FCode.TANH:
        return p[0] / np.cosh(p[0] * x) ** 2
    if code == FCode.MOBIUS:
        with np.errstate(divide="ignore"):
            return 1.0 / (x * x)
    if code == FCode.MOBIUS_INTERVAL:
        return 1.0 / (x / p[0] + p[1]) ** 2
    if code == FCode.ARNOLD:
        return 1.0 + p[1] * np.cos(TWO_PI * x)
    if code == FCode.IDENTITY:
        return np.ones_like(x)
    raise ValueError(f"unknown base code {code}")


def base_inverse(code: int, p, y):
    """Analytic inverse where one exists; values outside the range map to +-inf."""
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if code == FCode.ATAN_NORM:
            z = y * math.atan(p[0])
            out = np.tan(z) / p[0]
            return np.where(np.abs(z) < math.pi / 2, out, np.copysign(np.inf, y))
        if code == FCode.ATAN_SCALED:
            z = y / p[0]
            out = np.tan(z) / p[1]
            return np.where(np.abs(z) < math.pi / 2, out, np.copysign(np.inf, y))
        if code == FCode.TANH:
            out = np.arctanh(np.clip(y, -1.0, 1.0)) / p[0]
            return np.where(np.abs(y) < 1.0, out, np.copysign(np.inf, y))
        if code == FCode.MOBIUS:
            return 1.0 / (p[0] - y)
        if code == FCode.MOBIUS_INTERVAL:
            s, x1, e = p[0], p[1], p[2]
            return s * (-s / (y - s * (e - x1)) - x1)
        if code == FCode.IDENTITY:
            return y.copy()
    raise NotImplementedError(f"no closed-form inverse for base code {code}")


def forcing_eval(code: int, p, theta):
    """Forcing value at ``theta + p[0]`` (the shift slot is shared by all codes)."""
    t = np.asarray(theta, dtype=float)
    if p[0] != 0.0:
        t = np.mod(t + p[0], 1.0)
    if code == GCode.ONE_MINUS_SINPI:
        return 1.0 - np.sin(math.pi * t)
    if code == GCode.SINPI:
        return np.sin(math.pi * t)
    if code == GCode.SIN2PI:
        return p[1] * np.sin(TWO_PI * t)
    if code == GCode.COS2PI:
        return np.cos(TWO_PI * t)
    if code == GCode.TENT:
        return 1.0 - p[1] * circle_dist(t, 0.0)
    if code == GCode.PEAK:
        return np.maximum(0.0, 1.0 - p[1] * circle_dist(t, p[2]))
    if code == GCode.ZERO:
        return np.zeros_like(t)
    raise ValueError(f"unknown forcing code {code}")


def base_eval_mp(code: int, p, x):
    """mpmath version of :func:`base_eval` for the monotone interval families."""
    import mpmath as mp

    if code == FCode.ATAN_NORM:
        a = mp.mpf(p[0])
        return mp.atan(a * x) / mp.atan(a)
    if code == FCode.ATAN_SCALED:
        return mp.mpf(p[0]) * mp.atan(mp.mpf(p[1]) * x)
    if code == FCode.TANH:
        return mp.tanh(mp.mpf(p[0]) * x)
    if code == FCode.MOBIUS_INTERVAL:
        s, x1, e = (mp.mpf(v) for v in p[:3])
        return -s / (x / s + x1) + s * (e - x1)
    raise NotImplementedError(f"no extended-precision form for base code {code}")


def forcing_eval_mp(code: int, p, theta):
    import mpmath as mp

    t = theta + mp.mpf(p[0])
    t = t - mp.floor(t)
    dist = lambda a, c: min(abs(a - c), 1 - abs(a - c))  # noqa: E731
    if code == GCode.ONE_MINUS_SINPI:
        return 1 - mp.sin(mp.pi * t)
    if code == GCode.SINPI:
        return mp.sin(mp.pi * t)
    if code == GCode.SIN2PI:
        return mp.mpf(p[1]) * mp.sin(2 * mp.pi * t)
    if code == GCode.COS2PI:
        return mp.cos(2 * mp.pi * t)
    if code == GCode.TENT:
        return 1 - mp.mpf(p[1]) * dist(t, 0)
    if code == GCode.PEAK:
        return max(mp.mpf(0), 1 - mp.mpf(p[1]) * dist(t, mp.mpf(p[2])))
    if code == GCode.ZERO:
        return mp.mpf(0)
    raise NotImplementedError(f"no extended-precision form for forcing code {code}")


# ---------------------------------------------------------------- types


@dataclass(frozen=True)
class ForcingFunction:
    """Forcing term g (or potential V) on the circle."""

    code: int
    params: tuple = (0.0,)
    lipschitz_L1: float = float("nan")
    peak_L2: float = float("nan")
    peak_location: tuple = (0.0,)
    range: tuple = (0.0, 1.0)
    func: Callable | None = field(default=None, compare=False)
    func_mp: Callable | None = field(default=None, compare=False)

    def __call__(self, theta):
        if self.code == GCode.CUSTOM:
            return np.asarray(self.func(np.asarray(theta, dtype=float)), dtype=float)
        return forcing_eval(self.code, _pad(self.params), theta)

    def mp(self, theta):
        if self.code == GCode.CUSTOM:
            if self.func_mp is None:
                raise NotImplementedError("custom forcing without an mpmath evaluator")
            return self.func_mp(theta)
        return forcing_eval_mp(self.code, _pad(self.params), theta)

    def shifted(self, s: float) -> "ForcingFunction":
        """``theta -> g(theta + s)``."""
        if self.code == GCode.CUSTOM:
            f = self.func
            return replace(self, func=lambda t: f(np.mod(t + s, 1.0)), func_mp=None,
                           peak_location=tuple((c - s) % 1.0 for c in self.peak_location))
        p = list(_pad(self.params))
        p[0] = (p[0] + s) % 1.0
        return replace(self, params=tuple(p),
                       peak_location=tuple((c - s) % 1.0 for c in self.peak_location))


def one_minus_sin() -> ForcingFunction:
    return ForcingFunction(GCode.ONE_MINUS_SINPI, (0.0,), math.pi, 2.0, (0.0,), (0.0, 1.0))


def sin_pi() -> ForcingFunction:
    return ForcingFunction(GCode.SINPI, (0.0,), math.pi, float("nan"), (0.5,), (0.0, 1.0))


def sin_2pi(amp: float = 1.0) -> ForcingFunction:
    loc = 0.25 if amp >= 0 else 0.75
    return ForcingFunction(GCode.SIN2PI, (0.0, amp), TWO_PI * abs(amp), float("nan"), (loc,),
                           (-abs(amp), abs(amp)))


def cos_2pi() -> ForcingFunction:
    return ForcingFunction(GCode.COS2PI, (0.0,), TWO_PI, float("nan"), (0.0,), (-1.0, 1.0))


def tent(c: float = 4.0) -> ForcingFunction:
    """``1 - c d(theta, 0)``; with ``c = 4`` odd under the half-shift."""
    return ForcingFunction(GCode.TENT, (0.0, c), c, c, (0.0,), (1.0 - c / 2, 1.0))


def peak(sigma: float = 2.0, center: float = 0.0) -> ForcingFunction:
    """Lipschitz peak ``max(0, 1 - sigma d(theta, center))``."""
    return ForcingFunction(GCode.PEAK, (0.0, sigma, center), sigma, sigma, (center,), (0.0, 1.0))


@dataclass(frozen=True)
class FibreBase:
    """Unforced fibre map F with derivative and optional inverse."""

    code: int
    params: tuple = ()
    fixed_points: tuple = ()
    domain: tuple = (-3.0, 3.0)
    codomain: tuple = (-1.5, 1.5)
    negative_schwarzian: bool = False
    func: Callable | None = field(default=None, compare=False)
    deriv_func: Callable | None = field(default=None, compare=False)
    inv_func: Callable | None = field(default=None, compare=False)
    func_mp: Callable | None = field(default=None, compare=False)

    def __call__(self, x):
        if self.code == FCode.CUSTOM:
            return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)
        return base_eval(self.code, _pad(self.params), x)

    def deriv(self, x):
        if self.code == FCode.CUSTOM:
            return np.asarray(self.deriv_func(np.asarray(x, dtype=float)), dtype=float)
        return base_deriv(self.code, _pad(self.params), x)

    def inverse(self, y):
        if self.code == FCode.CUSTOM:
            if self.inv_func is not None:
                return np.asarray(self.inv_func(np.asarray(y, dtype=float)), dtype=float)
            return _bracket_inverse(self, y)
        try:
            return base_inverse(self.code, _pad(self.params), y)
        except NotImplementedError:
            return _bracket_inverse(self, y)

    def mp(self, x):
        if self.code == FCode.CUSTOM:
            if self.func_mp is None:
                raise NotImplementedError("custom base without an mpmath evaluator")
            return self.func_mp(x)
        return base_eval_mp(self.code, _pad(self.params), x)


def _bracket_inverse(base: FibreBase, y):
    """Monotone inversion by bracketed root finding on the domain."""
    lo, hi = base.domain
    y = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.empty_like(y)
    flo, fhi = float(base(lo)), float(base(hi))
    for i, v in enumerate(y):
        if v <= flo:
            out[i] = -np.inf if v < flo else lo
        elif v >= fhi:
            out[i] = np.inf if v > fhi else hi
        else:
            out[i] = brentq(lambda s: float(base(s)) - v, lo, hi, xtol=1e-15, rtol=1e-15)
    return out


@dataclass(frozen=True)
class QpfSystem:
    """Skew product ``(theta, x) -> (theta + omega, T_theta(x))``.

    ``top`` and ``bottom`` are the boundary values used for bounding-graph
    iteration; ``wraps`` marks circle fibres (no domain exits).
    """

    kind: int
    base: FibreBase
    forcing: ForcingFunction
    beta: float
    spec: RotationSpec
    name: str = "custom"
    alpha: float | None = None
    gamma: float | None = None
    top: float = 3.0
    bottom: float = -3.0
    one_sided: bool = False
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def wraps(self) -> bool:
        return self.kind in (Kind.CIRCLE, Kind.PROJECTIVE)

    def with_beta(self, beta: float) -> "QpfSystem":
        return replace(self, beta=float(beta))

    def kernel_spec(self):
        """Integer codes and parameter vectors for the compiled kernels, or None."""
        if self.base.code == FCode.CUSTOM or self.forcing.code == GCode.CUSTOM:
            return None
        return (int(self.kind), int(self.base.code), int(self.forcing.code),
                _pad(self.base.params), _pad(self.forcing.params), float(self.beta))

    # -- fibre maps (vectorised)
    def fibre(self, theta, x):
        g = self.forcing(theta)
        if self.kind == Kind.ADDITIVE:
            return self.base(x) - self.beta * g
        if self.kind == Kind.PRODUCT:
            return self.base(x) * g
        if self.kind == Kind.CIRCLE:
            return np.mod(self.base(x) - self.beta * g, 1.0)
        if self.kind == Kind.PROJECTIVE:
            e = self.base.params[0]
            x = np.asarray(x, dtype=float)
            with np.errstate(divide="ignore"):
                return np.arctan(1.0 / (np.tan(-x) - e + self.beta * g))
        raise ValueError(self.kind)

    def dfibre(self, theta, x):
        if self.kind in (Kind.ADDITIVE, Kind.CIRCLE):
            return self.base.deriv(x) * np.ones(np.shape(theta))
        if self.kind == Kind.PRODUCT:
            return self.base.deriv(x) * self.forcing(theta)
        if self.kind == Kind.PROJECTIVE:
            e = self.base.params[0]
            x = np.asarray(x, dtype=float)
            t = np.tan(-x) - e + self.beta * self.forcing(theta)
            return (1.0 + np.tan(x) ** 2) / (1.0 + t * t)
        raise ValueError(self.kind)

    def inverse(self, theta, y):
        """Preimage of ``y`` under the fibre map on fibre ``theta``."""
        g = self.forcing(theta)
        if self.kind == Kind.ADDITIVE:
            return self.base.inverse(np.asarray(y) + self.beta * g)
        if self.kind == Kind.PRODUCT:
            with np.errstate(divide="ignore", invalid="ignore"):
                return self.base.inverse(np.asarray(y) / g)
        if self.kind == Kind.PROJECTIVE:
            e = self.base.params[0]
            y = np.asarray(y, dtype=float)
            with np.errstate(divide="ignore"):
                return -np.arctan(1.0 / np.tan(y) + e - self.beta * g)
        raise NotImplementedError("inverse not available for circle fibres")

    def fibre_mp(self, g_value, x):
        """Extended-precision additive step given a precomputed forcing value."""
        return self.base.mp(x) - self.beta * g_value


# ---------------------------------------------------------------- operations


def fibre_apply(sys: QpfSystem, theta, x):
    """Apply the fibre map; raise :class:`DomainExit` when leaving the domain."""
    y = sys.fibre(theta, x)
    if not sys.wraps and sys.base.domain is not None:
        lo, hi = sys.base.domain
        if np.any((y < lo) | (y > hi)):
            raise DomainExit(f"image leaves [{lo}, {hi}]")
    return y if np.ndim(y) else float(y)


def fibre_derivative(sys: QpfSystem, theta, x):
    d = sys.dfibre(theta, x)
    return d if np.ndim(d) else float(d)


def rescaled_constant(alpha: float) -> float:
    """``C(alpha)`` making ``1 + 2/sqrt(alpha)`` a fixed point of the rescaled map."""
    return (1.0 + 2.0 / math.sqrt(alpha)) / math.atan(alpha ** (4.0 / 3.0) + 2.0 * alpha ** (5.0 / 6.0))


def make_arctan_family(alpha: float, beta: float = 0.0, spec: RotationSpec | None = None) -> QpfSystem:
    base = FibreBase(FCode.ATAN_NORM, (alpha,), (-1.0, 0.0, 1.0), (-3.0, 3.0), (-1.5, 1.5), True)
    return QpfSystem(Kind.ADDITIVE, base, one_minus_sin(), float(beta), spec or RotationSpec.golden(),
                     name="arctan", alpha=alpha, one_sided=True)


def make_rescaled_arctan(alpha: float, spec: RotationSpec | None = None, beta: float = 0.0,
                         gamma: float | None = None) -> QpfSystem:
    if alpha < 1:
        raise ValueError("alpha must be at least 1")
    xa = 1.0 + 2.0 / math.sqrt(alpha)
    base = FibreBase(FCode.ATAN_SCALED, (rescaled_constant(alpha), alpha ** (4.0 / 3.0)),
                     (-xa, 0.0, xa), (-3.0, 3.0), (-1.5, 1.5), True)
    return QpfSystem(Kind.ADDITIVE, base, one_minus_sin(), float(beta), spec or RotationSpec.golden(),
                     name="rescaled_arctan", alpha=alpha, gamma=gamma, one_sided=True)


def make_symmetric(alpha: float, beta: float = 0.0, spec: RotationSpec | None = None) -> QpfSystem:
    c = math.pi / 2 + 2.0
    base = FibreBase(FCode.ATAN_SCALED, (1.0, alpha), (-math.atan(alpha), 0.0, math.atan(alpha)),
                     (-2 * c, 2 * c), (-c, c), True)
    # fixed points of atan(alpha x) are not closed-form; refine them numerically
    xp = brentq(lambda s: math.atan(alpha * s) - s, 0.5 / alpha + 1e-9, 2.0) if alpha > 1 else 0.0
    base = replace(base, fixed_points=(-xp, 0.0, xp))
    return QpfSystem(Kind.ADDITIVE, base, tent(4.0), float(beta), spec or RotationSpec.golden(),
                     name="symmetric", alpha=alpha)


def make_pinched(alpha: float, spec: RotationSpec | None = None) -> QpfSystem:
    base = FibreBase(FCode.TANH, (alpha,), (), (-1.0, 1.0), (-1.0, 1.0), True)
    return QpfSystem(Kind.PRODUCT, base, sin_pi(), 1.0, spec or RotationSpec.golden(), name="pinched",
                     alpha=alpha, top=1.0, bottom=-1.0)


def make_arnold(tau: float, alpha: float, beta: float, spec: RotationSpec | None = None,
                forcing: str = "sin", sigma: float = 10.0, center: float = 0.5) -> QpfSystem:
    """Forced Arnold circle map.

    ``forcing="sin"`` gives ``+beta sin(2 pi theta)``; ``"peak"`` gives
    ``-beta max{0, 1 - sigma d(theta, center)}``.
    """
    base = FibreBase(FCode.ARNOLD, (tau, alpha), (), (0.0, 1.0), (0.0, 1.0), False)
    if forcing == "sin":
        g = sin_2pi(-1.0)
    elif forcing == "peak":
        g = peak(sigma, center)
    else:
        raise ValueError("forcing must be 'sin' or 'peak'")
    return QpfSystem(Kind.CIRCLE, base, g, float(beta), spec or RotationSpec.golden(), name="arnold",
                     alpha=alpha, top=1.0, bottom=0.0, one_sided=(forcing == "peak"))


def make_tanh_sin(alpha: float = 5.0, amplitude: float = 1.2015, spec: RotationSpec | None = None) -> QpfSystem:
    """``tanh(alpha x) + amplitude sin(2 pi theta)``."""
    base = FibreBase(FCode.TANH, (alpha,), (), (-3.0, 3.0), (-1.0, 1.0), True)
    return QpfSystem(Kind.ADDITIVE, base, sin_2pi(-1.0), float(amplitude), spec or RotationSpec.golden(),
                     name="tanh_sin", alpha=alpha)


def make_harper(E: float, lam: float, V: ForcingFunction | None = None,
                spec: RotationSpec | None = None) -> QpfSystem:
    """Projective action ``x -> arctan(1/(tan(-x) - E + lam V(theta)))`` on (-pi/2, pi/2]."""
    V = V or cos_2pi()
    base = FibreBase(FCode.IDENTITY, (E,), (), (-math.pi / 2, math.pi / 2), (-math.pi / 2, math.pi / 2))
    return QpfSystem(Kind.PROJECTIVE, base, V, float(lam), spec or RotationSpec.golden(), name="harper",
                     top=math.pi / 2, bottom=-math.pi / 2, extra={"E": E})


def make_riccati(E: float, lam: float, V: ForcingFunction | None = None,
                 spec: RotationSpec | None = None) -> QpfSystem:
    """``x -> -1/x + E - lam V(theta + omega)`` on the extended line."""
    spec = spec or RotationSpec.golden()
    V = V or cos_2pi()
    base = FibreBase(FCode.MOBIUS, (E,), tuple(_riccati_fixed(E)), None, None)
    return QpfSystem(Kind.ADDITIVE, base, V.shifted(spec.omega), float(lam), spec, name="riccati",
                     top=np.inf, bottom=0.0, one_sided=V.range[0] >= 0, extra={"E": E})


def _riccati_fixed(E: float):
    if E <= 2:
        return ()
    r = math.sqrt(E * E - 4.0)
    return ((E - r) / 2.0, (E + r) / 2.0)


class HarperIntervalModel(NamedTuple):
    E: float
    alpha: float
    s: float
    x1: float
    x2: float
    base: FibreBase

    def h(self, x):
        return (np.asarray(x) - self.x1) * self.s

    def h_inv(self, y):
        return np.asarray(y) / self.s + self.x1

    def beta(self, lam: float) -> float:
        return self.s * lam

    def lam(self, beta: float) -> float:
        return beta / self.s


def harper_interval_model(E: float) -> HarperIntervalModel:
    """Affine rescaling of ``-1/x + E`` fixing ``0`` and ``1 + 2/sqrt(alpha)``, ``alpha = E^(3/2)``."""
    if E <= 2.0:
        raise EBelowThreshold(f"E={E} leaves no pair of positive fixed points")
    x1, x2 = _riccati_fixed(E)
    alpha = E ** 1.5
    s = (1.0 + 2.0 / math.sqrt(alpha)) / (x2 - x1)
    xa = 1.0 + 2.0 / math.sqrt(alpha)
    base = FibreBase(FCode.MOBIUS_INTERVAL, (s, x1, E), (0.0, xa), (-s * x1 * 0.999999, 3.0),
                     (-1.5, 1.5))
    return HarperIntervalModel(E, alpha, s, x1, x2, base)


def make_harper_interval(E: float, lam: float, V: ForcingFunction | None = None,
                         spec: RotationSpec | None = None) -> QpfSystem:
    spec = spec or RotationSpec.golden()
    V = V or peak(2.0)
    m = harper_interval_model(E)
    top = float(m.s * (E - m.x1))  # image of +infinity
    return QpfSystem(Kind.ADDITIVE, m.base, V.shifted(spec.omega), m.beta(lam), spec,
                     name="harper_interval", alpha=m.alpha, top=top, bottom=0.0,
                     one_sided=V.range[0] >= 0, extra={"E": E, "s": m.s, "x1": m.x1})


def make_custom(F: Callable, dF: Callable, g: Callable, beta: float, spec: RotationSpec | None = None,
                Finv: Callable | None = None, kind: int = Kind.ADDITIVE, domain=(-3.0, 3.0),
                top: float = 3.0, bottom: float = -3.0, name: str = "custom") -> QpfSystem:
    """Inject a family from evaluator/derivative pairs."""
    base = FibreBase(FCode.CUSTOM, (), (), domain, None, False, F, dF, Finv)
    forcing = ForcingFunction(GCode.CUSTOM, (), func=g)
    return QpfSystem(kind, base, forcing, float(beta), spec or RotationSpec.golden(), name=name,
                     top=top, bottom=bottom)


# ---------------------------------------------------------------- conjugacies


def sigma1(alpha):
    return alpha / math.atan(alpha)


def tau1(alpha):
    return math.atan(alpha)


def sigma2(alpha):
    return rescaled_constant(alpha) * alpha ** (4.0 / 3.0)


def tau2(alpha):
    return 1.0 / rescaled_constant(alpha)


def sigma2_inverse(y: float) -> float:
    """Solve ``sigma2(a) = y`` for ``a >= 1`` by monotone root finding."""
    lo, hi = 1.0, 2.0
    while sigma2(hi) < y:
        hi *= 2.0
    if sigma2(lo) > y:
        raise ValueError("value below the range of sigma2")
    return brentq(lambda a: sigma2(a) - y, lo, hi, xtol=1e-14, rtol=1e-15)


def conjugacy_maps_arctan(alpha: float) -> tuple[float, float]:
    """``(sigma(alpha), tau(alpha))`` relating the arctan family to the rescaled one.

    The arctan family at ``(alpha, beta)`` is smoothly conjugate to the
    rescaled family at ``(sigma, tau * beta)``.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    s = sigma2_inverse(sigma1(alpha))
    return s, tau1(alpha) / tau2(s)


# ---------------------------------------------------------------- hypotheses


class Check(NamedTuple):
    ok: bool
    witness: float | None = None
    detail: str = ""


def k_constant(L1: float, L2: float) -> float:
    return 3.0 * L1 / L2 + 2.0


def s_inf(a: float) -> float:
    return a / (a - 1.0)


@dataclass
class HypothesisReport:
    checks: dict

    @property
    def all_ok(self) -> bool:
        return all(c.ok for c in self.checks.values())

    def failing(self) -> list[str]:
        return [k for k, c in self.checks.items() if not c.ok]

    def as_dict(self) -> dict:
        return {k: {"ok": bool(c.ok), "witness": c.witness, "detail": c.detail}
                for k, c in self.checks.items()}


def check_hypotheses(sys: QpfSystem, alpha: float | None = None, gamma: float | None = None,
                     L1: float | None = None, L2: float | None = None, grid: int = 10**4,
                     seed: int = 0) -> HypothesisReport:
    """Evaluate the sufficiency conditions of the one-sided setting on grids.

    Each entry carries a witness (the first violating grid point) on failure.
    """
    alpha = alpha if alpha is not None else sys.alpha
    gamma = gamma if gamma is not None else sys.gamma
    L1 = L1 if L1 is not None else sys.forcing.lipschitz_L1
    L2 = L2 if L2 is not None else sys.forcing.peak_L2
    out: dict[str, Check] = {}
    F, dF = sys.base, sys.base.deriv

    def first(mask, pts):
        idx = np.flatnonzero(~mask)
        return (True, None) if idx.size == 0 else (False, float(pts[idx[0]]))

    th = np.arange(grid) / grid
    gv = sys.forcing(th)
    rng = np.random.default_rng(seed)
    a, b = rng.random(grid), rng.random(grid)
    dg = np.abs(sys.forcing(a) - sys.forcing(b))
    dd = circle_dist(a, b)
    ok, w = first(dg <= L1 * dd + 1e-12, a)
    out["g_lipschitz"] = Check(ok, w, f"L1={L1}")
    out["g1"] = Check(bool(gv.min() >= -1e-15 and gv.max() <= 1 + 1e-15 and abs(gv.max() - 1) < 1e-9),
                      None, "range [0,1] with maximum 1")
    if gamma is not None:
        ok, w = first(gv <= np.maximum(1 - 3 * gamma, 1 - L2 * circle_dist(th, 0.0)) + 1e-12, th)
        out["sharppeak"] = Check(ok, w, f"L2={L2}")
    if alpha is None:
        return HypothesisReport(out)
    K = k_constant(L1, L2)
    out["alpha1"] = Check(math.sqrt(alpha) >= 2 * K, None, f"needs alpha >= {(2 * K) ** 2:.1f}")
    out["alpha3"] = Check(0.5 * math.sqrt(alpha) >= 6 + K * s_inf(alpha ** 0.25), None, f"K={K:.4f}")
    if gamma is not None:
        out["gamma0"] = Check(gamma <= 1 / 16, None, "gamma <= 1/16")
        out["alphagamma0"] = Check(math.sqrt(alpha) > 4 / gamma, None, f"sqrt(alpha)={math.sqrt(alpha):.3f}, 4/gamma={4 / gamma:.3f}")
    xs = np.linspace(-3.0, 3.0, grid + 1)
    fx, dfx = F(xs), dF(xs)
    ok, w = first((fx >= -1.5) & (fx <= 1.5), xs)
    out["Finvariance"] = Check(ok, w, "F([-3,3]) in [-3/2,3/2]")
    xa = 1.0 + 2.0 / math.sqrt(alpha)
    out["Ffixedpoints"] = Check(bool(abs(float(F(0.0))) < 1e-12 and abs(float(F(xa)) - xa) < 1e-12
                                     and abs(float(F(-xa)) + xa) < 1e-12), None, f"x_alpha={xa}")
    ok, w = first((dfx >= 2 * alpha**-2) & (dfx <= alpha**2), xs)
    out["Funiformbounds"] = Check(ok, w)
    xe = np.linspace(-2 / alpha, 2 / alpha, grid + 1)
    ok, w = first(dF(xe) >= 2 * math.sqrt(alpha), xe)
    out["Fexpansion"] = Check(ok, w)
    if gamma is not None:
        xc = np.concatenate([np.linspace(gamma, 3.0, grid), np.linspace(-3.0, -gamma, grid)])
        ok, w = first(dF(xc) <= 0.5 / math.sqrt(alpha), xc)
        out["Fcontraction"] = Check(ok, w)
        f1, f2 = float(F(1 / alpha)), float(F(-1 / alpha))
        out["Fmapsover"] = Check(f1 >= 1 - gamma and f2 <= -(1 - gamma), f1, f"F(1/alpha)={f1:.6f}")
    return HypothesisReport(out)


FAMILIES = {
    "arctan": lambda alpha=10.0, beta=0.0, **kw: make_arctan_family(alpha, beta, kw.get("spec")),
    "rescaled_arctan": lambda alpha=100.0, beta=0.0, **kw: make_rescaled_arctan(alpha, kw.get("spec"), beta),
    "symmetric": lambda alpha=10.0, beta=0.0, **kw: make_symmetric(alpha, beta, kw.get("spec")),
    "pinched": lambda alpha=10.0, **kw: make_pinched(alpha, kw.get("spec")),
    "arnold": lambda tau=0.0, alpha=0.99, beta=0.0, forcing="sin", sigma=10.0, center=0.5, **kw:
        make_arnold(tau, alpha, beta, kw.get("spec"), forcing, sigma, center),
    "tanh_sin": lambda alpha=5.0, amplitude=1.2015, **kw: make_tanh_sin(alpha, amplitude, kw.get("spec")),
    "harper": lambda E=4.4, lam=4.0, **kw: make_harper(E, lam, None, kw.get("spec")),
    "riccati": lambda E=10.0, lam=1.0, **kw: make_riccati(E, lam, None, kw.get("spec")),
    "harper_interval": lambda E=10.0, lam=1.0, sigma=2.0, **kw: make_harper_interval(E, lam, peak(sigma), kw.get("spec")),
}


def make_family(name: str, **params) -> QpfSystem:
    """Construct a registered family from named parameters."""
    try:
        ctor = FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown family {name!r}; known: {sorted(FAMILIES)}") from None
    return ctor(**params)
