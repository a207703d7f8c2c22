"""Backend selection and system-level orbit kernels.

The compiled extension ``qpflab._core`` is used when it imports and the
system is expressible by integer codes; otherwise the NumPy loops in
``qpflab._pycore`` run.  Set ``QPFLAB_BACKEND=python`` to force the fallback.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _pycore
from .circle import RotationSpec
from .systems import ForcingFunction, GCode, QpfSystem, _pad

try:
    from . import _core as _compiled
except ImportError:  # extension not built
    _compiled = None

_state = {"backend": "compiled" if _compiled is not None else "python"}
if os.environ.get("QPFLAB_BACKEND", "").lower() == "python":
    _state["backend"] = "python"


def compiled_available() -> bool:
    return _compiled is not None


def backend() -> str:
    """Name of the active backend, ``"compiled"`` or ``"python"``."""
    return _state["backend"]


def set_backend(name: str) -> None:
    if name not in ("compiled", "python"):
        raise ValueError("backend must be 'compiled' or 'python'")
    if name == "compiled" and _compiled is None:
        raise RuntimeError("compiled core is not built")
    _state["backend"] = name


def _impl(sys: QpfSystem | None):
    if _state["backend"] == "compiled" and (sys is None or sys.kernel_spec() is not None):
        return _compiled
    return None


def _prep(theta0, m0, x0):
    theta0, m0, x0 = np.broadcast_arrays(np.asarray(theta0, dtype=float),
                                         np.asarray(m0, dtype=np.int64),
                                         np.asarray(x0, dtype=float))
    shape = theta0.shape
    return (np.ascontiguousarray(theta0.ravel()), np.ascontiguousarray(m0.ravel()),
            np.ascontiguousarray(x0.ravel(), dtype=float), shape)


def _chunked(fn, arrays, workers: int):
    """Run ``fn`` on contiguous chunks in a thread pool; results keep input order."""
    G = arrays[0].shape[0]
    if workers <= 1 or G < 2 * workers:
        return fn(*arrays)
    edges = np.linspace(0, G, workers + 1).astype(int)
    parts = [tuple(a[edges[i]:edges[i + 1]] for a in arrays) for i in range(workers)]
    with ThreadPoolExecutor(workers) as ex:
        outs = list(ex.map(lambda args: fn(*args), parts))
    return tuple(np.concatenate([o[k] for o in outs]) for k in range(len(outs[0])))


def orbit_final(sys: QpfSystem, theta0, m0, x0, n: int, escape_at: float = -np.inf,
                stop_any: bool = False, workers: int = 1):
    """Iterate ``n`` steps from ``x0`` on fibres ``theta0 + m0*omega``.

    Returns ``(x_n, esc)`` where ``esc`` is the first step with ``x <= escape_at``
    or ``-1``.  ``workers > 1`` splits the start points over threads (the
    compiled kernels release the GIL); output order does not depend on it.
    """
    t, m, x, shape = _prep(theta0, m0, x0)
    hi, lo = sys.spec.split
    core = _impl(sys)
    if core is not None:
        kind, fc, gc, fp, gp, beta = sys.kernel_spec()
        fn = lambda tt, mm, xx: core.orbit_final(kind, fc, gc, fp, gp, beta, tt, mm, xx, int(n), hi, lo,  # noqa: E731
                                                 float(escape_at), bool(stop_any))
        out, esc = _chunked(fn, (t, m, x), workers)
    else:
        out, esc = _pycore.orbit_final_generic(sys, t, m, x, int(n), hi, lo, escape_at, stop_any)
    return out.reshape(shape), esc.reshape(shape)


def orbit_logsum(sys: QpfSystem, theta0, m0, x0, n: int, workers: int = 1):
    """``(x_n, sum_{i<n} log DT(x_i))`` for every start point."""
    t, m, x, shape = _prep(theta0, m0, x0)
    hi, lo = sys.spec.split
    core = _impl(sys)
    if core is not None:
        kind, fc, gc, fp, gp, beta = sys.kernel_spec()
        fn = lambda tt, mm, xx: core.orbit_logsum(kind, fc, gc, fp, gp, beta, tt, mm, xx, int(n), hi, lo)  # noqa: E731
        out, s = _chunked(fn, (t, m, x), workers)
    else:
        out, s = _pycore.orbit_logsum_generic(sys, t, m, x, int(n), hi, lo)
    return out.reshape(shape), s.reshape(shape)


def trajectory(sys: QpfSystem, theta0: float, m0: int, x0: float, n: int) -> np.ndarray:
    """``x_0..x_n`` of the forward orbit; ``x_i`` lies on fibre ``theta0 + (m0+i) omega``."""
    hi, lo = sys.spec.split
    core = _impl(sys)
    if core is not None:
        kind, fc, gc, fp, gp, beta = sys.kernel_spec()
        return core.trajectory(kind, fc, gc, fp, gp, beta, float(theta0), int(m0), float(x0), int(n), hi, lo)
    return _pycore.trajectory_generic(sys, float(theta0), int(m0), float(x0), int(n), hi, lo)


def backward_trajectory(sys: QpfSystem, theta0: float, m0: int, x0: float, n: int) -> np.ndarray:
    """``y_0 = x0`` on fibre ``theta0 + m0 omega`` and ``y_k`` its k-th preimage."""
    hi, lo = sys.spec.split
    core = _impl(sys)
    if core is not None:
        kind, fc, gc, fp, gp, beta = sys.kernel_spec()
        return core.backward_trajectory(kind, fc, gc, fp, gp, beta, float(theta0), int(m0), float(x0),
                                        int(n), hi, lo)
    return _pycore.backward_trajectory_generic(sys, float(theta0), int(m0), float(x0), int(n), hi, lo)


def cocycle_lognorm(V: ForcingFunction, E: float, lam: float, spec: RotationSpec, theta0, n: int,
                    matrix_norm: bool = False) -> np.ndarray:
    """Renormalised ``log`` norm growth of ``n`` Schrodinger matrices per start angle."""
    if V.code == GCode.CUSTOM:
        raise NotImplementedError("cocycle kernels need a coded potential")
    theta0 = np.ascontiguousarray(np.atleast_1d(np.asarray(theta0, dtype=float)))
    hi, lo = spec.split
    gp = _pad(V.params)
    if _state["backend"] == "compiled":
        return _compiled.cocycle_lognorm(int(V.code), gp, float(E), float(lam), theta0, int(n), hi, lo,
                                         bool(matrix_norm))
    return _pycore.cocycle_lognorm(int(V.code), gp, E, lam, theta0, int(n), hi, lo, matrix_norm)
