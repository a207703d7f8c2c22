"""Compare the compiled kernels with the pure-Python fallback.

Run with ``python3 benchmarks/bench_core.py``.  Each kernel is timed on the
same inputs under both backends and the results are checked for agreement.
"""
import argparse
import time

import numpy as np

from qpflab import kernels
from qpflab.circle import RotationSpec
from qpflab.systems import cos_2pi, make_arctan_family, make_harper


def _time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def cases(G, n):
    sys = make_arctan_family(10.0, 0.9)
    har = make_harper(4.4, 4.0)
    t0 = np.arange(G) / G
    m0 = np.full(G, -n)
    top = np.full(G, 3.0)
    return {
        "orbit_final arctan": lambda: kernels.orbit_final(sys, t0, m0, top, n)[0],
        "orbit_final harper": lambda: kernels.orbit_final(har, t0, m0, np.zeros(G), n)[0],
        "orbit_logsum arctan": lambda: kernels.orbit_logsum(sys, t0, m0, top, n)[1],
        "orbit_final G=8": lambda: kernels.orbit_final(sys, t0[:8], np.full(8, -50 * n), top[:8], 50 * n)[0],
        "trajectory": lambda: kernels.trajectory(sys, 0.0, 0, 3.0, 50 * n),
        "backward_trajectory": lambda: kernels.backward_trajectory(sys, 0.25, 0, 0.0, 50 * n),
        "cocycle_lognorm": lambda: kernels.cocycle_lognorm(cos_2pi(), 4.4, 4.0, RotationSpec.golden(),
                                                           t0[:64], 10 * n, True),
    }


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--grid", type=int, default=2048)
    ap.add_argument("--iterates", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not kernels.compiled_available():
        print("compiled extension not built; only the fallback can be timed")
    print(f"{'kernel':<22} {'compiled [s]':>13} {'python [s]':>11} {'speedup':>8} {'max diff':>10}")
    prev = kernels.backend()
    try:
        for name, fn in cases(args.grid, args.iterates).items():
            res = {}
            for b in ("compiled", "python"):
                if b == "compiled" and not kernels.compiled_available():
                    res[b] = (np.nan, None)
                    continue
                kernels.set_backend(b)
                res[b] = _time(fn, args.repeat)
            (tc, oc), (tp, op) = res["compiled"], res["python"]
            diff = float(np.max(np.abs(oc - op))) if oc is not None else np.nan
            print(f"{name:<22} {tc:>13.4f} {tp:>11.4f} {tp / tc:>8.1f} {diff:>10.2e}")
    finally:
        kernels.set_backend(prev)


if __name__ == "__main__":
    main()
