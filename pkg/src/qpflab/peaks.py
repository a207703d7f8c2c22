"""Peak detection and tracking in sampled graphs.

A peak is a downward spike of a graph, detected as a local minimum whose
topographic prominence (drop below the lower of the two enclosing saddles)
exceeds a threshold.  The graph is circular; it is rotated to start at its
global maximum so that no peak straddles the seam.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import find_peaks

from .circle import circle_dist
from .errors import ChainTooShort
from .graphs import GraphSample


@dataclass(frozen=True)
class Peak:
    location: float
    depth: float
    slope_left: float
    slope_right: float
    width: float
    index: int
    generation: int | None = None

    @property
    def steepness(self) -> float:
        return max(abs(self.slope_left), abs(self.slope_right))


def noise_level(graph: GraphSample) -> float:
    """Median absolute second difference, a rough value-noise scale."""
    v = graph.values
    if v.size < 3:
        return 0.0
    d2 = np.abs(np.roll(v, -1) - 2 * v + np.roll(v, 1))
    return float(np.median(d2))


def detect_peaks(graph: GraphSample, min_depth: float | None = None) -> list[Peak]:
    """Local minima of ``graph`` with prominence at least ``min_depth``.

    ``min_depth`` defaults to ten times :func:`noise_level`.  Slopes are
    one-sided differences at the minimum; ``width`` is the width at half
    prominence in angle units.
    """
    v, th = graph.values, graph.grid
    G = v.size
    if G < 3 or np.ptp(v) == 0:
        return []
    if min_depth is None:
        min_depth = max(10.0 * noise_level(graph), np.finfo(float).eps)
    shift = int(np.argmax(v))
    w = np.roll(v, -shift)
    idx, props = find_peaks(-w, prominence=min_depth, width=0.0)
    spacing = 1.0 / G
    out = []
    for i, prom, wd in zip(idx, props["prominences"], props["widths"]):
        k = (i + shift) % G
        kl, kr = (k - 1) % G, (k + 1) % G
        dl = (th[k] - th[kl]) % 1.0
        dr = (th[kr] - th[k]) % 1.0
        out.append(Peak(float(th[k]), float(prom), float((v[k] - v[kl]) / dl), float((v[kr] - v[k]) / dr),
                        float(max(wd, 1e-12) * spacing), int(k)))
    out.sort(key=lambda p: p.location)
    return out


def track_peaks(peaks: list[Peak], spec, tol: float) -> list[list[Peak]]:
    """Chain peaks whose locations differ by ``omega`` (within ``tol``).

    A chain starts at a peak with no predecessor at ``location - omega``.
    Peaks in a chain get generations ``1, 2, ...``.  Chains are returned
    longest first; ties keep the order of their first location.
    """
    if not peaks:
        return []
    omega = spec.omega
    loc = np.array([p.location for p in peaks])

    def partner(x):
        d = circle_dist(loc, x % 1.0)
        k = int(np.argmin(d))
        return k if d[k] <= tol else None

    succ = [partner(x + omega) for x in loc]
    has_pred = np.zeros(len(peaks), dtype=bool)
    for s in succ:
        if s is not None:
            has_pred[s] = True
    chains, used = [], np.zeros(len(peaks), dtype=bool)
    for start in [i for i in range(len(peaks)) if not has_pred[i]] + list(range(len(peaks))):
        if used[start]:
            continue
        chain, k = [], start
        while k is not None and not used[k]:
            used[k] = True
            chain.append(replace(peaks[k], generation=len(chain) + 1))
            k = succ[k]
        chains.append(chain)
    chains.sort(key=lambda c: (-len(c), c[0].location))
    return chains


def sharpening_rate(chain: list[Peak]) -> float:
    """Geometric mean of successive steepness ratios along a chain."""
    if len(chain) < 2:
        raise ChainTooShort("need at least two peaks")
    s = np.array([p.steepness for p in chain])
    if np.any(s <= 0):
        raise ChainTooShort("flat peak in chain")
    return float(math.exp(np.mean(np.diff(np.log(s)))))


def write_peaks_csv(chains: list[list[Peak]], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["chain", "generation", "theta", "depth", "slope_left", "slope_right", "width"])
        for c, chain in enumerate(chains):
            for p in chain:
                w.writerow([c, p.generation, repr(p.location), repr(p.depth), repr(p.slope_left),
                            repr(p.slope_right), repr(p.width)])
