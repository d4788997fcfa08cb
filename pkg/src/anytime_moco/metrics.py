"""Quality indicators for (partial) Pareto fronts and anytime traces.

All indicators treat objectives as minimized. ONVGR and HVR are better when
larger, the general spread and the additive epsilon indicator when smaller.
Hypervolume is computed exactly on integer points by slicing along the last
objective, so it returns a Python ``int`` for integer input.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy.stats import rankdata

from .geometry import Point, strictly_less

log = logging.getLogger(__name__)

METRICS = ("onvgr", "hvr", "spread", "eps_add")
HIGHER_IS_BETTER = {"onvgr": True, "hvr": True, "spread": False, "eps_add": False}
MAX_EXTREME_DIM = 6


class UndefinedMetric(ValueError):
    pass


def _points(N: Iterable[Sequence[int]]) -> list[Point]:
    return [tuple(z) for z in N]


def onvgr(N, PF) -> float:
    N, PF = set(_points(N)), set(_points(PF))
    if not PF:
        raise ValueError("reference front is empty")
    extra = N - PF
    if extra:
        raise ValueError(f"{len(extra)} reported points are not in the reference front (algorithm bug)")
    return len(N) / len(PF)


def _hv2(pts: list[Point], r: Sequence[int]):
    area = 0
    ceiling = r[1]
    for z0, z1 in sorted(pts):
        if z1 < ceiling:
            area += (r[0] - z0) * (ceiling - z1)
            ceiling = z1
    return area


def _hv(pts: list[Point], r: Sequence[int]):
    if not pts:
        return 0
    p = len(r)
    if p == 1:
        return r[0] - min(z[0] for z in pts)
    if p == 2:
        return _hv2(pts, r)
    pts = sorted(pts, key=lambda z: z[-1])
    levels = sorted({z[-1] for z in pts}) + [r[-1]]
    total = 0
    active: list[Point] = []
    k = 0
    for lo, hi in zip(levels, levels[1:]):
        while k < len(pts) and pts[k][-1] <= lo:
            active.append(pts[k][:-1])
            k += 1
        total += _hv(active, r[:-1]) * (hi - lo)
    return total


def hypervolume(N, r: Sequence[int]):
    """Measure of the union of boxes ``[z, r)`` over ``z`` in ``N``.

    Points not strictly below ``r`` contribute nothing and are dropped with a
    warning.
    """
    r = tuple(r)
    pts = _points(N)
    kept = [z for z in pts if strictly_less(z, r)]
    if len(kept) < len(pts):
        log.warning("hypervolume: %d points not below the reference point were ignored", len(pts) - len(kept))
    return _hv(sorted(set(kept)), r)


def hvr(N, PF, r: Sequence[int]) -> float:
    total = hypervolume(PF, r)
    if total <= 0:
        raise ValueError("reference front has zero hypervolume")
    return hypervolume(N, r) / total


def ranges_of(N) -> tuple[int, ...]:
    """Per-objective range of ``N``, clamped below at 1."""
    arr = np.asarray(_points(N), dtype=np.int64)
    return tuple(int(max(1, v)) for v in arr.max(axis=0) - arr.min(axis=0))


def additive_epsilon(N, PF, ranges: Optional[Sequence[float]] = None) -> float:
    """Smallest range-scaled shift making ``N`` weakly dominate ``PF``; ``inf`` for empty ``N``."""
    N, PF = _points(N), _points(PF)
    if not N:
        return math.inf
    r = np.asarray(ranges if ranges is not None else ranges_of(N), dtype=float)
    a = np.asarray(N, dtype=float)
    b = np.asarray(PF, dtype=float)
    gap = ((a[None, :, :] - b[:, None, :]) / r).max(axis=2)
    return float(gap.min(axis=1).max())


def lexicographic_extremes(PF) -> list[Point]:
    """Lexicographic minima of ``PF`` over every objective ordering, deduplicated."""
    PF = _points(PF)
    if not PF:
        return []
    p = len(PF[0])
    if p > MAX_EXTREME_DIM:
        raise ValueError(f"lexicographic extremes need p <= {MAX_EXTREME_DIM}, got {p}")
    out: list[Point] = []
    for perm in itertools.permutations(range(p)):
        e = min(PF, key=lambda z: tuple(z[i] for i in perm))
        if e not in out:
            out.append(e)
    return out


@dataclass(frozen=True)
class SpreadTerms:
    nearest: tuple[float, ...]
    mean: float
    extreme: tuple[float, ...]


def spread_terms(N, extremes) -> SpreadTerms:
    pts = np.asarray(sorted(set(_points(N))), dtype=float)
    if len(pts) < 2:
        raise UndefinedMetric("general spread needs at least two points")
    dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    np.fill_diagonal(dist, np.inf)
    nearest = dist.min(axis=1)
    ext = []
    for e in extremes:
        ext.append(float(np.sqrt(((pts - np.asarray(e, dtype=float)) ** 2).sum(axis=1)).min()))
    return SpreadTerms(tuple(nearest.tolist()), float(nearest.mean()), tuple(ext))


def general_spread(N, extremes) -> float:
    """Nearest-neighbour spread of ``N``, penalized by distance to the extreme points.

    An extreme point contained in ``N`` contributes zero.
    """
    t = spread_terms(N, extremes)
    de = sum(t.extreme)
    num = de + sum(abs(d - t.mean) for d in t.nearest)
    den = de + len(t.nearest) * t.mean
    return num / den


@dataclass
class MetricContext:
    PF: list[Point]
    reference: Point
    extremes: list[Point]
    fallback_reference: bool = False

    @classmethod
    def from_front(cls, PF) -> "MetricContext":
        PF = sorted(set(_points(PF)))
        if not PF:
            raise ValueError("reference front is empty")
        nadir = tuple(int(v) for v in np.asarray(PF).max(axis=0))
        return cls(PF, tuple(v + 1 for v in nadir), lexicographic_extremes(PF))

    @classmethod
    def without_front(cls, N) -> "MetricContext":
        """Reference point ``max_j z^j`` taken from ``N`` itself, for use without a complete front."""
        N = sorted(set(_points(N)))
        ref = tuple(int(v) for v in np.asarray(N).max(axis=0))
        return cls(N, ref, lexicographic_extremes(N), fallback_reference=True)

    def evaluate(self, N) -> dict[str, Optional[float]]:
        N = _points(N)
        try:
            spread = general_spread(N, self.extremes)
        except UndefinedMetric:
            spread = None
        return {
            "onvgr": onvgr(N, self.PF),
            "hvr": hvr(N, self.PF, self.reference),
            "spread": spread,
            "eps_add": additive_epsilon(N, self.PF),
        }


# --------------------------------------------------------------------------
# anytime evaluation


@dataclass
class CutMetrics:
    cut_ms: float
    n_points: int
    finished: bool
    onvgr: float
    hvr: float
    spread: Optional[float]
    eps_add: float

    def value(self, metric: str):
        return getattr(self, metric)


def points_at(trace, cut_ms: float) -> list[Point]:
    return [ev.payload for ev in trace if ev.kind == "PointFound" and ev.elapsed_ms <= cut_ms]


def finished_by(trace, cut_ms: float) -> bool:
    return any(ev.kind == "Finished" and ev.elapsed_ms <= cut_ms for ev in trace)


def evaluate_trace(trace, ctx: MetricContext, cut_points: Sequence[float]) -> list[CutMetrics]:
    """Indicator values of the points found by each cut point (in ms)."""
    rows = []
    for cut in cut_points:
        N = points_at(trace, cut)
        vals = ctx.evaluate(N)
        rows.append(CutMetrics(float(cut), len(N), finished_by(trace, cut), **vals))
    return rows


def average_ranks(values: Mapping[str, Optional[float]], higher_is_better: bool) -> dict[str, float]:
    """Rank 1 is best; ties share the average rank. Undefined values rank last."""
    names = list(values)
    worst = -math.inf if higher_is_better else math.inf
    arr = np.array([worst if values[k] is None or math.isnan(values[k]) else values[k] for k in names], dtype=float)
    ranks = rankdata(-arr if higher_is_better else arr, method="average")
    return {k: float(r) for k, r in zip(names, ranks)}


def rank_at_cut(
    values: Mapping[str, Optional[float]],
    finished: Mapping[str, bool],
    higher_is_better: bool,
) -> Optional[dict[str, float]]:
    """Per-instance ranks at one cut point.

    Algorithms that already finished share the top ranks and the rest are
    ranked after them. Returns ``None`` when every algorithm has finished,
    since the instance then carries no information at this cut.
    """
    done = [k for k in values if finished.get(k)]
    running = [k for k in values if not finished.get(k)]
    if not running:
        return None
    out = {k: (1 + len(done)) / 2 for k in done}
    sub = average_ranks({k: values[k] for k in running}, higher_is_better)
    out.update({k: r + len(done) for k, r in sub.items()})
    return out
