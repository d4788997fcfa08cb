"""Objective-space geometry: points, half-open boxes, dominance and box splitting.

Points are tuples of Python ints. A box ``[l, u)`` contains ``x`` when
``l_i <= x_i < u_i`` for every coordinate. Directions are 1-based, so a box
created by fixing the upper bound of coordinate ``i`` has ``direction == i``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

Point = tuple[int, ...]


class GeometryError(ValueError):
    """Raised on malformed points or boxes."""


class Relation(enum.Enum):
    """How a point ``a`` relates to a point ``b`` under minimization."""

    EQUAL = "equal"
    STRICTLY_DOMINATES = "strictly_dominates"
    DOMINATES = "dominates"
    DOMINATED = "dominated"
    STRICTLY_DOMINATED = "strictly_dominated"
    INCOMPARABLE = "incomparable"


def _check_dims(a: Sequence, b: Sequence) -> None:
    if len(a) != len(b):
        raise GeometryError(f"dimension mismatch: {len(a)} != {len(b)}")


def dominance(a: Sequence[int], b: Sequence[int]) -> Relation:
    """Classify ``a`` against ``b``.

    ``DOMINATES`` means ``a <= b`` componentwise with at least one strict
    coordinate; ``STRICTLY_DOMINATES`` means strict in every coordinate. The
    two ``DOMINATED`` members are the mirror cases where ``b`` wins.
    """
    _check_dims(a, b)
    le = all(x <= y for x, y in zip(a, b))
    ge = all(x >= y for x, y in zip(a, b))
    if le and ge:
        return Relation.EQUAL
    if le:
        if all(x < y for x, y in zip(a, b)):
            return Relation.STRICTLY_DOMINATES
        return Relation.DOMINATES
    if ge:
        if all(x > y for x, y in zip(a, b)):
            return Relation.STRICTLY_DOMINATED
        return Relation.DOMINATED
    return Relation.INCOMPARABLE


def weakly_dominates(a: Sequence[int], b: Sequence[int]) -> bool:
    _check_dims(a, b)
    return all(x <= y for x, y in zip(a, b))


def dominates(a: Sequence[int], b: Sequence[int]) -> bool:
    return dominance(a, b) in (Relation.DOMINATES, Relation.STRICTLY_DOMINATES)


def strictly_less(a: Sequence[int], b: Sequence[int]) -> bool:
    """``a < b`` in every coordinate."""
    _check_dims(a, b)
    return all(x < y for x, y in zip(a, b))


@dataclass(frozen=True)
class Box:
    """Half-open box ``[l, u)`` with the direction and priority used by the search."""

    l: Point
    u: Point
    direction: int = 1
    priority: float = 0.0

    def __post_init__(self):
        _check_dims(self.l, self.u)
        if not strictly_less(self.l, self.u):
            raise GeometryError(f"empty box [{self.l}, {self.u})")
        if not 1 <= self.direction <= len(self.u):
            raise GeometryError(f"direction {self.direction} outside 1..{len(self.u)}")
        if self.priority < 0:
            raise GeometryError(f"negative priority {self.priority}")

    @property
    def p(self) -> int:
        return len(self.u)

    def contains(self, x: Sequence[int]) -> bool:
        _check_dims(self.l, x)
        return all(lo <= v < hi for lo, v, hi in zip(self.l, x, self.u))

    def lattice_size(self) -> int:
        size = 1
        for lo, hi in zip(self.l, self.u):
            size *= hi - lo
        return size


def box_is_empty(l: Sequence[int], u: Sequence[int]) -> bool:
    return not strictly_less(l, u)


@dataclass(frozen=True)
class ScalingBounds:
    """Ideal point, nadir upper bound and their largest coordinate gap."""

    zI: Point
    zNbar: Point

    def __post_init__(self):
        _check_dims(self.zI, self.zNbar)
        if len(self.zI) < 2:
            raise GeometryError("at least two objectives are required")
        flat = [i + 1 for i, (a, b) in enumerate(zip(self.zI, self.zNbar)) if a >= b]
        if flat:
            raise GeometryError(f"objectives {flat} have zero range (ideal == nadir bound)")

    @property
    def p(self) -> int:
        return len(self.zI)

    @property
    def r(self) -> int:
        return max(b - a for a, b in zip(self.zI, self.zNbar))

    @property
    def initial_upper(self) -> Point:
        """``zNbar + 1``: the half-open box must contain points attaining ``zNbar``."""
        return tuple(v + 1 for v in self.zNbar)

    def full_box(self) -> Box:
        u = self.initial_upper
        return Box(self.zI, u, 1, scaled((self.zI, u), self))


def p_partition(box: Box, z: Sequence[int]) -> list[tuple[int, Box]]:
    """Split ``box`` around ``z`` into its non-empty disjoint children.

    Child ``i`` holds the points ``x`` of the box with ``x_i < z_i`` and
    ``x_j >= z_j`` for every ``j > i``. The corner weakly dominated by ``z``
    is dropped. Children carry priority 0; callers assign priorities.
    """
    l, u = box.l, box.u
    p = len(u)
    _check_dims(u, z)
    if not strictly_less(z, u):
        raise AssertionError(f"p_partition requires z < u, got z={tuple(z)} u={u}")
    zh = tuple(max(zi, li) for zi, li in zip(z, l))
    children = []
    for i in range(p):
        # non-empty iff zh_i > l_i and zh_j < u_j for all j > i
        if zh[i] <= l[i] or any(zh[j] >= u[j] for j in range(i + 1, p)):
            continue
        lo = l[: i + 1] + zh[i + 1 :]
        hi = u[:i] + (zh[i],) + u[i + 1 :]
        children.append((i + 1, Box(lo, hi, i + 1)))
    return children


def dominated_corner_contains(box: Box, z: Sequence[int], x: Sequence[int]) -> bool:
    """Membership of ``x`` in the discarded part ``{x in B : x >= z}``."""
    return box.contains(x) and all(a >= b for a, b in zip(x, z))


def full_p_split(u: Sequence[int], z: Sequence[int]) -> list[Point]:
    """Upper bounds ``(u_1, .., z_i, .., u_p)`` for ``i = 1..p``."""
    _check_dims(u, z)
    if not strictly_less(z, u):
        raise AssertionError(f"full_p_split requires z < u, got z={tuple(z)} u={tuple(u)}")
    u = tuple(u)
    return [u[:i] + (int(z[i]),) + u[i + 1 :] for i in range(len(u))]


def join(a: Box, b: Box) -> Box:
    """Smallest box with ``b``'s upper bound covering both ``a`` and ``b``."""
    if not weakly_dominates(a.u, b.u):
        raise AssertionError(f"join requires a.u <= b.u, got {a.u} and {b.u}")
    if a.direction != b.direction:
        raise AssertionError("join requires boxes of the same direction")
    lo = tuple(min(x, y) for x, y in zip(a.l, b.l))
    return Box(lo, b.u, b.direction, b.priority)


def _volume(l: Sequence[int], u: Sequence[int]) -> int:
    vol = 1
    for lo, hi in zip(l, u):
        if hi <= lo:
            return 0
        vol *= hi - lo
    return vol


def scaled_exact(l: Sequence[int], u: Sequence[int], sb: ScalingBounds) -> Fraction:
    den = _volume(sb.zI, sb.zNbar)
    return Fraction(_volume(l, u), den)


def scaled(box: Box | tuple[Sequence[int], Sequence[int]], sb: ScalingBounds) -> float:
    """Box volume relative to the volume of ``[zI, zNbar)``; 0 for an empty box."""
    l, u = (box.l, box.u) if isinstance(box, Box) else box
    return float(scaled_exact(l, u, sb))


def reduced_scaled_exact(box: Box, i: int, z: Sequence[int], sb: ScalingBounds) -> Fraction:
    if not strictly_less(z, box.u):
        raise AssertionError(f"reduced_scaled requires z < u, got z={tuple(z)} u={box.u}")
    p = len(box.u)
    if not 1 <= i <= p:
        raise GeometryError(f"direction {i} outside 1..{p}")
    value = scaled_exact(box.l, box.u, sb)
    if i == p:
        value -= scaled_exact(box.l, z, sb)
    return value


def reduced_scaled(box: Box, i: int, z: Sequence[int], sb: ScalingBounds) -> float:
    """Priority for child ``i`` of ``box`` after partitioning around ``z``.

    Every child inherits the scaled volume of its parent, except the last
    direction, which loses the volume of ``[l, z)`` since that region holds
    only points dominating ``z``.
    """
    return float(reduced_scaled_exact(box, i, z, sb))


def nondominated_mask(points: np.ndarray, chunk: int = 512) -> np.ndarray:
    """Boolean mask of nondominated rows of an integer ``(k, p)`` array.

    Duplicated rows are kept only at their first occurrence.
    """
    pts = np.asarray(points)
    k = pts.shape[0]
    mask = np.zeros(k, dtype=bool)
    if k == 0:
        return mask
    _, first = np.unique(pts, axis=0, return_index=True)
    order = first[np.lexsort(pts[first].T[::-1])]
    # after a lexicographic sort only earlier rows can dominate later ones
    front = np.empty((0, pts.shape[1]), dtype=pts.dtype)
    keep = []
    for start in range(0, len(order), chunk):
        idx = order[start : start + chunk]
        cand = pts[idx]
        for fs in range(0, len(front), 64):
            f = front[fs : fs + 64]
            hit = np.all(f[None, :, :] <= cand[:, None, :], axis=2).any(axis=1)
            idx, cand = idx[~hit], cand[~hit]
            if not len(cand):
                break
        if len(cand) > 1:
            weak = np.all(cand[:, None, :] <= cand[None, :, :], axis=2)
            np.fill_diagonal(weak, False)
            dominated = weak.any(axis=0)
            idx, cand = idx[~dominated], cand[~dominated]
        if len(cand):
            front = np.vstack([front, cand])
            keep.append(idx)
    if keep:
        mask[np.concatenate(keep)] = True
    return mask


def nondominated(points: Iterable[Sequence[int]]) -> list[Point]:
    """Nondominated subset, lexicographically sorted, duplicates removed."""
    pts = [tuple(int(v) for v in z) for z in points]
    if not pts:
        return []
    arr = np.array(pts, dtype=np.int64)
    mask = nondominated_mask(arr)
    return sorted(tuple(int(v) for v in row) for row in arr[mask])
