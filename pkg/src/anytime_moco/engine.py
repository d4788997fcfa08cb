"""Anytime box-decomposition searches that enumerate a Pareto front.

Two searches share one outer loop:

* :class:`TPASearch` keeps one priority queue of boxes per direction, visits
  the queues in turn, splits boxes with :func:`~anytime_moco.geometry.p_partition`
  and merges redundant boxes of a queue into join boxes.
* :class:`FullSplitSearch` keeps a single pool of upper bounds sharing the
  ideal point as lower bound, always explores the largest one, splits with
  :func:`~anytime_moco.geometry.full_p_split` and drops every bound that is
  componentwise below another one.

Both stop when no box is left (the archive is then the complete front) or
when the budget runs out.
"""

from __future__ import annotations

import enum
import heapq
import itertools
import time
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from .geometry import (
    Box,
    Point,
    ScalingBounds,
    dominates,
    full_p_split,
    join,
    p_partition,
    reduced_scaled,
    scaled,
    strictly_less,
    weakly_dominates,
)
from .ilp import SolverError
from .problems import ProblemInstance, scaling_bounds
from .scalarizer import FoundInBox, ScalarizerConfig, solve_box


class EventKind(str, enum.Enum):
    POINT_FOUND = "PointFound"
    BOX_DISCARDED = "BoxDiscarded"
    FINISHED = "Finished"
    BUDGET_EXHAUSTED = "BudgetExhausted"
    SOLVER_FAILED = "SolverFailed"


@dataclass(frozen=True)
class TraceEvent:
    elapsed_ms: float
    kind: EventKind
    payload: Optional[Point]
    solver_calls: int
    open_boxes: int


@dataclass(frozen=True)
class Budget:
    """Stopping rule checked once per outer iteration.

    ``time_ms`` bounds elapsed time, ``iterations`` the number of solver
    calls and ``points`` the number of points found. ``None`` means no limit.
    """

    time_ms: Optional[float] = None
    iterations: Optional[int] = None
    points: Optional[int] = None


@dataclass(frozen=True)
class ArchiveEntry:
    x: tuple[int, ...]
    z: Point
    found_at_ms: float
    solver_calls: int


class ParetoArchive:
    """Points found so far, in discovery order. Rejects repeats and dominated points."""

    def __init__(self):
        self.entries: list[ArchiveEntry] = []
        self._seen: set[Point] = set()

    def add(self, x, z, found_at_ms: float, solver_calls: int) -> ArchiveEntry:
        z = tuple(int(v) for v in z)
        if z in self._seen:
            raise AssertionError(f"point {z} found twice")
        for e in self.entries:
            if dominates(e.z, z) or dominates(z, e.z):
                raise AssertionError(f"archive points {e.z} and {z} are comparable")
        entry = ArchiveEntry(tuple(int(v) for v in x), z, found_at_ms, solver_calls)
        self.entries.append(entry)
        self._seen.add(z)
        return entry

    @property
    def points(self) -> list[Point]:
        return [e.z for e in self.entries]

    def __len__(self):
        return len(self.entries)

    def __iter__(self) -> Iterator[ArchiveEntry]:
        return iter(self.entries)


@dataclass
class RunResult:
    algorithm: str
    instance: str
    archive: ParetoArchive
    trace: list[TraceEvent]
    sb: ScalingBounds
    finished: bool = False
    failed: bool = False
    solver_calls: int = 0
    error: Optional[str] = None

    def __iter__(self):
        # allows ``archive, trace = run_tpa(...)``
        return iter((self.archive, self.trace))


# --------------------------------------------------------------------------
# queues


class QueueSet:
    """One max-priority queue of boxes per direction plus the cursor ``k``.

    Ties on priority go to the lexicographically smallest upper bound, then
    to the earliest insertion.
    """

    def __init__(self, p: int):
        self.p = p
        self.k = 0
        self._boxes: list[dict[int, Box]] = [dict() for _ in range(p)]
        self._heaps: list[list] = [[] for _ in range(p)]
        self._ids = itertools.count()

    def insert(self, box: Box) -> int:
        key = next(self._ids)
        q = box.direction - 1
        self._boxes[q][key] = box
        heapq.heappush(self._heaps[q], (-box.priority, box.u, key))
        return key

    def remove(self, direction: int, key: int) -> Box:
        return self._boxes[direction - 1].pop(key)

    def queue(self, direction: int) -> dict[int, Box]:
        return self._boxes[direction - 1]

    def top(self, direction: int) -> tuple[int, Box]:
        q = direction - 1
        heap, live = self._heaps[q], self._boxes[q]
        while heap and heap[0][2] not in live:
            heapq.heappop(heap)
        if not heap:
            raise IndexError(f"queue {direction} is empty")
        key = heap[0][2]
        return key, live[key]

    def items(self) -> Iterator[tuple[int, Box]]:
        for q in self._boxes:
            yield from list(q.items())

    def boxes(self) -> list[Box]:
        return [b for _, b in self.items()]

    def sizes(self) -> list[int]:
        return [len(q) for q in self._boxes]

    def __len__(self):
        return sum(len(q) for q in self._boxes)

    def select_next_box(self) -> tuple[int, Box, int]:
        """Advance the cursor to the next non-empty queue and return its top box.

        The box stays in its queue.
        """
        if not len(self):
            raise IndexError("all queues are empty")
        k = self.k % self.p + 1
        while not self._boxes[k - 1]:
            k = k % self.p + 1
        self.k = k
        key, box = self.top(k)
        return key, box, k

    def is_fixpoint(self) -> bool:
        """No two boxes of the same queue have comparable upper bounds."""
        for q in self._boxes:
            us = [b.u for b in q.values()]
            for a, b in itertools.combinations(us, 2):
                if weakly_dominates(a, b) or weakly_dominates(b, a):
                    return False
        return True


def update(queues: QueueSet, z: Sequence[int], sb: ScalingBounds) -> None:
    """Partition every box whose upper bound exceeds ``z``, then merge redundant boxes.

    Children of a partitioned box ``B`` get priority ``reduced_scaled(B, i, z)``;
    a join box gets its own scaled volume.
    """
    z = tuple(z)
    dirty: list[list[int]] = [[] for _ in range(queues.p)]
    hit = [(key, box) for key, box in queues.items() if strictly_less(z, box.u)]
    for key, box in hit:
        queues.remove(box.direction, key)
        for i, child in p_partition(box, z):
            child = replace(child, priority=reduced_scaled(box, i, z, sb))
            dirty[i - 1].append(queues.insert(child))
    for i in range(1, queues.p + 1):
        if dirty[i - 1]:
            _merge_queue(queues, i, deque(dirty[i - 1]), sb)


def _merge_queue(queues: QueueSet, direction: int, work: deque, sb: ScalingBounds) -> None:
    # Boxes outside `work` are pairwise incomparable already, so every pair
    # left to join involves a box from the worklist.
    live = queues.queue(direction)
    while work:
        key = work.popleft()
        if key not in live:
            continue
        d = live[key]
        for other_key, other in list(live.items()):
            if other_key == key:
                continue
            if weakly_dominates(d.u, other.u):
                merged = join(d, other)
            elif weakly_dominates(other.u, d.u):
                merged = join(other, d)
            else:
                continue
            queues.remove(direction, key)
            queues.remove(direction, other_key)
            merged = replace(merged, priority=scaled(merged, sb))
            work.append(queues.insert(merged))
            break


# --------------------------------------------------------------------------
# searches


class _Search:
    algorithm = "base"

    def __init__(
        self,
        inst: ProblemInstance,
        sb: Optional[ScalingBounds] = None,
        solver=None,
        clock: str = "wall",
    ):
        if clock not in ("wall", "logical"):
            raise ValueError("clock must be 'wall' or 'logical'")
        self.inst = inst
        self.sb = sb if sb is not None else scaling_bounds(inst)
        self.cfg = ScalarizerConfig.for_bounds(self.sb)
        self.solver = solver
        self.clock = clock
        self.archive = ParetoArchive()
        self.trace: list[TraceEvent] = []
        self.solver_calls = 0
        self._t0 = time.perf_counter()

    # subclasses provide these
    def open_boxes(self) -> int:
        raise NotImplementedError

    def _select(self) -> tuple[object, Point]:
        raise NotImplementedError

    def _on_found(self, handle, z: Point) -> None:
        raise NotImplementedError

    def _on_empty(self, handle) -> None:
        raise NotImplementedError

    def elapsed_ms(self) -> float:
        if self.clock == "logical":
            return float(self.solver_calls)
        return (time.perf_counter() - self._t0) * 1000.0

    def _emit(self, kind: EventKind, payload=None) -> TraceEvent:
        ev = TraceEvent(self.elapsed_ms(), kind, payload, self.solver_calls, self.open_boxes())
        self.trace.append(ev)
        return ev

    def _in_time(self, budget: Budget) -> bool:
        if budget.time_ms is not None and self.elapsed_ms() >= budget.time_ms:
            return False
        if budget.iterations is not None and self.solver_calls >= budget.iterations:
            return False
        if budget.points is not None and len(self.archive) >= budget.points:
            return False
        return True

    def step(self) -> TraceEvent:
        """Explore one box: solve its scalarized program and update the boxes."""
        handle, u = self._select()
        res, verdict = solve_box(self.inst, u, self.cfg, self.solver)
        self.solver_calls += 1
        if isinstance(verdict, FoundInBox):
            self.archive.add(verdict.x, verdict.z, self.elapsed_ms(), self.solver_calls)
            self._on_found(handle, verdict.z)
            return self._emit(EventKind.POINT_FOUND, verdict.z)
        self._on_empty(handle)
        return self._emit(EventKind.BOX_DISCARDED, tuple(u))

    def run(self, budget: Optional[Budget] = None) -> RunResult:
        budget = budget or Budget()
        self._t0 = time.perf_counter()
        result = RunResult(self.algorithm, self.inst.name, self.archive, self.trace, self.sb)
        while self.open_boxes():
            if not self._in_time(budget):
                self._emit(EventKind.BUDGET_EXHAUSTED)
                break
            try:
                self.step()
            except SolverError as exc:
                self._emit(EventKind.SOLVER_FAILED)
                result.failed = True
                result.error = str(exc)
                break
        else:
            self._emit(EventKind.FINISHED)
            result.finished = True
        result.solver_calls = self.solver_calls
        return result


class TPASearch(_Search):
    algorithm = "tpa"

    def __init__(self, inst, sb=None, solver=None, clock="wall"):
        super().__init__(inst, sb, solver, clock)
        self.queues = QueueSet(self.sb.p)
        self.queues.insert(self.sb.full_box())
        self.last_direction: Optional[int] = None

    def open_boxes(self) -> int:
        return len(self.queues)

    def _select(self):
        key, box, k = self.queues.select_next_box()
        self.last_direction = k
        return (k, key), box.u

    def _on_found(self, handle, z):
        # the selected box has z < u and is partitioned away with the rest
        update(self.queues, z, self.sb)

    def _on_empty(self, handle):
        k, key = handle
        self.queues.remove(k, key)


class FullSplitSearch(_Search):
    algorithm = "fullsplit"

    def __init__(self, inst, sb=None, solver=None, clock="wall"):
        super().__init__(inst, sb, solver, clock)
        self._pool: dict[int, Point] = {}
        self._heap: list = []
        self._ids = itertools.count()
        self._insert(self.sb.initial_upper)

    def _insert(self, u: Point) -> int:
        key = next(self._ids)
        self._pool[key] = u
        prio = scaled((self.sb.zI, u), self.sb)
        heapq.heappush(self._heap, (-prio, u, key))
        return key

    def upper_bounds(self) -> list[Point]:
        return list(self._pool.values())

    def open_boxes(self) -> int:
        return len(self._pool)

    def _select(self):
        while self._heap[0][2] not in self._pool:
            heapq.heappop(self._heap)
        key = self._heap[0][2]
        return key, self._pool[key]

    def _on_empty(self, key):
        del self._pool[key]

    def _on_found(self, key, z):
        zI = self.sb.zI
        keys = list(self._pool)
        hit = [k for k in keys if strictly_less(z, self._pool[k])]
        new: list[Point] = []
        for k in hit:
            u = self._pool.pop(k)
            for i, ui in enumerate(full_p_split(u, z)):
                if ui[i] > zI[i]:
                    new.append(ui)
        survivors = list(self._pool.items())
        arr = np.array([u for _, u in survivors], dtype=np.int64).reshape(len(survivors), len(z))
        alive = np.ones(len(survivors), dtype=bool)
        accepted: list[Point] = []
        for u in new:
            ua = np.array(u, dtype=np.int64)
            if len(arr) and np.any(alive & np.all(ua <= arr, axis=1)):
                continue
            if any(weakly_dominates(u, v) for v in accepted):
                continue
            if len(arr):
                alive &= ~np.all(arr <= ua, axis=1)
            accepted = [v for v in accepted if not weakly_dominates(v, u)]
            accepted.append(u)
        for (k, _), ok in zip(survivors, alive):
            if not ok:
                del self._pool[k]
        for u in accepted:
            self._insert(u)


def run_tpa(inst: ProblemInstance, budget: Optional[Budget] = None, **kwargs) -> RunResult:
    return TPASearch(inst, **kwargs).run(budget)


def run_fullsplit(inst: ProblemInstance, budget: Optional[Budget] = None, **kwargs) -> RunResult:
    return FullSplitSearch(inst, **kwargs).run(budget)


ALGORITHMS: dict[str, type[_Search]] = {"tpa": TPASearch, "fullsplit": FullSplitSearch}


def run(algorithm: str, inst: ProblemInstance, budget: Optional[Budget] = None, **kwargs) -> RunResult:
    try:
        cls = ALGORITHMS[algorithm]
    except KeyError:
        raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {sorted(ALGORITHMS)}") from None
    return cls(inst, **kwargs).run(budget)


# --------------------------------------------------------------------------
# trace files


def trace_header(p: int) -> list[str]:
    return ["elapsed_ms", "event"] + [f"z_{i}" for i in range(1, p + 1)] + ["solver_calls", "open_boxes"]


def _fmt_ms(ms: float) -> str:
    return str(int(ms)) if float(ms).is_integer() else f"{ms:.3f}"


def write_trace_csv(trace: Sequence[TraceEvent], path, p: int) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trace_header(p))
        for ev in trace:
            zs = list(ev.payload) if ev.kind is EventKind.POINT_FOUND else [""] * p
            w.writerow([_fmt_ms(ev.elapsed_ms), ev.kind.value, *zs, ev.solver_calls, ev.open_boxes])


def read_trace_csv(path) -> tuple[int, list[TraceEvent]]:
    """Parse a trace file; returns ``(p, events)``."""
    import csv

    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty trace file")
    head = rows[0]
    p = len(head) - 4
    if p < 2 or head != trace_header(p):
        raise ValueError(f"{path}: unexpected trace header {head}")
    events = []
    last = -1.0
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(head):
            raise ValueError(f"{path}:{lineno}: expected {len(head)} columns")
        try:
            kind = EventKind(row[1])
            elapsed = float(row[0])
            payload = tuple(int(v) for v in row[2 : 2 + p]) if kind is EventKind.POINT_FOUND else None
            ev = TraceEvent(elapsed, kind, payload, int(row[-2]), int(row[-1]))
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
        if elapsed < last:
            raise ValueError(f"{path}:{lineno}: elapsed time decreases")
        last = elapsed
        events.append(ev)
    return p, events
