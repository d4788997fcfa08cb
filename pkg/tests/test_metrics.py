import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anytime_moco.engine import run_tpa
from anytime_moco.geometry import nondominated
from anytime_moco.metrics import (
    MetricContext,
    UndefinedMetric,
    additive_epsilon,
    average_ranks,
    evaluate_trace,
    general_spread,
    hvr,
    hypervolume,
    lexicographic_extremes,
    onvgr,
    rank_at_cut,
    spread_terms,
)
from anytime_moco.problems import brute_force_front, generate

PF3 = [(0, 4), (2, 2), (4, 0)]


def grid_count(N, r):
    """Number of unit cells [c, c+1) dominated by some point of N."""
    if not N:
        return 0
    lo = np.min(np.asarray(N), axis=0)
    cells = itertools.product(*(range(a, b) for a, b in zip(lo, r)))
    return sum(any(all(z_i <= c_i for z_i, c_i in zip(z, c)) for z in N) for c in cells)


@st.composite
def lattice_front(draw, max_p=4):
    p = draw(st.integers(2, max_p))
    side = {2: 30, 3: 12, 4: 7}[p]
    pts = draw(st.lists(st.tuples(*[st.integers(0, side - 1)] * p), min_size=0, max_size=50))
    return p, pts, (side,) * p


class TestOnvgr:
    def test_examples(self):
        PF = [(i, 10 - i) for i in range(10)]
        assert onvgr(PF[:5], PF) == 0.5 and onvgr(PF, PF) == 1 and onvgr([], PF) == 0

    def test_not_subset(self):
        with pytest.raises(ValueError, match="bug"):
            onvgr([(9, 9)], PF3)


class TestHypervolume:
    def test_worked_example(self):
        assert hypervolume([(1, 3), (2, 2), (3, 1)], (4, 4)) == 6

    def test_single_and_empty(self):
        for p in (2, 3, 4):
            assert hypervolume([(1,) * p], (3,) * p) == 2**p
        assert hypervolume([], (4, 4)) == 0

    def test_points_outside_reference(self, caplog):
        assert hypervolume([(1, 1), (4, 0)], (4, 4)) == 9
        assert "ignored" in caplog.text

    @settings(max_examples=200)
    @given(lattice_front())
    def test_grid_count(self, case):
        p, pts, r = case
        assert hypervolume(pts, r) == grid_count(pts, r)

    @given(lattice_front(max_p=3), st.randoms())
    def test_order_and_duplicates(self, case, rnd):
        _, pts, r = case
        shuffled = pts + pts[: len(pts) // 2]
        rnd.shuffle(shuffled)
        assert hypervolume(shuffled, r) == hypervolume(pts, r)

    def test_hvr(self):
        assert hvr([(1, 3)], [(1, 3), (2, 2), (3, 1)], (4, 4)) == 0.5
        assert hvr(PF3, PF3, (5, 5)) == 1 and hvr([], PF3, (5, 5)) == 0


class TestEpsilon:
    def test_examples(self):
        assert additive_epsilon(PF3, PF3) == 0
        assert additive_epsilon([(0, 4), (4, 0)], PF3) == 0.5
        assert additive_epsilon([(0, 0)], [(0, 0), (3, -1)]) == 1

    def test_empty(self):
        assert additive_epsilon([], PF3) == math.inf


class TestSpread:
    def test_complete_front(self):
        PF = [(0, 2), (1, 1), (2, 0)]
        assert general_spread(PF, [(0, 2), (2, 0)]) == pytest.approx(0)

    def test_missing_extreme(self):
        assert general_spread([(0, 4), (2, 2)], lexicographic_extremes(PF3)) > 0

    def test_two_extremes(self):
        assert general_spread([(0, 4), (4, 0)], [(0, 4), (4, 0)]) == 0

    def test_terms(self):
        t = spread_terms([(0, 4), (2, 2)], [(0, 4), (4, 0)])
        assert t.extreme == (0.0, pytest.approx(math.sqrt(8)))
        assert len(t.nearest) == 2 and t.mean == pytest.approx(math.sqrt(8))

    def test_undefined(self):
        with pytest.raises(UndefinedMetric):
            general_spread([(0, 4)], [(0, 4)])


class TestExtremes:
    def test_examples(self):
        assert sorted(lexicographic_extremes(PF3)) == [(0, 4), (4, 0)]
        assert lexicographic_extremes([(3, 3)]) == [(3, 3)]
        assert lexicographic_extremes([(0, 0, 0)]) == [(0, 0, 0)]

    def test_three_objectives(self):
        PF = [(0, 5, 5), (0, 4, 6), (5, 0, 5), (5, 5, 0), (1, 1, 1)]
        assert sorted(lexicographic_extremes(PF)) == [(0, 4, 6), (0, 5, 5), (5, 0, 5), (5, 5, 0)]

    def test_dimension_cap(self):
        with pytest.raises(ValueError):
            lexicographic_extremes([(0,) * 7])


@settings(max_examples=100)
@given(lattice_front(max_p=3), st.data())
def test_pareto_compliance(case, data):
    _, pts, _ = case
    PF = nondominated(pts)
    if not PF:
        return
    ctx = MetricContext.from_front(PF)
    order = data.draw(st.permutations(PF))
    prev = ctx.evaluate([])
    for k in range(1, len(order) + 1):
        cur = ctx.evaluate(order[:k])
        assert cur["onvgr"] >= prev["onvgr"]
        assert cur["hvr"] >= prev["hvr"]
        assert cur["eps_add"] <= prev["eps_add"] + 1e-12
        prev = cur
    assert prev["onvgr"] == 1 and prev["hvr"] == 1 and prev["eps_add"] == 0


def test_context():
    ctx = MetricContext.from_front([(4, 0), (0, 4), (2, 2)])
    assert ctx.reference == (5, 5) and not ctx.fallback_reference
    assert all(all(a < b for a, b in zip(z, ctx.reference)) for z in ctx.PF)
    assert set(ctx.extremes) <= set(ctx.PF)
    fb = MetricContext.without_front([(0, 4), (4, 0)])
    assert fb.reference == (4, 4) and fb.fallback_reference


@pytest.fixture(scope="module")
def run():
    inst = generate("KP", 2, 10, seed=3)
    front = brute_force_front(inst).points
    return run_tpa(inst, clock="logical"), MetricContext.from_front(front)


class TestTraceEvaluation:

    def test_cut_zero(self, run):
        res, ctx = run
        (row,) = evaluate_trace(res.trace, ctx, [0])
        assert (row.n_points, row.onvgr, row.hvr, row.spread) == (0, 0, 0, None)
        assert row.eps_add == math.inf and not row.finished

    def test_after_finish(self, run):
        res, ctx = run
        end = res.trace[-1].elapsed_ms
        (row,) = evaluate_trace(res.trace, ctx, [end + 100])
        assert row.finished and (row.onvgr, row.hvr, row.eps_add) == (1, 1, 0)
        assert row.spread == pytest.approx(general_spread(ctx.PF, ctx.extremes))

    def test_monotone_along_trace(self, run):
        res, ctx = run
        cuts = [ev.elapsed_ms for ev in res.trace if ev.kind == "PointFound"]
        rows = evaluate_trace(res.trace, ctx, cuts)
        for a, b in zip(rows, rows[1:]):
            assert b.onvgr >= a.onvgr and b.hvr >= a.hvr and b.eps_add <= a.eps_add


class TestRanks:
    def test_single(self):
        assert rank_at_cut({"tpa": 0.3}, {"tpa": False}, True) == {"tpa": 1.0}

    def test_strictly_better(self):
        assert rank_at_cut({"tpa": 0.9, "fs": 0.4}, {}, True) == {"tpa": 1.0, "fs": 2.0}
        assert rank_at_cut({"tpa": 0.9, "fs": 0.4}, {}, False) == {"tpa": 2.0, "fs": 1.0}

    def test_tie(self):
        assert average_ranks({"a": 0.5, "b": 0.5}, True) == {"a": 1.5, "b": 1.5}

    def test_finished_first(self):
        got = rank_at_cut({"tpa": 0.2, "fs": 1.0}, {"tpa": True, "fs": False}, False)
        assert got == {"tpa": 1.0, "fs": 2.0}
        assert rank_at_cut({"a": 1, "b": 1}, {"a": True, "b": True}, True) is None

    def test_undefined_ranks_last(self):
        assert average_ranks({"a": None, "b": 3.0}, False) == {"a": 2.0, "b": 1.0}
        assert average_ranks({"a": math.inf, "b": 3.0}, False) == {"a": 2.0, "b": 1.0}
