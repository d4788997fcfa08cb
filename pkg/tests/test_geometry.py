import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anytime_moco.geometry import (
    Box,
    GeometryError,
    Relation,
    ScalingBounds,
    dominance,
    dominated_corner_contains,
    dominates,
    full_p_split,
    join,
    nondominated,
    p_partition,
    reduced_scaled,
    reduced_scaled_exact,
    scaled,
    scaled_exact,
    weakly_dominates,
)

FIG_B = Box((0, 0, 0), (20, 15, 10))
FIG_Z = (5, 5, 5)
FIG_SB = ScalingBounds((0, 0, 0), (20, 15, 10))


def lattice(box):
    return itertools.product(*(range(lo, hi) for lo, hi in zip(box.l, box.u)))


@st.composite
def box_and_point(draw, max_p=4, cells=10_000):
    p = draw(st.integers(2, max_p))
    side = max(2, int(cells ** (1 / p)))
    l = tuple(draw(st.integers(-5, 5)) for _ in range(p))
    u = tuple(li + draw(st.integers(1, side)) for li in l)
    # z below u, possibly below l in some coordinates
    z = tuple(draw(st.integers(li - 3, ui - 1)) for li, ui in zip(l, u))
    return Box(l, u), z


class TestDominance:
    def test_equal(self):
        assert dominance((1, 1), (1, 1)) is Relation.EQUAL

    def test_dominates_one_strict(self):
        assert dominance((1, 2, 3), (2, 2, 3)) is Relation.DOMINATES

    def test_incomparable(self):
        assert dominance((1, 5), (5, 1)) is Relation.INCOMPARABLE

    def test_strict_and_mirror(self):
        assert dominance((0, 0), (1, 1)) is Relation.STRICTLY_DOMINATES
        assert dominance((1, 1), (0, 0)) is Relation.STRICTLY_DOMINATED
        assert dominance((2, 2, 3), (1, 2, 3)) is Relation.DOMINATED

    def test_dimension_mismatch(self):
        with pytest.raises(GeometryError):
            dominance((1, 2), (1, 2, 3))

    @given(st.lists(st.integers(-3, 3), min_size=2, max_size=4).flatmap(
        lambda a: st.tuples(st.just(tuple(a)), st.tuples(*[st.integers(-3, 3)] * len(a)))))
    def test_consistent_with_weak_order(self, ab):
        a, b = ab
        rel = dominance(a, b)
        assert weakly_dominates(a, b) == (rel in (Relation.EQUAL, Relation.DOMINATES, Relation.STRICTLY_DOMINATES))
        assert not (dominates(a, b) and dominates(b, a))
        mirror = {
            Relation.DOMINATES: Relation.DOMINATED,
            Relation.STRICTLY_DOMINATES: Relation.STRICTLY_DOMINATED,
        }
        mirror.update({v: k for k, v in mirror.items()})
        assert dominance(b, a) is mirror.get(rel, rel)


class TestBox:
    def test_rejects_empty(self):
        with pytest.raises(GeometryError):
            Box((0, 3), (4, 3))

    def test_rejects_negative_priority_and_bad_direction(self):
        with pytest.raises(GeometryError):
            Box((0, 0), (1, 1), priority=-0.1)
        with pytest.raises(GeometryError):
            Box((0, 0), (1, 1), direction=3)

    def test_half_open(self):
        b = Box((0, 0), (2, 2))
        assert b.contains((0, 1)) and not b.contains((2, 0)) and not b.contains((0, -1))

    def test_zero_range_bounds_rejected(self):
        with pytest.raises(GeometryError):
            ScalingBounds((0, 3), (5, 3))


class TestPartition:
    def test_figure_one(self):
        got = p_partition(FIG_B, FIG_Z)
        assert [(i, b.l, b.u) for i, b in got] == [
            (1, (0, 5, 5), (5, 15, 10)),
            (2, (0, 0, 5), (20, 5, 10)),
            (3, (0, 0, 0), (20, 15, 5)),
        ]

    def test_z_at_lower_corner(self):
        assert p_partition(Box((0, 0), (4, 4)), (0, 0)) == []

    def test_z_below_lower_bound(self):
        got = p_partition(Box((0, 0), (4, 4)), (-1, 2))
        assert [(i, b.l, b.u) for i, b in got] == [(2, (0, 0), (4, 2))]

    def test_requires_z_below_u(self):
        with pytest.raises(AssertionError):
            p_partition(Box((0, 0), (4, 4)), (1, 4))

    @settings(max_examples=200)
    @given(box_and_point())
    def test_partition_property(self, bz):
        box, z = bz
        children = p_partition(box, z)
        for i, child in children:
            assert child.direction == i
        for x in lattice(box):
            hits = sum(child.contains(x) for _, child in children)
            corner = dominated_corner_contains(box, z, x)
            assert hits + corner == 1, x

    @settings(max_examples=200)
    @given(box_and_point())
    def test_upper_bounds_match_full_split(self, bz):
        box, z = bz
        split = full_p_split(box.u, z)
        for i, child in p_partition(box, z):
            assert child.u == split[i - 1]

    @settings(max_examples=100)
    @given(box_and_point())
    def test_dominated_region_in_last_child(self, bz):
        box, z = bz
        if not box.contains(z) or not all(a > b for a, b in zip(z, box.l)):
            return
        last = dict(p_partition(box, z)).get(box.p)
        assert last is not None
        # [l, z) sits in B_p whenever it is non-empty
        for x in itertools.product(*(range(lo, zi) for lo, zi in zip(box.l, z))):
            assert last.contains(x)


class TestFullSplit:
    def test_figure_one(self):
        assert full_p_split((20, 15, 10), (5, 5, 5)) == [(5, 15, 10), (20, 5, 10), (20, 15, 5)]

    def test_small(self):
        assert full_p_split((4, 4), (3, 3)) == [(3, 4), (4, 3)]
        assert full_p_split((1, 1), (0, 0)) == [(0, 1), (1, 0)]

    def test_requires_z_below_u(self):
        with pytest.raises(AssertionError):
            full_p_split((4, 4), (4, 0))


class TestJoin:
    def test_example(self):
        c = join(Box((2, 3), (5, 6)), Box((0, 4), (7, 6)))
        assert (c.l, c.u) == ((0, 3), (7, 6))

    def test_idempotent(self):
        a = Box((1, 2), (3, 4), 2, 0.5)
        assert join(a, a) == a

    def test_equal_upper_bounds(self):
        c = join(Box((0, 5, 5), (5, 15, 10)), Box((0, 0, 0), (5, 15, 10)))
        assert (c.l, c.u) == ((0, 0, 0), (5, 15, 10))

    def test_preconditions(self):
        with pytest.raises(AssertionError):
            join(Box((0, 0), (5, 7)), Box((0, 0), (7, 6)))
        with pytest.raises(AssertionError):
            join(Box((0, 0), (5, 6), 1), Box((0, 0), (7, 6), 2))

    @given(box_and_point(max_p=3, cells=500), st.lists(st.integers(0, 4), min_size=3, max_size=3))
    def test_soundness(self, bz, grow):
        a, _ = bz
        lower = tuple(v - g for v, g in zip(a.l, grow))
        upper = tuple(v + g for v, g in zip(a.u, grow))
        b = Box(tuple(lo + 1 if lo + 1 < hi else lo for lo, hi in zip(lower, upper)), upper)
        c = join(a, b)
        for x in itertools.chain(lattice(a), lattice(b)):
            assert c.contains(x)


class TestScaled:
    def test_full_box(self):
        assert scaled(FIG_B, FIG_SB) == 1.0

    def test_half_box(self):
        assert scaled(Box((0, 0, 0), (20, 15, 5)), FIG_SB) == 0.5

    def test_empty(self):
        assert scaled(((0, 0, 0), (0, 15, 10)), FIG_SB) == 0.0

    def test_reduced_examples(self):
        assert reduced_scaled(FIG_B, 1, FIG_Z, FIG_SB) == 1.0
        assert reduced_scaled_exact(FIG_B, 3, FIG_Z, FIG_SB) == 1 - Fraction(125, 3000)
        assert reduced_scaled(FIG_B, 3, FIG_Z, FIG_SB) == pytest.approx(0.9583333333)
        assert reduced_scaled(FIG_B, 3, (-1, 5, 5), FIG_SB) == 1.0

    @settings(max_examples=200)
    @given(box_and_point(), st.data())
    def test_reduced_non_negative(self, bz, data):
        box, z = bz
        sb = ScalingBounds(box.l, box.u)
        i = data.draw(st.integers(1, box.p))
        assert reduced_scaled_exact(box, i, z, sb) >= 0

    @given(box_and_point(), st.data())
    def test_monotone_under_inclusion(self, bz, data):
        outer, _ = bz
        sb = ScalingBounds(outer.l, outer.u)
        lo = tuple(data.draw(st.integers(a, b - 1)) for a, b in zip(outer.l, outer.u))
        hi = tuple(data.draw(st.integers(a + 1, b)) for a, b in zip(lo, outer.u))
        assert scaled_exact(lo, hi, sb) <= scaled_exact(outer.l, outer.u, sb)


def _quadratic_nondominated(points):
    pts = set(map(tuple, points))
    return sorted(a for a in pts if not any(dominates(b, a) for b in pts))


@settings(max_examples=100)
@given(st.integers(2, 4).flatmap(lambda p: st.lists(st.tuples(*[st.integers(0, 6)] * p), max_size=120)))
def test_nondominated_matches_pairwise_filter(points):
    assert nondominated(points) == _quadratic_nondominated(points)


def test_nondominated_mask_chunks():
    rng = np.random.default_rng(5)
    pts = rng.integers(0, 30, size=(3000, 3))
    assert nondominated(pts) == _quadratic_nondominated(pts.tolist())
