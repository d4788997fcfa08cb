import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anytime_moco.geometry import dominates
from anytime_moco.ilp import Constraint, DomainTooLarge
from anytime_moco.problems import (
    DegenerateInstance,
    FrontFile,
    InstanceFormatError,
    ProblemInstance,
    brute_force_front,
    check_feasible,
    generate,
    ideal_point,
    nadir_upper_bound,
    read_front,
    read_instance,
    scaling_bounds,
    write_front,
    write_instance,
)
from conftest import small_kp


def feasible_images(inst):
    ranges = [range(lo, hi + 1) for lo, hi in inst.domains]
    return [inst.evaluate(x) for x in itertools.product(*ranges) if inst.is_feasible(x)]


def pairwise_front(points):
    pts = set(points)
    return sorted(a for a in pts if not any(dominates(b, a) for b in pts))


class TestGenerate:
    def test_assignment_structure(self):
        inst = generate("AP", 2, 3, seed=1)
        assert inst.n == 9 and len(inst.constraints) == 6
        assert all(r.rel == "=" and r.rhs == 1 for r in inst.constraints)
        assert inst.domains == [(0, 1)] * 9

    def test_knapsack_structure(self):
        inst = generate("KP", 2, 5, seed=7)
        assert inst.n == 5 and len(inst.constraints) == 1 and inst.constraints[0].rel == "<="
        assert np.all(inst.C < 0) and np.all(inst.C >= -100)
        assert inst.constraints[0].rhs == -(-sum(inst.constraints[0].coeffs) // 2)

    def test_ilp_structure(self):
        inst = generate("ILP", 3, 10, m=5, seed=3)
        assert inst.n == 10 and len(inst.constraints) == 5
        assert inst.domains == [(0, 10)] * 10
        assert all(r.rel == "<=" for r in inst.constraints)
        assert inst.C.min() >= -10 and inst.C.max() <= 10

    def test_ilp_needs_m(self):
        with pytest.raises(ValueError):
            generate("ILP", 2, 4)

    @pytest.mark.parametrize("args", [("XX", 2, 3), ("KP", 1, 3), ("KP", 2, 0), ("AP", 2, 1)])
    def test_invalid(self, args):
        with pytest.raises(ValueError):
            generate(*args)

    def test_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        write_instance(generate("ILP", 2, 5, m=2, seed=11), a)
        write_instance(generate("ILP", 2, 5, m=2, seed=11), b)
        assert a.read_bytes() == b.read_bytes()
        write_instance(generate("ILP", 2, 5, m=2, seed=12), b)
        assert a.read_bytes() != b.read_bytes()

    def test_knapsack_negation(self):
        inst = generate("KP", 2, 6, seed=4)
        rng = np.random.default_rng(4)
        profits = rng.integers(1, 101, size=(2, 6))
        x = (1, 0, 1, 1, 0, 0)
        assert inst.evaluate(x) == tuple(-int(v) for v in profits @ np.array(x))


class TestFiles:
    def test_round_trip(self, tmp_path):
        inst = generate("KP", 2, 5, seed=7)
        write_instance(inst, tmp_path / "i.json")
        assert read_instance(tmp_path / "i.json") == inst

    def test_json_fields(self, tmp_path):
        write_instance(generate("AP", 2, 2, seed=0), tmp_path / "i.json")
        data = json.loads((tmp_path / "i.json").read_text())
        assert data["format"] == 1 and data["sense"] == "min" and data["class"] == "AP"
        assert set(data["constraints"][0]) == {"coeffs", "rel", "rhs"}
        assert data["domains"][0] == {"lo": 0, "hi": 1}

    def _broken(self, tmp_path, mutate):
        data = generate("KP", 2, 4, seed=0).to_dict()
        mutate(data)
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data))
        with pytest.raises(InstanceFormatError) as err:
            read_instance(path)
        return str(err.value)

    def test_missing_field(self, tmp_path):
        assert "objectives" in self._broken(tmp_path, lambda d: d.pop("objectives"))

    def test_non_integer_coefficient(self, tmp_path):
        def mutate(d):
            d["objectives"][0][1] = 1.5

        assert "objectives" in self._broken(tmp_path, mutate)

    def test_bad_format_version_and_relation(self, tmp_path):
        self._broken(tmp_path, lambda d: d.update(format=2))

        def mutate(d):
            d["constraints"][0]["rel"] = "<"

        assert "rel" in self._broken(tmp_path, mutate)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "x.json"
        path.write_text("{ not json")
        with pytest.raises(InstanceFormatError):
            read_instance(path)

    def test_front_round_trip(self, tmp_path):
        f = FrontFile("x", 2, [(0, 4), (2, 2), (4, 0)], [(1, 0), (0, 1), (1, 1)])
        write_front(f, tmp_path / "f.json")
        assert read_front(tmp_path / "f.json") == f

    def test_front_rejects_dominated(self):
        with pytest.raises(ValueError):
            FrontFile("x", 2, [(0, 4), (1, 5)])
        with pytest.raises(ValueError):
            FrontFile("x", 2, [(0, 4), (0, 4)])


class TestBounds:
    def test_tiny_knapsack(self, kp3):
        imgs = feasible_images(kp3)
        assert ideal_point(kp3) == tuple(min(z[i] for z in imgs) for i in range(2))
        assert nadir_upper_bound(kp3) == tuple(max(z[i] for z in imgs) for i in range(2))

    def test_singleton(self):
        inst = small_kp([[3, 1], [1, 3]], [5, 5], 4)
        assert ideal_point(inst) == nadir_upper_bound(inst) == (0, 0)
        with pytest.raises(DegenerateInstance):
            scaling_bounds(inst)

    def test_infeasible(self):
        inst = ProblemInstance("e", "ILP", 2, 1, [[1], [-1]], [Constraint([1], ">=", 5)], [(0, 2)])
        with pytest.raises(DegenerateInstance):
            check_feasible(inst)
        with pytest.raises(DegenerateInstance):
            ideal_point(inst)

    @settings(max_examples=15)
    @given(st.sampled_from(["KP", "AP", "ILP"]), st.integers(0, 1000))
    def test_bounds_enclose_front(self, cls, seed):
        n = {"KP": 8, "AP": 3, "ILP": 4}[cls]
        inst = generate(cls, 2, n, m=2 if cls == "ILP" else None, seed=seed)
        front = brute_force_front(inst).points
        zI, zN = ideal_point(inst), nadir_upper_bound(inst)
        for z in front:
            assert all(a <= b <= c for a, b, c in zip(zI, z, zN))
        assert zI == tuple(min(z[i] for z in front) for i in range(2))


class TestBruteForce:
    def test_hand_enumeration(self, kp3):
        # feasible subsets have at most two items
        assert brute_force_front(kp3).points == [(-5, -3), (-4, -4), (-3, -5)]

    def test_identical_objectives(self, caplog):
        inst = small_kp([[3, 1, 2], [3, 1, 2]], [2, 2, 2], 4)
        front = brute_force_front(inst)
        assert front.points == [(-5, -5)]
        assert "single point" in caplog.text

    def test_assignment_two_agents(self):
        inst = generate("AP", 2, 2, seed=0)
        perms = [inst.evaluate(x) for x in [(1, 0, 0, 1), (0, 1, 1, 0)]]
        assert brute_force_front(inst).points == pairwise_front(perms)

    def test_anti_images(self):
        inst = generate("KP", 3, 9, seed=2)
        f = brute_force_front(inst)
        for x, z in zip(f.solutions, f.points):
            assert inst.is_feasible(x) and inst.evaluate(x) == z

    @settings(max_examples=20)
    @given(st.sampled_from(["KP", "AP", "ILP"]), st.integers(2, 3), st.integers(0, 10_000))
    def test_matches_pairwise_filter(self, cls, p, seed):
        n = {"KP": 9, "AP": 3, "ILP": 3}[cls]
        inst = generate(cls, p, n, m=2 if cls == "ILP" else None, seed=seed)
        assert brute_force_front(inst).points == pairwise_front(feasible_images(inst))

    def test_too_large(self):
        with pytest.raises(DomainTooLarge):
            brute_force_front(generate("KP", 2, 30, seed=0))
