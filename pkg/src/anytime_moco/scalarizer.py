"""Weighted augmented Tchebycheff scalarization of a box upper bound.

For an upper bound ``u`` the program is::

    min_x  max_i w_i (f_i(x) - zI_i)  +  eps * sum_i w_i (f_i(x) - zI_i)

with ``w_i = 1 / max(1, u_i - zI_i)``. Because ``zI`` is the ideal point every
deviation is non-negative, so the max term is linearized exactly by one
continuous variable ``t`` and ``p`` rows ``w_i (f_i(x) - zI_i) <= t``.
An optimal value below one certifies a nondominated point strictly below
``u``; a value of one or more proves that no such point exists.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

from .geometry import Point, ScalingBounds, strictly_less
from .ilp import Constraint, LinearProgram, SolveResult, Status, SolverError, solve

FLOAT_THRESHOLD_TOL = 1e-9


def make_epsilon(p: int, sb: ScalingBounds) -> Fraction:
    """Augmentation constant ``1 / (2p (r - 1))`` with ``r - 1`` clamped to at least 1."""
    if p < 2:
        raise ValueError("p must be at least 2")
    return Fraction(1, 2 * p * max(1, sb.r - 1))


def make_weights(u: Sequence[int], sb: ScalingBounds) -> tuple[Fraction, ...]:
    return tuple(Fraction(1, max(1, ui - zi)) for ui, zi in zip(u, sb.zI))


@dataclass(frozen=True)
class ScalarizerConfig:
    sb: ScalingBounds
    epsilon: Fraction

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")

    @classmethod
    def for_bounds(cls, sb: ScalingBounds) -> "ScalarizerConfig":
        return cls(sb, make_epsilon(sb.p, sb))


@dataclass
class ScalarProgram:
    base: object
    u: Point
    weights: tuple[Fraction, ...]
    epsilon: Fraction
    zI: Point
    lp: LinearProgram

    @property
    def t_index(self) -> int:
        return self.lp.n - 1

    def value_at(self, z: Sequence[int]) -> Fraction:
        """Scalarized value of an objective vector, evaluated exactly."""
        dev = [w * (zi - li) for w, zi, li in zip(self.weights, z, self.zI)]
        return max(dev) + self.epsilon * sum(dev)


def build_program(inst, u: Sequence[int], cfg: ScalarizerConfig) -> ScalarProgram:
    """Linearized scalarized ILP for upper bound ``u``; variable ``t`` is last."""
    u = tuple(int(v) for v in u)
    zI = cfg.sb.zI
    w = make_weights(u, cfg.sb)
    eps = cfg.epsilon
    n = inst.n
    obj = [Fraction(0)] * n
    for wi, row in zip(w, inst.objectives):
        for j, c in enumerate(row):
            if c:
                obj[j] += eps * wi * c
    constant = -eps * sum(wi * zi for wi, zi in zip(w, zI))
    rows = [Constraint(list(r.coeffs) + [0], r.rel, r.rhs) for r in inst.constraints]
    for wi, zi, row in zip(w, zI, inst.objectives):
        rows.append(Constraint([wi * c for c in row] + [Fraction(-1)], "<=", wi * zi))
    lp = LinearProgram(
        objective=obj + [Fraction(1)],
        constraints=rows,
        lower=[lo for lo, _ in inst.domains] + [None],
        upper=[hi for _, hi in inst.domains] + [None],
        integer=[True] * n + [False],
        constant=constant,
    )
    return ScalarProgram(inst, u, w, eps, zI, lp)


@dataclass(frozen=True)
class FoundInBox:
    x: tuple[int, ...]
    z: Point
    objective: Union[Fraction, float]


@dataclass(frozen=True)
class NoPointInBox:
    objective: Optional[Union[Fraction, float]] = None


Verdict = Union[FoundInBox, NoPointInBox]


def below_one(objective: Union[Fraction, float]) -> bool:
    if isinstance(objective, (Fraction, int)):
        return objective < 1
    return objective < 1 - FLOAT_THRESHOLD_TOL


def interpret(res: SolveResult, u: Sequence[int], sb: ScalingBounds) -> Verdict:
    """Decide from an optimal solve whether a nondominated point lies below ``u``."""
    if res.status is not Status.OPTIMAL:
        raise SolverError(f"scalarized program ended with status {res.status.value}")
    if below_one(res.objective) and strictly_less(sb.zI, u):
        z = tuple(res.z)
        assert strictly_less(z, u), f"point {z} returned for box {tuple(u)} lies outside it"
        return FoundInBox(tuple(res.x), z, res.objective)
    return NoPointInBox(res.objective)


def solve_box(
    inst,
    u: Sequence[int],
    cfg: ScalarizerConfig,
    solver: Optional[Callable[[LinearProgram], SolveResult]] = None,
) -> tuple[SolveResult, Verdict]:
    """Build, solve and interpret the program for one upper bound.

    The objective stored in the result is recomputed exactly from the
    integer part of the solution.
    """
    prog = build_program(inst, u, cfg)
    res = (solver or solve)(prog.lp)
    if res.status is Status.OPTIMAL:
        x = tuple(int(v) for v in res.x[: inst.n])
        z = inst.evaluate(x)
        res = SolveResult(res.status, x, prog.value_at(z), z, res.node_count, res.wall_time)
    return res, interpret(res, prog.u, cfg.sb)
