"""Exact single-objective integer linear programming.

The solver is a best-bound branch-and-bound over LP relaxations computed by a
dense two-phase primal simplex with bounded variables. Coefficients are kept
as rationals in :class:`LinearProgram`; the simplex runs in float64 and every
integral candidate is re-evaluated exactly with :class:`fractions.Fraction`.

:func:`solve_exhaustive` enumerates the integer domain and serves as an
independent oracle in tests.
"""

from __future__ import annotations

import enum
import heapq
import itertools
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

INT_TOL = 1e-9
PRUNE_TOL = 1e-9
_PIVOT_TOL = 1e-9
_COST_TOL = 1e-9
_FEAS_TOL = 1e-7
MAX_ENUMERATION = 2**24

Number = int | Fraction


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    BUDGET_EXCEEDED = "budget_exceeded"


class SolverError(RuntimeError):
    """Numerical failure inside the simplex (iteration guard exhausted)."""


class DomainTooLarge(ValueError):
    """The integer domain is too large to enumerate."""


@dataclass
class Constraint:
    coeffs: list[Number]
    rel: str
    rhs: Number

    def __post_init__(self):
        if self.rel not in ("<=", "=", ">="):
            raise ValueError(f"unknown relation {self.rel!r}")


@dataclass
class LinearProgram:
    """``min c.x + constant`` subject to linear rows and variable bounds.

    ``lower``/``upper`` entries of ``None`` mean unbounded; integer variables
    must have finite bounds.
    """

    objective: list[Number]
    constraints: list[Constraint]
    lower: list[Optional[Number]]
    upper: list[Optional[Number]]
    integer: list[bool]
    constant: Number = 0

    def __post_init__(self):
        n = len(self.objective)
        if n == 0:
            raise ValueError("a linear program needs at least one variable")
        for name in ("lower", "upper", "integer"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} has length {len(getattr(self, name))}, expected {n}")
        for row in self.constraints:
            if len(row.coeffs) != n:
                raise ValueError("constraint width does not match the number of variables")
        for j in range(n):
            if self.integer[j] and (self.lower[j] is None or self.upper[j] is None):
                raise ValueError(f"integer variable {j} needs finite bounds")

    @property
    def n(self) -> int:
        return len(self.objective)


@dataclass
class SolveResult:
    status: Status
    x: Optional[tuple] = None
    objective: Optional[Number | float] = None
    z: Optional[tuple[int, ...]] = None
    node_count: int = 0
    wall_time: float = 0.0

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


# --------------------------------------------------------------------------
# LP relaxation


@dataclass
class _LPResult:
    status: Status
    x: Optional[np.ndarray] = None
    objective: float = math.inf
    iterations: int = 0


class _Tableau:
    """Bounded-variable simplex tableau for ``A y = b, 0 <= y <= U``."""

    def __init__(self, A, b, U, basis, n_art):
        self.T = A
        self.beta = b
        self.U = U
        self.basis = basis
        self.m, self.N = A.shape
        self.n_art = n_art
        self.at_upper = np.zeros(self.N, dtype=bool)
        self.is_basic = np.zeros(self.N, dtype=bool)
        self.is_basic[basis] = True
        self.iterations = 0

    def optimize(self, cost: np.ndarray, eligible: np.ndarray) -> Status:
        T, m, N = self.T, self.m, self.N
        d = cost - cost[self.basis] @ T
        dantzig_limit = 10 * (m + N)
        hard_limit = 60 * (m + N) + 1000
        it = 0
        while True:
            cand = eligible & ~self.is_basic & (self.U > 0)
            improving = cand & (((~self.at_upper) & (d < -_COST_TOL)) | (self.at_upper & (d > _COST_TOL)))
            idx = np.flatnonzero(improving)
            if idx.size == 0:
                self.iterations += it
                return Status.OPTIMAL
            bland = it >= dantzig_limit
            if it >= hard_limit:
                raise SolverError(f"simplex did not converge after {it} iterations")
            j = int(idx[0]) if bland else int(idx[np.argmax(np.abs(d[idx]))])
            s = -1.0 if self.at_upper[j] else 1.0
            col = T[:, j] * s
            theta = self.U[j]
            leave = -1
            leave_to_upper = False
            ub = self.U[self.basis]
            for r in range(m):
                a = col[r]
                if a > _PIVOT_TOL:
                    t = self.beta[r] / a
                    up = False
                elif a < -_PIVOT_TOL and ub[r] < math.inf:
                    t = (ub[r] - self.beta[r]) / -a
                    up = True
                else:
                    continue
                t = max(t, 0.0)
                if t < theta - 1e-12 or (
                    leave >= 0 and abs(t - theta) <= 1e-12 and bland and self.basis[r] < self.basis[leave]
                ):
                    theta, leave, leave_to_upper = t, r, up
            if theta == math.inf:
                self.iterations += it
                return Status.UNBOUNDED
            self.beta -= theta * col
            if leave < 0:
                self.at_upper[j] = not self.at_upper[j]
            else:
                entering_value = self.U[j] - theta if self.at_upper[j] else theta
                old = self.basis[leave]
                self.is_basic[old] = False
                self.at_upper[old] = leave_to_upper
                self.basis[leave] = j
                self.is_basic[j] = True
                self.at_upper[j] = False
                self.beta[leave] = entering_value
                piv = T[leave, j]
                T[leave] /= piv
                colj = T[:, j].copy()
                colj[leave] = 0.0
                T -= np.outer(colj, T[leave])
                d -= d[j] * T[leave]
            it += 1

    def values(self) -> np.ndarray:
        y = np.where(self.at_upper, self.U, 0.0)
        y[self.basis] = self.beta
        return y


class _FloatModel:
    """Float64 view of a LinearProgram, shared by all branch-and-bound nodes."""

    def __init__(self, lp: LinearProgram):
        self.lp = lp
        self.c = np.array([float(v) for v in lp.objective])
        self.A = np.array([[float(v) for v in row.coeffs] for row in lp.constraints]).reshape(
            len(lp.constraints), lp.n
        )
        self.b = np.array([float(row.rhs) for row in lp.constraints])
        self.rel = [row.rel for row in lp.constraints]
        self.lo = np.array([-math.inf if v is None else float(v) for v in lp.lower])
        self.hi = np.array([math.inf if v is None else float(v) for v in lp.upper])
        self.constant = float(lp.constant)

    def solve_relaxation(self, lo: np.ndarray, hi: np.ndarray) -> _LPResult:
        n = len(self.c)
        if np.any(lo > hi + _FEAS_TOL):
            return _LPResult(Status.INFEASIBLE)
        # x = offset + Tmap @ y, y >= 0
        cols = []
        offset = np.zeros(n)
        ubs = []
        for j in range(n):
            if lo[j] > -math.inf:
                offset[j] = lo[j]
                cols.append((j, 1.0))
                ubs.append(hi[j] - lo[j])
            elif hi[j] < math.inf:
                offset[j] = hi[j]
                cols.append((j, -1.0))
                ubs.append(math.inf)
            else:
                cols.append((j, 1.0))
                ubs.append(math.inf)
                cols.append((j, -1.0))
                ubs.append(math.inf)
        ny = len(cols)
        Tmap = np.zeros((n, ny))
        for k, (j, sgn) in enumerate(cols):
            Tmap[j, k] = sgn
        m = len(self.b)
        Ay = self.A @ Tmap
        b = self.b - self.A @ offset
        slack_rows = [r for r in range(m) if self.rel[r] != "="]
        ns = len(slack_rows)
        S = np.zeros((m, ns))
        for k, r in enumerate(slack_rows):
            S[r, k] = 1.0 if self.rel[r] == "<=" else -1.0
        full = np.hstack([Ay, S])
        sign = np.where(b < 0, -1.0, 1.0)
        full *= sign[:, None]
        b = b * sign
        basis = [-1] * m
        for k, r in enumerate(slack_rows):
            if full[r, ny + k] > 0:
                basis[r] = ny + k
        art_rows = [r for r in range(m) if basis[r] < 0]
        na = len(art_rows)
        Art = np.zeros((m, na))
        for k, r in enumerate(art_rows):
            Art[r, k] = 1.0
            basis[r] = ny + ns + k
        A = np.hstack([full, Art]) if m else np.zeros((0, ny + ns))
        U = np.concatenate([np.array(ubs), np.full(ns, math.inf), np.full(na, math.inf)])
        cost_y = self.c @ Tmap
        N = ny + ns + na
        tab = _Tableau(A.copy(), b.copy(), U, np.array(basis, dtype=int), na)
        if na:
            c1 = np.zeros(N)
            c1[ny + ns :] = 1.0
            tab.optimize(c1, np.ones(N, dtype=bool))
            y = tab.values()
            if y[ny + ns :].sum() > _FEAS_TOL:
                return _LPResult(Status.INFEASIBLE, iterations=tab.iterations)
            tab.U[ny + ns :] = 0.0
            tab.at_upper[ny + ns :] = False
        c2 = np.concatenate([cost_y, np.zeros(ns + na)])
        eligible = np.ones(N, dtype=bool)
        eligible[ny + ns :] = False
        status = tab.optimize(c2, eligible)
        if status is Status.UNBOUNDED:
            return _LPResult(Status.UNBOUNDED, iterations=tab.iterations)
        y = tab.values()
        x = offset + Tmap @ y[:ny]
        return _LPResult(Status.OPTIMAL, x, float(self.c @ x) + self.constant, tab.iterations)


def solve_lp(lp: LinearProgram) -> SolveResult:
    """Solve the continuous relaxation of ``lp`` (integrality ignored)."""
    t0 = time.perf_counter()
    model = _FloatModel(lp)
    res = model.solve_relaxation(model.lo.copy(), model.hi.copy())
    x = tuple(float(v) for v in res.x) if res.x is not None else None
    obj = res.objective if res.status is Status.OPTIMAL else None
    return SolveResult(res.status, x, obj, None, 1, time.perf_counter() - t0)


# --------------------------------------------------------------------------
# exact evaluation of integral candidates


def exact_completion(lp: LinearProgram, xint: Sequence[int]) -> Optional[tuple[tuple, Fraction]]:
    """Fix the integer variables to ``xint`` and optimize the rest exactly.

    Supported when at most one variable is continuous, which covers the
    linearized scalarized programs. Returns ``(x, objective)`` or ``None`` if
    the fixed assignment is infeasible. Raises when the continuous variable is
    unbounded in the improving direction.
    """
    cont = [j for j in range(lp.n) if not lp.integer[j]]
    if len(cont) > 1:
        raise NotImplementedError("exact completion supports at most one continuous variable")
    vals: list = [None] * lp.n
    it = iter(xint)
    for j in range(lp.n):
        if lp.integer[j]:
            vals[j] = int(next(it))
            if vals[j] < lp.lower[j] or vals[j] > lp.upper[j]:
                return None
    t_lo = None if not cont or lp.lower[cont[0]] is None else Fraction(lp.lower[cont[0]])
    t_hi = None if not cont or lp.upper[cont[0]] is None else Fraction(lp.upper[cont[0]])
    for row in lp.constraints:
        act = sum(Fraction(c) * v for c, v, integ in zip(row.coeffs, vals, lp.integer) if integ and c)
        rest = Fraction(row.rhs) - act
        a_t = Fraction(row.coeffs[cont[0]]) if cont else Fraction(0)
        if a_t == 0:
            if (row.rel == "<=" and rest < 0) or (row.rel == ">=" and rest > 0) or (row.rel == "=" and rest != 0):
                return None
            continue
        bound = rest / a_t
        upper_side = (row.rel == "<=") == (a_t > 0)
        if row.rel == "=":
            t_lo = bound if t_lo is None else max(t_lo, bound)
            t_hi = bound if t_hi is None else min(t_hi, bound)
        elif upper_side:
            t_hi = bound if t_hi is None else min(t_hi, bound)
        else:
            t_lo = bound if t_lo is None else max(t_lo, bound)
    if t_lo is not None and t_hi is not None and t_lo > t_hi:
        return None
    obj = Fraction(lp.constant) + sum(
        Fraction(c) * v for c, v, integ in zip(lp.objective, vals, lp.integer) if integ and c
    )
    if cont:
        j = cont[0]
        c_t = Fraction(lp.objective[j])
        if c_t > 0:
            t = t_lo
        elif c_t < 0:
            t = t_hi
        else:
            t = t_lo if t_lo is not None else (t_hi if t_hi is not None else Fraction(0))
        if t is None:
            raise ValueError("continuous variable is unbounded in the improving direction")
        vals[j] = t
        obj += c_t * t
    return tuple(vals), obj


# --------------------------------------------------------------------------
# branch and bound


def _most_fractional(x: np.ndarray, integer: np.ndarray) -> int:
    frac = np.abs(x - np.round(x))
    frac[~integer] = 0.0
    j = int(np.argmax(frac))  # argmax returns the lowest index on ties
    return j if frac[j] > INT_TOL else -1


def solve(lp: LinearProgram, budget: Optional[float] = None) -> SolveResult:
    """Solve ``lp`` to proven optimality.

    ``budget`` is a wall-clock limit in seconds; when it runs out the best
    incumbent (if any) is returned with status ``BUDGET_EXCEEDED``.
    Branching picks the most fractional variable (lowest index on ties);
    nodes are explored best-bound first, FIFO on equal bounds.
    """
    t0 = time.perf_counter()
    model = _FloatModel(lp)
    integer = np.array(lp.integer, dtype=bool)
    exact_ok = sum(1 for v in lp.integer if not v) <= 1
    counter = itertools.count()
    nodes = 0

    root = model.solve_relaxation(model.lo.copy(), model.hi.copy())
    nodes += 1
    if root.status is not Status.OPTIMAL:
        return SolveResult(root.status, node_count=nodes, wall_time=time.perf_counter() - t0)

    heap = [(root.objective, next(counter), model.lo.copy(), model.hi.copy(), root.x)]
    best_val = math.inf
    best = None
    status = Status.OPTIMAL
    while heap:
        bound, _, lo, hi, x = heapq.heappop(heap)
        if bound >= best_val - PRUNE_TOL:
            break
        if budget is not None and time.perf_counter() - t0 > budget:
            status = Status.BUDGET_EXCEEDED
            break
        j = _most_fractional(x, integer)
        if j < 0:
            xint = [int(round(v)) for v, integ in zip(x, integer) if integ]
            if exact_ok:
                done = exact_completion(lp, xint)
                if done is None:
                    continue
                vals, obj = done
                val = float(obj)
            else:
                vals = tuple(int(round(v)) if integ else float(v) for v, integ in zip(x, integer))
                obj = val = bound
            if val < best_val:
                best_val, best = val, (vals, obj)
            continue
        for side in (0, 1):
            clo, chi = lo.copy(), hi.copy()
            if side == 0:
                chi[j] = math.floor(x[j])
            else:
                clo[j] = math.ceil(x[j])
            res = model.solve_relaxation(clo, chi)
            nodes += 1
            if res.status is Status.OPTIMAL and res.objective < best_val - PRUNE_TOL:
                heapq.heappush(heap, (res.objective, next(counter), clo, chi, res.x))
            elif res.status is Status.UNBOUNDED:
                return SolveResult(Status.UNBOUNDED, node_count=nodes, wall_time=time.perf_counter() - t0)

    elapsed = time.perf_counter() - t0
    if best is None:
        if status is Status.BUDGET_EXCEEDED:
            return SolveResult(status, node_count=nodes, wall_time=elapsed)
        return SolveResult(Status.INFEASIBLE, node_count=nodes, wall_time=elapsed)
    vals, obj = best
    return SolveResult(status, tuple(vals), obj, None, nodes, elapsed)


# --------------------------------------------------------------------------
# exhaustive oracle


def solve_exhaustive(lp: LinearProgram, chunk: int = 1 << 15) -> SolveResult:
    """Reference solver that enumerates every integer assignment.

    Same contract as :func:`solve`; ties go to the first assignment in
    mixed-radix order (variable 0 varies slowest).
    """
    t0 = time.perf_counter()
    ints = [j for j in range(lp.n) if lp.integer[j]]
    cont = [j for j in range(lp.n) if not lp.integer[j]]
    if len(cont) > 1:
        raise NotImplementedError("the oracle supports at most one continuous variable")
    los = [int(lp.lower[j]) for j in ints]
    sizes = [int(lp.upper[j]) - int(lp.lower[j]) + 1 for j in ints]
    if any(s <= 0 for s in sizes):
        return SolveResult(Status.INFEASIBLE, wall_time=time.perf_counter() - t0)
    total = math.prod(sizes)
    if total > MAX_ENUMERATION:
        raise DomainTooLarge(f"{total} assignments exceed the enumeration limit {MAX_ENUMERATION}")

    model = _FloatModel(lp)
    ci = model.c[ints]
    Ai = model.A[:, ints] if len(ints) else np.zeros((len(model.b), 0))
    at = model.A[:, cont[0]] if cont else np.zeros(len(model.b))
    ct = model.c[cont[0]] if cont else 0.0
    t_lo0 = model.lo[cont[0]] if cont else -math.inf
    t_hi0 = model.hi[cont[0]] if cont else math.inf

    best_float = math.inf
    candidates: list[tuple[int, ...]] = []
    for start in range(0, total, chunk):
        X = enumerate_block(los, sizes, start, min(chunk, total - start))
        act = X @ Ai.T if len(model.b) else np.zeros((len(X), 0))
        rest = model.b[None, :] - act
        ok = np.ones(len(X), dtype=bool)
        tlo = np.full(len(X), t_lo0)
        thi = np.full(len(X), t_hi0)
        for r, rel in enumerate(model.rel):
            a = at[r]
            if a == 0:
                if rel == "<=":
                    ok &= rest[:, r] >= -_FEAS_TOL
                elif rel == ">=":
                    ok &= rest[:, r] <= _FEAS_TOL
                else:
                    ok &= np.abs(rest[:, r]) <= _FEAS_TOL
                continue
            bnd = rest[:, r] / a
            if rel == "=":
                tlo = np.maximum(tlo, bnd)
                thi = np.minimum(thi, bnd)
            elif (rel == "<=") == (a > 0):
                thi = np.minimum(thi, bnd)
            else:
                tlo = np.maximum(tlo, bnd)
        ok &= tlo <= thi + _FEAS_TOL
        if not ok.any():
            continue
        if cont:
            if ct > 0:
                t = tlo
            elif ct < 0:
                t = thi
            else:
                t = np.where(np.isfinite(tlo), tlo, np.where(np.isfinite(thi), thi, 0.0))
            if np.any(ok & ~np.isfinite(t)):
                return SolveResult(Status.UNBOUNDED, wall_time=time.perf_counter() - t0)
            val = X @ ci + ct * np.where(ok, t, 0.0)
        else:
            val = X @ ci
        val = np.where(ok, val, math.inf) + model.constant
        m = float(val.min())
        if m < best_float - 1e-7:
            best_float = m
            candidates = []
        if m <= best_float + 1e-7:
            sel = np.flatnonzero(val <= best_float + 1e-7)
            candidates.extend(tuple(int(v) for v in X[k]) for k in sel)
    if not candidates:
        return SolveResult(Status.INFEASIBLE, node_count=total, wall_time=time.perf_counter() - t0)
    best = None
    for xint in candidates:
        done = exact_completion(lp, xint)
        if done is None:
            continue
        if best is None or done[1] < best[1]:
            best = done
    if best is None:
        return SolveResult(Status.INFEASIBLE, node_count=total, wall_time=time.perf_counter() - t0)
    return SolveResult(Status.OPTIMAL, best[0], best[1], None, total, time.perf_counter() - t0)


def enumerate_block(los: Sequence[int], sizes: Sequence[int], start: int, count: int) -> np.ndarray:
    """Rows ``start .. start+count-1`` of the mixed-radix enumeration of a box domain."""
    idx = np.arange(start, start + count, dtype=np.int64)
    X = np.empty((count, len(sizes)), dtype=np.int64)
    for k in range(len(sizes) - 1, -1, -1):
        idx, rem = np.divmod(idx, sizes[k])
        X[:, k] = rem + los[k]
    return X


def optimize_single_objective(inst, i: int, sense: str = "min", solver=None, budget: Optional[float] = None) -> SolveResult:
    """Minimize or maximize objective ``i`` (0-based) of a problem instance.

    ``objective`` of the result is the optimal value of ``f_i`` itself, in
    either sense, and ``z`` is the full objective vector at the optimum.
    """
    if sense not in ("min", "max"):
        raise ValueError(f"sense must be 'min' or 'max', got {sense!r}")
    if not 0 <= i < inst.p:
        raise ValueError(f"objective index {i} outside 0..{inst.p - 1}")
    coeffs = list(inst.objectives[i])
    if sense == "max":
        coeffs = [-c for c in coeffs]
    lp = inst.linear_program(coeffs)
    res = solve(lp, budget) if solver is None else solver(lp)
    if res.x is not None:
        x = tuple(int(v) for v in res.x)
        res.x = x
        res.z = inst.evaluate(x)
        res.objective = res.z[i]
    return res
