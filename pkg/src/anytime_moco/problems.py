"""Multiobjective integer programs: model, generators, file formats and oracles.

Every instance is stored in minimization form with integer coefficients.
Maximization benchmarks (the knapsack class) are negated on generation.

Generated coefficients are drawn from ``numpy.random.default_rng(seed)``
(PCG64) in the order documented on each generator, so a seed fully
determines an instance.

==========  ===================================================================
class       distribution
==========  ===================================================================
``KP``      profits ``U{1..100}`` (p x n, row-major), then weights
            ``U{1..100}`` (n); capacity ``ceil(sum(weights) / 2)``; binaries.
``AP``      costs ``U{1..20}`` (p x n*n, row-major); ``x[i*n + j]`` assigns
            agent ``i`` to task ``j``; ``2n`` equality rows; binaries.
``ILP``     objectives ``U{-10..10}`` (p x n), then constraint coefficients
            ``U{0..10}`` (m x n); rhs ``ceil(row_sum / 2)``; ``x_j in 0..10``.
==========  ===================================================================
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import ilp
from .geometry import Point, ScalingBounds, GeometryError, nondominated_mask
from .ilp import Constraint, LinearProgram, SolveResult, Status

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
CLASSES = ("KP", "AP", "ILP")


class InstanceFormatError(ValueError):
    """Malformed instance or front file."""


class DegenerateInstance(ValueError):
    """Infeasible instance or an objective that takes a single value."""


@dataclass
class ProblemInstance:
    name: str
    cls: str
    p: int
    n: int
    objectives: list[list[int]]
    constraints: list[Constraint]
    domains: list[tuple[int, int]]

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("an instance needs at least two objectives")
        if len(self.objectives) != self.p or any(len(row) != self.n for row in self.objectives):
            raise ValueError(f"objectives must be a {self.p}x{self.n} matrix")
        if len(self.domains) != self.n:
            raise ValueError(f"expected {self.n} domains, got {len(self.domains)}")
        for lo, hi in self.domains:
            if lo > hi:
                raise ValueError(f"empty domain [{lo}, {hi}]")
        for row in self.constraints:
            if len(row.coeffs) != self.n:
                raise ValueError("constraint width does not match n")

    @property
    def C(self) -> np.ndarray:
        return np.array(self.objectives, dtype=np.int64)

    def evaluate(self, x: Sequence[int]) -> Point:
        return tuple(int(sum(c * v for c, v in zip(row, x))) for row in self.objectives)

    def is_feasible(self, x: Sequence[int]) -> bool:
        if len(x) != self.n:
            return False
        if any(not lo <= v <= hi for v, (lo, hi) in zip(x, self.domains)):
            return False
        for row in self.constraints:
            act = sum(c * v for c, v in zip(row.coeffs, x))
            if row.rel == "<=" and act > row.rhs:
                return False
            if row.rel == ">=" and act < row.rhs:
                return False
            if row.rel == "=" and act != row.rhs:
                return False
        return True

    def linear_program(self, objective: Sequence[int]) -> LinearProgram:
        """Single-objective ILP over the feasible set with the given costs."""
        return LinearProgram(
            objective=list(objective),
            constraints=[Constraint(list(r.coeffs), r.rel, r.rhs) for r in self.constraints],
            lower=[lo for lo, _ in self.domains],
            upper=[hi for _, hi in self.domains],
            integer=[True] * self.n,
        )

    def domain_size(self) -> int:
        return math.prod(hi - lo + 1 for lo, hi in self.domains)

    # -- serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format": FORMAT_VERSION,
            "name": self.name,
            "class": self.cls,
            "p": self.p,
            "n": self.n,
            "sense": "min",
            "objectives": [list(map(int, row)) for row in self.objectives],
            "constraints": [
                {"coeffs": list(map(int, r.coeffs)), "rel": r.rel, "rhs": int(r.rhs)} for r in self.constraints
            ],
            "domains": [{"lo": int(lo), "hi": int(hi)} for lo, hi in self.domains],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemInstance":
        return _parse_instance(data)


@dataclass
class FrontFile:
    name: str
    p: int
    points: list[Point]
    solutions: Optional[list[tuple[int, ...]]] = None

    def __post_init__(self):
        self.points = [tuple(int(v) for v in z) for z in self.points]
        if any(len(z) != self.p for z in self.points):
            raise ValueError(f"every point must have {self.p} coordinates")
        if len(set(self.points)) != len(self.points):
            raise ValueError("front contains duplicate points")
        if self.points:
            arr = np.array(self.points, dtype=np.int64)
            if not nondominated_mask(arr).all():
                raise ValueError("front contains dominated points")
        if self.solutions is not None and len(self.solutions) != len(self.points):
            raise ValueError("solutions must match points one to one")

    def to_dict(self) -> dict:
        out = {"format": FORMAT_VERSION, "name": self.name, "p": self.p, "points": [list(z) for z in self.points]}
        if self.solutions is not None:
            out["solutions"] = [list(map(int, x)) for x in self.solutions]
        return out

    def sorted(self) -> "FrontFile":
        order = sorted(range(len(self.points)), key=lambda k: self.points[k])
        sols = None if self.solutions is None else [self.solutions[k] for k in order]
        return FrontFile(self.name, self.p, [self.points[k] for k in order], sols)


# --------------------------------------------------------------------------
# parsing


def _require(data: dict, key: str, where: str = "instance"):
    if not isinstance(data, dict):
        raise InstanceFormatError(f"{where}: expected an object")
    if key not in data:
        raise InstanceFormatError(f"{where}: missing field {key!r}")
    return data[key]


def _int(value, field_name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InstanceFormatError(f"field {field_name!r}: expected an integer, got {value!r}")
    return value


def _int_list(value, field_name: str, length: Optional[int] = None) -> list[int]:
    if not isinstance(value, list):
        raise InstanceFormatError(f"field {field_name!r}: expected a list")
    if length is not None and len(value) != length:
        raise InstanceFormatError(f"field {field_name!r}: expected {length} entries, got {len(value)}")
    return [_int(v, f"{field_name}[{k}]") for k, v in enumerate(value)]


def _check_format(data: dict, where: str) -> None:
    fmt = _require(data, "format", where)
    if fmt != FORMAT_VERSION:
        raise InstanceFormatError(f"{where}: unsupported format {fmt!r}, expected {FORMAT_VERSION}")


def _parse_instance(data: dict) -> ProblemInstance:
    _check_format(data, "instance")
    name = _require(data, "name")
    if not isinstance(name, str):
        raise InstanceFormatError("field 'name': expected a string")
    cls = _require(data, "class")
    if cls not in CLASSES:
        raise InstanceFormatError(f"field 'class': expected one of {CLASSES}, got {cls!r}")
    p = _int(_require(data, "p"), "p")
    n = _int(_require(data, "n"), "n")
    if p < 2:
        raise InstanceFormatError("field 'p': at least two objectives are required")
    if n < 1:
        raise InstanceFormatError("field 'n': at least one variable is required")
    sense = _require(data, "sense")
    if sense != "min":
        raise InstanceFormatError(f"field 'sense': only 'min' is supported, got {sense!r}")
    objs = _require(data, "objectives")
    if not isinstance(objs, list) or len(objs) != p:
        raise InstanceFormatError(f"field 'objectives': expected {p} rows")
    objectives = [_int_list(row, f"objectives[{k}]", n) for k, row in enumerate(objs)]
    rows = _require(data, "constraints")
    if not isinstance(rows, list):
        raise InstanceFormatError("field 'constraints': expected a list")
    constraints = []
    for k, row in enumerate(rows):
        where = f"constraints[{k}]"
        coeffs = _int_list(_require(row, "coeffs", where), f"{where}.coeffs", n)
        rel = _require(row, "rel", where)
        if rel not in ("<=", "=", ">="):
            raise InstanceFormatError(f"field '{where}.rel': expected '<=', '=' or '>=', got {rel!r}")
        rhs = _int(_require(row, "rhs", where), f"{where}.rhs")
        constraints.append(Constraint(coeffs, rel, rhs))
    doms = _require(data, "domains")
    if not isinstance(doms, list) or len(doms) != n:
        raise InstanceFormatError(f"field 'domains': expected {n} entries")
    domains = []
    for k, d in enumerate(doms):
        lo = _int(_require(d, "lo", f"domains[{k}]"), f"domains[{k}].lo")
        hi = _int(_require(d, "hi", f"domains[{k}]"), f"domains[{k}].hi")
        if lo > hi:
            raise InstanceFormatError(f"field 'domains[{k}]': lo > hi")
        domains.append((lo, hi))
    return ProblemInstance(name, cls, p, n, objectives, constraints, domains)


def _load_json(path: Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError:
        raise
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def read_instance(path) -> ProblemInstance:
    try:
        return _parse_instance(_load_json(Path(path)))
    except InstanceFormatError as exc:
        raise InstanceFormatError(f"{path}: {exc}") from None


def write_instance(inst: ProblemInstance, path) -> None:
    Path(path).write_text(dumps(inst.to_dict()))


def read_front(path) -> FrontFile:
    data = _load_json(Path(path))
    try:
        _check_format(data, "front")
        name = _require(data, "name", "front")
        p = _int(_require(data, "p", "front"), "p")
        pts = _require(data, "points", "front")
        if not isinstance(pts, list):
            raise InstanceFormatError("field 'points': expected a list")
        points = [tuple(_int_list(z, f"points[{k}]", p)) for k, z in enumerate(pts)]
        sols = data.get("solutions")
        if sols is not None:
            sols = [tuple(_int_list(x, f"solutions[{k}]")) for k, x in enumerate(sols)]
        return FrontFile(name, p, points, sols)
    except (InstanceFormatError, ValueError) as exc:
        raise InstanceFormatError(f"{path}: {exc}") from None


def write_front(front: FrontFile, path) -> None:
    Path(path).write_text(dumps(front.to_dict()))


def dumps(obj: dict) -> str:
    """Deterministic JSON with one matrix row per line."""
    lines = ["{"]
    items = list(obj.items())
    for k, (key, value) in enumerate(items):
        sep = "," if k < len(items) - 1 else ""
        if isinstance(value, list) and value and isinstance(value[0], (list, dict)):
            lines.append(f"  {json.dumps(key)}: [")
            for r, row in enumerate(value):
                rsep = "," if r < len(value) - 1 else ""
                lines.append(f"    {json.dumps(row, separators=(', ', ': '))}{rsep}")
            lines.append(f"  ]{sep}")
        else:
            lines.append(f"  {json.dumps(key)}: {json.dumps(value)}{sep}")
    lines.append("}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# generators


def _name(cls: str, p: int, n: int, m: Optional[int], seed: int) -> str:
    base = f"{cls}_p{p}_n{n}"
    if m is not None:
        base += f"_m{m}"
    return f"{base}_s{seed}"


def generate(cls: str, p: int, n: int, m: Optional[int] = None, seed: int = 0) -> ProblemInstance:
    """Deterministic benchmark instance. For ``AP``, ``n`` is the number of agents."""
    if cls not in CLASSES:
        raise ValueError(f"unknown class {cls!r}; expected one of {CLASSES}")
    if p < 2:
        raise ValueError("p must be at least 2")
    if n < 1 or (cls == "AP" and n < 2):
        raise ValueError(f"invalid size n={n} for class {cls}")
    rng = np.random.default_rng(seed)
    if cls == "KP":
        profits = rng.integers(1, 101, size=(p, n))
        weights = rng.integers(1, 101, size=n)
        cap = math.ceil(int(weights.sum()) / 2)
        return ProblemInstance(
            _name(cls, p, n, None, seed),
            cls,
            p,
            n,
            [[-int(v) for v in row] for row in profits],
            [Constraint([int(w) for w in weights], "<=", cap)],
            [(0, 1)] * n,
        )
    if cls == "AP":
        costs = rng.integers(1, 21, size=(p, n * n))
        rows = []
        for i in range(n):
            rows.append(Constraint([1 if k // n == i else 0 for k in range(n * n)], "=", 1))
        for j in range(n):
            rows.append(Constraint([1 if k % n == j else 0 for k in range(n * n)], "=", 1))
        return ProblemInstance(
            _name(cls, p, n, None, seed),
            cls,
            p,
            n * n,
            [[int(v) for v in row] for row in costs],
            rows,
            [(0, 1)] * (n * n),
        )
    if m is None or m < 1:
        raise ValueError("class ILP needs m >= 1 constraints")
    objs = rng.integers(-10, 11, size=(p, n))
    A = rng.integers(0, 11, size=(m, n))
    rows = [Constraint([int(v) for v in row], "<=", math.ceil(int(row.sum()) / 2)) for row in A]
    return ProblemInstance(
        _name(cls, p, n, m, seed),
        cls,
        p,
        n,
        [[int(v) for v in row] for row in objs],
        rows,
        [(0, 10)] * n,
    )


# --------------------------------------------------------------------------
# bounds


Solver = Callable[[LinearProgram], SolveResult]


def _optimize_all(inst: ProblemInstance, sense: str, solver: Optional[Solver]) -> Point:
    out = []
    for i in range(inst.p):
        res = ilp.optimize_single_objective(inst, i, sense, solver)
        if res.status is Status.INFEASIBLE:
            raise DegenerateInstance(f"{inst.name}: feasible set is empty")
        if not res.optimal:
            raise ilp.SolverError(f"{inst.name}: objective {i + 1} ({sense}) ended with {res.status.value}")
        out.append(int(res.objective))
    return tuple(out)


def ideal_point(inst: ProblemInstance, solver: Optional[Solver] = None) -> Point:
    return _optimize_all(inst, "min", solver)


def nadir_upper_bound(inst: ProblemInstance, solver: Optional[Solver] = None) -> Point:
    """Componentwise maximum of every objective over the whole feasible set."""
    return _optimize_all(inst, "max", solver)


def scaling_bounds(inst: ProblemInstance, solver: Optional[Solver] = None) -> ScalingBounds:
    zI = ideal_point(inst, solver)
    zN = nadir_upper_bound(inst, solver)
    try:
        return ScalingBounds(zI, zN)
    except GeometryError as exc:
        raise DegenerateInstance(f"{inst.name}: {exc}") from None


def check_feasible(inst: ProblemInstance) -> tuple[int, ...]:
    """One feasibility solve; returns a feasible point or raises DegenerateInstance."""
    res = ilp.solve(inst.linear_program([0] * inst.n))
    if not res.optimal:
        raise DegenerateInstance(f"{inst.name}: feasible set is empty")
    return tuple(int(v) for v in res.x)


# --------------------------------------------------------------------------
# brute force


def enumerate_feasible(inst: ProblemInstance, chunk: int = 1 << 16):
    """Yield ``(X, Z)`` blocks of feasible assignments and their images."""
    total = inst.domain_size()
    if total > ilp.MAX_ENUMERATION:
        raise ilp.DomainTooLarge(f"{inst.name}: {total} assignments exceed {ilp.MAX_ENUMERATION}")
    los = [lo for lo, _ in inst.domains]
    sizes = [hi - lo + 1 for lo, hi in inst.domains]
    C = inst.C
    A = np.array([r.coeffs for r in inst.constraints], dtype=np.int64).reshape(len(inst.constraints), inst.n)
    b = np.array([r.rhs for r in inst.constraints], dtype=np.int64)
    for start in range(0, total, chunk):
        X = ilp.enumerate_block(los, sizes, start, min(chunk, total - start))
        ok = np.ones(len(X), dtype=bool)
        if len(b):
            act = X @ A.T
            for r, row in enumerate(inst.constraints):
                if row.rel == "<=":
                    ok &= act[:, r] <= b[r]
                elif row.rel == ">=":
                    ok &= act[:, r] >= b[r]
                else:
                    ok &= act[:, r] == b[r]
        X = X[ok]
        if len(X):
            yield X, X @ C.T


def brute_force_front(inst: ProblemInstance) -> FrontFile:
    """Exact Pareto front by full enumeration and dominance filtering.

    Each point carries the first feasible assignment (in enumeration order)
    that maps to it.
    """
    xs, zs = [], []
    for X, Z in enumerate_feasible(inst):
        # points dominated inside the block can never reach the front
        keep = nondominated_mask(Z)
        xs.append(X[keep])
        zs.append(Z[keep])
    if not zs:
        raise DegenerateInstance(f"{inst.name}: feasible set is empty")
    X = np.vstack(xs)
    Z = np.vstack(zs)
    keep = nondominated_mask(Z)
    points = [tuple(int(v) for v in z) for z in Z[keep]]
    sols = [tuple(int(v) for v in x) for x in X[keep]]
    front = FrontFile(inst.name, inst.p, points, sols).sorted()
    if len(front.points) == 1:
        log.warning("%s: the Pareto front has a single point", inst.name)
    return front
