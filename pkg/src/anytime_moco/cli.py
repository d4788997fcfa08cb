"""Command-line harness: ``gen``, ``front``, ``solve`` and ``report``.

Exit codes: 0 success, 1 usage error, 2 I/O or schema error, 3 solver failure.

File naming inside ``--out``::

    <instance>.json                      instance (gen)
    <instance>.front.json                complete front (front)
    <instance>.<alg>.rep<k>.trace.csv    anytime trace (solve)
    <instance>.<alg>.rep<k>.archive.json points found by that run (solve)
    metrics.csv, ranks.csv, plots/*.xy   report outputs
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from . import engine, metrics, problems
from .ilp import DomainTooLarge, SolverError

log = logging.getLogger("anytime_moco")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_SOLVER = 0, 1, 2, 3


class UsageError(Exception):
    pass


class SolverFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _cuts(text: str) -> list[float]:
    try:
        cuts = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid cut list {text!r}") from None
    if not cuts or any(c < 0 for c in cuts):
        raise argparse.ArgumentTypeError("cut points must be non-negative")
    return sorted(cuts)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="base seed (default 0)")
    common.add_argument("--out", type=Path, default=argparse.SUPPRESS, help="output directory (default .)")
    common.add_argument(
        "--deterministic",
        action="store_true",
        default=argparse.SUPPRESS,
        help="replace wall-clock timestamps with solver-call counts",
    )
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    parser = _Parser(prog="anytime-moco", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="generate benchmark instances")
    g.add_argument("--class", dest="cls", required=True, choices=problems.CLASSES)
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--n", type=int, required=True, help="variables (agents for AP)")
    g.add_argument("--m", type=int, default=None, help="constraints (ILP only)")
    g.add_argument("--count", type=int, default=1)

    f = sub.add_parser("front", parents=[common], help="compute complete Pareto fronts")
    f.add_argument("instances", nargs="+", type=Path)
    f.add_argument("--method", choices=("oracle", "solver", "both"), default="oracle")

    s = sub.add_parser("solve", parents=[common], help="run anytime searches and write traces")
    s.add_argument("instances", nargs="+", type=Path)
    s.add_argument("--algorithm", action="append", choices=sorted(engine.ALGORITHMS), default=None)
    b = s.add_mutually_exclusive_group()
    b.add_argument("--budget-ms", type=float, default=None)
    b.add_argument("--budget-iters", type=int, default=None, help="maximum number of solver calls")
    b.add_argument("--budget-points", type=int, default=None, help="stop after this many points")
    s.add_argument("--reps", type=int, default=1)
    s.add_argument("--jobs", type=int, default=1)

    r = sub.add_parser("report", parents=[common], help="evaluate traces at cut points")
    r.add_argument("--traces", nargs="+", type=Path, required=True, help="trace files or directories")
    r.add_argument("--fronts", nargs="+", type=Path, required=True, help="front files or directories")
    r.add_argument("--cuts", type=_cuts, required=True, help="comma-separated cut points in ms")
    return parser


# --------------------------------------------------------------------------
# commands


def cmd_gen(cls: str, p: int, n: int, m: Optional[int], count: int, seed: int, outdir: Path) -> list[Path]:
    if count < 0:
        raise UsageError("--count must be non-negative")
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for k in range(count):
        try:
            inst = problems.generate(cls, p, n, m, seed + k)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        path = outdir / f"{inst.name}.json"
        problems.write_instance(inst, path)
        paths.append(path)
    return paths


def _front_by_solver(inst) -> problems.FrontFile:
    res = engine.run_tpa(inst)
    if res.failed:
        raise SolverFailure(f"{inst.name}: {res.error}")
    entries = sorted(res.archive, key=lambda e: e.z)
    return problems.FrontFile(inst.name, inst.p, [e.z for e in entries], [e.x for e in entries])


def cmd_front(path: Path, method: str, outdir: Path) -> Path:
    inst = problems.read_instance(path)
    if method in ("oracle", "both"):
        try:
            front = problems.brute_force_front(inst)
        except DomainTooLarge as exc:
            raise UsageError(f"{exc}; use --method solver") from None
    if method in ("solver", "both"):
        solved = _front_by_solver(inst)
        if method == "both" and solved.points != front.points:
            raise SolverFailure(f"{inst.name}: solver front differs from the enumerated front")
        if method == "solver":
            front = solved
    if method == "solver" and len(front.points) == 1:
        # the enumeration path already warns
        log.warning("%s: the Pareto front has a single point", inst.name)
    outdir.mkdir(parents=True, exist_ok=True)
    out = outdir / f"{inst.name}.front.json"
    # points only: both methods then produce byte-identical files
    problems.write_front(problems.FrontFile(inst.name, inst.p, sorted(front.points)), out)
    return out


def _solve_one(args) -> tuple[str, bool, Optional[str]]:
    path, algorithm, rep, budget, outdir, deterministic = args
    inst = problems.read_instance(path)
    res = engine.run(algorithm, inst, budget, clock="logical" if deterministic else "wall")
    stem = outdir / f"{inst.name}.{algorithm}.rep{rep}"
    engine.write_trace_csv(res.trace, f"{stem}.trace.csv", inst.p)
    entries = sorted(res.archive, key=lambda e: e.z)
    problems.write_front(
        problems.FrontFile(inst.name, inst.p, [e.z for e in entries], [e.x for e in entries]),
        f"{stem}.archive.json",
    )
    return str(stem), res.failed, res.error


def cmd_solve(
    paths: Sequence[Path],
    algorithms: Sequence[str],
    budget: engine.Budget,
    reps: int,
    outdir: Path,
    deterministic: bool = False,
    jobs: int = 1,
) -> list[str]:
    if reps < 1:
        raise UsageError("--reps must be at least 1")
    for path in paths:
        problems.read_instance(path)  # fail early on bad input
    outdir.mkdir(parents=True, exist_ok=True)
    tasks = [(p, a, k, budget, outdir, deterministic) for p in paths for a in algorithms for k in range(1, reps + 1)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_solve_one, tasks))
    else:
        results = [_solve_one(t) for t in tasks]
    failed = [f"{stem}: {err}" for stem, bad, err in results if bad]
    if failed:
        raise SolverFailure("; ".join(failed))
    return [stem for stem, _, _ in results]


def _collect(paths: Sequence[Path], suffix: str) -> list[Path]:
    out = []
    for p in paths:
        if p.is_dir():
            out.extend(sorted(p.glob(f"*{suffix}")))
        else:
            out.append(p)
    return out


def _parse_trace_name(path: Path) -> tuple[str, str, int]:
    name = path.name
    if not name.endswith(".trace.csv"):
        raise UsageError(f"{path}: trace files must be named <instance>.<algorithm>.rep<k>.trace.csv")
    parts = name[: -len(".trace.csv")].rsplit(".", 2)
    if len(parts) != 3 or not parts[2].startswith("rep") or not parts[2][3:].isdigit():
        raise UsageError(f"{path}: trace files must be named <instance>.<algorithm>.rep<k>.trace.csv")
    return parts[0], parts[1], int(parts[2][3:])


def _mean(values):
    vals = [v for v in values if v is not None]
    if not vals:
        return None
    if any(math.isinf(v) for v in vals):
        return math.inf
    return sum(vals) / len(vals)


def cmd_report(trace_paths: Sequence[Path], front_paths: Sequence[Path], cuts: Sequence[float], outdir: Path) -> Path:
    fronts = {}
    for path in _collect(front_paths, ".front.json"):
        f = problems.read_front(path)
        fronts[f.name] = f
    runs: dict[tuple[str, str], list[list]] = defaultdict(list)
    for path in _collect(trace_paths, ".trace.csv"):
        inst, alg, _ = _parse_trace_name(path)
        p, events = engine.read_trace_csv(path)
        if inst not in fronts:
            raise UsageError(f"{path}: no front file for instance {inst!r}")
        if fronts[inst].p != p:
            raise ValueError(f"{path}: trace has p={p} but the front has p={fronts[inst].p}")
        runs[(inst, alg)].append(events)
    if not runs:
        raise UsageError("no trace files found")

    table: dict[tuple[str, str], list[dict]] = {}
    for (inst, alg), traces in sorted(runs.items()):
        ctx = metrics.MetricContext.from_front(fronts[inst].points)
        per_rep = [metrics.evaluate_trace(t, ctx, cuts) for t in traces]
        rows = []
        for c, cut in enumerate(cuts):
            row = {"cut_ms": cut, "finished": all(r[c].finished for r in per_rep)}
            for m in metrics.METRICS:
                row[m] = _mean([r[c].value(m) for r in per_rep])
            rows.append(row)
        table[(inst, alg)] = rows

    instances = sorted({inst for inst, _ in table})
    algs = sorted({alg for _, alg in table})
    ranks: dict[tuple[str, str, int, str], Optional[float]] = {}
    for inst in instances:
        present = [a for a in algs if (inst, a) in table]
        for c in range(len(cuts)):
            finished = {a: table[(inst, a)][c]["finished"] for a in present}
            for m in metrics.METRICS:
                vals = {a: table[(inst, a)][c][m] for a in present}
                rk = metrics.rank_at_cut(vals, finished, metrics.HIGHER_IS_BETTER[m])
                for a in present:
                    ranks[(inst, a, c, m)] = None if rk is None else rk[a]

    outdir.mkdir(parents=True, exist_ok=True)
    out = outdir / "metrics.csv"
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(
            ["instance", "algorithm", "cut_ms", "onvgr", "hvr", "spread", "eps_add"]
            + ["rank_onvgr", "rank_hvr", "rank_spread", "rank_eps"]
        )
        for (inst, alg), rows in sorted(table.items()):
            for c, row in enumerate(rows):
                vals = [_cell(row[m]) for m in metrics.METRICS]
                rks = [_cell(ranks[(inst, alg, c, m)]) for m in metrics.METRICS]
                w.writerow([inst, alg, _cell(row["cut_ms"]), *vals, *rks])

    with open(outdir / "ranks.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["algorithm", "cut_ms", "metric", "mean_rank", "instances"])
        for alg in algs:
            for c, cut in enumerate(cuts):
                for m in metrics.METRICS:
                    vals = [ranks[(i, alg, c, m)] for i in instances if ranks.get((i, alg, c, m)) is not None]
                    w.writerow([alg, _cell(cut), m, _cell(sum(vals) / len(vals)) if vals else "", len(vals)])

    plots = outdir / "plots"
    plots.mkdir(exist_ok=True)
    for (inst, alg), rows in table.items():
        for m in metrics.METRICS:
            lines = [f"{_cell(r['cut_ms'])} {_cell(r[m])}" for r in rows if r[m] is not None and not math.isinf(r[m])]
            (plots / f"{inst}.{alg}.{m}.xy").write_text("".join(line + "\n" for line in lines))
    return out


def _cell(v) -> str:
    if v is None or (isinstance(v, float) and math.isinf(v)):
        return ""
    if isinstance(v, float):
        return str(int(v)) if v.is_integer() else repr(round(v, 10))
    return str(v)


# --------------------------------------------------------------------------


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    seed = getattr(args, "seed", 0)
    out = getattr(args, "out", Path("."))
    deterministic = getattr(args, "deterministic", False)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        if args.command == "gen":
            for path in cmd_gen(args.cls, args.p, args.n, args.m, args.count, seed, out):
                print(path)
        elif args.command == "front":
            for path in args.instances:
                print(cmd_front(path, args.method, out))
        elif args.command == "solve":
            budget = engine.Budget(args.budget_ms, args.budget_iters, args.budget_points)
            for stem in cmd_solve(
                args.instances, args.algorithm or ["tpa"], budget, args.reps, out, deterministic, args.jobs
            ):
                print(f"{stem}.trace.csv")
        elif args.command == "report":
            print(cmd_report(args.traces, args.fronts, args.cuts, out))
    except UsageError as exc:
        print(f"anytime-moco: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"anytime-moco: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SolverFailure, SolverError) as exc:
        print(f"anytime-moco: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
