"""
Anytime behaviour on a three-objective knapsack
===============================================

Both searches enumerate the whole front when left alone. What differs is
which points come first. Here each search may only report a quarter of
the front, and we compare the fraction of hypervolume and the additive
epsilon reached by that point.
"""

import math

from anytime_moco import Budget, MetricContext, brute_force_front, generate, run_fullsplit, run_tpa

inst = generate("KP", 3, 16, seed=2)
front = brute_force_front(inst).points
ctx = MetricContext.from_front(front)
print(f"{inst.name}: {len(front)} nondominated points, reference point {ctx.reference}")

budget = Budget(points=math.ceil(len(front) / 4))
for run in (run_tpa, run_fullsplit):
    res = run(inst, budget, clock="logical")
    vals = ctx.evaluate(res.archive.points)
    print(
        f"{res.algorithm:>9}: {len(res.archive)} points after {res.solver_calls} solver calls, "
        f"HVR {vals['hvr']:.3f}, eps+ {vals['eps_add']:.3f}"
    )

# without a budget the archive equals the enumerated front
full = run_tpa(inst)
print("complete run matches enumeration:", sorted(full.archive.points) == front)

# the trace lets us replay the run at any cut point (here: solver calls)
res = run_tpa(inst, clock="logical")
for cut in (5, 10, 20, 40):
    row = ctx.evaluate([ev.payload for ev in res.trace if ev.kind == "PointFound" and ev.elapsed_ms <= cut])
    print(f"after {cut:>2} calls: ONVGR {row['onvgr']:.2f}  HVR {row['hvr']:.3f}")
