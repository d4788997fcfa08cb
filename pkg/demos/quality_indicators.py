"""
Quality indicators on a toy front
=================================

ONVGR, hypervolume ratio, additive epsilon and general spread for a few
subsets of a small front. Adding points never hurts the first three; the
spread is not monotone.
"""

import numpy as np

from anytime_moco.metrics import MetricContext, hypervolume

PF = [(0, 6), (1, 4), (2, 3), (4, 1), (6, 0)]
ctx = MetricContext.from_front(PF)
print("reference point", ctx.reference, "extremes", ctx.extremes)
print("hypervolume of the front:", hypervolume(PF, ctx.reference))

for subset in ([(2, 3)], [(0, 6), (6, 0)], [(0, 6), (2, 3), (6, 0)], PF):
    v = ctx.evaluate(subset)
    spread = "undefined" if v["spread"] is None else f"{v['spread']:.3f}"
    print(f"{str(subset):<40} ONVGR {v['onvgr']:.2f}  HVR {v['hvr']:.3f}  eps+ {v['eps_add']:.3f}  spread {spread}")

# hypervolume on integer points equals a count of dominated unit cells
rng = np.random.default_rng(0)
pts = [tuple(map(int, z)) for z in rng.integers(0, 8, size=(12, 3))]
cells = np.stack(np.meshgrid(*[np.arange(8)] * 3, indexing="ij"), -1).reshape(-1, 3)
count = int(np.any(np.all(cells[:, None, :] >= np.array(pts)[None], axis=2), axis=1).sum())
print("slicing", hypervolume(pts, (8, 8, 8)), "== cell count", count)
