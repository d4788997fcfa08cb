"""
Splitting a search box around a found point
===========================================

A box [l, u) of objective space is split either by the full p-split, which
keeps the ideal point as every lower bound, or by the p-partition, whose
children are pairwise disjoint. Both produce the same upper bounds.
"""

import itertools

from anytime_moco.geometry import Box, ScalingBounds, full_p_split, p_partition, reduced_scaled, scaled

B = Box((0, 0, 0), (20, 15, 10))
z = (5, 5, 5)
sb = ScalingBounds(B.l, B.u)

# full p-split: three overlapping boxes below the new upper bounds
for u in full_p_split(B.u, z):
    print("full split  ", B.l, "->", u)

# p-partition: disjoint children, each tagged with its direction
children = p_partition(B, z)
for i, child in children:
    print(f"partition {i} ", child.l, "->", child.u, f"priority {reduced_scaled(B, i, z, sb):.4f}")

# every lattice point of B is in exactly one child or in the corner >= z
cells = itertools.product(*(range(a, b) for a, b in zip(B.l, B.u)))
counts = [sum(c.contains(x) for _, c in children) for x in cells]
print("points covered once:", counts.count(1), "dropped (dominated by z):", counts.count(0))

# the children's volumes add up to the box minus the dominated corner
total = sum(scaled(c, sb) for _, c in children)
print(f"scaled volume kept {total:.4f} = 1 - {scaled(((5, 5, 5), B.u), sb):.4f}")
