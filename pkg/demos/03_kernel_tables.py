"""The two subdivision kernel tables and why the modified one exists.

Around a corner shared by K patches, the boundary control points (blues)
must stay at the midpoints of their flanking interior points (yellows) for
the patchwork to remain tangent continuous along the edges leaving the
corner. The standard midpoint split breaks that for every K except 4; the
modified table moves each yellow straight toward the corner instead, which
keeps the midpoint structure at any valence.
"""

import numpy as np

from patchsmith.analysis import ring_defects, subdivide_fan, synthetic_ring_fan
from patchsmith.kernels import kernel_diff, modified_kernels, standard_kernels

std = standard_kernels()
mod = modified_kernels()

print("masks that differ between the tables:")
for delta in kernel_diff(std, mod):
    print(f"  child point ({delta.m},{delta.n}): max weight change {delta.max_abs_delta:.4f}")

print("\nthe replaced interior kernel (child point (1,1)):")
print("  standard:")
print(np.array2string(std.mask(1, 1), precision=4, suppress_small=True, prefix="  "))
print("  modified (half corner, half diagonal):")
print(np.array2string(mod.mask(1, 1), precision=4, suppress_small=True, prefix="  "))

print("\nblue-vs-yellow-midpoint defect of a regular ring, by valence and depth:")
print(f"{'K':>4} {'standard d=1':>14} {'modified d=1':>14} {'modified d=5':>14}")
for K in (3, 4, 5, 8, 10):
    fan = synthetic_ring_fan(K)
    s1 = ring_defects(subdivide_fan(fan, std, 1)).unbroken_defect
    m1 = ring_defects(subdivide_fan(fan, mod, 1)).unbroken_defect
    m5 = ring_defects(subdivide_fan(fan, mod, 5)).unbroken_defect
    print(f"{K:>4} {s1:>14.3e} {m1:>14.3e} {m5:>14.3e}")
print("\n(the standard table is exact only at K=4; the modified table is exact at all K)")
