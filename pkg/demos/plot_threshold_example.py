"""
Cluster-size threshold for a noisy, mostly-erased rating matrix
================================================================

A million users by a million items, 90% of ratings missing, and every
observed rating flipped with probability 1/4.  How large must the
user/item clusters be before the matrix can be filled in?
"""

import math

from cfchannel import binary_report, chernoff_c1, bsc_spec

# p1 folds erasure and noise into one number; the threshold area is
# ln(mn) / ln(1/p1)
rep = binary_report(p=0.25, epsilon=0.9, m=10**6, n=10**6)
print(f"p1             = {rep.p1:.6f}")
print(f"threshold area = {rep.threshold_area:.1f}  (side {rep.threshold_side:.2f})")

# the same number from the general-alphabet Chernoff constant
c = chernoff_c1(bsc_spec(0.25, 0.9), 10**6, 10**6)
print(f"C1 = {c.c1:.6f}, p1 via C1 = {c.p1:.6f}")

# fill-error bounds on either side of the threshold: the upper bound
# collapses once the area clears it
for n0 in (40, 45, 46, 50, 60):
    r = binary_report(0.25, 0.9, 10**6, 10**6, s_low=n0 * n0, s_star=n0 * n0)
    print(f"n0={n0:3d} area={n0 * n0:5d}  lower={r.fill_lower:.3e}  upper={r.fill_upper:.3e}")

# sensitivity: the threshold scales like log(mn)
for exp in (6, 8, 10, 12):
    mn = 10**exp
    print(f"mn=1e{exp:<2d} threshold side = "
          f"{math.sqrt(binary_report(0.25, 0.9, mn, 1).threshold_area):.1f}")
