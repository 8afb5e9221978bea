"""
Ratings on a 1-5 scale through a symmetric channel
===================================================

A five-symbol rating alphabet: a rating survives the channel with
probability 0.8 and otherwise turns into one of the other four values;
half the ratings are missing.  Cluster rows and columns, decode each
block by maximum likelihood, and compare with the Chernoff threshold.
"""

import numpy as np

from cfchannel import channel_stats, chernoff_c1, default_threshold, dmc_spec
from cfchannel.harness import ExperimentConfig, run_monte_carlo

k = 5
q = np.full((k, k), 0.05) + 0.75 * np.eye(k)
spec = dmc_spec(q, epsilon=0.5)

m = n = 600
c = chernoff_c1(spec, m, n)
print(f"C1 = {c.c1:.4f}, p1 = {c.p1:.4f}, threshold area = {c.threshold_p1:.1f}")

# the default threshold sits two thirds of the way from d_lb to d_ub; with
# five symbols the cross-cluster distances spread well below d_ub, so use
# the midpoint instead
stats = channel_stats(spec)
d0 = (stats.d_lb + stats.d_ub) / 2
print(f"d_lb = {stats.d_lb:.3f}, d_ub = {stats.d_ub:.3f}, "
      f"default d0 = {default_threshold(stats):.3f}, used d0 = {d0:.3f}")

# small clusters: clustering is perfect but blocks carry too few samples;
# large clusters: enough samples, but fewer column clusters to tell rows apart
for size in (2, 4, 6, 8, 12):
    cfg = ExperimentConfig.uniform(m, n, size, size, spec, d0=d0, trials=20, master_seed=3)
    agg = run_monte_carlo(cfg)
    print(f"clusters {size:2d}x{size:<2d} (area {size * size:3d}): "
          f"block error {agg.empirical_pe:.2f}, clustering error {agg.empirical_prc:.2f}")
