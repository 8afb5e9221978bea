"""
Monte Carlo block-error rate against the exact formula
=======================================================

With the clusters known, the majority decoder's block-error probability
has a closed form.  Simulate it and compare.
"""

import math

from cfchannel import bsc_spec, exact_fill_error
from cfchannel.harness import ExperimentConfig, run_monte_carlo

for p, eps in [(0.1, 0.3), (0.25, 0.3), (0.25, 0.6)]:
    cfg = ExperimentConfig.uniform(60, 60, 6, 6, bsc_spec(p, eps), known_clustering=True,
                                   trials=5000, master_seed=1)
    agg = run_monte_carlo(cfg)
    exact = exact_fill_error(cfg.row_sizes, cfg.col_sizes, p, eps)
    sigma = math.sqrt(exact * (1 - exact) / cfg.trials)
    print(f"p={p:<5} eps={eps:<4} simulated={agg.empirical_pe:.4f} "
          f"exact={exact:.4f}  ({(agg.empirical_pe - exact) / max(sigma, 1e-300):+.2f} sigma)")

# now let the estimator find the clusters itself.  With only 16 column
# clusters, rows from different clusters that agree on most column blocks
# fall under the distance threshold and get merged, so clustering - not
# decoding - dominates the error at this size
cfg = ExperimentConfig.uniform(256, 256, 16, 16, bsc_spec(0.1, 0.3), trials=50,
                               master_seed=2)
agg = run_monte_carlo(cfg)
print(f"estimated clustering: block error {agg.empirical_pe:.2f}, "
      f"clustering error {agg.empirical_prc:.2f}")
