"""
Fill-error and clustering bounds against cluster size
======================================================

Tabulate the analytic curves over square clusters n0 x n0 and write a
CSV table plus an SVG chart (no plotting library needed).
"""

import sys
from pathlib import Path

from cfchannel.harness import emit_outputs, figure1_curves

out = Path(sys.argv[1] if len(sys.argv) > 1 else "figure1")

# r1, r2 picked by a coarse grid search per n0
table = figure1_curves(m=10**6, n=10**6, p=0.25, epsilon=0.9,
                       n0_range=range(10, 151), optimize_r=True)

for row in table[::10]:
    print(f"n0={row['n0']:3d}  fill_lb={row['fill_lb']:.2e}  "
          f"fill_ub={row['fill_ub'] if row['fill_ub'] is None else format(row['fill_ub'], '.2e')}  "
          f"clust={row['clust_union']:.2e}")

for path in emit_outputs(table, ["csv", "svg"], out):
    print("wrote", path)
