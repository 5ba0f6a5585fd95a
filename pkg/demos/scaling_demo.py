"""Walkthrough: training time scales linearly in the number of nodes.

Times the train phase on synthetic graphs of growing size and fits a
line through the origin; per-point relative residuals should be small.

Run:  python3 demos/scaling_demo.py
"""

from fairhd.evaluation import timing_benchmark
from fairhd.training import TrainConfig

rows = timing_benchmark([1000, 2000, 4000], TrainConfig(seed=0))

print(f"{'nodes':>7s} {'encode_s':>9s} {'train_s':>9s} {'fit_s':>9s} {'resid':>7s}")
for r in rows:
    print(f"{r['nodes']:>7d} {r['encode']:>9.3f} {r['train']:>9.3f} "
          f"{r['train_fit']:>9.3f} {r['train_residual_rel']:>7.1%}")
