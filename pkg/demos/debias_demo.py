"""Walkthrough: bias amplification and debiasing on a synthetic graph.

Generates a biased two-block graph, trains a vanilla hyperdimensional
classifier and a fairness-aware one, and prints the utility/fairness
trade-off side by side.

Run:  python3 demos/debias_demo.py
"""

import numpy as np

from fairhd.data import SyntheticSpec, generate_synthetic
from fairhd.evaluation import run_single
from fairhd.training import TrainConfig

SEED = 0

spec = SyntheticSpec(nodes_per_block=1000, bias=0.4, seed=SEED)
dataset = generate_synthetic(spec)

label_rates = [float(np.mean(dataset.labels[dataset.sensitive == g])) for g in (0, 1)]
print(f"synthetic graph: {dataset.num_nodes} nodes, "
      f"label rate by group = {label_rates[0]:.3f} / {label_rates[1]:.3f} "
      f"(data bias {label_rates[0] - label_rates[1]:.3f})")
print()

rows = []
for name, alpha in (("vanilla", 0.0), ("fair", 0.5)):
    cfg = TrainConfig(alpha=alpha, beta=1e-3, eta=0.2, epochs=60, seed=SEED,
                      fairness_gap_form="binary")
    result, model, traces = run_single(dataset, cfg)
    r = result.report
    rows.append((name, alpha, r))
    mean_factor = float(np.mean([t.factor for t in traces]))
    print(f"{name:>8s} (alpha={alpha}): acc {r.acc:.3f}  f1 {r.f1:.3f}  "
          f"dp_gap {r.dp_gap_pp:.1f}pp  prule {r.prule:.1f}  "
          f"mean batch factor {mean_factor:.3f}")

van, fair = rows[0][2], rows[1][2]
drop = (van.dp_gap - fair.dp_gap) / van.dp_gap * 100
print()
print(f"demographic parity gap drops {drop:.1f}% "
      f"for {100 * (van.acc - fair.acc):.1f}pp of accuracy")
