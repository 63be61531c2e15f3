"""
Cost against search effort
==========================

Episodes on the intrusion model at several simulation budgets. The CSV is
ready for plotting; here only the per-budget mean and standard error at the
t=5 checkpoint are printed. Pass a larger seed count for smoother means.
"""

import sys

from phsplan.domains import DEFAULT_INTRUSION_JSON, build_intrusion_model, load_config
from phsplan.harness import sweep
from phsplan.planner import PlannerConfig

n_seeds = int(sys.argv[1]) if len(sys.argv) > 1 else 8
doc = load_config(DEFAULT_INTRUSION_JSON)
model = build_intrusion_model(doc["params"])
cfg = PlannerConfig(**doc["planner"])

result = sweep(model, cfg, [16, 64, 256, 1024], list(range(n_seeds)), checkpoint=5)
for row in result.summary():
    print(f"n_sim={row['n_sim']:>5}  mean cost at t=5 = {row['mean_cost']:.3f} +- {row['sem']:.3f}")

with open("sweep.csv", "w", newline="") as fh:
    result.write_csv(fh)
print("rows written to sweep.csv:", len(result.rows))
