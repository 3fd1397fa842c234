"""Online learning: the UCB learner against a simulated strategic agent.

Runs a short horizon with a ground-truth action-informed oracle, prints the
per-round regret at a few checkpoints, and writes a trace CSV that the
companion analysis package can plot.
"""

from pathlib import Path

import numpy as np

from infoacq import ExperimentConfig, gen_random_instance, ground_truth_oracle, run_experiment
from infoacq.harness import oracle_to_json

out = Path("demo_out")
out.mkdir(exist_ok=True)

instance = gen_random_instance(k=3, m=3, n_states=2, b_s=1.0, b_u=1.0, seed=1202)
oracle = ground_truth_oracle(instance, margin_frac=0.9)
oracle_path = out / "oracle.json"
oracle_path.write_text(oracle_to_json(oracle))
print(f"oracle margin epsilon = {oracle.epsilon:.4f}")

config = ExperimentConfig(
    t=4000,
    seeds=(0, 1, 2),
    oracle_mode="given-file",
    oracle_file=str(oracle_path),
    known_support=True,
    compact_history=True,
    alpha_scale=10.0,
    out_dir=str(out),
    n_jobs=2,
)
results = run_experiment(config, instance)

for res in results:
    print(
        f"seed {res.seed}: final regret {res.final_regret:8.2f}   "
        f"tail slope {res.slope:.3f}   essential searches {res.essential_searches}"
    )
print(f"\ntraces and summary.csv written to {out}/")
print("plot them with the analysis package:")
print(f"  node frontend/dist/cli.js plot-regret {out}/trace_seed*.csv --out {out}/regret.svg")
