"""The adversarial pinched-region instance, and why learning it is hard.

The middle action is strictly best for the principal by a margin of at least
one, but the set of bounded proper rules inducing it is a single point (at
the boundary parameter) or a sliver (when widened).  A baseline that deploys
random proper rules therefore pays a constant per-round price: its regret
grows linearly, which is exactly the behavior the online learner's oracle
assumption exists to escape.
"""

import numpy as np

from infoacq import ExperimentConfig, gen_hard_instance, solve_lp_k, solve_stackelberg
from infoacq.harness import hard_instance_score_vector, max_margin_rule, play_episode

instance = gen_hard_instance(-0.5)
print("pinched instance at the boundary parameter:")
print("  costs:", np.round(instance.info.costs, 5))
print("  utility at support beliefs:", instance.u_sigma())

pinch = hard_instance_score_vector(-0.5)
sol = solve_lp_k(instance, 1)
print(f"  middle action's region is the single point {pinch}")
print("  solver found expected payments:", np.round(sol.s_star.truthful_scores(), 6))

best_k, best = solve_stackelberg(instance)
others = [solve_lp_k(instance, k).h_star for k in (0, 2)]
print(f"  optimum: action {best_k} at {best.h_star:.3f}; "
      f"alternatives reach {max(others):.3f} (margin {best.h_star - max(others):.3f})")

print("\nmax inducement margin per action (zero means a knife edge):")
print(" ", [round(max_margin_rule(instance, k)[0], 5) for k in range(3)])
widened = gen_hard_instance(-0.5, v2_width=0.25)
print("after widening the sliver (v2_width=0.25):")
print(" ", [round(max_margin_rule(widened, k)[0], 5) for k in range(3)])

print("\nbaseline demo: random proper rules almost never hit the sliver")
horizon = 3000
config = ExperimentConfig(t=horizon, seeds=(0,), policy="random-proper", oracle_mode="none")
env, _ = play_episode(instance, config, 0, best.h_star)
regret = env.rows[-1][5]
print(f"  after {horizon} rounds: cumulative regret {regret:.0f} "
      f"({regret / horizon:.2f} per round, linear growth)")
