import numpy as np

from infoacq.core import (
    BeliefSupport,
    InformationStructure,
    Instance,
    ScoringRule,
    StateSpace,
    UtilityModel,
)


def make_instance(costs, support_rows, dists, u_table, b_s=1.0, b_u=None):
    support = BeliefSupport(np.array(support_rows, dtype=float))
    info = InformationStructure(
        costs=np.array(costs, dtype=float), support=support, dists=np.array(dists, dtype=float)
    )
    u = np.array(u_table, dtype=float)
    return Instance(
        states=StateSpace(support.n_states),
        info=info,
        utility=UtilityModel(u),
        b_s=b_s,
        b_u=b_u if b_u is not None else float(np.abs(u).max()) + 1.0,
    )


def quadratic_rule_binary(points, shift=1.0):
    """Supporting-line table for G(p) = p^2 on binary states, shifted >= 0."""
    rows = []
    for p in points:
        rows.append([p * p + 2 * p * (1 - p) + shift, -p * p + shift])
    support = BeliefSupport(np.array([[p, 1 - p] for p in points]))
    return ScoringRule(support=support, table=np.array(rows))


def make_decay_instance(seed=0):
    """Three-action instance with strictly decaying marginal information gain.

    Returns the instance plus the analytic quantities the linear-contract
    search is judged against: ratio decay floor, ratio cap, per-boundary
    switch thresholds and per-action expected utilities.
    """
    rng = np.random.default_rng(seed)
    support = np.array([[0.1, 0.9], [0.5, 0.5], [0.9, 0.1]])
    u_vec = np.array([0.2, 0.0])
    u_sigma = support @ u_vec
    base_q = np.array([[0.8, 0.15, 0.05], [0.3, 0.4, 0.3], [0.05, 0.15, 0.8]])
    for _ in range(200):
        q = base_q + rng.uniform(-0.03, 0.03, size=base_q.shape)
        q = np.clip(q, 0.01, None)
        q /= q.sum(axis=1, keepdims=True)
        u_k = q @ u_sigma
        if not (u_k[0] > 0 and u_k[1] - u_k[0] > 0.02 and u_k[2] - u_k[1] > 0.02):
            continue
        c2 = (u_k[1] - u_k[0]) / rng.uniform(1.8, 2.2)  # ratio r2 about 2
        c3 = c2 + (u_k[2] - u_k[1]) / rng.uniform(0.85, 0.95)  # ratio r3 under 1
        costs = np.array([0.0, c2, c3])
        r2 = (u_k[1] - u_k[0]) / (costs[1] - costs[0])
        r3 = (u_k[2] - u_k[1]) / (costs[2] - costs[1])
        epsilon_gap, cap = 0.5, 2.5
        if not (r3 > epsilon_gap and r2 - r3 > epsilon_gap and r2 <= cap):
            continue
        inst = make_instance(
            costs=costs,
            support_rows=support,
            dists=q,
            u_table=[list(u_vec)],
            b_s=1.0,
            b_u=1.0,
        )
        info = {
            "epsilon_gap": epsilon_gap,
            "b": cap,
            "u_k": u_k,
            "thresholds": np.array([1.0 / r2, 1.0 / r3]),
        }
        return inst, info
    raise RuntimeError("could not jitter a decay instance")
