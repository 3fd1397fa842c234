"""Exact solvers for the known-parameter game.

Per-action optimal scoring rules via a constrained LP over table entries, the
Stackelberg optimum by maximizing over actions, an independent grid
brute-force oracle for cross-checks, and per-round suboptimality.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import lp
from .agent import TIE_TOL
from .core import BeliefSupport, Instance, InvalidInputError, ScoringRule

GRID_CELL_CAP = 400_000  # rows per brute-force batch


@dataclass(frozen=True)
class ActionSolution:
    """Optimal principal profit and rule when the agent's response is pinned to k."""

    k: int
    h_star: float
    s_star: ScoringRule | None
    feasible: bool


def properness_matrix(support: BeliefSupport) -> np.ndarray:
    """Rows of the pairwise properness constraints over flattened table entries.

    Row for (i, j) encodes  sigma_i . t_i - sigma_i . t_j >= 0.
    """
    m, n = support.m, support.n_states
    rows = np.zeros((m * (m - 1), m * n))
    r = 0
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            rows[r, i * n:(i + 1) * n] = support.beliefs[i]
            rows[r, j * n:(j + 1) * n] -= support.beliefs[i]
            r += 1
    return rows


def payment_weights(dist: np.ndarray, support: BeliefSupport) -> np.ndarray:
    """Flattened coefficients of the expected truthful payment under ``dist``."""
    return (dist[:, None] * support.beliefs).ravel()


def solve_lp_k(instance: Instance, k: int) -> ActionSolution:
    """Best proper rule (and profit) subject to action k being a best response."""
    info = instance.info
    if not 0 <= k < info.n_actions:
        raise InvalidInputError(f"action {k} out of range")
    support = info.support
    m, n = support.m, support.n_states
    n_vars = m * n

    w_k = payment_weights(info.dists[k], support)
    rows = [properness_matrix(support)]
    rels = [lp.GREATER] * rows[0].shape[0]
    rhs = [0.0] * rows[0].shape[0]
    for kp in range(info.n_actions):
        if kp == k:
            continue
        rows.append((payment_weights(info.dists[k] - info.dists[kp], support))[None, :])
        rels.append(lp.GREATER)
        rhs.append(float(info.costs[k] - info.costs[kp]))
    program = lp.LinearProgram(
        objective=-w_k,
        a=np.vstack(rows),
        relations=tuple(rels),
        rhs=np.array(rhs),
        lower=np.zeros(n_vars),
        upper=np.full(n_vars, instance.b_s),
    )
    outcome = lp.solve(program)
    if outcome.status == lp.INFEASIBLE:
        return ActionSolution(k, float("-inf"), None, False)
    if outcome.status != lp.OPTIMAL:
        raise lp.SolverFailure(f"unexpected LP status {outcome.status}")
    rule = ScoringRule(support=support, table=np.clip(outcome.x.reshape(m, n), 0.0, None))
    h = float(info.dists[k] @ instance.u_sigma()) + outcome.value
    return ActionSolution(k, h, rule, True)


def solve_stackelberg(instance: Instance) -> tuple[int, ActionSolution]:
    """Maximize the per-action optima; ties go to the lowest action."""
    best: ActionSolution | None = None
    for k in range(instance.n_actions):
        sol = solve_lp_k(instance, k)
        if sol.feasible and (best is None or sol.h_star > best.h_star + 0.0):
            best = sol
    if best is None:
        raise RuntimeError(
            "no action is inducible; constant rules always induce the min-cost "
            "action, so this indicates a solver bug"
        )
    return best.k, best


def grid_brute_force(
    instance: Instance, grid_step: float
) -> tuple[int, float, ScoringRule]:
    """Enumerate proper tables on a payment grid and best-respond each one.

    Independent oracle for the LP path; cost grows as (b_s/step)^(M * n_states).
    """
    info = instance.info
    support = info.support
    m, n = support.m, support.n_states
    if m * n > 6:
        raise InvalidInputError("grid brute force limited to M * n_states <= 6")
    levels = np.linspace(0.0, instance.b_s, int(round(instance.b_s / grid_step)) + 1)
    beliefs = support.beliefs
    u_sigma = instance.u_sigma()
    dists = info.dists
    costs = info.costs

    best_h = -np.inf
    best_k = -1
    best_table: np.ndarray | None = None
    iterator = itertools.product(levels, repeat=m * n)
    while True:
        chunk = np.array(list(itertools.islice(iterator, GRID_CELL_CAP)))
        if chunk.size == 0:
            break
        tables = chunk.reshape(-1, m, n)
        cross = np.einsum("iw,njw->nij", beliefs, tables)
        truthful = np.einsum("nii->ni", cross)
        proper = np.all(cross <= truthful[:, :, None] + 1e-9, axis=(1, 2))
        if not np.any(proper):
            continue
        tables = tables[proper]
        truthful = truthful[proper]
        g = truthful @ dists.T - costs
        h = (u_sigma - truthful) @ dists.T
        tied = g >= g.max(axis=1, keepdims=True) - TIE_TOL
        score = np.where(tied, h, -np.inf)
        br = np.argmax(score, axis=1)
        values = score[np.arange(score.shape[0]), br]
        i = int(np.argmax(values))
        if values[i] > best_h:
            best_h = float(values[i])
            best_k = int(br[i])
            best_table = tables[i].copy()
    assert best_table is not None
    return best_k, best_h, ScoringRule(support=support, table=best_table)


def subopt(instance: Instance, k: int, rule: ScoringRule, h_star: float | None = None) -> float:
    """Per-round suboptimality of deploying ``rule`` with the agent playing k."""
    if h_star is None:
        _, sol = solve_stackelberg(instance)
        h_star = sol.h_star
    net = instance.u_sigma() - rule.truthful_scores()
    return float(h_star - instance.info.dists[k] @ net)
