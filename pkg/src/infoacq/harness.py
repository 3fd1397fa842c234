"""Experiment harness: instance generation, episodes, regret traces, summaries.

The environment wrapper is the only thing that touches the simulated agent;
learners and oracle-acquisition procedures interact with it exclusively
through ``deploy(rule) -> PublicOutcome``, which enforces the information
boundary by construction.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import lp, oracle as oracle_mod
from .agent import AgentView, PublicOutcome
from .core import (
    BeliefSupport,
    InformationStructure,
    Instance,
    InvalidInputError,
    ScoringRule,
    StateSpace,
    UtilityModel,
    instance_from_json,
    instance_to_dict,
    instance_to_json,
    properize,
)
from .learner import LearnerConfig, OracleSet, ScoringRuleLearner
from .offline import payment_weights, properness_matrix, solve_stackelberg

MODE_NORMAL = 0
MODE_SEARCH = 1
MODE_ACQ = 2  # acquisition rounds and baseline policies

TRACE_COLUMNS = ("t", "k_star", "k_t", "alpha", "profit", "cum_regret", "mode", "essential")
TRACE_VERSION = 1


# ---------------------------------------------------------------------------
# instance generators


def gen_random_instance(
    k: int,
    m: int,
    n_states: int,
    b_s: float,
    b_u: float,
    seed: int,
    n_principal_actions: int | None = None,
    min_separation: float = 0.05,
) -> Instance:
    """Random instance: sorted costs in [0, b_s/2], separated simplex support."""
    if min(k, m, n_states) < 1:
        raise InvalidInputError("dimensions must be at least 1")
    rng = np.random.default_rng(seed)
    costs = np.sort(rng.uniform(0.0, b_s / 2.0, size=k))
    beliefs: list[np.ndarray] = []
    attempts = 0
    while len(beliefs) < m:
        cand = rng.dirichlet(np.ones(n_states))
        if all(np.max(np.abs(cand - b)) >= min_separation for b in beliefs) or n_states == 1:
            beliefs.append(cand)
        attempts += 1
        if attempts > 2000 * m:
            raise InvalidInputError(
                f"cannot place {m} beliefs at separation {min_separation} in {n_states} states"
            )
    support = BeliefSupport(np.array(beliefs))
    dists = rng.dirichlet(np.ones(m), size=k) if m > 1 else np.ones((k, 1))
    n_pa = n_principal_actions or n_states
    u_table = rng.uniform(-b_u, b_u, size=(n_pa, n_states))
    info = InformationStructure(costs=costs, support=support, dists=dists)
    return Instance(
        states=StateSpace(n_states),
        info=info,
        utility=UtilityModel(u_table),
        b_s=b_s,
        b_u=b_u,
        n_observations=m,
    )


def gen_hard_instance(e1: float, v2_width: float = 0.0) -> Instance:
    """Adversarial two-state instance whose middle action's region is pinched.

    The region inducing the middle action is nonempty within non-negative
    bounded payment tables only at the boundary parameter e1 = -1/2, where it
    is the single point with expected scores (1, 1/2, 0); the first action's
    region is a knife edge as well.  ``v2_width`` relaxes the middle action's
    cost by beta * v2_width and the first action's by a fifth of that, which
    balances the two pinched regions' best achievable profit margins at
    beta * v2_width / 5 each; any margin oracle needs this widening.
    """
    if not -0.5 <= e1 <= 0.0:
        raise InvalidInputError("e1 must lie in [-0.5, 0]")
    if v2_width < 0 or v2_width > 1.0 - e1:
        raise InvalidInputError("v2_width out of range")
    beta = 1.0 / 16.0
    support = BeliefSupport(np.array([[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]]))
    dists = np.array(
        [
            [3 / 4, 3 / 16, 1 / 16],
            [3 / 4, 1 / 8, 1 / 8],
            [11 / 16, 1 / 16, 1 / 4],
        ]
    )
    c3 = 0.0
    c2 = beta * (1.0 - e1 - v2_width)
    c1 = c2 - beta * e1 - beta * v2_width / 5.0
    targets = np.array([96.0, 0.0, 32.0]) + np.array([1.0, -e1, 0.0])
    # realize u(sigma) exactly with one principal action per support point:
    # action i is the line through (x_i, targets[i]) in x = mass on state 0,
    # with slopes steep enough that action i is optimal exactly at sigma_i
    xs = (0.0, 0.5, 1.0)
    slopes = (-200.0, 0.0, 200.0)
    u_table = np.zeros((3, 2))
    for a, (x0, s, tgt) in enumerate(zip(xs, slopes, targets)):
        u_table[a, 0] = tgt + (1.0 - x0) * s  # value at x = 1
        u_table[a, 1] = tgt - x0 * s  # value at x = 0
    info = InformationStructure(costs=np.array([c1, c2, c3]), support=support, dists=dists)
    return Instance(
        states=StateSpace(2),
        info=info,
        utility=UtilityModel(u_table),
        b_s=1.0,
        b_u=200.0,
        n_observations=3,
    )


def hard_instance_score_vector(e1: float) -> np.ndarray:
    """Expected-score coordinates of the pinch point, (1, -e1, 0)."""
    return np.array([1.0, -e1, 0.0])


def instance_hash(instance: Instance) -> str:
    text = json.dumps(instance_to_dict(instance), sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# ground-truth oracle construction (experimenter-side tooling)


def max_margin_rule(instance: Instance, k: int) -> tuple[float, ScoringRule]:
    """Proper rule maximizing the agent's profit margin for action k."""
    info = instance.info
    support = info.support
    m, n = support.m, support.n_states
    n_vars = m * n + 1  # table entries then the margin
    prop = properness_matrix(support)
    rows = [np.hstack([prop, np.zeros((prop.shape[0], 1))])]
    rels = [lp.GREATER] * prop.shape[0]
    rhs = [0.0] * prop.shape[0]
    for j in range(info.n_actions):
        if j == k:
            continue
        row = np.concatenate(
            [payment_weights(info.dists[k] - info.dists[j], support), [-1.0]]
        )
        rows.append(row[None, :])
        rels.append(lp.GREATER)
        rhs.append(float(info.costs[k] - info.costs[j]))
    objective = np.zeros(n_vars)
    objective[-1] = 1.0
    lower = np.zeros(n_vars)
    upper = np.full(n_vars, instance.b_s)
    span = float(instance.b_s + np.max(info.costs) + 1.0)
    lower[-1], upper[-1] = -span, span
    out = lp.solve(
        lp.LinearProgram(
            objective=objective,
            a=np.vstack(rows),
            relations=tuple(rels),
            rhs=np.array(rhs),
            lower=lower,
            upper=upper,
        )
    )
    if out.status != lp.OPTIMAL:
        raise InvalidInputError(f"margin program for action {k} is {out.status}")
    table = np.clip(out.x[:-1].reshape(m, n), 0.0, None)
    return float(out.value), ScoringRule(support=support, table=table)


def cheapest_margin_rule(instance: Instance, k: int, margin: float) -> ScoringRule:
    """Cheapest proper rule for action k with at least ``margin`` profit gap."""
    info = instance.info
    support = info.support
    m, n = support.m, support.n_states
    prop = properness_matrix(support)
    rows = [prop]
    rels = [lp.GREATER] * prop.shape[0]
    rhs = [0.0] * prop.shape[0]
    for j in range(info.n_actions):
        if j == k:
            continue
        rows.append(payment_weights(info.dists[k] - info.dists[j], support)[None, :])
        rels.append(lp.GREATER)
        rhs.append(float(info.costs[k] - info.costs[j]) + margin)
    out = lp.solve(
        lp.LinearProgram(
            objective=-payment_weights(info.dists[k], support),
            a=np.vstack(rows),
            relations=tuple(rels),
            rhs=np.array(rhs),
            lower=np.zeros(m * n),
            upper=np.full(m * n, instance.b_s),
        )
    )
    if out.status != lp.OPTIMAL:
        raise InvalidInputError(f"margin program for action {k} is {out.status}")
    return ScoringRule(support=support, table=np.clip(out.x.reshape(m, n), 0.0, None))


def ground_truth_oracle(instance: Instance, margin_frac: float = 0.5) -> OracleSet:
    """Oracle built from the true instance: cheap rules at half the max margin.

    Raises if some action admits no positive margin (no valid oracle exists).
    """
    margins = []
    for k in range(instance.n_actions):
        m_star, _ = max_margin_rule(instance, k)
        if m_star <= 0:
            raise InvalidInputError(f"action {k} admits no margin oracle (max {m_star})")
        margins.append(m_star)
    eps = margin_frac * min(margins)
    rules = [cheapest_margin_rule(instance, k, margin_frac * margins[k]) for k in range(instance.n_actions)]
    return OracleSet(rules=tuple(rules), epsilon=eps * (1.0 - 1e-9))


def oracle_to_json(oracle: OracleSet) -> str:
    doc = {
        "epsilon": float(oracle.epsilon),
        "rules": [
            {
                "support": [[float(x) for x in row] for row in r.support.beliefs],
                "table": [[float(x) for x in row] for row in r.table],
            }
            for r in oracle.rules
        ],
    }
    return json.dumps(doc, indent=2)


def oracle_from_json(text: str) -> OracleSet:
    doc = json.loads(text)
    rules = tuple(
        ScoringRule(
            support=BeliefSupport(np.array(r["support"], dtype=float)),
            table=np.array(r["table"], dtype=float),
        )
        for r in doc["rules"]
    )
    return OracleSet(rules=rules, epsilon=float(doc["epsilon"]))


# ---------------------------------------------------------------------------
# environment


class Environment:
    """Plays rounds against one agent and accumulates the regret trace."""

    def __init__(self, instance: Instance, seed, h_star: float):
        self.instance = instance
        self.h_star = h_star
        self.agent = AgentView(instance, seed)
        self.n_states = instance.states.n_states
        self.rows: list[list] = []
        self.t = 0
        self.cum_profit = 0.0
        self._u = instance.utility

    def deploy(self, rule, k_star: int = -1, alpha: float = 0.0, mode: int = MODE_ACQ) -> PublicOutcome:
        outcome = self.agent.play_round(rule).visible()
        utility = float(self._u.u_table[self._u.best_action(outcome.report), outcome.omega])
        profit = utility - outcome.payment
        self.t += 1
        self.cum_profit += profit
        regret = self.t * self.h_star - self.cum_profit
        self.rows.append(
            [self.t, k_star, outcome.action, alpha, profit, regret, mode, 0]
        )
        return outcome


def compute_regret(profits: np.ndarray, h_star: float) -> np.ndarray:
    """Reg(t) = t * h_star - sum of realized profits up to t."""
    profits = np.asarray(profits, dtype=float)
    t = np.arange(1, profits.shape[0] + 1)
    return t * h_star - np.cumsum(profits)


def fit_loglog_slope(t: np.ndarray, reg: np.ndarray, t_min: float) -> float:
    """Least-squares slope of log Reg against log t over t >= t_min.

    Only rounds with positive regret enter the fit; needs 20 of them.
    """
    t = np.asarray(t, dtype=float)
    reg = np.asarray(reg, dtype=float)
    mask = (t >= t_min) & (reg > 0)
    if int(mask.sum()) < 20:
        raise InvalidInputError("need at least 20 positive-regret points to fit")
    x = np.log(t[mask])
    y = np.log(reg[mask])
    x = x - x.mean()
    return float((x @ (y - y.mean())) / (x @ x))


# ---------------------------------------------------------------------------
# experiment configuration and execution


@dataclass
class ExperimentConfig:
    """Everything run_experiment needs besides the instance itself."""

    t: int
    seeds: tuple[int, ...]
    oracle_mode: str = "given-file"  # given-file | random-sampling | linear-contract | none
    policy: str = "ucb"  # ucb | random-proper
    oracle_file: str | None = None
    m_bound: int | None = None
    alpha_scale: float | None = None
    alpha_exponent: float = 1.0 / 3.0
    compact_history: bool = False
    known_support: bool = False
    out_dir: str | None = None
    granularity: str = "per-round"  # per-round | summary
    n_jobs: int = 1
    instance_path: str | None = None
    # random-sampling acquisition
    beta: float = 0.05
    d2_floor: float = 0.05
    acquisition_budget: int = 20_000
    discovery_window: int = 50
    # linear-contract acquisition
    epsilon_gap: float | None = None
    ratio_bound: float | None = None
    u1_floor: float | None = None

    def __post_init__(self):
        if self.t < 1:
            raise InvalidInputError("horizon must be at least 1")
        if not self.seeds:
            raise InvalidInputError("need at least one seed")
        self.seeds = tuple(int(s) for s in self.seeds)

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "seeds": list(self.seeds),
            "oracle_mode": self.oracle_mode,
            "policy": self.policy,
            "oracle_file": self.oracle_file,
            "m_bound": self.m_bound,
            "alpha_scale": self.alpha_scale,
            "alpha_exponent": self.alpha_exponent,
            "compact_history": self.compact_history,
            "known_support": self.known_support,
            "out_dir": self.out_dir,
            "granularity": self.granularity,
            "n_jobs": self.n_jobs,
            "instance_path": self.instance_path,
            "beta": self.beta,
            "d2_floor": self.d2_floor,
            "acquisition_budget": self.acquisition_budget,
            "discovery_window": self.discovery_window,
            "epsilon_gap": self.epsilon_gap,
            "ratio_bound": self.ratio_bound,
            "u1_floor": self.u1_floor,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {f: doc[f] for f in doc if f in cls.__dataclass_fields__}
        known["seeds"] = tuple(known.get("seeds", ()))
        return cls(**known)


@dataclass
class SeedResult:
    seed: int
    rounds: int
    final_regret: float
    slope: float
    essential_searches: int
    acquisition_rounds: int
    wall_time: float
    rows: list | None = None


def _learner_config(instance: Instance, config: ExperimentConfig) -> LearnerConfig:
    if config.m_bound is not None:
        m_bound = config.m_bound
    elif instance.n_observations is not None:
        m_bound = instance.n_actions * instance.n_observations
    else:
        m_bound = instance.support.m
    return LearnerConfig(
        n_actions=instance.n_actions,
        n_states=instance.states.n_states,
        b_s=instance.b_s,
        b_u=instance.b_u,
        u_table=instance.utility.u_table,
        m_bound=m_bound,
        alpha_scale=config.alpha_scale,
        alpha_exponent=config.alpha_exponent,
        known_support=instance.support.beliefs if config.known_support else None,
        compact_history=config.compact_history,
    )


def _acquire_oracle(env: Environment, instance: Instance, config: ExperimentConfig, seed: int):
    if config.oracle_mode == "given-file":
        if config.oracle_file is None:
            raise InvalidInputError("given-file oracle mode needs oracle_file")
        oracle = oracle_from_json(Path(config.oracle_file).read_text())
        return oracle, 0
    if config.oracle_mode == "random-sampling":
        params = oracle_mod.StronglyProperParams(beta=config.beta, b_s=instance.b_s)
        oracle, report = oracle_mod.random_sampling_oracle(
            env,
            params,
            instance.n_actions,
            np.random.default_rng(seed + 777_000),
            budget=min(config.acquisition_budget, config.t),
            d2_floor=config.d2_floor,
            discovery_window=config.discovery_window,
        )
        return oracle, report.rounds
    if config.oracle_mode == "linear-contract":
        if config.epsilon_gap is None or config.ratio_bound is None or config.u1_floor is None:
            raise InvalidInputError("linear-contract mode needs epsilon_gap, ratio_bound, u1_floor")
        params = oracle_mod.LinearContractParams(
            epsilon_gap=config.epsilon_gap,
            b=config.ratio_bound,
            u_table=instance.utility.u_table,
            b_s=instance.b_s,
            u1_floor=config.u1_floor,
        )
        oracle, report = oracle_mod.linear_contract_oracle(env, params, instance.n_actions)
        return oracle, report.rounds
    raise InvalidInputError(f"oracle mode {config.oracle_mode!r} provides no oracle")


def play_episode(
    instance: Instance,
    config: ExperimentConfig,
    seed: int,
    h_star: float,
    on_round=None,
):
    """One seeded episode of exactly config.t rounds; returns (env, learner)."""
    env = Environment(instance, seed, h_star)
    if config.policy == "random-proper":
        rng = np.random.default_rng(seed + 555_000)
        m, n = instance.support.m, instance.states.n_states
        while env.t < config.t:
            raw = ScoringRule(
                support=instance.support,
                table=rng.uniform(0.0, instance.b_s, size=(m, n)),
            )
            env.deploy(properize(raw), mode=MODE_ACQ)
        return env, None
    if config.policy != "ucb":
        raise InvalidInputError(f"unknown policy {config.policy!r}")

    oracle, acq_rounds = _acquire_oracle(env, instance, config, seed)
    learner = ScoringRuleLearner(_learner_config(instance, config), oracle)
    while env.t < config.t:
        plan = learner.plan_round()
        mode = MODE_SEARCH if plan.mode == "bs" else MODE_NORMAL
        outcome = env.deploy(plan.s_deployed, k_star=plan.k_star, alpha=plan.alpha, mode=mode)
        learner.observe(plan, outcome)
        if on_round is not None:
            on_round(learner, plan, outcome)
    for record in learner.completed_searches:
        row = record.t1 + acq_rounds
        if 1 <= row <= len(env.rows):
            env.rows[row - 1][7] = 1 if record.essential else 0
    env.acquisition_rounds = acq_rounds
    return env, learner


def _run_seed(instance: Instance, config: ExperimentConfig, seed: int, h_star: float) -> SeedResult:
    start = time.perf_counter()
    env, learner = play_episode(instance, config, seed, h_star)
    rows = env.rows
    reg = np.array([r[5] for r in rows])
    t = np.array([r[0] for r in rows])
    try:
        slope = fit_loglog_slope(t, reg, t_min=config.t / 10)
    except InvalidInputError:
        slope = float("nan")
    essential = (
        sum(1 for r in learner.completed_searches if r.essential) if learner is not None else 0
    )
    return SeedResult(
        seed=seed,
        rounds=len(rows),
        final_regret=float(reg[-1]),
        slope=slope,
        essential_searches=essential,
        acquisition_rounds=getattr(env, "acquisition_rounds", 0),
        wall_time=time.perf_counter() - start,
        rows=rows,
    )


def _trace_header(instance: Instance, config: ExperimentConfig, seed: int, h_star: float) -> str:
    meta = {
        "schema": TRACE_VERSION,
        "seed": seed,
        "instance": instance_hash(instance),
        "h_star": h_star,
        "config": config.to_dict(),
    }
    return "# infoacq-trace " + json.dumps(meta, sort_keys=True)


def write_trace(path: Path, instance: Instance, config: ExperimentConfig, seed: int, h_star: float, rows) -> None:
    lines = [_trace_header(instance, config, seed, h_star), ",".join(TRACE_COLUMNS)]
    for r in rows:
        lines.append(
            f"{r[0]},{r[1]},{r[2]},{r[3]:.12g},{r[4]:.12g},{r[5]:.12g},{r[6]},{r[7]}"
        )
    path.write_text("\n".join(lines) + "\n")


def read_trace(path: Path) -> tuple[dict, np.ndarray]:
    lines = Path(path).read_text().splitlines()
    meta = json.loads(lines[0].removeprefix("# infoacq-trace "))
    data = np.array([[float(x) for x in line.split(",")] for line in lines[2:]])
    return meta, data


def run_experiment(config: ExperimentConfig, instance: Instance | None = None) -> list[SeedResult]:
    """Run all seeds, write traces and a summary CSV, return per-seed results."""
    if instance is None:
        if config.instance_path is None:
            raise InvalidInputError("no instance given")
        instance = instance_from_json(Path(config.instance_path).read_text())
    _, best = solve_stackelberg(instance)
    h_star = best.h_star

    if config.n_jobs > 1 and len(config.seeds) > 1:
        with ProcessPoolExecutor(max_workers=config.n_jobs) as pool:
            results = list(
                pool.map(_run_seed, *zip(*[(instance, config, s, h_star) for s in config.seeds]))
            )
    else:
        results = [_run_seed(instance, config, s, h_star) for s in config.seeds]

    if config.out_dir is not None:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        summary_lines = [
            "seed,rounds,final_regret,slope,essential_searches,acquisition_rounds,wall_time"
        ]
        for res in results:
            if config.granularity == "per-round":
                write_trace(
                    out / f"trace_seed{res.seed}.csv", instance, config, res.seed, h_star, res.rows
                )
            summary_lines.append(
                f"{res.seed},{res.rounds},{res.final_regret:.12g},{res.slope:.12g},"
                f"{res.essential_searches},{res.acquisition_rounds},{res.wall_time:.3f}"
            )
        (out / "summary.csv").write_text("\n".join(summary_lines) + "\n")
        (out / "instance.json").write_text(instance_to_json(instance))
    return results
