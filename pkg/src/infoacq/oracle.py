"""Action-informed oracle construction by interaction.

Two procedures: rejection sampling over strongly proper scoring rules with
row-perturbation probes, and iterated binary search over linear
utility-proportional rules.  Both consume real rounds through an environment
handle exposing only ``deploy(rule) -> PublicOutcome``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DEDUP_TOL, PROPER_TOL, BeliefSupport, InvalidInputError, ScoringRule
from .learner import OracleSet


class ConfigurationError(ValueError):
    pass


class PartialOracleError(RuntimeError):
    """Acquisition ran out of budget before covering every action."""

    def __init__(self, found: dict, missing: list[int], rounds_used: int):
        self.found = found
        self.missing = missing
        self.rounds_used = rounds_used
        super().__init__(f"budget exhausted with actions {missing} still missing")


@dataclass(frozen=True)
class AcquisitionReport:
    rounds: int
    samples: int = 0
    probes: int = 0
    discovery_rounds: int = 0
    support: np.ndarray | None = None
    brackets: dict | None = None  # linear-contract: action -> (lam lo, lam hi)


# ---------------------------------------------------------------------------
# functional rules (defined on the whole belief simplex)


@dataclass(frozen=True)
class QuadraticRule:
    """Strictly proper quadratic rule a * (2 sigma(w) - ||sigma||^2) + shift."""

    n_states: int
    scale: float
    shift: float

    def payments(self, belief: np.ndarray) -> np.ndarray:
        b = np.asarray(belief, float)
        return self.scale * (2.0 * b - float(b @ b)) + self.shift

    def play(self, belief: np.ndarray):
        return np.asarray(belief, float), self.payments(belief)

    def truthful_value(self, belief: np.ndarray) -> float:
        b = np.asarray(belief, float)
        return self.scale * float(b @ b) + self.shift

    def truthful_values(self, beliefs: np.ndarray) -> np.ndarray:
        b = np.asarray(beliefs, float)
        return self.scale * np.einsum("ij,ij->i", b, b) + self.shift


@dataclass(frozen=True)
class LinearUtilityRule:
    """Pays lam * (u(a*(report), w) + shift); proper for lam >= 0."""

    u_table: np.ndarray
    lam: float
    shift: float = 0.0

    def payments(self, belief: np.ndarray) -> np.ndarray:
        u = np.asarray(self.u_table, float)
        best = int(np.argmax(u @ np.asarray(belief, float)))
        return self.lam * (u[best] + self.shift)

    def play(self, belief: np.ndarray):
        return np.asarray(belief, float), self.payments(belief)

    def truthful_value(self, belief: np.ndarray) -> float:
        u = np.asarray(self.u_table, float)
        return self.lam * (float(np.max(u @ np.asarray(belief, float))) + self.shift)

    def truthful_values(self, beliefs: np.ndarray) -> np.ndarray:
        u = np.asarray(self.u_table, float)
        vals = np.max(np.asarray(beliefs, float) @ u.T, axis=1)
        return self.lam * (vals + self.shift)


def discovery_rule(n_states: int, b_s: float) -> QuadraticRule:
    """A strictly proper rule with payments inside [0, b_s]."""
    a = b_s / 3.0
    return QuadraticRule(n_states=n_states, scale=a, shift=a)


def tabulate(rule, support: BeliefSupport) -> ScoringRule:
    """Restrict a functional rule to a payment table over ``support``."""
    table = np.array([rule.play(b)[1] for b in support.beliefs])
    return ScoringRule(support=support, table=table)


# ---------------------------------------------------------------------------
# strongly proper sampling


@dataclass(frozen=True)
class StronglyProperParams:
    """Strong-properness modulus and payment bound for the sampler."""

    beta: float
    b_s: float

    def __post_init__(self):
        if self.beta <= 0:
            raise ConfigurationError("beta must be positive")
        if self.beta > 2.0 * self.b_s:
            raise ConfigurationError("beta too large for the payment bound")


def strong_gap_requirements(support: BeliefSupport, beta: float) -> np.ndarray:
    """(beta/2) * ||sigma_i - sigma_j||_1^2 for every pair."""
    b = support.beliefs
    l1 = np.abs(b[:, None, :] - b[None, :, :]).sum(axis=2)
    return 0.5 * beta * l1**2


def is_strongly_proper(rule: ScoringRule, support: BeliefSupport, beta: float) -> bool:
    cross = support.beliefs @ rule.table.T
    truthful = np.diag(cross)
    req = strong_gap_requirements(support, beta)
    return bool(np.all(truthful[:, None] - cross >= req - PROPER_TOL))


def quadratic_table(support: BeliefSupport, scale: float, shift: float) -> np.ndarray:
    b = support.beliefs
    norms = np.einsum("ij,ij->i", b, b)
    return scale * (2.0 * b - norms[:, None]) + shift


def sample_strongly_proper(
    params: StronglyProperParams,
    support: BeliefSupport,
    rng: np.random.Generator,
    min_entry: float = 0.0,
    max_rejections: int = 10_000,
    batch: int = 512,
) -> ScoringRule:
    """Rejection-sample a strongly proper rule with entries in [min_entry, b_s].

    Falls back to a scaled quadratic-family table (plus a bounded uniform
    perturbation when there is slack) once ``max_rejections`` draws failed.
    """
    m, n = support.m, support.n_states
    req = strong_gap_requirements(support, params.beta)
    beliefs = support.beliefs
    rejected = 0
    while rejected < max_rejections:
        take = min(batch, max_rejections - rejected)
        tables = rng.uniform(min_entry, params.b_s, size=(take, m, n))
        cross = np.einsum("iw,njw->nij", beliefs, tables)
        truthful = np.einsum("nii->ni", cross)
        ok = np.all(truthful[:, :, None] - cross >= req[None] - PROPER_TOL, axis=(1, 2))
        hits = np.nonzero(ok)[0]
        if hits.size:
            return ScoringRule(support=support, table=tables[hits[0]].copy())
        rejected += take

    scale = 0.5 * params.beta * n
    low, high = min_entry + scale, params.b_s - scale * (2.0 - 1.0 / n)
    if low > high + PROPER_TOL:
        raise ConfigurationError(
            f"beta={params.beta} admits no rule in [{min_entry}, {params.b_s}]"
        )
    shift = 0.5 * (low + min(high, low))
    base = quadratic_table(support, scale, max(low, shift))
    slack = min(
        float(base.min() - min_entry), float(params.b_s - base.max())
    )
    rho = max(0.0, slack)
    while rho > 0:
        table = base + rng.uniform(-rho, rho, size=base.shape)
        rule = ScoringRule(support=support, table=np.clip(table, min_entry, params.b_s))
        if is_strongly_proper(rule, support, params.beta):
            return rule
        rho *= 0.5
        if rho < 1e-6:
            break
    return ScoringRule(support=support, table=base)


def discover_support(env, b_s: float, n_states: int, window: int = 50, budget: int = 100_000):
    """Deploy a strictly proper rule until the reported support stabilizes.

    Stops once no new belief appeared for ``window * max(1, M)`` consecutive
    rounds, M being the number of beliefs found so far.
    """
    rule = discovery_rule(n_states, b_s)
    found: list[np.ndarray] = []
    silent = 0
    rounds = 0
    while rounds < budget:
        outcome = env.deploy(rule)
        rounds += 1
        report = np.asarray(outcome.report, float)
        known = any(np.max(np.abs(report - b)) <= DEDUP_TOL for b in found)
        if known:
            silent += 1
        else:
            found.append(report)
            silent = 0
        if silent >= window * max(1, len(found)):
            break
    return BeliefSupport(np.array(found)), rounds


def random_sampling_oracle(
    env,
    params: StronglyProperParams,
    n_actions: int,
    rng: np.random.Generator,
    budget: int,
    d2_floor: float,
    support: BeliefSupport | None = None,
    discovery_window: int = 50,
) -> tuple[OracleSet, AcquisitionReport]:
    """Sample strongly proper rules, probe row perturbations, keep stable ones.

    A sampled rule is accepted for the responding action only if subtracting
    kappa = d1^2 * beta / 2 from any single row leaves the response unchanged.
    The reported margin is kappa * d2_floor (d2 is agent-private; the caller
    supplies a lower bound).
    """
    rounds = 0
    discovery_rounds = 0
    if support is None:
        support, discovery_rounds = discover_support(
            env, params.b_s, env_n_states(env), window=discovery_window, budget=budget
        )
        rounds += discovery_rounds
    if support.m < 2 and n_actions > 1:
        raise ConfigurationError(
            "discovered support has a single belief, so row perturbations "
            "cannot certify a margin; widen the discovery window or pass the "
            "support explicitly"
        )
    kappa = 0.0 if support.m < 2 else 0.5 * params.beta * support.d1() ** 2
    found: dict[int, ScoringRule] = {}
    samples = 0
    probes = 0
    while len(found) < n_actions:
        if rounds >= budget:
            missing = [k for k in range(n_actions) if k not in found]
            raise PartialOracleError(found, missing, rounds)
        rule = sample_strongly_proper(params, support, rng, min_entry=kappa)
        samples += 1
        k0 = env.deploy(rule).action
        rounds += 1
        probes += 1
        stable = True
        for i in range(support.m):
            if rounds >= budget:
                missing = [k for k in range(n_actions) if k not in found]
                raise PartialOracleError(found, missing, rounds)
            table = rule.table.copy()
            table[i] = table[i] - kappa
            perturbed = ScoringRule(support=support, table=table)
            response = env.deploy(perturbed).action
            rounds += 1
            probes += 1
            if response != k0:
                stable = False
                break
        if stable and k0 not in found:
            found[k0] = rule
    rules = [found[k] for k in range(n_actions)]
    report = AcquisitionReport(
        rounds=rounds,
        samples=samples,
        probes=probes,
        discovery_rounds=discovery_rounds,
        support=support.beliefs,
    )
    epsilon = kappa * d2_floor
    if n_actions == 1 and epsilon <= 0:
        epsilon = 1.0  # margin claim is over an empty competitor set
    return OracleSet(rules=tuple(rules), epsilon=epsilon), report


def env_n_states(env) -> int:
    n = getattr(env, "n_states", None)
    if n is None:
        raise InvalidInputError("environment does not expose n_states")
    return int(n)


# ---------------------------------------------------------------------------
# linear-contract search


@dataclass(frozen=True)
class LinearContractParams:
    """Search parameters under strictly decaying marginal information gain.

    ``epsilon_gap`` lower-bounds the decay of consecutive utility-per-cost
    ratios, ``b`` upper-bounds the steepest ratio, and ``u1_floor`` is a
    caller-supplied lower bound on the cheapest action's expected utility
    (agent-private, so configured rather than measured).
    """

    epsilon_gap: float
    b: float
    u_table: np.ndarray
    b_s: float
    u1_floor: float

    def __post_init__(self):
        if self.epsilon_gap <= 0:
            raise ConfigurationError("epsilon_gap must be positive")
        if self.b < self.epsilon_gap:
            raise ConfigurationError("b must be at least epsilon_gap")
        object.__setattr__(self, "u_table", np.asarray(self.u_table, dtype=float))

    @property
    def max_depth(self) -> int:
        e, b = self.epsilon_gap, self.b
        return int(math.ceil(math.log2(max(2.0 * b * (b - e) / e**2, 2.0))))

    @property
    def oracle_epsilon(self) -> float:
        return self.epsilon_gap * self.u1_floor / (4.0 * self.b**2)


def linear_contract_oracle(
    env, params: LinearContractParams, n_actions: int
) -> tuple[OracleSet, AcquisitionReport]:
    """Iterated binary search on utility-proportional rules over [0, 2/eps].

    Adjacent probed points with different responses are bisected down to depth
    ``params.max_depth``; each action's rule is the midpoint of its widest
    same-response bracket.
    """
    u = params.u_table
    shift = max(0.0, -float(u.min()))
    lam_hi = 2.0 / params.epsilon_gap
    min_gap = lam_hi / 2**params.max_depth

    responses: dict[float, int] = {}
    reports: list[np.ndarray] = []
    rounds = 0

    def probe(lam: float) -> int:
        nonlocal rounds
        outcome = env.deploy(LinearUtilityRule(u_table=u, lam=lam, shift=shift))
        rounds += 1
        report = np.asarray(outcome.report, float)
        if not any(np.max(np.abs(report - r)) <= DEDUP_TOL for r in reports):
            reports.append(report)
        responses[lam] = outcome.action
        return outcome.action

    probe(0.0)
    probe(lam_hi)
    while True:
        lams = sorted(responses)
        split = None
        for a, b in zip(lams, lams[1:]):
            if responses[a] != responses[b] and (b - a) > min_gap * (1 + 1e-12):
                split = 0.5 * (a + b)
                break
        if split is None:
            break
        probe(split)

    lams = sorted(responses)
    brackets: dict[int, tuple[float, float]] = {}
    run_start = 0
    for i in range(1, len(lams) + 1):
        if i == len(lams) or responses[lams[i]] != responses[lams[run_start]]:
            k = responses[lams[run_start]]
            lo, hi = lams[run_start], lams[i - 1]
            if k not in brackets or hi - lo > brackets[k][1] - brackets[k][0]:
                brackets[k] = (lo, hi)
            run_start = i
    missing = [k for k in range(n_actions) if k not in brackets]
    if missing:
        support = BeliefSupport(np.array(reports))
        found = {
            k: tabulate(LinearUtilityRule(u, lam=0.5 * sum(brackets[k]), shift=shift), support)
            for k in brackets
        }
        raise PartialOracleError(found, missing, rounds)

    support = BeliefSupport(np.array(reports))
    rules = []
    for k in range(n_actions):
        lam_mid = 0.5 * (brackets[k][0] + brackets[k][1])
        rule = tabulate(LinearUtilityRule(u, lam=lam_mid, shift=shift), support)
        if float(rule.table.max()) > params.b_s + PROPER_TOL:
            raise ConfigurationError(
                f"linear rule for action {k} exceeds the payment bound"
            )
        rules.append(rule)
    report = AcquisitionReport(
        rounds=rounds, probes=rounds, support=support.beliefs, brackets=dict(brackets)
    )
    return OracleSet(rules=tuple(rules), epsilon=params.oracle_epsilon), report
