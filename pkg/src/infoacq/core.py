"""Domain types for the information-acquisition game.

States, beliefs, scoring rules, information structures, and the primitive
payment/utility computations shared by the solvers, the simulated agent and
the online learner.  All objects are immutable value objects after
construction and safe to share across threads.

Payments are stored only at support points: a scoring rule is an R x n_states
table whose rows are indexed by the beliefs in its own ``support``.  An
arbitrary reported belief is scored by the row maximizing its expected score
(piecewise extension); for rules that are proper on their support this agrees
with truthful row indexing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

PROB_TOL = 1e-9    # absolute tolerance for probability normalization checks
PROPER_TOL = 1e-9  # slack allowed in pairwise properness inequalities
DEDUP_TOL = 1e-9   # L-inf tolerance under which two beliefs are the same point


class InvalidInputError(ValueError):
    pass


def _as_float_array(x, ndim):
    a = np.asarray(x, dtype=float)
    if a.ndim != ndim:
        raise InvalidInputError(f"expected {ndim}-d array, got shape {a.shape}")
    return a


def validate_distribution(p: np.ndarray, what: str = "distribution") -> None:
    if np.any(p < -PROB_TOL) or np.any(p > 1 + PROB_TOL):
        raise InvalidInputError(f"{what} has entries outside [0, 1]: {p}")
    if abs(float(p.sum()) - 1.0) > PROB_TOL:
        raise InvalidInputError(f"{what} does not sum to 1: sum={p.sum()!r}")


@dataclass(frozen=True)
class StateSpace:
    """Finite hidden-state space; labels are display-only."""

    n_states: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.n_states < 1:
            raise InvalidInputError("n_states must be >= 1")
        if self.labels is not None and len(self.labels) != self.n_states:
            raise InvalidInputError("labels length must match n_states")


@dataclass(frozen=True)
class BeliefSupport:
    """The finite set of posteriors the agent can end up holding.

    ``beliefs`` is an (M, n_states) matrix, one belief per row.  Rows must be
    valid distributions and pairwise distinct at L-inf tolerance DEDUP_TOL.
    """

    beliefs: np.ndarray

    def __post_init__(self):
        b = _as_float_array(self.beliefs, 2)
        b.setflags(write=False)
        object.__setattr__(self, "beliefs", b)
        if b.shape[0] < 1:
            raise InvalidInputError("support must contain at least one belief")
        for i, row in enumerate(b):
            validate_distribution(row, f"support belief {i}")
        for i in range(b.shape[0]):
            for j in range(i + 1, b.shape[0]):
                if np.max(np.abs(b[i] - b[j])) <= DEDUP_TOL:
                    raise InvalidInputError(f"support beliefs {i} and {j} coincide")

    @property
    def m(self) -> int:
        return self.beliefs.shape[0]

    @property
    def n_states(self) -> int:
        return self.beliefs.shape[1]

    def d1(self) -> float:
        """Minimum pairwise L-inf distance between support beliefs."""
        b = self.beliefs
        if b.shape[0] < 2:
            return float("inf")
        best = np.inf
        for i in range(b.shape[0]):
            diff = np.max(np.abs(b[i + 1:] - b[i]), axis=1)
            if diff.size:
                best = min(best, float(diff.min()))
        return best

    def index_of(self, belief: np.ndarray) -> int | None:
        """Index of ``belief`` in the support at DEDUP_TOL, or None."""
        diffs = np.max(np.abs(self.beliefs - np.asarray(belief, float)), axis=1)
        i = int(np.argmin(diffs))
        return i if diffs[i] <= DEDUP_TOL else None


@dataclass(frozen=True)
class InformationStructure:
    """The agent's private model: per-action cost and belief distribution.

    ``dists`` is (K, M): row k is the distribution q_k over support beliefs
    induced by action k.
    """

    costs: np.ndarray
    support: BeliefSupport
    dists: np.ndarray

    def __post_init__(self):
        c = _as_float_array(self.costs, 1)
        q = _as_float_array(self.dists, 2)
        c.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "costs", c)
        object.__setattr__(self, "dists", q)
        if c.shape[0] < 1:
            raise InvalidInputError("need at least one action")
        if np.any(c < 0):
            raise InvalidInputError("costs must be non-negative")
        if q.shape != (c.shape[0], self.support.m):
            raise InvalidInputError(
                f"dists shape {q.shape} inconsistent with K={c.shape[0]}, M={self.support.m}"
            )
        for k, row in enumerate(q):
            validate_distribution(row, f"belief distribution q_{k}")

    @property
    def n_actions(self) -> int:
        return self.costs.shape[0]

    def d2(self) -> float:
        """min over ordered action pairs k != k' of max_i [q_k(i) - q_k'(i)]."""
        q = self.dists
        k = q.shape[0]
        if k < 2:
            return float("inf")
        best = np.inf
        for a in range(k):
            for b in range(k):
                if a != b:
                    best = min(best, float(np.max(q[a] - q[b])))
        return best


@dataclass(frozen=True)
class ScoringRule:
    """Payment table over (reported support belief, state) pairs.

    ``table`` is (R, n_states) with non-negative entries; row i is the payment
    schedule for reporting ``support.beliefs[i]``.  The upper bound B_S is a
    property of the enclosing game and is checked where a bound is in scope.
    """

    support: BeliefSupport
    table: np.ndarray

    def __post_init__(self):
        t = _as_float_array(self.table, 2)
        t.setflags(write=False)
        object.__setattr__(self, "table", t)
        if t.shape != (self.support.m, self.support.n_states):
            raise InvalidInputError(
                f"table shape {t.shape} does not match support ({self.support.m}, {self.support.n_states})"
            )
        if np.any(t < -PROB_TOL):
            raise InvalidInputError("payments must be non-negative")

    @property
    def n_rows(self) -> int:
        return self.table.shape[0]

    def truthful_scores(self) -> np.ndarray:
        """Expected score of each row against its own belief."""
        return np.einsum("ij,ij->i", self.support.beliefs, self.table)

    def report_index(self, belief: np.ndarray) -> int:
        """Row a rational agent holding ``belief`` reports.

        An exact support match (truthful report) takes precedence; otherwise
        the row maximizing the expected score, lowest index on ties.
        """
        i = self.support.index_of(belief)
        if i is not None:
            return i
        return int(np.argmax(self.table @ np.asarray(belief, float)))

    def truthful_value(self, belief: np.ndarray) -> float:
        """Expected payment under optimal (truthful-or-best-row) reporting."""
        return float(np.max(self.table @ np.asarray(belief, float)))

    def truthful_values(self, beliefs: np.ndarray) -> np.ndarray:
        """Vectorized ``truthful_value`` over belief rows."""
        return np.max(np.asarray(beliefs, float) @ self.table.T, axis=1)

    def play(self, belief: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(reported belief, per-state payment row) for an agent holding ``belief``."""
        j = self.report_index(belief)
        return self.support.beliefs[j], self.table[j]


@dataclass(frozen=True)
class UtilityModel:
    """The principal's utility table over (own action, state)."""

    u_table: np.ndarray

    def __post_init__(self):
        u = _as_float_array(self.u_table, 2)
        u.setflags(write=False)
        object.__setattr__(self, "u_table", u)
        if u.shape[0] < 1:
            raise InvalidInputError("need at least one principal action")

    def best_action(self, belief: np.ndarray) -> int:
        return int(np.argmax(self.u_table @ np.asarray(belief, float)))

    def value(self, belief: np.ndarray) -> float:
        """u(sigma): expected utility under the best action for ``belief``."""
        return float(np.max(self.u_table @ np.asarray(belief, float)))

    def values(self, support: BeliefSupport) -> np.ndarray:
        """u(sigma_i) for every support belief."""
        return np.max(self.u_table @ support.beliefs.T, axis=0)


@dataclass(frozen=True)
class Instance:
    """A complete game: information structure, utility model and bounds."""

    states: StateSpace
    info: InformationStructure
    utility: UtilityModel
    b_s: float
    b_u: float
    n_observations: int | None = None

    def __post_init__(self):
        if self.b_s <= 0:
            raise InvalidInputError("b_s must be positive")
        if self.info.support.n_states != self.states.n_states:
            raise InvalidInputError("support dimension does not match state space")
        if self.utility.u_table.shape[1] != self.states.n_states:
            raise InvalidInputError("utility table dimension does not match state space")
        if np.any(np.abs(self.utility.u_table) > self.b_u + PROB_TOL):
            raise InvalidInputError("utility entries exceed b_u")
        if self.n_observations is not None:
            if self.info.support.m > self.info.n_actions * self.n_observations:
                raise InvalidInputError("support larger than K * n_observations")

    @property
    def support(self) -> BeliefSupport:
        return self.info.support

    @property
    def n_actions(self) -> int:
        return self.info.n_actions

    def u_sigma(self) -> np.ndarray:
        return self.utility.values(self.info.support)


@dataclass(frozen=True)
class JointObservationModel:
    """Joint distributions p(state, observation | action), one per action.

    ``tensors`` is (K, n_states, n_obs); each K-slice sums to 1.
    """

    tensors: np.ndarray

    def __post_init__(self):
        t = _as_float_array(self.tensors, 3)
        t.setflags(write=False)
        object.__setattr__(self, "tensors", t)
        if np.any(t < -PROB_TOL):
            raise InvalidInputError("joint probabilities must be non-negative")
        sums = t.sum(axis=(1, 2))
        if np.any(np.abs(sums - 1.0) > PROB_TOL):
            raise InvalidInputError(f"each joint tensor must sum to 1, got {sums}")

    @property
    def n_actions(self) -> int:
        return self.tensors.shape[0]


# ---------------------------------------------------------------------------
# operations


def derive_information_structure(
    joint: JointObservationModel, costs
) -> InformationStructure:
    """Bayes-derive the belief support and per-action posterior distributions.

    For every action and observation with positive marginal probability the
    posterior column is pooled into a shared support (deduplicated at
    DEDUP_TOL); q_k assigns each observation's marginal mass to its posterior.
    """
    costs = _as_float_array(costs, 1)
    if costs.shape[0] != joint.n_actions:
        raise InvalidInputError("costs length must match number of actions")
    pooled: list[np.ndarray] = []
    weights: list[dict[int, float]] = []
    for k in range(joint.n_actions):
        tensor = joint.tensors[k]
        marginals = tensor.sum(axis=0)
        if float(marginals.sum()) <= PROB_TOL:
            raise InvalidInputError(f"action {k} joint tensor carries no probability mass")
        w: dict[int, float] = {}
        for o in range(tensor.shape[1]):
            if marginals[o] <= 0.0:
                continue
            posterior = tensor[:, o] / marginals[o]
            idx = None
            for i, known in enumerate(pooled):
                if np.max(np.abs(known - posterior)) <= DEDUP_TOL:
                    idx = i
                    break
            if idx is None:
                pooled.append(posterior)
                idx = len(pooled) - 1
            w[idx] = w.get(idx, 0.0) + float(marginals[o])
        weights.append(w)
    support = BeliefSupport(np.array(pooled))
    dists = np.zeros((joint.n_actions, support.m))
    for k, w in enumerate(weights):
        for i, p in w.items():
            dists[k, i] = p
    return InformationStructure(costs=costs, support=support, dists=dists)


def expected_score(rule: ScoringRule, report_index: int, belief) -> float:
    """Expected payment of reporting row ``report_index`` under ``belief``."""
    if not 0 <= report_index < rule.n_rows:
        raise InvalidInputError(f"report index {report_index} out of range")
    return float(np.asarray(belief, float) @ rule.table[report_index])


def is_proper(rule: ScoringRule, support: BeliefSupport | None = None) -> bool:
    """Pairwise properness on the support at tolerance PROPER_TOL."""
    support = support or rule.support
    cross = support.beliefs @ rule.table.T  # cross[i, j] = E_{sigma_i} S(row j)
    truthful = np.diag(cross)
    return bool(np.all(cross <= truthful[:, None] + PROPER_TOL))


def properize(rule: ScoringRule) -> ScoringRule:
    """Replace each row by the input's best-report row for that belief.

    The output is proper on the support and pays every truthful reporter
    exactly what optimal misreporting would have paid under the input.
    Ties resolve to the lowest row index.
    """
    cross = rule.support.beliefs @ rule.table.T
    best = np.argmax(cross, axis=1)
    return ScoringRule(support=rule.support, table=rule.table[best])


def agent_profit(instance: Instance, rule, k: int) -> float:
    """g(k, S): expected truthful payment under q_k minus the action cost.

    The rule is evaluated at the instance's support beliefs through its own
    report index, so rules tabulated on differently-ordered (or discovered)
    supports are scored correctly; for aligned proper rules this is exactly
    the truthful row payment.
    """
    info = instance.info
    if not 0 <= k < info.n_actions:
        raise InvalidInputError(f"action {k} out of range")
    tv = rule.truthful_values(info.support.beliefs)
    return float(info.dists[k] @ tv - info.costs[k])


def principal_profit(instance: Instance, rule, k: int) -> float:
    """Expected utility minus expected payment when the agent plays k."""
    info = instance.info
    if not 0 <= k < info.n_actions:
        raise InvalidInputError(f"action {k} out of range")
    net = instance.u_sigma() - rule.truthful_values(info.support.beliefs)
    return float(info.dists[k] @ net)


def mix(s0: ScoringRule, s1: ScoringRule, lam: float) -> ScoringRule:
    """Entrywise (1 - lam) * s0 + lam * s1; preserves properness."""
    if not 0.0 <= lam <= 1.0:
        raise InvalidInputError(f"mixing weight {lam} outside [0, 1]")
    if s0.table.shape != s1.table.shape:
        raise InvalidInputError("cannot mix rules with different shapes")
    if s0.support is not s1.support and np.max(
        np.abs(s0.support.beliefs - s1.support.beliefs)
    ) > DEDUP_TOL:
        raise InvalidInputError("cannot mix rules indexed by different supports")
    return ScoringRule(support=s0.support, table=(1.0 - lam) * s0.table + lam * s1.table)


# ---------------------------------------------------------------------------
# contract reduction


@dataclass(frozen=True)
class ContractProblem:
    """Outcome-payment model: contracts pay on the realized outcome only.

    ``outcome_dists`` is (K, n_outcomes) with row k = p(outcome | action k);
    ``payoffs`` is the principal's utility per outcome.
    """

    outcome_dists: np.ndarray
    costs: np.ndarray
    payoffs: np.ndarray
    b_s: float
    b_u: float

    def __post_init__(self):
        p = _as_float_array(self.outcome_dists, 2)
        c = _as_float_array(self.costs, 1)
        u = _as_float_array(self.payoffs, 1)
        for arr in (p, c, u):
            arr.setflags(write=False)
        object.__setattr__(self, "outcome_dists", p)
        object.__setattr__(self, "costs", c)
        object.__setattr__(self, "payoffs", u)
        if p.shape[0] != c.shape[0] or p.shape[1] != u.shape[0]:
            raise InvalidInputError("contract problem dimensions are inconsistent")
        for k, row in enumerate(p):
            validate_distribution(row, f"outcome distribution {k}")


def contract_to_instance(problem: ContractProblem) -> Instance:
    """Reduce a contract-design problem to a fully-revealing game instance.

    The belief support becomes the point masses e_omega and q_k(e_omega) is
    the outcome probability p(omega | b_k).
    """
    n = problem.payoffs.shape[0]
    support = BeliefSupport(np.eye(n))
    info = InformationStructure(
        costs=problem.costs, support=support, dists=problem.outcome_dists
    )
    utility = UtilityModel(problem.payoffs.reshape(1, n))
    return Instance(
        states=StateSpace(n),
        info=info,
        utility=utility,
        b_s=problem.b_s,
        b_u=max(problem.b_u, float(np.max(np.abs(problem.payoffs)))),
    )


def contract_scoring_rule(problem: ContractProblem, payments) -> ScoringRule:
    """Scoring rule equivalent of the contract ``payments[omega]``.

    Reporting e_omega pays payments[omega] when omega realizes and 0
    otherwise, i.e. the table is diag(payments).
    """
    payments = _as_float_array(payments, 1)
    n = problem.payoffs.shape[0]
    if payments.shape[0] != n:
        raise InvalidInputError("contract payment vector has wrong length")
    return ScoringRule(support=BeliefSupport(np.eye(n)), table=np.diag(payments))


# ---------------------------------------------------------------------------
# serialization


def instance_to_dict(instance: Instance) -> dict:
    doc = {
        "states": instance.states.n_states,
        "actions": [
            {"cost": float(c), "q": [float(x) for x in q]}
            for c, q in zip(instance.info.costs, instance.info.dists)
        ],
        "support": [[float(x) for x in row] for row in instance.support.beliefs],
        "utility": [[float(x) for x in row] for row in instance.utility.u_table],
        "b_s": float(instance.b_s),
        "b_u": float(instance.b_u),
    }
    if instance.states.labels is not None:
        doc["labels"] = list(instance.states.labels)
    if instance.n_observations is not None:
        doc["n_observations"] = int(instance.n_observations)
    return doc


def instance_from_dict(doc: dict) -> Instance:
    support = BeliefSupport(np.array(doc["support"], dtype=float))
    info = InformationStructure(
        costs=np.array([a["cost"] for a in doc["actions"]], dtype=float),
        support=support,
        dists=np.array([a["q"] for a in doc["actions"]], dtype=float),
    )
    labels = tuple(doc["labels"]) if "labels" in doc else None
    return Instance(
        states=StateSpace(int(doc["states"]), labels),
        info=info,
        utility=UtilityModel(np.array(doc["utility"], dtype=float)),
        b_s=float(doc["b_s"]),
        b_u=float(doc["b_u"]),
        n_observations=doc.get("n_observations"),
    )


def instance_to_json(instance: Instance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2)


def instance_from_json(text: str) -> Instance:
    return instance_from_dict(json.loads(text))
