"""Online scoring-rule learner: UCB over per-action optimistic LPs.

Estimators (empirical belief distributions, pairwise cost-difference bounds,
shortest-path cost intervals), the optimistic per-action LP with an
infeasible fallback, conservative mixing with an action-informed oracle, and
the binary-search refinement triggered when the induced action misses the
target.

The learner sees only public data: deployed rules, responses, reported
beliefs, realized states.  It never touches costs or belief distributions.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from . import lp
from .core import (
    DEDUP_TOL,
    BeliefSupport,
    InvalidInputError,
    ScoringRule,
    UtilityModel,
    mix,
)
from .offline import payment_weights, properness_matrix

NORMAL = "normal"
SEARCH = "bs"


@dataclass(frozen=True)
class OracleSet:
    """K foreknown rules, rule k inducing action k with profit margin epsilon."""

    rules: tuple
    epsilon: float

    def __post_init__(self):
        if self.epsilon <= 0:
            raise InvalidInputError("oracle margin must be positive")
        object.__setattr__(self, "rules", tuple(self.rules))


@dataclass
class LearnerConfig:
    n_actions: int
    n_states: int
    b_s: float
    b_u: float
    u_table: np.ndarray
    m_bound: int
    alpha_scale: float | None = None  # None -> number of actions
    alpha_exponent: float = 1.0 / 3.0
    known_support: np.ndarray | None = None
    compact_history: bool = False

    def alpha(self, t: int) -> float:
        scale = self.n_actions if self.alpha_scale is None else self.alpha_scale
        return min(scale * t ** (-self.alpha_exponent), 1.0)


@dataclass
class BinarySearchState:
    """Bracketed search for the response switch point on a rule segment.

    ``s0`` is the lambda=0 endpoint (the rule that missed), ``s1`` the
    lambda=1 endpoint trusted to induce ``target``.  ``iq0`` freezes the
    confidence widths at search start; a fixed ``threshold`` overrides them
    (used by synthetic-responder tests).
    """

    s0: object
    s1: object
    target: int
    iq0: np.ndarray | None = None
    threshold: float | None = None
    lam_min: float = 0.0
    lam_max: float = 1.0
    k_last: int = -1  # most recent observed response
    k0_end: int = -1  # response observed at the lam_min endpoint
    depth: int = 0
    lam_pending: float | None = None
    t0: int = 0
    alpha_t0: float = float("nan")
    ic0: np.ndarray | None = None

    def current_threshold(self) -> float:
        if self.threshold is not None:
            return self.threshold
        assert self.iq0 is not None
        last = self.iq0[self.k_last] if self.k_last >= 0 else float("inf")
        return float(min(last, self.iq0[self.target]))

    def done(self) -> bool:
        return self.lam_max - self.lam_min < self.current_threshold()

    def next_lambda(self) -> float:
        self.lam_pending = 0.5 * (self.lam_min + self.lam_max)
        return self.lam_pending

    def record(self, response: int) -> None:
        assert self.lam_pending is not None, "no probe in flight"
        if response == self.target:
            self.lam_max = self.lam_pending
        else:
            self.lam_min = self.lam_pending
        self.k_last = response
        self.depth += 1
        self.lam_pending = None

    def endpoints(self) -> tuple[int, int]:
        """(response at lam_min end, response at lam_max end)."""
        return (self.k0_end, self.target)


@dataclass(frozen=True)
class RoundPlan:
    """One round's deployment decision."""

    t: int
    mode: str
    s_deployed: object
    alpha: float
    k_star: int
    s_opt: object | None = None
    h_lp: np.ndarray | None = None
    lam: float | None = None


@dataclass(frozen=True)
class SearchRecord:
    """Completed binary search, for diagnostics and regret accounting."""

    t0: int
    t1: int
    k0: int
    k1: int
    alpha_t0: float
    delta_t0: float
    essential: bool
    lam_min: float
    lam_max: float


def binary_search_step(bs: BinarySearchState, response: int):
    """Advance the bracket with ``response``; returns the state or None when done.

    A first response that already matches the target ends the search
    immediately.
    """
    if bs.depth == 0 and bs.lam_pending is None:
        # triggering response observed before any probe
        if response == bs.target:
            return None
        bs.k_last = response
        bs.k0_end = response
        return bs if not bs.done() else None
    bs.record(response)
    if response != bs.target:
        bs.k0_end = response
    return bs if not bs.done() else None


def essential_bs_diagnostic(record: SearchRecord) -> bool:
    """Whether the search started below the uncertainty threshold Delta."""
    return record.essential


def _delta(epsilon: float, b_s: float, ic: float, iq_i: float, iq_j: float) -> float:
    if not (math.isfinite(ic) and math.isfinite(iq_i) and math.isfinite(iq_j)):
        return float("inf")
    return 2.0 / epsilon * (ic + b_s * (iq_i + iq_j))


class ScoringRuleLearner:
    """UCB learner over per-action optimistic LPs with conservative mixing."""

    def __init__(self, config: LearnerConfig, oracle: OracleSet):
        if len(oracle.rules) != config.n_actions:
            raise InvalidInputError("oracle must supply one rule per action")
        self.config = config
        self.oracle = oracle
        self.k = config.n_actions
        self.t = 1
        self._u = UtilityModel(np.asarray(config.u_table, dtype=float))
        if self._u.u_table.shape[1] != config.n_states:
            raise InvalidInputError("u_table width must match n_states")

        if config.known_support is not None:
            sup = np.asarray(config.known_support, dtype=float).copy()
        else:
            sup = np.zeros((0, config.n_states))
        self._support = sup
        self._counts = np.zeros((self.k, sup.shape[0]), dtype=np.int64)
        self.n = np.zeros(self.k, dtype=np.int64)
        self.q_hat = np.zeros((self.k, sup.shape[0]))
        self._rules: list[list] = [[] for _ in range(self.k)]
        self._scores: list[list[np.ndarray]] = [[] for _ in range(self.k)]

        kk = (self.k, self.k)
        self.i_q = np.full(self.k, np.inf)
        self.c_plus = np.full(kk, np.inf)
        self.c_minus = np.full(kk, -np.inf)
        self.theta = np.zeros(kk)
        self.phi = np.full(kk, np.inf)
        self.c_hat = np.zeros(kk)
        self.i_c = np.full(kk, np.inf)
        np.fill_diagonal(self.phi, 0.0)
        np.fill_diagonal(self.i_c, 0.0)

        self.mode = NORMAL
        self.search: BinarySearchState | None = None
        self.completed_searches: list[SearchRecord] = []
        self._aligned_version = -1
        self._aligned: list[ScoringRule] = []
        self._support_version = 0
        self._u_sigma_cache: np.ndarray | None = None
        self._lp_cache_version = -1
        self._support_obj: BeliefSupport | None = None
        self._prop_rows: np.ndarray | None = None

    # -- support and estimator bookkeeping ---------------------------------

    @property
    def support_size(self) -> int:
        return self._support.shape[0]

    def support_beliefs(self) -> np.ndarray:
        return self._support.copy()

    def _support_index(self, belief: np.ndarray) -> int:
        if self._support.shape[0]:
            diffs = np.max(np.abs(self._support - belief), axis=1)
            i = int(np.argmin(diffs))
            if diffs[i] <= DEDUP_TOL:
                return i
        self._grow_support(belief)
        return self._support.shape[0] - 1

    def _grow_support(self, belief: np.ndarray) -> None:
        self._support = np.vstack([self._support, np.asarray(belief, float)])
        self._counts = np.pad(self._counts, ((0, 0), (0, 1)))
        self.q_hat = np.pad(self.q_hat, ((0, 0), (0, 1)))
        for arm in range(self.k):
            for idx, rule in enumerate(self._rules[arm]):
                self._scores[arm][idx] = np.append(
                    self._scores[arm][idx], rule.truthful_value(belief)
                )
        self._support_version += 1
        self._u_sigma_cache = None

    def _u_sigma(self) -> np.ndarray:
        if self._u_sigma_cache is None:
            self._u_sigma_cache = self._u.values(self._lp_parts()[0])
        return self._u_sigma_cache

    def _aligned_oracle(self, k: int):
        """Oracle rule k tabulated on the learner's current support."""
        if self.support_size == 0:
            return self.oracle.rules[k]
        if self._aligned_version != self._support_version:
            support = self._lp_parts()[0]
            self._aligned = [
                ScoringRule(
                    support=support,
                    table=np.array([rule.play(b)[1] for b in self._support]),
                )
                for rule in self.oracle.rules
            ]
            self._aligned_version = self._support_version
        return self._aligned[k]

    def update_beliefs(self, k: int, report: np.ndarray) -> None:
        """Fold one observed (response, reported belief) pair into q-hat."""
        i = self._support_index(np.asarray(report, dtype=float))
        self._counts[k, i] += 1
        self.n[k] += 1
        self.q_hat[k] = self._counts[k] / self.n[k]

    def conf_q(self, k: int) -> float:
        """L1 confidence width for q-hat_k; +inf before any observation."""
        if self.n[k] == 0:
            return float("inf")
        log_term = (
            math.log(self.k) + self.config.m_bound * math.log(2.0) + math.log(self.t)
        )
        return math.sqrt(2.0 * log_term / self.n[k])

    def refresh_confidence(self) -> None:
        self.i_q = np.array([self.conf_q(k) for k in range(self.k)])

    def record_round(self, rule, response: int, report: np.ndarray) -> None:
        """Append the deployed rule to the response arm's history."""
        self.update_beliefs(response, report)
        scores = np.array([rule.truthful_value(b) for b in self._support])
        self._rules[response].append(rule)
        self._scores[response].append(scores)

    def update_cost_bounds(self) -> None:
        """Recompute C+/C-, theta, phi from history under today's estimates."""
        self.refresh_confidence()
        kk = (self.k, self.k)
        self.c_plus = np.full(kk, np.inf)
        self.c_minus = np.full(kk, -np.inf)
        self.theta = np.zeros(kk)
        self.phi = np.full(kk, np.inf)
        np.fill_diagonal(self.phi, 0.0)
        seen = [a for a in range(self.k) if self.n[a] > 0 and self._scores[a]]
        w: dict[int, np.ndarray] = {}
        for a in seen:
            e = np.vstack(self._scores[a])  # (hist, M)
            w[a] = e @ self.q_hat.T  # column j: v-hat of each stored rule at arm j
        for i in seen:
            for j in seen:
                if i == j:
                    continue
                pad = self.config.b_s * (self.i_q[i] + self.i_q[j])
                self.c_plus[i, j] = float(np.min(w[i][:, i] - w[i][:, j])) + pad
                self.c_minus[i, j] = float(np.max(w[j][:, i] - w[j][:, j])) - pad
                self.theta[i, j] = 0.5 * (self.c_plus[i, j] + self.c_minus[i, j])
                self.phi[i, j] = max(0.5 * (self.c_plus[i, j] - self.c_minus[i, j]), 0.0)
        if self.config.compact_history:
            self._compact(w)

    def _compact(self, w: dict[int, np.ndarray]) -> None:
        """Keep only the min-difference witness per (arm, other) pair."""
        for a, mat in w.items():
            keep: set[int] = set()
            for j in range(self.k):
                if j == a or self.n[j] == 0:
                    continue
                keep.add(int(np.argmin(mat[:, a] - mat[:, j])))
            if len(keep) < len(self._rules[a]):
                idx = sorted(keep)
                self._rules[a] = [self._rules[a][i] for i in idx]
                self._scores[a] = [self._scores[a][i] for i in idx]

    def estimate_costs(self) -> None:
        """Shortest-path combination of theta along minimal-phi paths."""
        kk = (self.k, self.k)
        self.c_hat = np.zeros(kk)
        self.i_c = np.full(kk, np.inf)
        np.fill_diagonal(self.i_c, 0.0)
        for i in range(self.k):
            dist, pred = self._dijkstra(i)
            for j in range(i + 1, self.k):
                if not math.isfinite(dist[j]):
                    continue
                total = 0.0
                node = j
                while node != i:
                    p = pred[node]
                    total += self.theta[p, node]
                    node = p
                self.c_hat[i, j] = total
                self.c_hat[j, i] = -total
                self.i_c[i, j] = dist[j]
                self.i_c[j, i] = dist[j]

    def _dijkstra(self, source: int) -> tuple[np.ndarray, list[int]]:
        dist = np.full(self.k, np.inf)
        pred = [-1] * self.k
        dist[source] = 0.0
        heap = [(0.0, source)]
        done = np.zeros(self.k, dtype=bool)
        while heap:
            d, u = heapq.heappop(heap)
            if done[u]:
                continue
            done[u] = True
            for v in range(self.k):
                if v == u or done[v]:
                    continue
                length = self.phi[u, v]
                if not math.isfinite(length):
                    continue
                nd = d + length
                if nd < dist[v]:
                    dist[v] = nd
                    pred[v] = u
                    heapq.heappush(heap, (nd, v))
        return dist, pred

    # -- optimistic LP and arm selection ------------------------------------

    def _lp_parts(self) -> tuple[BeliefSupport, np.ndarray]:
        """Support object and padded properness rows, cached per support version."""
        if self._lp_cache_version != self._support_version:
            self._support_obj = BeliefSupport(self._support)
            prop = properness_matrix(self._support_obj)
            self._prop_rows = np.hstack([prop, np.zeros((prop.shape[0], 1))])
            self._lp_cache_version = self._support_version
        return self._support_obj, self._prop_rows

    def solve_opt_lp(self, k: int) -> tuple[float, object]:
        """Optimistic value and rule for arm k; falls back to the oracle rule."""
        if self.n[k] == 0 or self.support_size == 0:
            return float("inf"), self._aligned_oracle(k)
        support, prop_rows = self._lp_parts()
        m, n = support.m, support.n_states
        n_vars = m * n + 1  # table entries then the claimed payment v
        b_s = self.config.b_s
        iq_k = self.i_q[k]
        base = float(self._u_sigma() @ self.q_hat[k]) + self.config.b_u * iq_k

        rows = [prop_rows]
        rels: list[str] = [lp.GREATER] * prop_rows.shape[0]
        rhs: list[float] = [0.0] * prop_rows.shape[0]

        w_k = payment_weights(self.q_hat[k], support)
        band = np.concatenate([-w_k, [1.0]])
        rows.append(band[None, :])
        rels.append(lp.LESS)
        rhs.append(b_s * iq_k)
        rows.append(band[None, :])
        rels.append(lp.GREATER)
        rhs.append(-b_s * iq_k)

        for i in range(self.k):
            if i == k or self.n[i] == 0:
                continue
            bound = self.c_hat[k, i] - (self.i_c[k, i] + b_s * self.i_q[i])
            if not math.isfinite(bound):
                continue
            row = np.concatenate([-payment_weights(self.q_hat[i], support), [1.0]])
            rows.append(row[None, :])
            rels.append(lp.GREATER)
            rhs.append(float(bound))

        objective = np.zeros(n_vars)
        objective[-1] = -1.0
        lower = np.zeros(n_vars)
        upper = np.full(n_vars, b_s)
        lower[-1] = -b_s * iq_k
        upper[-1] = b_s * (1.0 + iq_k)
        program = lp.LinearProgram(
            objective=objective,
            a=np.vstack(rows),
            relations=tuple(rels),
            rhs=np.array(rhs),
            lower=lower,
            upper=upper,
        )
        outcome = lp.solve(program)
        if outcome.status == lp.INFEASIBLE:
            tilde = self._aligned_oracle(k)
            v_tilde = float(tilde.truthful_scores() @ self.q_hat[k])
            fallback = (
                float(self._u_sigma() @ self.q_hat[k])
                - v_tilde
                + (b_s + self.config.b_u) * iq_k
            )
            return fallback, tilde
        if outcome.status != lp.OPTIMAL:
            raise lp.SolverFailure(f"unexpected status {outcome.status}")
        table = np.clip(outcome.x[:-1].reshape(m, n), 0.0, None)
        return base + outcome.value, ScoringRule(support=support, table=table)

    def select_arm(self, h_values: np.ndarray) -> int:
        return int(np.argmax(h_values))

    # -- round planning ------------------------------------------------------

    def plan_round(self) -> RoundPlan:
        """Decide this round's deployment (normal UCB round or search probe)."""
        if self.mode == SEARCH:
            assert self.search is not None
            if self.search.done():
                self._finish_search()
            else:
                bs = self.search
                lam = bs.next_lambda()
                deployed = mix(bs.s0, bs.s1, lam)
                return RoundPlan(
                    t=self.t,
                    mode=SEARCH,
                    s_deployed=deployed,
                    alpha=self.config.alpha(self.t),
                    k_star=bs.target,
                    lam=lam,
                )
        self.update_cost_bounds()
        self.estimate_costs()
        h = np.empty(self.k)
        rules: list = [None] * self.k
        for k in range(self.k):
            h[k], rules[k] = self.solve_opt_lp(k)
        k_star = self.select_arm(h)
        alpha = self.config.alpha(self.t)
        s_opt = rules[k_star]
        tilde = self._aligned_oracle(k_star)
        if self.support_size == 0:
            deployed = tilde  # nothing reported yet; alpha is 1 at t=1 anyway
        else:
            deployed = mix(s_opt, tilde, alpha)
        return RoundPlan(
            t=self.t,
            mode=NORMAL,
            s_deployed=deployed,
            alpha=alpha,
            k_star=k_star,
            s_opt=s_opt,
            h_lp=h,
        )

    def observe(self, plan: RoundPlan, outcome) -> None:
        """Fold the played round back in and switch modes if the target missed."""
        self.record_round(plan.s_deployed, outcome.action, outcome.report)
        if self.mode == NORMAL:
            if outcome.action != plan.k_star:
                self.refresh_confidence()
                bs = BinarySearchState(
                    s0=plan.s_deployed,
                    s1=self._aligned_oracle(plan.k_star),
                    target=plan.k_star,
                    iq0=self.i_q.copy(),
                    t0=self.t,
                    alpha_t0=plan.alpha,
                    ic0=self.i_c.copy(),
                )
                bs.k_last = outcome.action
                bs.k0_end = outcome.action
                self.search = bs
                self.mode = SEARCH
        else:
            assert self.search is not None
            if binary_search_step(self.search, outcome.action) is None:
                self._finish_search()
        self.t += 1

    def _finish_search(self) -> None:
        bs = self.search
        assert bs is not None
        k0, k1 = bs.k0_end, bs.target
        delta = _delta(
            self.oracle.epsilon,
            self.config.b_s,
            float(bs.ic0[k0, k1]) if bs.ic0 is not None else float("inf"),
            float(bs.iq0[k0]) if bs.iq0 is not None else float("inf"),
            float(bs.iq0[k1]) if bs.iq0 is not None else float("inf"),
        )
        self.completed_searches.append(
            SearchRecord(
                t0=bs.t0,
                t1=self.t,
                k0=k0,
                k1=k1,
                alpha_t0=bs.alpha_t0,
                delta_t0=delta,
                essential=bs.alpha_t0 < delta,
                lam_min=bs.lam_min,
                lam_max=bs.lam_max,
            )
        )
        self.search = None
        self.mode = NORMAL

    def mistake_deltas(self, k_star: int) -> np.ndarray:
        """Delta_t(k_star, i) under current estimates (diagnostic)."""
        out = np.full(self.k, np.inf)
        for i in range(self.k):
            if i == k_star:
                out[i] = 0.0
                continue
            out[i] = _delta(
                self.oracle.epsilon,
                self.config.b_s,
                float(self.i_c[k_star, i]),
                float(self.i_q[i]),
                float(self.i_q[k_star]),
            )
        return out
