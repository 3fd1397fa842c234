"""Simulated strategic agent: best responses, sampling, visibility boundary.

The agent owns the full information structure (its private model) plus a
seeded RNG stream.  Everything the principal may see of a played round is the
``visible()`` projection of a RoundOutcome: (action, reported belief, state,
payment); costs and belief distributions never cross that boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import Instance

TIE_TOL = 1e-9  # agent profits closer than this count as indifference


class PublicOutcome(NamedTuple):
    """Principal-visible projection of one played round."""

    action: int
    report: np.ndarray
    omega: int
    payment: float


@dataclass(frozen=True)
class RoundOutcome:
    """Full outcome of one round, including agent-private sampling results."""

    action: int
    sigma_index: int
    omega: int
    payment: float
    report: np.ndarray

    def visible(self) -> PublicOutcome:
        return PublicOutcome(self.action, self.report, self.omega, self.payment)


def _truthful_values(rule, beliefs: np.ndarray) -> np.ndarray:
    """Expected payment of optimal reporting for each belief row."""
    vectorized = getattr(rule, "truthful_values", None)
    if vectorized is not None:
        return np.asarray(vectorized(beliefs), dtype=float)
    return np.array([rule.truthful_value(b) for b in beliefs])


def best_response(instance: Instance, rule) -> int:
    """The agent's profit-maximizing action under ``rule``.

    Ties at TIE_TOL break in favor of the principal's profit, then toward the
    lowest action index.
    """
    info = instance.info
    tv = _truthful_values(rule, info.support.beliefs)
    g = info.dists @ tv - info.costs
    best = float(g.max())
    tied = np.nonzero(g >= best - TIE_TOL)[0]
    if tied.size == 1:
        return int(tied[0])
    h = info.dists[tied] @ (instance.u_sigma() - tv)
    return int(tied[int(np.argmax(h))])


class AgentView:
    """One agent playing one instance with its own RNG stream."""

    def __init__(self, instance: Instance, seed):
        self.instance = instance
        self.rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        info = instance.info
        self._belief_cdfs = np.cumsum(info.dists, axis=1)
        self._state_cdfs = np.cumsum(info.support.beliefs, axis=1)
        self._u_sigma = instance.u_sigma()
        self._beliefs = info.support.beliefs
        self._dists = info.dists
        self._costs = info.costs

    def split(self) -> "AgentView":
        """Independent agent over the same instance (fresh RNG stream)."""
        return AgentView(self.instance, self.rng.spawn(1)[0])

    def best_response(self, rule) -> int:
        tv = _truthful_values(rule, self._beliefs)
        g = self._dists @ tv - self._costs
        best = float(g.max())
        tied = np.nonzero(g >= best - TIE_TOL)[0]
        if tied.size == 1:
            return int(tied[0])
        h = self._dists[tied] @ (self._u_sigma - tv)
        return int(tied[int(np.argmax(h))])

    def play_round(self, rule) -> RoundOutcome:
        """Best-respond, sample belief and state, report, get paid."""
        k = self.best_response(rule)
        u = self.rng.random(2)
        i = int(np.searchsorted(self._belief_cdfs[k], u[0], side="right"))
        i = min(i, self._beliefs.shape[0] - 1)
        sigma = self._beliefs[i]
        report, payments = rule.play(sigma)
        omega = int(np.searchsorted(self._state_cdfs[i], u[1], side="right"))
        omega = min(omega, sigma.shape[0] - 1)
        return RoundOutcome(
            action=k,
            sigma_index=i,
            omega=omega,
            payment=float(payments[omega]),
            report=report,
        )
