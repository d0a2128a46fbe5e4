"""Exact evaluation of tabular MDPs.

A tabular model is held as dense arrays: ``P[s, a, s']`` transition
probabilities, ``r[s, a]`` expected rewards, the discount and the initial
distribution ``rho``. Policies are ``(n_states, n_actions)`` row-stochastic
matrices; ``tabular_policy`` builds one from policy parameters.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from reward_profiling.utils.errors import DomainError, PathCountExceeded

logger = logging.getLogger(__name__)

ROW_TOLERANCE = 1e-10
MAX_ENUMERATED_PATHS = 10 ** 6


@dataclass(frozen=True, eq=False)
class TabularModel:
    P: np.ndarray
    r: np.ndarray
    gamma: float
    rho: np.ndarray
    reward_bounds: tuple | None = None

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        r = np.asarray(self.r, dtype=float)
        rho = np.asarray(self.rho, dtype=float)
        if P.ndim != 3 or P.shape[0] != P.shape[2]:
            raise DomainError(f"transition tensor must have shape (S, A, S), got {P.shape}")
        if r.shape != P.shape[:2]:
            raise DomainError(f"reward table shape {r.shape} does not match transitions {P.shape[:2]}")
        if rho.shape != (P.shape[0],):
            raise DomainError(f"initial distribution has shape {rho.shape}, expected ({P.shape[0]},)")
        if np.any(P < 0) or np.max(np.abs(P.sum(axis=2) - 1.0)) > ROW_TOLERANCE:
            raise DomainError("transition rows must be probability vectors")
        if np.any(rho < 0) or abs(rho.sum() - 1.0) > ROW_TOLERANCE:
            raise DomainError("initial distribution must be a probability vector")
        if not 0.0 <= self.gamma < 1.0:
            raise DomainError(f"gamma must lie in [0, 1), got {self.gamma}")
        if self.reward_bounds is not None:
            lo, hi = self.reward_bounds
            if np.any(r < lo) or np.any(r > hi):
                raise DomainError(f"rewards fall outside declared bounds {self.reward_bounds}")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "rho", rho)

    @property
    def n_states(self):
        return self.P.shape[0]

    @property
    def n_actions(self):
        return self.P.shape[1]


def _check_policy(model, pi):
    pi = np.asarray(pi, dtype=float)
    if pi.shape != (model.n_states, model.n_actions):
        raise DomainError(f"policy matrix has shape {pi.shape}, expected {(model.n_states, model.n_actions)}")
    if np.any(pi < 0) or np.max(np.abs(pi.sum(axis=1) - 1.0)) > ROW_TOLERANCE:
        raise DomainError("policy rows must be probability vectors")
    return pi


def tabular_policy(params, n_states):
    """Action-probability matrix of a stochastic policy over state indices."""
    from reward_profiling.policy.families import action_probabilities

    return np.vstack([action_probabilities(params, np.array([float(s)])) for s in range(n_states)])


def induced_chain(model, pi):
    pi = _check_policy(model, pi)
    P_pi = np.einsum("sa,sat->st", pi, model.P)
    r_pi = np.sum(pi * model.r, axis=1)
    return P_pi, r_pi


def exact_policy_value(model, pi):
    """Solve V = r_pi + gamma P_pi V; return (V, J = rho . V)."""
    P_pi, r_pi = induced_chain(model, pi)
    V = np.linalg.solve(np.eye(model.n_states) - model.gamma * P_pi, r_pi)
    return V, float(model.rho @ V)


def truncated_policy_value(model, pi, horizon):
    """Expected discounted return of the first ``horizon`` steps."""
    P_pi, r_pi = induced_chain(model, pi)
    V = np.zeros(model.n_states)
    for _ in range(horizon):
        V = r_pi + model.gamma * P_pi @ V
    return V, float(model.rho @ V)


def value_iteration(model, tol=1e-10, max_iterations=100_000):
    """Optimal values and the greedy policy (lowest action index on ties)."""
    V = np.zeros(model.n_states)
    for _ in range(max_iterations):
        Q = model.r + model.gamma * model.P @ V
        V_next = Q.max(axis=1)
        gap = np.max(np.abs(V_next - V))
        V = V_next
        # contraction: final error <= gamma/(1-gamma) * gap
        if gap * model.gamma / (1.0 - model.gamma) < tol or gap == 0.0:
            break
    else:
        logger.warning("value iteration stopped after %d iterations (gap %.3g)", max_iterations, gap)
    Q = model.r + model.gamma * model.P @ V
    greedy = np.array([int(np.flatnonzero(row >= row.max() - 1e-12)[0]) for row in Q])
    return V, greedy


def greedy_matrix(model, greedy):
    pi = np.zeros((model.n_states, model.n_actions))
    pi[np.arange(model.n_states), greedy] = 1.0
    return pi


def enumerate_returns(model, pi, horizon, max_paths=MAX_ENUMERATED_PATHS):
    """Expected truncated return by explicit enumeration of every path."""
    pi = _check_policy(model, pi)
    if horizon == 0:
        return 0.0
    branching = model.n_states * model.n_actions
    if branching ** horizon > max_paths:
        raise PathCountExceeded(
            f"enumerating {branching}^{horizon} paths exceeds the guard of {max_paths}")

    gamma = model.gamma

    def expand(state, depth):
        if depth == horizon:
            return 0.0
        total = 0.0
        for action in range(model.n_actions):
            p_action = pi[state, action]
            if p_action == 0.0:
                continue
            reward = model.r[state, action]
            for nxt in np.flatnonzero(model.P[state, action]):
                p = p_action * model.P[state, action, nxt]
                total += p * (reward + gamma * expand(int(nxt), depth + 1))
        return total

    return float(sum(model.rho[s] * expand(s, 0) for s in np.flatnonzero(model.rho)))


def discounted_visitation(model, pi):
    """Normalised discounted state-visitation distribution d^pi."""
    P_pi, _ = induced_chain(model, pi)
    d = np.linalg.solve((np.eye(model.n_states) - model.gamma * P_pi).T, model.rho)
    return (1.0 - model.gamma) * d


def fisher_information(model, params):
    """E_{d^pi x pi}[g g^T] for the score g = grad log pi(a|s)."""
    from reward_profiling.policy.families import grad_log_prob

    pi = tabular_policy(params, model.n_states)
    d = discounted_visitation(model, pi)
    size = len(params.theta)
    F = np.zeros((size, size))
    for s in range(model.n_states):
        state = np.array([float(s)])
        for a in range(model.n_actions):
            g = grad_log_prob(params, state, a)
            F += d[s] * pi[s, a] * np.outer(g, g)
    return F
