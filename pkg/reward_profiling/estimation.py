"""Monte Carlo return estimates and Hoeffding evaluation budgets.

Every trajectory return lies in an interval of width B (``return_bound``),
so the mean of E independent returns deviates from J by at least eps with
probability at most 2 exp(-2 E eps^2 / B^2). Comparing two policies at
each of T rounds with failure probability delta overall needs
E >= B^2 / (2 eps^2) ln(2T / delta) rollouts per policy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from reward_profiling.mdp.core import discounted_return, return_bound
from reward_profiling.mdp.rollout import rollout
from reward_profiling.utils.errors import DomainError
from reward_profiling.utils.rng import flatten_keys

THREE_POINTS = "tp"


@dataclass(frozen=True, eq=False)
class ReturnEstimate:
    j_hat: float
    n_rollouts: int
    sample_variance: float
    half_width: float
    return_range: float
    returns: np.ndarray = field(default_factory=lambda: np.zeros(0))
    trajectories: tuple = ()
    clt_half_width: float = 0.0

    def __post_init__(self):
        if self.n_rollouts < 1:
            raise DomainError("an estimate needs at least one rollout")
        if self.sample_variance < 0 or self.half_width < 0:
            raise DomainError("variance and half-width must be non-negative")

    @property
    def env_steps(self):
        return sum(len(traj) for traj in self.trajectories)

    @classmethod
    def exact(cls, value, return_range):
        """A noiseless score, used when an oracle replaces sampling."""
        return cls(j_hat=float(value), n_rollouts=1, sample_variance=0.0, half_width=0.0,
                   return_range=return_range)

    @classmethod
    def failed(cls, return_range):
        """Score of a candidate whose parameters diverged."""
        return cls(j_hat=-math.inf, n_rollouts=1, sample_variance=0.0, half_width=0.0, return_range=return_range)


@dataclass(frozen=True)
class EvalBudget:
    epsilon: float
    delta: float
    total_updates: int
    rollouts: int

    def __post_init__(self):
        if self.rollouts < 1:
            raise DomainError(f"evaluation budget needs at least one rollout, got {self.rollouts}")

    @classmethod
    def for_variant(cls, B, epsilon, delta, total_updates, variant=None):
        # three candidates per round: the union bound is spread over 3T evaluations
        effective = 3 * total_updates if variant == THREE_POINTS else total_updates
        return cls(epsilon, delta, total_updates, required_rollouts(B, epsilon, delta, effective))


def _check_positive(name, value):
    if not value > 0:
        raise DomainError(f"{name} must be positive, got {value}")


def required_rollouts(B, epsilon, delta, T):
    _check_positive("B", B)
    _check_positive("epsilon", epsilon)
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if T < 1:
        raise DomainError(f"T must be at least 1, got {T}")
    return max(1, math.ceil(B * B / (2.0 * epsilon * epsilon) * math.log(2.0 * T / delta)))


def hoeffding_failure_prob(B, epsilon, E):
    _check_positive("B", B)
    if epsilon < 0:
        raise DomainError(f"epsilon must be non-negative, got {epsilon}")
    if E < 1:
        raise DomainError(f"E must be at least 1, got {E}")
    return min(1.0, 2.0 * math.exp(-2.0 * E * epsilon * epsilon / (B * B)))


def hoeffding_half_width(B, delta, E):
    """eps such that P(|J_hat - J| >= eps) <= delta with E rollouts."""
    if B <= 0:
        return 0.0
    return B * math.sqrt(math.log(2.0 / delta) / (2.0 * E))


def confidence_interval(est):
    return est.j_hat - est.half_width, est.j_hat + est.half_width


def clt_interval(est, delta=0.05):
    """Normal-approximation interval, reported next to the Hoeffding one."""
    z = stats.norm.ppf(1.0 - delta / 2.0)
    width = z * math.sqrt(est.sample_variance / est.n_rollouts)
    return est.j_hat - width, est.j_hat + width


def summarize_returns(returns, B, delta, trajectories=()):
    returns = np.asarray(returns, dtype=float)
    E = len(returns)
    variance = float(np.var(returns, ddof=1)) if E > 1 else 0.0
    z = stats.norm.ppf(1.0 - delta / 2.0)
    return ReturnEstimate(
        j_hat=float(np.mean(returns)),
        n_rollouts=E,
        sample_variance=variance,
        half_width=hoeffding_half_width(B, delta, E),
        return_range=B,
        returns=returns,
        trajectories=tuple(trajectories),
        clt_half_width=float(z * math.sqrt(variance / E)),
    )


def estimate_return(policy, env, E, seed_material, delta=0.05):
    """Mean discounted return of ``E`` rollouts.

    Rollout ``i`` is keyed by ``(*seed_material, i)`` so the result does not
    depend on the order in which rollouts are run. The trajectories are kept
    on the estimate for reuse as training data.
    """
    if E < 1:
        raise DomainError(f"E must be at least 1, got {E}")
    keys = flatten_keys(seed_material)
    trajectories = [rollout(env, policy, keys + (i,)) for i in range(E)]
    returns = [discounted_return(traj, env.spec.gamma) for traj in trajectories]
    return summarize_returns(returns, return_bound(env.spec), delta, trajectories)
