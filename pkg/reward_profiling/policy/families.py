"""Linear policy families over state features.

Parameters are a flat vector. For a family with ``k`` features:

* softmax-linear: a ``(n_actions, k)`` weight matrix, logits = W psi(s);
* gaussian-linear: a ``(action_dim, k)`` mean matrix followed, when the
  log-std is learned, by ``action_dim`` log-std entries;
* deterministic-linear: a ``(action_dim, k)`` matrix, action = W psi(s).
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from reward_profiling.policy.features import IDENTITY, ONE_HOT, FeatureMap
from reward_profiling.utils.errors import (ConfigError, DivergedParametersError, DomainError, NumericError,
                                           UnsupportedOperationError)
from reward_profiling.utils.rng import as_generator

SOFTMAX = "softmax-linear"
GAUSSIAN = "gaussian-linear"
DETERMINISTIC = "deterministic-linear"
FAMILY_KINDS = (SOFTMAX, GAUSSIAN, DETERMINISTIC)

HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class PolicyFamily:
    kind: str
    feature_map: FeatureMap
    n_actions: int = 0
    action_dim: int = 0
    learn_log_std: bool = True
    log_std: float = -0.5

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise ConfigError(f"unknown policy family {self.kind!r}; expected one of {FAMILY_KINDS}")
        if self.kind == SOFTMAX:
            if self.n_actions < 2:
                raise ConfigError("softmax policies need at least two actions")
            if not self.feature_map.bounded:
                raise ConfigError("softmax policies need features with norm at most 1")
        elif self.action_dim < 1:
            raise ConfigError(f"{self.kind} needs a positive action_dim")

    @property
    def stochastic(self):
        return self.kind != DETERMINISTIC

    @property
    def rows(self):
        return self.n_actions if self.kind == SOFTMAX else self.action_dim

    @property
    def weight_count(self):
        return self.rows * self.feature_map.output_dim

    @property
    def param_count(self):
        extra = self.action_dim if self.kind == GAUSSIAN and self.learn_log_std else 0
        return self.weight_count + extra

    def zeros(self):
        theta = np.zeros(self.param_count)
        if self.kind == GAUSSIAN and self.learn_log_std:
            theta[self.weight_count:] = self.log_std
        return PolicyParams(theta, self)


@dataclass(frozen=True, eq=False)
class PolicyParams:
    theta: np.ndarray
    family: PolicyFamily

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float).reshape(-1)
        if theta.shape != (self.family.param_count,):
            raise DomainError(f"theta has {theta.shape[0]} entries, family expects {self.family.param_count}")
        if not np.all(np.isfinite(theta)):
            raise DivergedParametersError("policy parameters contain non-finite entries")
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)

    @property
    def weights(self):
        fam = self.family
        return self.theta[:fam.weight_count].reshape(fam.rows, fam.feature_map.output_dim)

    @property
    def log_std(self):
        fam = self.family
        if fam.learn_log_std:
            return self.theta[fam.weight_count:]
        return np.full(fam.action_dim, fam.log_std)

    def with_theta(self, theta):
        return PolicyParams(theta, self.family)

    def checksum(self):
        return hashlib.sha256(self.theta.astype("<f8").tobytes()).hexdigest()[:16]


def default_family(spec, deterministic=False):
    """Linear family matching an environment's observation and action spaces."""
    if spec.n_states is not None:
        features = FeatureMap(ONE_HOT, input_dim=1, n_states=spec.n_states)
    else:
        features = FeatureMap(IDENTITY, input_dim=spec.state_dim, normalize=spec.action_space.is_discrete)
    if spec.action_space.is_discrete:
        if deterministic:
            raise ConfigError("deterministic policies need a continuous action space")
        return PolicyFamily(SOFTMAX, features, n_actions=spec.action_space.n)
    kind = DETERMINISTIC if deterministic else GAUSSIAN
    return PolicyFamily(kind, features, action_dim=spec.action_space.dim)


def _logits(params, state):
    logits = params.weights @ params.family.feature_map(state)
    if not np.all(np.isfinite(logits)):
        raise NumericError("non-finite logits; policy parameters have diverged")
    return logits


def _softmax(logits):
    shifted = logits - logits.max()
    expd = np.exp(shifted)
    return expd / expd.sum()


def mean_action(params, state):
    mean = params.weights @ params.family.feature_map(state)
    if not np.all(np.isfinite(mean)):
        raise NumericError("non-finite action mean; policy parameters have diverged")
    return mean


def action_probabilities(params, state):
    if params.family.kind != SOFTMAX:
        raise UnsupportedOperationError(f"{params.family.kind} has no discrete action distribution")
    return _softmax(_logits(params, state))


def act(params, state, seed_material):
    """Draw an action; deterministic given ``seed_material`` (or a Generator)."""
    kind = params.family.kind
    if kind == DETERMINISTIC:
        return mean_action(params, state)
    rng = as_generator(seed_material)
    if kind == SOFTMAX:
        probs = action_probabilities(params, state)
        return int(min(np.searchsorted(np.cumsum(probs), rng.random(), side="right"), len(probs) - 1))
    mean = mean_action(params, state)
    return mean + np.exp(params.log_std) * rng.standard_normal(len(mean))


def log_prob(params, state, action):
    kind = params.family.kind
    if kind == DETERMINISTIC:
        raise UnsupportedOperationError("deterministic policies have no log-probability")
    if kind == SOFTMAX:
        logits = _logits(params, state)
        shifted = logits - logits.max()
        return float(shifted[int(action)] - math.log(np.exp(shifted).sum()))
    mean = mean_action(params, state)
    log_std = params.log_std
    z = (np.asarray(action, dtype=float) - mean) / np.exp(log_std)
    return float(np.sum(-0.5 * z * z - log_std - HALF_LOG_2PI))


def grad_log_prob(params, state, action):
    """Analytic gradient of ``log_prob`` with respect to theta."""
    fam = params.family
    if fam.kind == DETERMINISTIC:
        raise UnsupportedOperationError("deterministic policies have no log-probability")
    psi = fam.feature_map(state)
    if fam.kind == SOFTMAX:
        coeff = -action_probabilities(params, state)
        coeff[int(action)] += 1.0
        return np.outer(coeff, psi).reshape(-1)
    mean = mean_action(params, state)
    std = np.exp(params.log_std)
    diff = np.asarray(action, dtype=float) - mean
    grad_w = np.outer(diff / std ** 2, psi).reshape(-1)
    if not fam.learn_log_std:
        return grad_w
    return np.concatenate([grad_w, (diff / std) ** 2 - 1.0])


def mix_params(old, new, lam):
    """Elementwise convex combination lam * new + (1 - lam) * old."""
    if old.family != new.family:
        raise DomainError("cannot mix parameters of different policy families")
    if not 0.0 <= lam <= 1.0:
        raise DomainError(f"mixing weight must lie in [0, 1], got {lam}")
    if lam == 0.0:
        return old
    if lam == 1.0:
        return new
    return PolicyParams(lam * new.theta + (1.0 - lam) * old.theta, old.family)
