import logging

import numpy as np

from reward_profiling.algos.critics import CriticParams
from reward_profiling.policy.families import mean_action
from reward_profiling.utils.errors import DomainError
from reward_profiling.utils.rng import Stream, make_rng

logger = logging.getLogger(__name__)


def soft_update(online, target, tau):
    online = np.asarray(online, dtype=float)
    target = np.asarray(target, dtype=float)
    if online.shape != target.shape:
        raise DomainError(f"soft update of mismatched shapes {online.shape} and {target.shape}")
    if not 0.0 <= tau <= 1.0:
        raise DomainError(f"tau must lie in [0, 1], got {tau}")
    return tau * online + (1.0 - tau) * target


def _actions(actor, states):
    return np.vstack([mean_action(actor, s) for s in states])


def _features(actor, states):
    return np.vstack([actor.family.feature_map(s) for s in states])


def ddpg_update(actor, critic, target_actor, target_critic, buffer, cfg, q_features, seed_material):
    """One DDPG step on a minibatch drawn from ``buffer``.

    Returns ``(actor, critic, target_actor, target_critic)``, or ``None``
    when the buffer does not yet hold a full batch.
    """
    settings = cfg.ddpg
    if len(buffer) < settings.batch:
        logger.debug("replay buffer holds %d < %d transitions; skipping update", len(buffer), settings.batch)
        return None
    rng = make_rng(Stream.REPLAY, seed_material)
    states, actions, rewards, next_states, dones = buffer.sample(settings.batch, rng)

    next_q = q_features.values(target_critic, next_states, _actions(target_actor, next_states))
    targets = rewards + cfg.gamma * (~dones) * next_q
    phi = q_features.batch(states, actions)
    td_error = targets - phi @ critic.w
    new_critic = CriticParams(critic.w + settings.critic_lr * (phi.T @ td_error) / len(td_error))

    # deterministic policy gradient: dQ/da at a = mu(s), chained through mu's linear weights
    policy_actions = _actions(actor, states)
    dq_da = q_features.action_gradient(new_critic, states, policy_actions)
    psi = _features(actor, states)
    grad = np.einsum("nd,nk->dk", dq_da, psi).reshape(-1) / len(states)
    new_actor = actor.with_theta(actor.theta + cfg.learning_rate * grad)

    new_target_actor = target_actor.with_theta(soft_update(new_actor.theta, target_actor.theta, settings.tau))
    new_target_critic = CriticParams(soft_update(new_critic.w, target_critic.w, settings.tau))
    return new_actor, new_critic, new_target_actor, new_target_critic


class GaussianNoise:
    def __init__(self, sigma, action_dim):
        self.sigma = sigma
        self.action_dim = action_dim

    def reset(self):
        pass

    def sample(self, rng):
        return self.sigma * rng.standard_normal(self.action_dim)


class OrnsteinUhlenbeckNoise:
    """Temporally correlated noise x += theta (-x) dt + sigma sqrt(dt) N(0, 1)."""

    def __init__(self, sigma, action_dim, theta=0.15, dt=1e-2):
        self.sigma = sigma
        self.theta = theta
        self.dt = dt
        self.state = np.zeros(action_dim)

    def reset(self):
        self.state = np.zeros_like(self.state)

    def sample(self, rng):
        self.state = (self.state - self.theta * self.state * self.dt
                      + self.sigma * np.sqrt(self.dt) * rng.standard_normal(len(self.state)))
        return self.state.copy()


def make_noise(settings, action_dim):
    if settings.noise == "ou":
        return OrnsteinUhlenbeckNoise(settings.noise_sigma, action_dim, theta=settings.ou_theta)
    return GaussianNoise(settings.noise_sigma, action_dim)
