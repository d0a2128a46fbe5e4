import numpy as np

from reward_profiling.algos.critics import CriticParams, fit_state_values, state_values
from reward_profiling.mdp.core import returns_to_go
from reward_profiling.policy.families import grad_log_prob
from reward_profiling.utils.errors import DomainError


def _require_batch(trajectories):
    if not trajectories:
        raise DomainError("policy-gradient updates need at least one trajectory")


def advantages(trajectory, gamma, critic=None, feature_map=None):
    """Return-to-go minus the critic's baseline at every step."""
    rtg = returns_to_go(trajectory.rewards, gamma)
    if critic is None:
        return rtg
    return rtg - state_values(critic, feature_map, trajectory.states)


def policy_gradient_estimate(params, trajectories, gamma, critic=None):
    """G_hat = mean over trajectories of sum_t gamma^t grad log pi(a_t|s_t) A_t."""
    _require_batch(trajectories)
    total = np.zeros(len(params.theta))
    feature_map = params.family.feature_map
    for traj in trajectories:
        weights = gamma ** np.arange(len(traj)) * advantages(traj, gamma, critic, feature_map)
        for state, action, weight in zip(traj.states, traj.actions, weights):
            if weight != 0.0:
                total += weight * grad_log_prob(params, state, action)
    return total / len(trajectories)


def reinforce_update(params, trajectories, cfg):
    gradient = policy_gradient_estimate(params, trajectories, cfg.gamma)
    return params.with_theta(params.theta + cfg.learning_rate * gradient)


def reinforce_baseline_update(params, critic, trajectories, cfg):
    """Advantage-weighted actor step, then refit the critic to returns-to-go.

    The baseline used by the actor is the critic passed in, which did not see
    this batch, so the gradient estimate stays unbiased.
    """
    gradient = policy_gradient_estimate(params, trajectories, cfg.gamma, critic)
    new_params = params.with_theta(params.theta + cfg.learning_rate * gradient)
    return new_params, fit_critic_to_returns(critic, params.family, trajectories, cfg)


def fit_critic_to_returns(critic, family, trajectories, cfg):
    states = np.vstack([traj.states for traj in trajectories])
    targets = np.concatenate([returns_to_go(traj.rewards, cfg.gamma) for traj in trajectories])
    if len(targets) == 0:
        return critic
    return fit_state_values(critic, family.feature_map, states, targets, cfg.critic_ridge)


def initial_critic(family):
    return CriticParams.zeros(family.feature_map.output_dim)
