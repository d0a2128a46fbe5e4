import numpy as np

from reward_profiling.algos.reinforce import _require_batch, advantages
from reward_profiling.policy.families import grad_log_prob, log_prob
from reward_profiling.utils.errors import DomainError, NumericError
from reward_profiling.utils.rng import Stream, make_rng


def _flatten(trajectories, gamma, critic, feature_map):
    states, actions, old_log_probs, adv = [], [], [], []
    for traj in trajectories:
        if len(traj.log_probs) != len(traj):
            raise DomainError("PPO needs trajectories that stored behaviour log-probabilities")
        weights = gamma ** np.arange(len(traj)) * advantages(traj, gamma, critic, feature_map)
        states.extend(traj.states)
        actions.extend(traj.actions)
        old_log_probs.extend(traj.log_probs)
        adv.extend(weights)
    return states, actions, np.asarray(old_log_probs), np.asarray(adv)


def surrogate_gradient(params, states, actions, old_log_probs, adv, clip_ratio):
    """Gradient of mean_t min(r_t A_t, clip(r_t, 1-c, 1+c) A_t).

    A sample whose ratio already sits beyond the clip edge in the direction
    its advantage pushes contributes nothing.
    """
    grad = np.zeros(len(params.theta))
    for state, action, old_lp, a_t in zip(states, actions, old_log_probs, adv):
        if a_t == 0.0:
            continue
        ratio = np.exp(log_prob(params, state, action) - old_lp)
        if not np.isfinite(ratio):
            raise NumericError("non-finite probability ratio in the PPO surrogate")
        if (a_t > 0 and ratio > 1.0 + clip_ratio) or (a_t < 0 and ratio < 1.0 - clip_ratio):
            continue
        grad += ratio * a_t * grad_log_prob(params, state, action)
    return grad / len(states)


def ppo_clip_update(params, trajectories, cfg, critic=None, seed_material=0):
    """``epochs`` passes of minibatch ascent on the clipped surrogate.

    Advantages are gamma^t (G_t - V(s_t)) with a zero baseline when no critic
    is given, so the first unclipped step follows the REINFORCE direction.
    """
    _require_batch(trajectories)
    settings = cfg.ppo
    states, actions, old_log_probs, adv = _flatten(trajectories, cfg.gamma, critic, params.family.feature_map)
    n = len(states)
    if n == 0:
        return params
    rng = make_rng(Stream.MINIBATCH, seed_material)
    theta = params.theta.copy()
    for _ in range(settings.epochs):
        order = rng.permutation(n)
        for start in range(0, n, settings.minibatch):
            idx = order[start:start + settings.minibatch]
            current = params.with_theta(theta)
            grad = surrogate_gradient(current, [states[i] for i in idx], [actions[i] for i in idx],
                                      old_log_probs[idx], adv[idx], settings.clip_ratio)
            theta = theta + cfg.learning_rate * grad
    return params.with_theta(theta)
