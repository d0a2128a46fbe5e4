import numpy as np

from reward_profiling.mdp.core import Trajectory
from reward_profiling.policy.families import act, log_prob
from reward_profiling.utils.errors import DomainError
from reward_profiling.utils.rng import Stream, make_rng


def rollout(env, policy, seed_material, max_steps=None):
    """Run one episode of ``policy`` in ``env``.

    The episode stops at a terminal state, at the horizon, or after
    ``max_steps`` steps when a caller has a tighter budget. Environment and
    action noise come from separate streams keyed by ``seed_material``.
    """
    space = env.spec.action_space
    if space.is_discrete != (policy.family.n_actions > 0):
        raise DomainError(f"{policy.family.kind} policy does not match the {env.kind} action space")
    limit = env.spec.horizon if max_steps is None else min(max_steps, env.spec.horizon)
    action_rng = make_rng(Stream.POLICY, seed_material)
    stochastic = policy.family.stochastic

    state = env.reset(seed_material)
    states, actions, rewards, next_states, log_probs = [], [], [], [], []
    done = False
    while not done and len(rewards) < limit:
        action = act(policy, state, action_rng)
        if stochastic:
            log_probs.append(log_prob(policy, state, action))
        next_state, reward, done = env.step(action)
        states.append(state)
        actions.append(action)
        rewards.append(reward)
        next_states.append(next_state)
        state = next_state

    dim = env.spec.state_dim
    return Trajectory(
        states=np.asarray(states, dtype=float).reshape(-1, dim),
        actions=np.asarray(actions) if space.is_discrete else np.asarray(actions, dtype=float).reshape(-1, space.dim),
        rewards=np.asarray(rewards, dtype=float),
        next_states=np.asarray(next_states, dtype=float).reshape(-1, dim),
        truncated=not done,
        log_probs=np.asarray(log_probs, dtype=float),
    )
