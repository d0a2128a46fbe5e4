import math

import numpy as np

from reward_profiling.mdp.core import BoxSpace, Environment, MdpSpec

STATE_LIMIT = 2.0


def lq_optimal_gain(gamma):
    """Optimal k in a = -k s for s' = s + a, reward -(s^2 + a^2).

    The discounted Riccati equation P = 1 + gamma P - gamma^2 P^2 / (1 + gamma P)
    reduces to gamma P^2 + (1 - 2 gamma) P - 1 = 0 after multiplying out,
    and k = gamma P / (1 + gamma P).
    """
    a, b, c = gamma, 1.0 - 2.0 * gamma, -1.0
    P = (-b + math.sqrt(b * b - 4 * a * c)) / (2 * a)
    return gamma * P / (1.0 + gamma * P)


class LinearQuadraticEnv(Environment):
    """Scalar linear system with quadratic cost, state clipped to [-2, 2]."""
    kind = "lq"

    def __init__(self, gamma=0.9, horizon=20, clip_actions=False):
        bound = STATE_LIMIT ** 2 + 1.0
        spec = MdpSpec(state_dim=1, action_space=BoxSpace(low=(-1.0,), high=(1.0,)),
                       gamma=gamma, horizon=horizon, reward_bounds=(-bound, 0.0))
        super().__init__(spec, clip_actions=clip_actions)

    def _sample_initial(self, rng):
        return rng.uniform(-1.0, 1.0, size=1)

    def _transition(self, action):
        s, a = float(self.state[0]), float(action[0])
        reward = -(s * s + a * a)
        return np.array([min(max(s + a, -STATE_LIMIT), STATE_LIMIT)]), reward, False
