import numpy as np

from reward_profiling.mdp.core import BoxSpace, Environment, MdpSpec

DT = 0.1
DAMPING = 0.1
INIT_BOX = 0.1
MAX_PENALTY = 2.0


class PointMassReacher(Environment):
    """2-D double integrator that should settle on a fixed target.

    Internal state is (x, y, vx, vy); the observation is the position
    relative to the target followed by the velocity, so a linear policy can
    solve the task. Reward is the negative distance to the target, clipped
    to [-2, 0].
    """
    kind = "reacher"

    def __init__(self, gamma=0.99, horizon=100, target=(0.5, 0.5), clip_actions=False):
        spec = MdpSpec(state_dim=4, action_space=BoxSpace(low=(-1.0, -1.0), high=(1.0, 1.0)),
                       gamma=gamma, horizon=horizon, reward_bounds=(-MAX_PENALTY, 0.0))
        super().__init__(spec, clip_actions=clip_actions)
        self.target = np.asarray(target, dtype=float)

    def _sample_initial(self, rng):
        position = rng.uniform(-INIT_BOX, INIT_BOX, size=2)
        return np.concatenate([position, np.zeros(2)])

    def _transition(self, action):
        position, velocity = self.state[:2], self.state[2:]
        velocity = (1.0 - DAMPING) * velocity + DT * action
        position = position + DT * velocity
        distance = float(np.linalg.norm(position - self.target))
        reward = -min(distance, MAX_PENALTY)
        return np.concatenate([position, velocity]), reward, False

    def observe(self):
        return np.concatenate([self.state[:2] - self.target, self.state[2:]])
