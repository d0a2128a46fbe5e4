import math

import numpy as np

from reward_profiling.mdp.core import DiscreteSpace, Environment, MdpSpec

GRAVITY = 9.8
MASS_CART = 1.0
MASS_POLE = 0.1
TOTAL_MASS = MASS_CART + MASS_POLE
HALF_LENGTH = 0.5
POLE_MASS_LENGTH = MASS_POLE * HALF_LENGTH
FORCE_MAG = 10.0
TAU = 0.02
ANGLE_LIMIT = 12 * 2 * math.pi / 360
X_LIMIT = 2.4
INIT_RANGE = 0.05


class CartPole(Environment):
    """Classic cart-pole balancing with explicit Euler integration.

    State is (x, x_dot, theta, theta_dot); action 0 pushes left, 1 pushes
    right; reward is +1 for every step taken.
    """
    kind = "cartpole"

    def __init__(self, gamma=0.99, horizon=200, clip_actions=False):
        spec = MdpSpec(state_dim=4, action_space=DiscreteSpace(2), gamma=gamma,
                       horizon=horizon, reward_bounds=(0.0, 1.0))
        super().__init__(spec, clip_actions=clip_actions)

    def _sample_initial(self, rng):
        return rng.uniform(-INIT_RANGE, INIT_RANGE, size=4)

    def _transition(self, action):
        x, x_dot, theta, theta_dot = self.state
        force = FORCE_MAG if action == 1 else -FORCE_MAG
        cos_t, sin_t = math.cos(theta), math.sin(theta)

        temp = (force + POLE_MASS_LENGTH * theta_dot ** 2 * sin_t) / TOTAL_MASS
        theta_acc = (GRAVITY * sin_t - cos_t * temp) / (
            HALF_LENGTH * (4.0 / 3.0 - MASS_POLE * cos_t ** 2 / TOTAL_MASS))
        x_acc = temp - POLE_MASS_LENGTH * theta_acc * cos_t / TOTAL_MASS

        x = x + TAU * x_dot
        x_dot = x_dot + TAU * x_acc
        theta = theta + TAU * theta_dot
        theta_dot = theta_dot + TAU * theta_acc

        terminal = abs(x) > X_LIMIT or abs(theta) > ANGLE_LIMIT
        return np.array([x, x_dot, theta, theta_dot]), 1.0, terminal
