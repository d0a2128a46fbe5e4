import numpy as np

from reward_profiling.mdp.core import DiscreteSpace, Environment, MdpSpec
from reward_profiling.oracle.tabular import TabularModel
from reward_profiling.utils.errors import DomainError

LEFT, RIGHT = 0, 1
MAX_CHAIN_STATES = 8


def chain_model(n_states=3, gamma=0.9, slip=0.0):
    """Chain of ``n_states`` states with actions left/right.

    Reward 1 is paid only for taking "right" in the last state, which loops
    back onto itself. With ``slip > 0`` the chosen move is replaced by the
    opposite one with that probability.
    """
    if not 1 <= n_states <= MAX_CHAIN_STATES:
        raise DomainError(f"chain supports 1..{MAX_CHAIN_STATES} states, got {n_states}")
    if not 0.0 <= slip <= 1.0:
        raise DomainError(f"slip must lie in [0, 1], got {slip}")
    P = np.zeros((n_states, 2, n_states))
    r = np.zeros((n_states, 2))
    for s in range(n_states):
        left, right = max(s - 1, 0), min(s + 1, n_states - 1)
        P[s, LEFT, left] += 1.0 - slip
        P[s, LEFT, right] += slip
        P[s, RIGHT, right] += 1.0 - slip
        P[s, RIGHT, left] += slip
    r[n_states - 1, RIGHT] = 1.0
    rho = np.zeros(n_states)
    rho[0] = 1.0
    return TabularModel(P=P, r=r, gamma=gamma, rho=rho, reward_bounds=(0.0, 1.0))


class ChainMdp(Environment):
    kind = "chain"

    def __init__(self, n_states=3, gamma=0.9, horizon=100, slip=0.0, clip_actions=False, model=None):
        self.tabular_model = model if model is not None else chain_model(n_states, gamma, slip)
        if self.tabular_model.n_states > MAX_CHAIN_STATES or self.tabular_model.n_actions != 2:
            raise DomainError("chain environments need at most 8 states and exactly 2 actions")
        lo, hi = self.tabular_model.reward_bounds or (float(self.tabular_model.r.min()), float(self.tabular_model.r.max()))
        spec = MdpSpec(state_dim=1, action_space=DiscreteSpace(2), gamma=self.tabular_model.gamma,
                       horizon=horizon, reward_bounds=(lo, hi), n_states=self.tabular_model.n_states)
        super().__init__(spec, clip_actions=clip_actions)

    def _sample_initial(self, rng):
        return self._draw(rng, self.tabular_model.rho)

    def _transition(self, action):
        model = self.tabular_model
        reward = model.r[self.state, action]
        return self._draw(self.rng, model.P[self.state, action]), reward, False

    @staticmethod
    def _draw(rng, probs):
        nonzero = np.flatnonzero(probs)
        if len(nonzero) == 1:
            return int(nonzero[0])
        return int(min(np.searchsorted(np.cumsum(probs), rng.random(), side="right"), len(probs) - 1))

    def observe(self):
        return np.array([float(self.state)])
