from __future__ import annotations

import abc
from dataclasses import dataclass, field

import numpy as np

from reward_profiling.utils.errors import DomainError
from reward_profiling.utils.rng import Stream, make_rng


@dataclass(frozen=True)
class DiscreteSpace:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"discrete space needs at least one action, got {self.n}")

    @property
    def is_discrete(self):
        return True

    def contains(self, action):
        return isinstance(action, (int, np.integer)) and 0 <= int(action) < self.n


@dataclass(frozen=True)
class BoxSpace:
    low: tuple
    high: tuple

    def __post_init__(self):
        if len(self.low) != len(self.high) or not self.low:
            raise DomainError("box bounds must be non-empty and of equal length")
        if any(lo > hi for lo, hi in zip(self.low, self.high)):
            raise DomainError(f"box lower bound exceeds upper bound: {self.low} > {self.high}")

    @property
    def is_discrete(self):
        return False

    @property
    def dim(self):
        return len(self.low)

    def contains(self, action):
        action = np.asarray(action, dtype=float)
        return (action.shape == (self.dim,)
                and bool(np.all(action >= np.asarray(self.low)))
                and bool(np.all(action <= np.asarray(self.high))))

    def clip(self, action):
        return np.clip(np.asarray(action, dtype=float), self.low, self.high)


@dataclass(frozen=True)
class MdpSpec:
    state_dim: int
    action_space: DiscreteSpace | BoxSpace
    gamma: float
    horizon: int
    reward_bounds: tuple
    # set for tabular environments whose observation is the state index
    n_states: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise DomainError(f"gamma must lie in [0, 1), got {self.gamma}")
        if self.horizon < 1:
            raise DomainError(f"horizon must be positive, got {self.horizon}")
        r_min, r_max = self.reward_bounds
        if r_min > r_max:
            raise DomainError(f"reward bounds are inverted: {self.reward_bounds}")

    @property
    def r_min(self):
        return self.reward_bounds[0]

    @property
    def r_max(self):
        return self.reward_bounds[1]


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One episode, truncated at the horizon or ended by a terminal state.

    ``log_probs`` holds the behaviour policy's log-probabilities when the
    policy was stochastic; it is empty for deterministic policies.
    """
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    truncated: bool
    log_probs: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __len__(self):
        return len(self.rewards)

    @property
    def terminal(self):
        return len(self) > 0 and not self.truncated

    def dones(self):
        done = np.zeros(len(self), dtype=bool)
        if self.terminal:
            done[-1] = True
        return done


def discounted_return(traj, gamma):
    if not 0.0 <= gamma < 1.0:
        raise DomainError(f"gamma must lie in [0, 1), got {gamma}")
    rewards = traj.rewards if isinstance(traj, Trajectory) else np.asarray(traj, dtype=float)
    if len(rewards) == 0:
        return 0.0
    return float(np.dot(gamma ** np.arange(len(rewards)), rewards))


def returns_to_go(rewards, gamma):
    rewards = np.asarray(rewards, dtype=float)
    out = np.zeros_like(rewards)
    running = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        running = rewards[t] + gamma * running
        out[t] = running
    return out


def geometric_factor(gamma, horizon):
    if horizon is None:
        return 1.0 / (1.0 - gamma)
    return (1.0 - gamma ** horizon) / (1.0 - gamma)


def return_bound(spec, horizon=...):
    """Range B of any truncated discounted return under ``spec``.

    Uses the reward range rather than R_max so that environments with negative
    rewards keep a valid Hoeffding constant. Pass ``horizon=None`` for the
    untruncated limit.
    """
    h = spec.horizon if horizon is ... else horizon
    return (spec.r_max - spec.r_min) * geometric_factor(spec.gamma, h)


def return_interval(spec):
    factor = geometric_factor(spec.gamma, spec.horizon)
    return spec.r_min * factor, spec.r_max * factor


class Environment(abc.ABC):
    """Single-threaded environment instance.

    Subclasses provide the initial distribution and the dynamics; the base
    class validates actions, rewards and the terminal flag.
    """
    kind = "abstract"

    def __init__(self, spec, clip_actions=False):
        self.spec = spec
        self.clip_actions = clip_actions
        self.state = None
        self.rng = None
        self.done = False
        self.t = 0

    def reset(self, seed_material):
        self.rng = make_rng(Stream.ENV, seed_material)
        self.state = self._sample_initial(self.rng)
        self.done = False
        self.t = 0
        return self.observe()

    def step(self, action):
        if self.state is None:
            raise DomainError(f"{self.kind}: step called before reset")
        if self.done:
            raise DomainError(f"{self.kind}: step called on a terminated episode")
        action = self._check_action(action)
        next_state, reward, terminal = self._transition(action)
        r_min, r_max = self.spec.reward_bounds
        if not r_min <= reward <= r_max:
            raise DomainError(f"{self.kind}: reward {reward} outside declared bounds {self.spec.reward_bounds}")
        self.state = next_state
        self.done = bool(terminal)
        self.t += 1
        return self.observe(), float(reward), self.done

    def observe(self):
        return np.array(self.state, dtype=float)

    def _check_action(self, action):
        space = self.spec.action_space
        if space.is_discrete:
            if not space.contains(action):
                raise DomainError(f"{self.kind}: action {action!r} outside discrete({space.n})")
            return int(action)
        action = np.asarray(action, dtype=float).reshape(-1)
        if action.shape != (space.dim,):
            raise DomainError(f"{self.kind}: action has shape {action.shape}, expected ({space.dim},)")
        if not np.all(np.isfinite(action)):
            raise DomainError(f"{self.kind}: non-finite action {action}")
        if not space.contains(action):
            if not self.clip_actions:
                raise DomainError(f"{self.kind}: action {action} outside bounds [{space.low}, {space.high}]")
            action = space.clip(action)
        return action

    @abc.abstractmethod
    def _sample_initial(self, rng):
        ...

    @abc.abstractmethod
    def _transition(self, action):
        ...
