import numpy as np

from reward_profiling.utils.errors import DomainError


class ReplayBuffer:
    """FIFO store of (s, a, r, s', done) transitions with fixed capacity."""

    def __init__(self, capacity, state_dim, action_dim):
        if capacity < 1:
            raise DomainError(f"replay capacity must be positive, got {capacity}")
        self.capacity = capacity
        self.states = np.zeros((capacity, state_dim))
        self.actions = np.zeros((capacity, action_dim))
        self.rewards = np.zeros(capacity)
        self.next_states = np.zeros((capacity, state_dim))
        self.dones = np.zeros(capacity, dtype=bool)
        self.cursor = 0
        self.size = 0

    def __len__(self):
        return self.size

    def add(self, state, action, reward, next_state, done):
        i = self.cursor
        self.states[i] = state
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_states[i] = next_state
        self.dones[i] = done
        self.cursor = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def add_trajectory(self, traj):
        for t, done in enumerate(traj.dones()):
            self.add(traj.states[t], traj.actions[t], traj.rewards[t], traj.next_states[t], done)

    def _order(self):
        if self.size < self.capacity:
            return np.arange(self.size)
        return (np.arange(self.capacity) + self.cursor) % self.capacity

    def transitions(self):
        """All stored transitions, oldest first."""
        idx = self._order()
        return self.states[idx], self.actions[idx], self.rewards[idx], self.next_states[idx], self.dones[idx]

    def sample(self, batch, rng):
        if batch > self.size:
            raise DomainError(f"cannot sample {batch} transitions from a buffer holding {self.size}")
        idx = rng.integers(0, self.size, size=batch)
        return self.states[idx], self.actions[idx], self.rewards[idx], self.next_states[idx], self.dones[idx]
