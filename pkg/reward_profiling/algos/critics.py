"""Linear-in-features critics.

The state-value baseline reuses the policy's feature map, V_w(s) = w . psi(s).
The DDPG-lite critic is linear in the quadratic monomials of z = (s, a),
Q_w(s, a) = w . phi(z), which represents the action value of a linear
policy on a linear-quadratic problem exactly.
"""
from dataclasses import dataclass

import numpy as np

from reward_profiling.utils.errors import DivergedParametersError, DomainError


@dataclass(frozen=True, eq=False)
class CriticParams:
    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=float).reshape(-1)
        if not np.all(np.isfinite(w)):
            raise DivergedParametersError("critic weights contain non-finite entries")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @classmethod
    def zeros(cls, size):
        return cls(np.zeros(size))


def state_features(feature_map, states):
    return np.vstack([feature_map(s) for s in states]) if len(states) else np.zeros((0, feature_map.output_dim))


def state_values(critic, feature_map, states):
    return state_features(feature_map, states) @ critic.w


def fit_state_values(critic, feature_map, states, targets, ridge=1e-3):
    """Ridge least-squares regression of V_w onto ``targets``."""
    X = state_features(feature_map, states)
    if X.shape[1] != len(critic.w):
        raise DomainError(f"critic has {len(critic.w)} weights for {X.shape[1]} features")
    A = X.T @ X + ridge * np.eye(X.shape[1])
    return CriticParams(np.linalg.solve(A, X.T @ np.asarray(targets, dtype=float)))


class QuadraticFeatures:
    """phi(s, a) = (z_i z_j for i <= j, z, 1) with z = concat(s, a)."""

    def __init__(self, state_dim, action_dim):
        self.state_dim = state_dim
        self.action_dim = action_dim
        dim = state_dim + action_dim
        self._rows, self._cols = np.triu_indices(dim)
        self.size = len(self._rows) + dim + 1

    def batch(self, states, actions):
        Z = np.hstack([np.asarray(states, dtype=float).reshape(len(states), -1),
                       np.asarray(actions, dtype=float).reshape(len(actions), -1)])
        quadratic = Z[:, self._rows] * Z[:, self._cols]
        return np.hstack([quadratic, Z, np.ones((len(Z), 1))])

    def values(self, critic, states, actions):
        return self.batch(states, actions) @ critic.w

    def action_gradient(self, critic, states, actions):
        """dQ/da for each row, shape (N, action_dim)."""
        Z = np.hstack([np.asarray(states, dtype=float).reshape(len(states), -1),
                       np.asarray(actions, dtype=float).reshape(len(actions), -1)])
        n_quad = len(self._rows)
        w_quad, w_lin = critic.w[:n_quad], critic.w[n_quad:n_quad + Z.shape[1]]
        grad = np.tile(w_lin, (len(Z), 1))
        # d(z_i z_j)/dz_k = z_j [i == k] + z_i [j == k]
        for idx, (i, j) in enumerate(zip(self._rows, self._cols)):
            grad[:, i] += w_quad[idx] * Z[:, j]
            grad[:, j] += w_quad[idx] * Z[:, i]
        return grad[:, self.state_dim:]
