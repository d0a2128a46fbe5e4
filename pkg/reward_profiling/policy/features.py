from dataclasses import dataclass

import numpy as np

from reward_profiling.utils.errors import ConfigError, DomainError

IDENTITY = "identity"
ONE_HOT = "tabular-one-hot"
POLYNOMIAL = "normalized-polynomial"
FEATURE_KINDS = (IDENTITY, ONE_HOT, POLYNOMIAL)


@dataclass(frozen=True)
class FeatureMap:
    """State features psi(s).

    ``tabular-one-hot`` reads the state index from ``state[0]``;
    ``normalized-polynomial`` emits (1, s, s^2, ..., s^degree) coordinate-wise.
    Normalisation divides by max(1, ||psi||) so the output norm never
    exceeds 1.
    """
    kind: str
    input_dim: int
    degree: int = 1
    n_states: int = 0
    normalize: bool = False

    def __post_init__(self):
        if self.kind not in FEATURE_KINDS:
            raise ConfigError(f"unknown feature map {self.kind!r}; expected one of {FEATURE_KINDS}")
        if self.input_dim < 1:
            raise ConfigError(f"feature input dimension must be positive, got {self.input_dim}")
        if self.kind == ONE_HOT and self.n_states < 1:
            raise ConfigError("tabular-one-hot features need n_states")
        if self.kind == POLYNOMIAL and self.degree < 1:
            raise ConfigError(f"polynomial degree must be positive, got {self.degree}")

    @property
    def output_dim(self):
        if self.kind == ONE_HOT:
            return self.n_states
        if self.kind == POLYNOMIAL:
            return 1 + self.input_dim * self.degree
        return self.input_dim

    @property
    def bounded(self):
        return self.kind != IDENTITY or self.normalize

    def __call__(self, state):
        state = np.asarray(state, dtype=float).reshape(-1)
        if self.kind == ONE_HOT:
            index = int(state[0])
            if not 0 <= index < self.n_states:
                raise DomainError(f"state index {index} outside 0..{self.n_states - 1}")
            psi = np.zeros(self.n_states)
            psi[index] = 1.0
            return psi
        if state.shape != (self.input_dim,):
            raise DomainError(f"state has dimension {state.shape[0]}, expected {self.input_dim}")
        if self.kind == POLYNOMIAL:
            psi = np.concatenate([[1.0]] + [state ** k for k in range(1, self.degree + 1)])
            return psi / max(1.0, float(np.linalg.norm(psi)))
        if self.normalize:
            return state / max(1.0, float(np.linalg.norm(state)))
        return state
