import numpy as np

from reward_profiling.utils.errors import DomainError, NumericError


def finite_difference_grad(f, theta, h=1e-5):
    """Central-difference gradient of a deterministic scalar function."""
    if not h > 0:
        raise DomainError(f"step size must be positive, got {h}")
    theta = np.array(theta, dtype=float).reshape(-1)
    grad = np.zeros_like(theta)
    for i in range(len(theta)):
        up, down = theta.copy(), theta.copy()
        up[i] += h
        down[i] -= h
        f_up, f_down = float(f(up)), float(f(down))
        if not (np.isfinite(f_up) and np.isfinite(f_down)):
            raise NumericError(f"non-finite function value while differencing coordinate {i}")
        grad[i] = (f_up - f_down) / (2.0 * h)
    return grad


def relative_error(a, b):
    """Elementwise |a - b| / max(1, |b|)."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return np.abs(a - b) / np.maximum(1.0, np.abs(b))
