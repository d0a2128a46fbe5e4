"""Counter-based random streams.

Every generator in the package is derived from a tuple of non-negative
integers (seed, stream tag, round, candidate, rollout, ...). The tuple is
hashed by ``numpy.random.SeedSequence`` into a Philox key, so two calls with
the same key tuple always produce the same stream, regardless of how many
other streams were drawn before or in which process they run.
"""
from enum import IntEnum

import numpy as np

__all__ = ["Stream", "as_generator", "flatten_keys", "make_rng"]


class Stream(IntEnum):
    ENV = 1
    POLICY = 2
    TRAIN = 3
    EVAL = 4
    LAMBDA = 5
    EXPLORE = 6
    MINIBATCH = 7
    REPLAY = 8
    INIT = 9


def flatten_keys(*keys):
    flat = []
    for key in keys:
        if isinstance(key, (tuple, list)):
            flat.extend(flatten_keys(*key))
        else:
            value = int(key)
            if value < 0:
                raise ValueError(f"seed material must be non-negative, got {value}")
            flat.append(value)
    return tuple(flat)


def make_rng(*keys) -> np.random.Generator:
    """Return a Philox-backed generator keyed by ``keys``."""
    sequence = np.random.SeedSequence(list(flatten_keys(*keys)))
    return np.random.Generator(np.random.Philox(sequence))


def as_generator(seed_material) -> np.random.Generator:
    if isinstance(seed_material, np.random.Generator):
        return seed_material
    return make_rng(seed_material)
