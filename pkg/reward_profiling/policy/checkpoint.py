"""Binary checkpoint format for policy parameters.

Layout (little-endian): the ``HEADER`` struct
``magic, version, family, feature, flags, input_dim, degree, n_states,
n_actions, action_dim, log_std, param_count`` followed by ``param_count``
IEEE-754 float64 values. ``flags`` bit 0 is feature normalisation, bit 1 a
learned log-std.
"""
import struct

import numpy as np

from reward_profiling.policy.families import FAMILY_KINDS, PolicyFamily, PolicyParams
from reward_profiling.policy.features import FEATURE_KINDS, FeatureMap
from reward_profiling.utils.errors import DomainError, ResultsIOError

MAGIC = b"RPCK"
VERSION = 1
HEADER = struct.Struct("<4sBBBBIIIIIdI")


def dumps_params(params):
    fam, features = params.family, params.family.feature_map
    flags = int(features.normalize) | (int(fam.learn_log_std) << 1)
    header = HEADER.pack(MAGIC, VERSION, FAMILY_KINDS.index(fam.kind), FEATURE_KINDS.index(features.kind), flags,
                         features.input_dim, features.degree, features.n_states, fam.n_actions, fam.action_dim,
                         fam.log_std, fam.param_count)
    return header + params.theta.astype("<f8").tobytes()


def loads_params(blob):
    if len(blob) < HEADER.size:
        raise DomainError("checkpoint is shorter than its header")
    (magic, version, family_code, feature_code, flags, input_dim, degree, n_states, n_actions, action_dim, log_std,
     count) = HEADER.unpack_from(blob)
    if magic != MAGIC or version != VERSION:
        raise DomainError(f"not a version {VERSION} policy checkpoint")
    if family_code >= len(FAMILY_KINDS) or feature_code >= len(FEATURE_KINDS):
        raise DomainError("checkpoint names an unknown policy family or feature map")
    if len(blob) != HEADER.size + 8 * count:
        raise DomainError(f"checkpoint payload holds {len(blob) - HEADER.size} bytes, expected {8 * count}")
    features = FeatureMap(FEATURE_KINDS[feature_code], input_dim=input_dim, degree=degree, n_states=n_states,
                          normalize=bool(flags & 1))
    family = PolicyFamily(FAMILY_KINDS[family_code], features, n_actions=n_actions, action_dim=action_dim,
                          learn_log_std=bool(flags & 2), log_std=log_std)
    theta = np.frombuffer(blob, dtype="<f8", count=count, offset=HEADER.size)
    return PolicyParams(theta.astype(float), family)


def save_params(params, path):
    try:
        with open(path, "wb") as fh:
            fh.write(dumps_params(params))
    except OSError as e:
        raise ResultsIOError(f'Failed to write checkpoint to {path}. {str(e)}') from e


def load_params(path):
    try:
        with open(path, "rb") as fh:
            return loads_params(fh.read())
    except OSError as e:
        raise ResultsIOError(f'Failed to read checkpoint from {path}. {str(e)}') from e
