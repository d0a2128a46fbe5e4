from reward_profiling.policy.families import (DETERMINISTIC, GAUSSIAN, SOFTMAX, PolicyFamily, PolicyParams,
                                              action_probabilities, act, default_family, grad_log_prob, log_prob,
                                              mean_action, mix_params)
from reward_profiling.policy.features import FeatureMap
