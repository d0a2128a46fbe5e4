from reward_profiling.oracle.finite_difference import finite_difference_grad, relative_error
from reward_profiling.oracle.fixtures import dump_tabular_model, load_tabular_model, parse_tabular_model
from reward_profiling.oracle.tabular import (TabularModel, discounted_visitation, enumerate_returns,
                                             exact_policy_value, fisher_information, greedy_matrix, induced_chain,
                                             tabular_policy, truncated_policy_value, value_iteration)
