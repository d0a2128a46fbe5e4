from reward_profiling.mdp.core import (BoxSpace, DiscreteSpace, Environment, MdpSpec, Trajectory, discounted_return,
                                       return_bound, return_interval, returns_to_go)
from reward_profiling.mdp.registry import make_env
from reward_profiling.mdp.rollout import rollout
