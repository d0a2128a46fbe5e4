from reward_profiling.algos.config import (ALGO_KINDS, DDPG_LITE, PPO_CLIP, REINFORCE, REINFORCE_BASELINE, AlgoConfig,
                                           DdpgSettings, PpoSettings)
from reward_profiling.algos.critics import CriticParams, QuadraticFeatures
from reward_profiling.algos.ddpg import GaussianNoise, OrnsteinUhlenbeckNoise, ddpg_update, soft_update
from reward_profiling.algos.ppo import ppo_clip_update
from reward_profiling.algos.reinforce import (advantages, policy_gradient_estimate, reinforce_baseline_update,
                                              reinforce_update)
from reward_profiling.algos.replay_buffer import ReplayBuffer
from reward_profiling.algos.trainers import DdpgTrainer, OnPolicyTrainer, make_trainer
