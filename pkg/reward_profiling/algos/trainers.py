"""Inner policy-gradient loops, one profiling round at a time.

A trainer turns the incumbent parameters into a candidate by consuming
``steps_per_round`` environment steps. Everything it carries between rounds
(critic, replay buffer, target networks, queued reuse data) is its side
state; ``snapshot``/``restore`` let the wrapper roll that state back when a
round is rejected.
"""
import copy
import logging

from reward_profiling.algos.config import DDPG_LITE, PPO_CLIP, REINFORCE, REINFORCE_BASELINE
from reward_profiling.algos.critics import CriticParams, QuadraticFeatures
from reward_profiling.algos.ddpg import ddpg_update, make_noise
from reward_profiling.algos.ppo import ppo_clip_update
from reward_profiling.algos.reinforce import (fit_critic_to_returns, initial_critic, reinforce_baseline_update,
                                              reinforce_update)
from reward_profiling.algos.replay_buffer import ReplayBuffer
from reward_profiling.mdp.rollout import rollout
from reward_profiling.policy.families import mean_action
from reward_profiling.utils.errors import ConfigError
from reward_profiling.utils.rng import Stream, make_rng

logger = logging.getLogger(__name__)


class OnPolicyTrainer:
    def __init__(self, env, cfg, family, seed):
        self.env = copy.deepcopy(env)
        self.cfg = cfg
        self.seed = seed
        self.critic = None if cfg.kind == REINFORCE else initial_critic(family)
        self.pending = []
        self.last_train_steps = 0

    def collect(self, params, round_index):
        """Reused trajectories first, then fresh episodes up to the step budget."""
        batch, self.pending = list(self.pending), []
        used = sum(len(traj) for traj in batch)
        fresh = 0
        episode = 0
        budget = self.cfg.steps_per_round
        while used + fresh < budget:
            traj = rollout(self.env, params, (Stream.TRAIN, self.seed, round_index, episode),
                           max_steps=budget - used - fresh)
            batch.append(traj)
            fresh += len(traj)
            episode += 1
        self.last_train_steps = fresh
        return batch

    def propose(self, params, round_index):
        batch = self.collect(params, round_index)
        cfg = self.cfg
        if cfg.kind == REINFORCE:
            return reinforce_update(params, batch, cfg)
        if cfg.kind == REINFORCE_BASELINE:
            new_params, self.critic = reinforce_baseline_update(params, self.critic, batch, cfg)
            return new_params
        new_params = ppo_clip_update(params, batch, cfg, critic=self.critic,
                                     seed_material=(self.seed, round_index))
        self.critic = fit_critic_to_returns(self.critic, params.family, batch, cfg)
        return new_params

    def absorb(self, trajectories):
        """Queue evaluation rollouts of the selected policy as next-round data."""
        self.pending = list(trajectories)

    def snapshot(self):
        return self.critic, list(self.pending)

    def restore(self, snapshot):
        self.critic, self.pending = snapshot[0], list(snapshot[1])


class DdpgTrainer:
    def __init__(self, env, cfg, family, seed):
        spec = env.spec
        if spec.action_space.is_discrete:
            raise ConfigError("ddpg-lite needs a continuous action space")
        self.env = copy.deepcopy(env)
        self.cfg = cfg
        self.seed = seed
        self.action_space = spec.action_space
        self.q_features = QuadraticFeatures(spec.state_dim, spec.action_space.dim)
        self.critic = CriticParams.zeros(self.q_features.size)
        self.target_critic = self.critic
        self.target_actor = None
        self.buffer = ReplayBuffer(cfg.ddpg.buffer_size, spec.state_dim, spec.action_space.dim)
        self.noise = make_noise(cfg.ddpg, spec.action_space.dim)
        self.state = None
        self.episode = 0
        self.episode_steps = 0
        self.last_train_steps = 0
        self.skipped_updates = 0

    def _begin_episode(self):
        self.state = self.env.reset((Stream.TRAIN, self.seed, self.episode))
        self.episode_steps = 0
        self.noise.reset()

    def propose(self, params, round_index):
        if self.target_actor is None:
            self.target_actor = params
        rng = make_rng(Stream.EXPLORE, self.seed, round_index)
        actor = params
        horizon = self.env.spec.horizon
        skipped = 0
        for step in range(self.cfg.steps_per_round):
            if self.state is None:
                self._begin_episode()
            # exploration noise is clipped back into the action box
            action = self.action_space.clip(mean_action(actor, self.state) + self.noise.sample(rng))
            next_state, reward, done = self.env.step(action)
            self.buffer.add(self.state, action, reward, next_state, done)
            self.state = next_state
            self.episode_steps += 1
            if done or self.episode_steps >= horizon:
                self.state = None
                self.episode += 1
            result = ddpg_update(actor, self.critic, self.target_actor, self.target_critic, self.buffer,
                                 self.cfg, self.q_features, (self.seed, round_index, step))
            if result is None:
                skipped += 1
                continue
            actor, self.critic, self.target_actor, self.target_critic = result
        self.last_train_steps = self.cfg.steps_per_round
        if skipped:
            self.skipped_updates += skipped
            logger.warning("round %d: %d of %d updates skipped while the replay buffer filled", round_index,
                           skipped, self.cfg.steps_per_round)
        return actor

    def absorb(self, trajectories):
        for traj in trajectories:
            self.buffer.add_trajectory(traj)

    def snapshot(self):
        """Learner state plus the exploration episode in progress."""
        return copy.deepcopy((self.critic, self.target_critic, self.target_actor, self.buffer, self.noise, self.env,
                              self.state, self.episode, self.episode_steps))

    def restore(self, snapshot):
        (self.critic, self.target_critic, self.target_actor, self.buffer, self.noise, self.env, self.state,
         self.episode, self.episode_steps) = copy.deepcopy(snapshot)


def make_trainer(env, cfg, family, seed):
    if cfg.kind == DDPG_LITE:
        return DdpgTrainer(env, cfg, family, seed)
    if cfg.kind in (REINFORCE, REINFORCE_BASELINE, PPO_CLIP):
        if not family.stochastic:
            raise ConfigError(f"{cfg.kind} needs a stochastic policy family")
        return OnPolicyTrainer(env, cfg, family, seed)
    raise ConfigError(f"no trainer for algorithm {cfg.kind!r}")
