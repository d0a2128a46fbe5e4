"""Reward profiling around an inner policy-gradient trainer.

Each round the inner algorithm proposes a candidate from the incumbent
parameters. The incumbent, the candidate and (for Mixup/Three-Points) their
convex blend are scored by Monte Carlo return estimates, and the best-scoring
one becomes the next incumbent. The incumbent is always a candidate, and ties
go to it, so a round can never select something estimated to be worse.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from typing import NamedTuple

from reward_profiling.algos.trainers import make_trainer
from reward_profiling.estimation import ReturnEstimate, estimate_return
from reward_profiling.mdp.core import return_bound
from reward_profiling.models import RoundRecord
from reward_profiling.oracle.tabular import tabular_policy, truncated_policy_value
from reward_profiling.policy.families import SOFTMAX, default_family, mix_params
from reward_profiling.utils.errors import ConfigError, DomainError, NumericError
from reward_profiling.utils.rng import Stream, make_rng

logger = logging.getLogger(__name__)

VANILLA = "vanilla"
LOOKBACK = "lb"
MIXUP = "mu"
THREE_POINTS = "tp"
VARIANTS = (VANILLA, LOOKBACK, MIXUP, THREE_POINTS)

OLD, NEW, MIX = "old", "new", "mix"
CANDIDATE_TAGS = {
    VANILLA: (OLD, NEW),
    LOOKBACK: (OLD, NEW),
    MIXUP: (OLD, MIX),
    THREE_POINTS: (OLD, NEW, MIX),
}
# fixed per tag so a candidate draws the same independent seeds under every variant
TAG_CODES = {OLD: 0, NEW: 1, MIX: 2}

FIXED, BETA = "fixed", "beta"
ACTOR_ONLY, FULL = "actor", "full"


@dataclass(frozen=True)
class ProfilingConfig:
    variant: str = LOOKBACK
    eval_rollouts: int = 10
    lambda_mode: str = FIXED
    mix_lambda: float = 0.5
    beta: tuple = (2.0, 2.0)
    epsilon: float = 0.1
    delta: float = 0.05
    total_rounds: int = 10
    reuse_eval_samples: bool = False
    rollback_scope: str = ACTOR_ONLY
    independent_eval_seeds: bool = False
    reuse_old_estimate: bool = False
    lambda_schedule: str = "round"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.eval_rollouts < 1:
            raise ConfigError(f"eval_rollouts must be at least 1, got {self.eval_rollouts}")
        if self.total_rounds < 1:
            raise ConfigError(f"total_rounds must be at least 1, got {self.total_rounds}")
        if self.lambda_mode not in (FIXED, BETA):
            raise ConfigError(f"lambda_mode must be {FIXED!r} or {BETA!r}, got {self.lambda_mode!r}")
        if not 0.0 <= self.mix_lambda <= 1.0:
            raise ConfigError(f"mixing weight must lie in [0, 1], got {self.mix_lambda}")
        if len(self.beta) != 2 or min(self.beta) <= 0:
            raise ConfigError(f"beta parameters must be two positive numbers, got {self.beta}")
        if not self.epsilon > 0 or not 0.0 < self.delta < 1.0:
            raise ConfigError("epsilon must be positive and delta must lie in (0, 1)")
        if self.rollback_scope not in (ACTOR_ONLY, FULL):
            raise ConfigError(f"rollback scope must be {ACTOR_ONLY!r} or {FULL!r}, got {self.rollback_scope!r}")
        if self.lambda_schedule not in ("round", "run"):
            raise ConfigError(f"lambda_schedule must be 'round' or 'run', got {self.lambda_schedule!r}")
        # shared seeds make last round's estimate correlated with this round's
        if self.reuse_old_estimate and not self.independent_eval_seeds:
            raise ConfigError("reuse_old_estimate requires independent evaluation seeds")

    @property
    def tags(self):
        return CANDIDATE_TAGS[self.variant]

    @property
    def per_test_delta(self):
        """Failure probability allotted to one comparison: delta / T, or delta / (3T) for three-points."""
        comparisons = 3 * self.total_rounds if self.variant == THREE_POINTS else self.total_rounds
        return self.delta / comparisons


@dataclass(frozen=True, eq=False)
class Candidate:
    tag: str
    params: object
    estimate: ReturnEstimate | None = None

    @property
    def score(self):
        if self.estimate is None or math.isnan(self.estimate.j_hat):
            return -math.inf
        return self.estimate.j_hat


@dataclass(frozen=True, eq=False)
class CandidateSet:
    entries: tuple
    lam: float | None = None

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    @property
    def tags(self):
        return tuple(c.tag for c in self.entries)

    def get(self, tag):
        for cand in self.entries:
            if cand.tag == tag:
                return cand
        return None

    def restrict(self, tags):
        return CandidateSet(tuple(c for c in self.entries if c.tag in tags), self.lam)

    def scores(self):
        return {c.tag: c.score for c in self.entries}


def draw_lambda(cfg, seed_material):
    if cfg.lambda_mode == FIXED:
        return cfg.mix_lambda
    a, b = cfg.beta
    return float(make_rng(Stream.LAMBDA, seed_material).beta(a, b))


def build_candidates(old, new, cfg, seed_material):
    """Unscored candidates for ``cfg.variant``.

    ``new`` may be None when the inner update failed; its slot (and the
    blend built from it) is then kept without parameters and scores -inf.
    """
    if new is not None and old.family != new.family:
        raise DomainError("old and new parameters belong to different policy families")
    lam = draw_lambda(cfg, seed_material) if MIX in cfg.tags else None
    entries = []
    for tag in cfg.tags:
        if tag == OLD:
            params = old
        elif tag == NEW:
            params = new
        else:
            params = None if new is None else mix_params(old, new, lam)
        entries.append(Candidate(tag, params))
    return CandidateSet(tuple(entries), lam)


def select(cands, current_tag=OLD):
    """Argmax of the estimated return; only a strictly larger score displaces the incumbent."""
    if not len(cands):
        raise DomainError("cannot select from an empty candidate set")
    best = cands.get(current_tag) or cands.entries[0]
    for cand in cands:
        if cand.params is not None and cand.score > best.score:
            best = cand
    return best.params, best.tag


class DominanceCheck(NamedTuple):
    lookback: float
    mixup: float
    three_points: float

    @property
    def holds(self):
        return self.three_points >= max(self.lookback, self.mixup)


def _selected_score(cands):
    _, tag = select(cands)
    return cands.get(tag).score


def variant_dominance_check(cands):
    """Compare the selected scores of each variant's subset of a Three-Points candidate set."""
    if set(cands.tags) != set(CANDIDATE_TAGS[THREE_POINTS]):
        raise DomainError(f"dominance check needs old, new and mix candidates, got {cands.tags}")
    return DominanceCheck(
        lookback=_selected_score(cands.restrict(CANDIDATE_TAGS[LOOKBACK])),
        mixup=_selected_score(cands.restrict(CANDIDATE_TAGS[MIXUP])),
        three_points=_selected_score(cands),
    )


def dominance_from_records(records):
    """Dominance checks for logged Three-Points rounds."""
    checks = []
    for record in records:
        if record.variant != THREE_POINTS:
            continue
        entries = tuple(Candidate(tag, params=tag, estimate=ReturnEstimate.exact(value, 0.0))
                        for tag, value in record.candidate_scores().items())
        checks.append(variant_dominance_check(CandidateSet(entries, record.lam)))
    return checks


def oracle_value(env, params):
    """Horizon-truncated exact return, or None when the env has no tabular model."""
    model = getattr(env, "tabular_model", None)
    if model is None or params.family.kind != SOFTMAX:
        return None
    _, J = truncated_policy_value(model, tabular_policy(params, model.n_states), env.spec.horizon)
    return J


class ProfiledTrainer:
    """Runs the inner trainer one profiled round at a time.

    ``history`` holds the incumbent parameters before every round and after
    the last one. With ``scorer`` set, candidates are scored by
    ``scorer(params)`` instead of sampled rollouts.
    """

    def __init__(self, env, algo_cfg, prof_cfg, seed, initial_params=None, scorer=None, record_wall_time=False):
        if initial_params is None:
            family = default_family(env.spec, deterministic=algo_cfg.off_policy)
            initial_params = family.zeros()
        self.env = env
        self.algo_cfg = algo_cfg
        self.cfg = prof_cfg
        self.seed = seed
        self.scorer = scorer
        self.record_wall_time = record_wall_time
        self.trainer = make_trainer(env, algo_cfg, initial_params.family, seed)
        self.return_range = return_bound(env.spec)
        self.params = initial_params
        self.history = [initial_params]
        self.records = []
        self.round = 0
        self._old_estimate = None
        self.reuse = prof_cfg.reuse_eval_samples and prof_cfg.variant != VANILLA
        if prof_cfg.reuse_eval_samples and not self.reuse:
            logger.info("vanilla runs ignore reuse_eval_samples so that training matches the bare algorithm")

    def _lambda_seed(self):
        if self.cfg.lambda_schedule == "run":
            return self.seed
        return self.seed, self.round

    def _eval_seed(self, tag):
        if self.cfg.independent_eval_seeds:
            return Stream.EVAL, self.seed, self.round, TAG_CODES[tag]
        return Stream.EVAL, self.seed, self.round

    def evaluate(self, cand):
        if cand.params is None:
            return Candidate(cand.tag, None, ReturnEstimate.failed(self.return_range))
        if cand.tag == OLD and self._old_estimate is not None:
            return Candidate(cand.tag, cand.params, self._old_estimate)
        try:
            if self.scorer is not None:
                estimate = ReturnEstimate.exact(self.scorer(cand.params), self.return_range)
            else:
                estimate = estimate_return(cand.params, self.env, self.cfg.eval_rollouts, self._eval_seed(cand.tag),
                                           delta=self.cfg.per_test_delta)
        except NumericError as e:
            logger.warning("seed %d round %d: %s candidate scored -inf (%s)", self.seed, self.round, cand.tag, e)
            estimate = ReturnEstimate.failed(self.return_range)
        return Candidate(cand.tag, cand.params, estimate)

    def _propose(self):
        if self.cfg.variant == VANILLA:
            return propose_candidate(self.trainer, self.params, self.round)
        try:
            return propose_candidate(self.trainer, self.params, self.round)
        except NumericError as e:
            logger.warning("seed %d round %d: inner update diverged (%s)", self.seed, self.round, e)
            return None

    def step(self):
        started = time.perf_counter()
        old = self.params
        snapshot = self.trainer.snapshot() if self.cfg.rollback_scope == FULL else None
        self.trainer.last_train_steps = 0
        new = self._propose()
        cands = build_candidates(old, new, self.cfg, self._lambda_seed())
        reused_old = self._old_estimate
        scored = CandidateSet(tuple(self.evaluate(c) for c in cands), cands.lam)
        eval_steps = sum(c.estimate.env_steps for c in scored
                         if c.params is not None and not (c.tag == OLD and c.estimate is reused_old))

        if self.cfg.variant == VANILLA:
            selected, tag = new, NEW
        else:
            selected, tag = select(scored)
        chosen = scored.get(tag)
        if snapshot is not None and tag == OLD:
            self.trainer.restore(snapshot)
        # a cached incumbent estimate was already absorbed in the round that computed it
        if self.reuse and chosen.estimate.trajectories and chosen.estimate is not reused_old:
            self.trainer.absorb(chosen.estimate.trajectories)
        if self.cfg.reuse_old_estimate and self.scorer is None:
            self._old_estimate = chosen.estimate

        scores = scored.scores()
        record = RoundRecord(
            seed=self.seed,
            round=self.round,
            env=self.env.kind,
            algo=self.algo_cfg.kind,
            variant=self.cfg.variant,
            env_steps=self.trainer.last_train_steps + eval_steps,
            eval_steps=eval_steps,
            j_hat_old=scores.get(OLD),
            j_hat_new=scores.get(NEW),
            j_hat_mix=scores.get(MIX),
            selected=tag,
            lam=scored.lam,
            oracle_j=oracle_value(self.env, selected),
            wall_ms=round(1000.0 * (time.perf_counter() - started), 3) if self.record_wall_time else None,
            params_checksum=selected.checksum(),
        )
        logger.debug("seed %d round %d: %s selected, scores %s, lambda %s, %d steps", self.seed, self.round, tag,
                     scores, scored.lam, record.env_steps)
        self.params = selected
        self.history.append(selected)
        self.records.append(record)
        self.round += 1
        return record

    def run(self):
        while self.round < self.cfg.total_rounds:
            self.step()
        return self.records


def propose_candidate(trainer, params, round_index):
    """One inner-algorithm update of ``steps_per_round`` environment steps."""
    return trainer.propose(params, round_index)


def profiled_train(env, algo_cfg, prof_cfg, seed, initial_params=None, scorer=None, record_wall_time=False):
    return ProfiledTrainer(env, algo_cfg, prof_cfg, seed, initial_params=initial_params, scorer=scorer,
                           record_wall_time=record_wall_time).run()
