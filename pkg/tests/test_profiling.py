import math

import numpy as np
import pytest

from reward_profiling import profiling
from reward_profiling.algos.config import DDPG_LITE, REINFORCE, REINFORCE_BASELINE, AlgoConfig, DdpgSettings
from reward_profiling.algos.trainers import make_trainer
from reward_profiling.estimation import ReturnEstimate, hoeffding_half_width
from reward_profiling.harness.metrics import decrease_count
from reward_profiling.mdp.cartpole import CartPole
from reward_profiling.mdp.core import return_bound
from reward_profiling.mdp.linear_quadratic import LinearQuadraticEnv
from reward_profiling.models import RoundRecord
from reward_profiling.policy.families import DETERMINISTIC
from reward_profiling.profiling import (BETA, FULL, LOOKBACK, MIXUP, THREE_POINTS, VANILLA, Candidate, CandidateSet,
                                        ProfiledTrainer, ProfilingConfig, build_candidates, dominance_from_records,
                                        draw_lambda, oracle_value, profiled_train, propose_candidate, select,
                                        variant_dominance_check)
from reward_profiling.utils.errors import ConfigError, DomainError, NumericError


def _cands(**scores):
    return CandidateSet(tuple(Candidate(tag, params=tag, estimate=ReturnEstimate.exact(value, 1.0))
                              for tag, value in scores.items()))


def _algo(kind=REINFORCE, learning_rate=0.5, steps=60):
    return AlgoConfig(kind, learning_rate=learning_rate, steps_per_round=steps, gamma=0.9)


def _prof(variant=LOOKBACK, **kwargs):
    kwargs.setdefault("eval_rollouts", 3)
    kwargs.setdefault("total_rounds", 4)
    return ProfilingConfig(variant=variant, **kwargs)


@pytest.mark.parametrize("scores, expected", [
    ({"old": 3.0, "new": 5.0}, "new"),
    ({"old": 4.0, "new": 4.0}, "old"),
    ({"old": 4.0, "new": 3.0, "mix": 5.0}, "mix"),
    ({"old": 4.0, "new": 3.0, "mix": 2.0}, "old"),
    ({"old": 1.0, "new": math.nan}, "old"),
    ({"old": -math.inf, "new": -5.0}, "new"),
])
def test_select(scores, expected):
    assert select(_cands(**scores)) == (expected, expected)


def test_select_ties_between_challengers_keep_first():
    assert select(_cands(old=1.0, new=2.0, mix=2.0))[1] == "new"


def test_select_never_picks_missing_params():
    cands = CandidateSet((Candidate("old", "old", ReturnEstimate.exact(0.0, 1.0)),
                          Candidate("new", None, ReturnEstimate.exact(9.0, 1.0))))
    assert select(cands) == ("old", "old")
    with pytest.raises(DomainError):
        select(CandidateSet(()))


def test_unscored_candidate_is_minus_infinity():
    assert Candidate("new", "p").score == -math.inf


def test_candidate_tags_per_variant(chain_family):
    old = chain_family.zeros()
    new = old.with_theta(np.arange(6, dtype=float))
    expected = {VANILLA: ("old", "new"), LOOKBACK: ("old", "new"), MIXUP: ("old", "mix"),
                THREE_POINTS: ("old", "new", "mix")}
    for variant, tags in expected.items():
        assert build_candidates(old, new, _prof(variant), 0).tags == tags


def test_fixed_lambda_blend_is_the_midpoint(chain_family):
    old = chain_family.zeros()
    new = old.with_theta(np.arange(6, dtype=float))
    cands = build_candidates(old, new, _prof(THREE_POINTS), (0, 0))
    assert cands.lam == 0.5
    assert np.array_equal(cands.get("mix").params.theta, 0.5 * new.theta)
    assert cands.get("old").params is old
    assert build_candidates(old, new, _prof(LOOKBACK), 0).lam is None


def test_failed_update_keeps_empty_slots(chain_family):
    cands = build_candidates(chain_family.zeros(), None, _prof(THREE_POINTS), 0)
    assert cands.get("new").params is None
    assert cands.get("mix").params is None


def test_beta_lambda_is_reproducible():
    cfg = _prof(MIXUP, lambda_mode=BETA, beta=(2.0, 2.0))
    draws = [draw_lambda(cfg, (0, r)) for r in range(20)]
    assert all(0.0 < lam < 1.0 for lam in draws)
    assert len(set(draws)) > 1
    assert draw_lambda(cfg, (0, 3)) == draws[3]


def test_dominance_check():
    check = variant_dominance_check(_cands(old=1.0, new=3.0, mix=2.0))
    assert check == (3.0, 2.0, 3.0)
    assert check.holds
    with pytest.raises(DomainError):
        variant_dominance_check(_cands(old=1.0, new=3.0))


def test_dominance_from_records():
    rows = [RoundRecord(seed=0, round=0, env="chain", algo=REINFORCE, variant=THREE_POINTS, env_steps=1,
                        j_hat_old=1.0, j_hat_new=0.5, j_hat_mix=2.0, selected="mix", lam=0.5),
            RoundRecord(seed=0, round=0, env="chain", algo=REINFORCE, variant=LOOKBACK, env_steps=1,
                        j_hat_old=1.0, j_hat_new=0.5, selected="old")]
    checks = dominance_from_records(rows)
    assert len(checks) == 1
    assert checks[0] == (1.0, 2.0, 2.0)


@pytest.mark.parametrize("kwargs", [
    {"variant": "greedy"},
    {"eval_rollouts": 0},
    {"total_rounds": 0},
    {"mix_lambda": 1.5},
    {"beta": (0.0, 2.0)},
    {"epsilon": 0.0},
    {"delta": 1.0},
    {"rollback_scope": "critic"},
    {"lambda_schedule": "episode"},
    {"reuse_old_estimate": True},
])
def test_profiling_config_validation(kwargs):
    with pytest.raises(ConfigError):
        ProfilingConfig(**kwargs)


def test_vanilla_matches_the_bare_algorithm(chain_env, chain_family):
    records = profiled_train(chain_env, _algo(), _prof(VANILLA, reuse_eval_samples=True), seed=5)
    trainer = make_trainer(chain_env, _algo(), chain_family, 5)
    params = chain_family.zeros()
    for record in records:
        params = trainer.propose(params, record.round)
        assert record.selected == "new"
        assert record.params_checksum == params.checksum()


@pytest.mark.parametrize("variant", [LOOKBACK, MIXUP, THREE_POINTS])
def test_selected_estimate_never_below_incumbent(chain_env, variant):
    for record in profiled_train(chain_env, _algo(), _prof(variant), seed=1):
        assert record.selected_j_hat() >= record.j_hat_old


def test_exact_scores_give_monotone_improvement(chain_env):
    trainer = ProfiledTrainer(chain_env, _algo(learning_rate=2.0), _prof(THREE_POINTS, total_rounds=6), seed=0,
                              scorer=lambda params: oracle_value(chain_env, params))
    records = trainer.run()
    values = [r.oracle_j for r in records]
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert all(r.selected_j_hat() == r.oracle_j for r in records)


def test_step_accounting(chain_env):
    records = profiled_train(chain_env, _algo(steps=60), _prof(LOOKBACK, eval_rollouts=3), seed=0)
    for record in records:
        assert record.eval_steps == 2 * 3 * 20
        assert record.env_steps == 60 + record.eval_steps
    records = profiled_train(chain_env, _algo(steps=60), _prof(THREE_POINTS, eval_rollouts=3), seed=0)
    assert all(r.eval_steps == 3 * 3 * 20 for r in records)


def test_cached_incumbent_estimate_is_not_recounted(chain_env):
    prof = _prof(LOOKBACK, eval_rollouts=2, independent_eval_seeds=True, reuse_old_estimate=True)
    records = profiled_train(chain_env, _algo(steps=60), prof, seed=0)
    assert records[0].eval_steps == 80
    assert all(r.eval_steps == 40 for r in records[1:])


def test_reused_samples_count_toward_the_round_budget(chain_env):
    prof = _prof(LOOKBACK, eval_rollouts=2, reuse_eval_samples=True)
    records = profiled_train(chain_env, _algo(steps=100), prof, seed=0)
    assert records[0].env_steps == 100 + 80
    assert all(r.env_steps == 60 + 80 for r in records[1:])


def test_reuse_is_ignored_by_vanilla(chain_env):
    prof = _prof(VANILLA, eval_rollouts=2, reuse_eval_samples=True)
    records = profiled_train(chain_env, _algo(steps=100), prof, seed=0)
    assert all(r.env_steps == 100 + 80 for r in records)


def test_beta_lambda_is_recorded(chain_env):
    records = profiled_train(chain_env, _algo(), _prof(MIXUP, lambda_mode=BETA), seed=0)
    lams = [r.lam for r in records]
    assert all(0.0 < lam < 1.0 for lam in lams)
    assert len(set(lams)) > 1
    assert all(r.j_hat_new is None and r.j_hat_mix is not None for r in records)
    records = profiled_train(chain_env, _algo(), _prof(MIXUP, lambda_mode=BETA, lambda_schedule="run"), seed=0)
    assert len({r.lam for r in records}) == 1


def test_shared_seeds_tie_identical_candidates(chain_env):
    records = profiled_train(chain_env, _algo(learning_rate=0.0), _prof(LOOKBACK), seed=0)
    assert all(r.j_hat_old == r.j_hat_new and r.selected == "old" for r in records)
    records = profiled_train(chain_env, _algo(learning_rate=0.0), _prof(LOOKBACK, independent_eval_seeds=True),
                             seed=0)
    assert any(r.j_hat_old != r.j_hat_new for r in records)


def _prefer_incumbent(params):
    return -float(np.linalg.norm(params.theta))


def test_full_rollback_restores_the_critic(chain_env):
    algo = _algo(REINFORCE_BASELINE)
    kept = ProfiledTrainer(chain_env, algo, _prof(LOOKBACK, total_rounds=2), seed=0, scorer=_prefer_incumbent)
    kept.run()
    assert all(r.selected == "old" for r in kept.records)
    assert np.any(kept.trainer.critic.w != 0.0)

    rolled = ProfiledTrainer(chain_env, algo, _prof(LOOKBACK, total_rounds=2, rollback_scope=FULL), seed=0,
                             scorer=_prefer_incumbent)
    rolled.run()
    assert np.array_equal(rolled.trainer.critic.w, np.zeros(3))
    assert len({p.checksum() for p in rolled.history}) == 1


def test_diverged_update_scores_minus_infinity(chain_env):
    trainer = ProfiledTrainer(chain_env, _algo(), _prof(THREE_POINTS, total_rounds=1), seed=0)

    def diverge(params, round_index):
        raise NumericError("non-finite logits")

    trainer.trainer.propose = diverge
    record = trainer.step()
    assert record.selected == "old"
    assert record.j_hat_new == -math.inf
    assert record.j_hat_mix == -math.inf

    vanilla = ProfiledTrainer(chain_env, _algo(), _prof(VANILLA, total_rounds=1), seed=0)
    vanilla.trainer.propose = diverge
    with pytest.raises(NumericError):
        vanilla.step()


def test_runs_are_reproducible(chain_env):
    first = profiled_train(chain_env, _algo(), _prof(THREE_POINTS, lambda_mode=BETA), seed=3)
    second = profiled_train(chain_env, _algo(), _prof(THREE_POINTS, lambda_mode=BETA), seed=3)
    assert [r.to_mongo().to_dict() for r in first] == [r.to_mongo().to_dict() for r in second]


def test_records_and_history(chain_env):
    trainer = ProfiledTrainer(chain_env, _algo(), _prof(LOOKBACK, total_rounds=3), seed=0)
    records = trainer.run()
    assert [r.round for r in records] == [0, 1, 2]
    assert len(trainer.history) == 4
    assert records[-1].params_checksum == trainer.history[-1].checksum()
    assert all(r.oracle_j is not None and r.wall_ms is None for r in records)


def test_oracle_value_needs_a_tabular_softmax_policy(chain_env, chain_family):
    assert oracle_value(chain_env, chain_family.zeros()) > 0
    cartpole = ProfiledTrainer(CartPole(horizon=20), _algo(steps=20), _prof(total_rounds=1), seed=0)
    assert cartpole.step().oracle_j is None


def test_wall_time_is_optional(chain_env):
    trainer = ProfiledTrainer(chain_env, _algo(), _prof(total_rounds=1), seed=0, record_wall_time=True)
    assert trainer.step().wall_ms >= 0.0


def test_profiled_ddpg_on_lq():
    env = LinearQuadraticEnv(horizon=10, clip_actions=True)
    algo = AlgoConfig(DDPG_LITE, steps_per_round=20, gamma=0.9, ddpg=DdpgSettings(buffer_size=200, batch=10))
    trainer = ProfiledTrainer(env, algo, _prof(THREE_POINTS, total_rounds=2, reuse_eval_samples=True), seed=0)
    records = trainer.run()
    assert trainer.params.family.kind == DETERMINISTIC
    assert all(r.oracle_j is None for r in records)
    assert all(r.env_steps == 20 + 3 * 3 * 10 for r in records)


@pytest.mark.parametrize("variant, comparisons", [(LOOKBACK, 20), (MIXUP, 20), (THREE_POINTS, 60)])
def test_half_width_uses_the_per_comparison_delta(chain_env, chain_family, variant, comparisons):
    prof = _prof(variant, eval_rollouts=10, delta=0.1, total_rounds=20)
    assert prof.per_test_delta == pytest.approx(0.1 / comparisons)
    trainer = ProfiledTrainer(chain_env, _algo(), prof, seed=0)
    estimate = trainer.evaluate(Candidate("old", chain_family.zeros())).estimate
    B = return_bound(chain_env.spec)
    assert estimate.half_width == pytest.approx(hoeffding_half_width(B, 0.1 / comparisons, 10))
    assert estimate.half_width > hoeffding_half_width(B, 0.1, 10)


def test_cached_incumbent_samples_are_absorbed_once(chain_env, monkeypatch):
    monkeypatch.setattr(profiling, "select", lambda cands, current_tag="old": (cands.get("old").params, "old"))
    prof = _prof(LOOKBACK, eval_rollouts=2, total_rounds=3, independent_eval_seeds=True, reuse_old_estimate=True,
                 reuse_eval_samples=True)
    trainer = ProfiledTrainer(chain_env, _algo(learning_rate=0.0, steps=60), prof, seed=0)
    absorbed = []
    absorb = trainer.trainer.absorb
    monkeypatch.setattr(trainer.trainer, "absorb", lambda trajs: (absorbed.append(trajs), absorb(trajs)))
    records = trainer.run()
    assert [r.selected for r in records] == ["old", "old", "old"]
    assert len(absorbed) == 1
    # round 1 trains on the 40 reused steps; round 2 has nothing new to reuse
    assert [r.env_steps for r in records] == [60 + 80, 20 + 40, 60 + 40]


def test_propose_candidate(chain_env, chain_family):
    params = chain_family.zeros()
    still = propose_candidate(make_trainer(chain_env, _algo(learning_rate=0.0), chain_family, seed=3), params, 0)
    assert np.array_equal(still.theta, params.theta)
    first = propose_candidate(make_trainer(chain_env, _algo(), chain_family, seed=3), params, 0)
    second = propose_candidate(make_trainer(chain_env, _algo(), chain_family, seed=3), params, 0)
    assert np.array_equal(first.theta, second.theta)
    assert not np.array_equal(first.theta, params.theta)


def test_rounds_propose_through_propose_candidate(chain_env, monkeypatch):
    calls = []

    def spy(trainer, params, round_index):
        calls.append(round_index)
        return trainer.propose(params, round_index)

    monkeypatch.setattr(profiling, "propose_candidate", spy)
    profiled_train(chain_env, _algo(), _prof(LOOKBACK, total_rounds=3), seed=0)
    assert calls == [0, 1, 2]


def test_lookback_has_fewer_decreasing_rounds_than_vanilla(chain_env):
    def exact(params):
        return oracle_value(chain_env, params)

    drops = {}
    for variant in (VANILLA, LOOKBACK):
        drops[variant] = sum(
            decrease_count([r.selected_j_hat() for r in profiled_train(
                chain_env, _algo(learning_rate=5.0, steps=40), _prof(variant, total_rounds=10), seed=seed,
                scorer=exact)])
            for seed in range(5))
    assert drops[LOOKBACK] == 0
    assert drops[LOOKBACK] < drops[VANILLA]
