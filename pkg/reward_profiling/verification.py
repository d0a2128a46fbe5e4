"""Property suites run by ``verify``.

Every check returns a ``CheckResult`` instead of raising, so a suite always
reports all of its checks. Each suite comes in a quick size (seconds, used
by the unit tests) and a full size (minutes, the statistically meaningful
one).
"""
import logging
import math
from functools import partial
from typing import NamedTuple

import numpy as np
from scipy import stats

from reward_profiling.algos.config import REINFORCE, AlgoConfig
from reward_profiling.algos.reinforce import policy_gradient_estimate
from reward_profiling.algos.trainers import make_trainer
from reward_profiling.estimation import (EvalBudget, ReturnEstimate, estimate_return, hoeffding_half_width,
                                         required_rollouts)
from reward_profiling.mdp.cartpole import CartPole
from reward_profiling.mdp.chain import ChainMdp
from reward_profiling.mdp.core import return_bound
from reward_profiling.mdp.rollout import rollout
from reward_profiling.oracle.finite_difference import finite_difference_grad, relative_error
from reward_profiling.oracle.tabular import (exact_policy_value, fisher_information, greedy_matrix, tabular_policy,
                                             truncated_policy_value, value_iteration)
from reward_profiling.policy.families import (GAUSSIAN, SOFTMAX, PolicyFamily, PolicyParams, act, default_family,
                                              grad_log_prob, log_prob)
from reward_profiling.policy.features import IDENTITY, POLYNOMIAL, FeatureMap
from reward_profiling.profiling import (LOOKBACK, OLD, THREE_POINTS, VANILLA, Candidate, CandidateSet,
                                        ProfiledTrainer, ProfilingConfig, dominance_from_records, select)
from reward_profiling.utils.rng import Stream, make_rng

logger = logging.getLogger(__name__)

QUICK, FULL = "quick", "full"
SIGNIFICANCE = 0.01


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


def _binomial_ok(failures, trials, bound):
    """True unless the failure count is significantly above ``bound``."""
    if failures <= bound * trials:
        return True
    return stats.binomtest(failures, trials, bound, alternative="greater").pvalue >= SIGNIFICANCE


def _chain(horizon=20, n_states=3):
    env = ChainMdp(n_states=n_states, horizon=horizon)
    return env, env.tabular_model, default_family(env.spec)


def _truncated_j(env, params):
    model = env.tabular_model
    return truncated_policy_value(model, tabular_policy(params, model.n_states), env.spec.horizon)[1]


def check_hoeffding_coverage(trials=2000, grid=((5, 0.05), (5, 0.2), (20, 0.05), (20, 0.2))):
    """Empirical |J_hat - J| >= eps frequency stays within the Hoeffding bound."""
    env, _, family = _chain()
    params = family.zeros()
    J = _truncated_j(env, params)
    B = return_bound(env.spec)
    worst = []
    passed = True
    for point, (E, p) in enumerate(grid):
        eps = hoeffding_half_width(B, p, E)
        misses = sum(abs(estimate_return(params, env, E, (Stream.EVAL, 1, point, k)).j_hat - J) >= eps
                     for k in range(trials))
        passed &= _binomial_ok(misses, trials, p)
        worst.append(f"E={E} p={p}: {misses}/{trials}")
    return CheckResult("hoeffding_coverage", bool(passed), "; ".join(worst))


def check_budget_formula():
    value = required_rollouts(100, 10, 0.05, 100)
    levels = {"B": (1, 5, 20, 100), "eps": (0.5, 1, 5, 10), "delta": (0.01, 0.05, 0.1, 0.5), "T": (1, 10, 100, 1000)}
    monotone = True
    for B in levels["B"]:
        for eps in levels["eps"]:
            for delta in levels["delta"]:
                for T in levels["T"]:
                    E = required_rollouts(B, eps, delta, T)
                    if B < 100:
                        monotone &= required_rollouts(B * 2, eps, delta, T) >= E
                    monotone &= required_rollouts(B, eps * 2, delta, T) <= E
                    monotone &= required_rollouts(B, eps, delta / 2, T) >= E
                    monotone &= required_rollouts(B, eps, delta, T * 2) >= E
    return CheckResult("budget_formula", value == 415 and bool(monotone),
                       f"required_rollouts(100, 10, 0.05, 100) = {value}; monotone over 4^4 grid: {monotone}")


def check_monotonicity_modulo_2eps(runs=50, rounds=20, epsilon=0.8, delta=0.1, learning_rate=0.1,
                                   steps_per_round=200):
    """Fraction of Lookback runs with an oracle drop beyond 2 eps stays within delta."""
    env, _, _ = _chain()
    E = EvalBudget.for_variant(return_bound(env.spec), epsilon, delta, rounds, LOOKBACK).rollouts
    algo = AlgoConfig(REINFORCE, learning_rate=learning_rate, steps_per_round=steps_per_round, gamma=env.spec.gamma)
    prof = ProfilingConfig(variant=LOOKBACK, eval_rollouts=E, epsilon=epsilon, delta=delta, total_rounds=rounds,
                           independent_eval_seeds=True)
    bad_runs = 0
    for seed in range(runs):
        trainer = ProfiledTrainer(env, algo, prof, seed)
        trainer.run()
        js = [_truncated_j(env, p) for p in trainer.history]
        if any(later < earlier - 2 * epsilon for earlier, later in zip(js, js[1:])):
            bad_runs += 1
    return CheckResult("monotonicity_modulo_2eps", _binomial_ok(bad_runs, runs, delta),
                       f"E={E}: {bad_runs}/{runs} runs dropped more than 2*eps={2 * epsilon}")


def check_exact_monotonicity(seeds=5, rounds=20, learning_rate=0.5):
    """With the oracle as scorer, Lookback never lowers J."""
    env, _, _ = _chain()
    algo = AlgoConfig(REINFORCE, learning_rate=learning_rate, steps_per_round=200, gamma=env.spec.gamma)
    prof = ProfilingConfig(variant=LOOKBACK, total_rounds=rounds)
    drops = 0
    for seed in range(seeds):
        trainer = ProfiledTrainer(env, algo, prof, seed, scorer=lambda p: _truncated_j(env, p))
        trainer.run()
        js = [_truncated_j(env, p) for p in trainer.history]
        drops += sum(later < earlier for earlier, later in zip(js, js[1:]))
    return CheckResult("exact_monotonicity", drops == 0, f"{drops} decreasing rounds over {seeds} seeds")


def check_reinforce_unbiased(samples=100_000, horizon=10, z=3.0):
    """Mean REINFORCE estimate agrees with the finite-difference gradient of the oracle J."""
    env, model, family = _chain(horizon=horizon)
    params = PolicyParams(make_rng(Stream.INIT, 5).normal(scale=0.5, size=family.param_count), family)

    def truncated(theta):
        return truncated_policy_value(model, tabular_policy(params.with_theta(theta), model.n_states), horizon)[1]

    target = finite_difference_grad(truncated, params.theta)
    estimates = np.array([policy_gradient_estimate(params, [rollout(env, params, (Stream.TRAIN, 5, i))],
                                                   env.spec.gamma) for i in range(samples)])
    mean = estimates.mean(axis=0)
    se = estimates.std(axis=0, ddof=1) / math.sqrt(samples)
    ok = bool(np.all(np.abs(mean - target) <= z * se + 1e-9))
    worst = float(np.max(np.abs(mean - target) / np.maximum(se, 1e-12)))
    return CheckResult("reinforce_unbiased", ok, f"max deviation {worst:.2f} standard errors over {samples} samples")


def _check_families():
    return (
        PolicyFamily(SOFTMAX, FeatureMap(POLYNOMIAL, input_dim=2, degree=2), n_actions=3),
        PolicyFamily(GAUSSIAN, FeatureMap(IDENTITY, input_dim=3), action_dim=2),
        PolicyFamily(GAUSSIAN, FeatureMap(POLYNOMIAL, input_dim=1, degree=3), action_dim=1, learn_log_std=False),
    )


def check_grad_log_prob(triples=100, tolerance=1e-4):
    worst = 0.0
    for f, family in enumerate(_check_families()):
        rng = make_rng(Stream.INIT, 11, f)
        for k in range(triples):
            theta = rng.normal(scale=0.5, size=family.param_count)
            params = PolicyParams(theta, family)
            state = rng.uniform(-1.0, 1.0, size=family.feature_map.input_dim)
            action = act(params, state, (Stream.POLICY, 11, f, k))
            numeric = finite_difference_grad(lambda t: log_prob(params.with_theta(t), state, action), theta)
            worst = max(worst, float(np.max(relative_error(grad_log_prob(params, state, action), numeric))))
    return CheckResult("grad_log_prob_fd", worst <= tolerance, f"max relative error {worst:.2e}")


def check_softmax_bound(triples=1000):
    family = PolicyFamily(SOFTMAX, FeatureMap(IDENTITY, input_dim=4, normalize=True), n_actions=5)
    rng = make_rng(Stream.INIT, 13)
    largest = 0.0
    for k in range(triples):
        params = PolicyParams(rng.normal(scale=3.0, size=family.param_count), family)
        state = rng.normal(scale=2.0, size=4)
        action = int(rng.integers(5))
        largest = max(largest, float(np.linalg.norm(grad_log_prob(params, state, action))))
    return CheckResult("softmax_bound", largest <= 2.0 + 1e-9, f"max score norm {largest:.6f}")


def check_estimator_scaling(budgets=(10, 40, 160, 640), repeats=200):
    """log std(J_hat) against log E has slope -1/2."""
    env, _, family = _chain()
    params = family.zeros()
    stds = []
    for E in budgets:
        values = [estimate_return(params, env, E, (Stream.EVAL, 17, E, k)).j_hat for k in range(repeats)]
        stds.append(float(np.std(values, ddof=1)))
    slope = stats.linregress(np.log(budgets), np.log(stds)).slope
    return CheckResult("estimator_scaling", abs(slope + 0.5) <= 0.1, f"slope {slope:.3f}")


def check_vanilla_passthrough(rounds=5, algos=(REINFORCE, "ppo-clip")):
    env, _, family = _chain()
    identical = True
    for kind in algos:
        algo = AlgoConfig(kind, learning_rate=0.1, steps_per_round=100, gamma=env.spec.gamma)
        profiled = ProfiledTrainer(env, algo, ProfilingConfig(variant=VANILLA, total_rounds=rounds), seed=3)
        profiled.run()
        bare = make_trainer(env, algo, family, 3)
        params = family.zeros()
        for t in range(rounds):
            params = bare.propose(params, t)
            identical &= params.theta.tobytes() == profiled.history[t + 1].theta.tobytes()
    return CheckResult("vanilla_passthrough", bool(identical), f"{len(algos)} algorithms, {rounds} rounds")


def check_selection_dominance(env=None, seeds=5, rounds=10, eval_rollouts=5, steps_per_round=500):
    """Tie-break to the incumbent and Three-Points dominance over its subsets."""
    tie = CandidateSet((Candidate(OLD, "old", ReturnEstimate.exact(4.0, 1.0)),
                        Candidate("new", "new", ReturnEstimate.exact(4.0, 1.0))))
    tie_ok = select(tie)[1] == OLD
    env = env or ChainMdp(horizon=20)
    algo = AlgoConfig(REINFORCE, learning_rate=0.05, steps_per_round=steps_per_round, gamma=env.spec.gamma)
    prof = ProfilingConfig(variant=THREE_POINTS, eval_rollouts=eval_rollouts, total_rounds=rounds)
    checks = []
    for seed in range(seeds):
        checks.extend(dominance_from_records(ProfiledTrainer(env, algo, prof, seed).run()))
    held = sum(c.holds for c in checks)
    return CheckResult("selection_dominance", tie_ok and held == len(checks),
                       f"tie-break to old: {tie_ok}; dominance held in {held}/{len(checks)} rounds")


def check_second_moment(samples=20_000, horizon=50):
    """E||G_hat||^2 <= r_max^2 tr(F) / (1 - gamma)^4 for single-trajectory REINFORCE."""
    env, model, family = _chain(horizon=horizon)
    params = PolicyParams(make_rng(Stream.INIT, 19).normal(scale=0.5, size=family.param_count), family)
    gamma = env.spec.gamma
    norms = [float(np.sum(policy_gradient_estimate(params, [rollout(env, params, (Stream.TRAIN, 19, i))], gamma) ** 2))
             for i in range(samples)]
    bound = env.spec.r_max ** 2 * float(np.trace(fisher_information(model, params))) / (1.0 - gamma) ** 4
    second_moment = float(np.mean(norms))
    return CheckResult("second_moment_bound", second_moment <= bound,
                       f"E||G||^2 = {second_moment:.4f}, bound {bound:.4f}")


def check_gradient_dominance(rounds=30, checkpoint_every=10, learning_rate=2.0):
    """The checkpoint with the smallest gradient norm also has the smallest optimality gap."""
    env, model, _ = _chain()
    algo = AlgoConfig(REINFORCE, learning_rate=learning_rate, steps_per_round=500, gamma=env.spec.gamma)
    trainer = ProfiledTrainer(env, algo, ProfilingConfig(variant=LOOKBACK, total_rounds=rounds), seed=23,
                              scorer=lambda p: _truncated_j(env, p))
    trainer.run()
    _, greedy = value_iteration(model)
    J_star = exact_policy_value(model, greedy_matrix(model, greedy))[1]
    grad_norms, gaps = [], []
    for params in trainer.history[::checkpoint_every]:
        def exact_j(theta, params=params):
            return exact_policy_value(model, tabular_policy(params.with_theta(theta), model.n_states))[1]

        grad_norms.append(float(np.linalg.norm(finite_difference_grad(exact_j, params.theta))))
        gaps.append(J_star - exact_j(params.theta))
    ok = int(np.argmin(grad_norms)) == int(np.argmin(gaps))
    return CheckResult("gradient_dominance_rank", ok,
                       "grad norms " + ", ".join(f"{g:.4f}" for g in grad_norms)
                       + "; gaps " + ", ".join(f"{g:.4f}" for g in gaps))


SUITES = {
    QUICK: (
        check_budget_formula,
        partial(check_hoeffding_coverage, trials=200),
        partial(check_softmax_bound, triples=200),
        partial(check_grad_log_prob, triples=20),
        partial(check_exact_monotonicity, seeds=2, rounds=8),
        partial(check_monotonicity_modulo_2eps, runs=5, rounds=3, epsilon=2.0, steps_per_round=100),
        partial(check_reinforce_unbiased, samples=3000, horizon=6, z=4.0),
        partial(check_estimator_scaling, budgets=(4, 16, 64), repeats=120),
        partial(check_vanilla_passthrough, rounds=3),
        partial(check_selection_dominance, seeds=2, rounds=4, steps_per_round=200),
        partial(check_second_moment, samples=2000, horizon=20),
    ),
    FULL: (
        check_budget_formula,
        check_hoeffding_coverage,
        check_softmax_bound,
        check_grad_log_prob,
        check_exact_monotonicity,
        check_monotonicity_modulo_2eps,
        check_reinforce_unbiased,
        check_estimator_scaling,
        check_vanilla_passthrough,
        lambda: check_selection_dominance(env=CartPole()),
        check_second_moment,
        check_gradient_dominance,
    ),
}


def run_suite(suite=QUICK):
    results = []
    for check in SUITES[suite]:
        result = check()
        logger.info("%s: %s (%s)", result.name, "ok" if result.passed else "FAILED", result.detail)
        results.append(result)
    return results
