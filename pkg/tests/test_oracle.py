import numpy as np
import pytest

from reward_profiling.mdp.chain import ChainMdp, chain_model
from reward_profiling.oracle import (TabularModel, discounted_visitation, dump_tabular_model, enumerate_returns,
                                     exact_policy_value, finite_difference_grad, fisher_information, greedy_matrix,
                                     load_tabular_model, parse_tabular_model, relative_error, tabular_policy,
                                     truncated_policy_value, value_iteration)
from reward_profiling.policy.families import default_family
from reward_profiling.utils.errors import DomainError, NumericError, PathCountExceeded, ResultsIOError


def _uniform(model):
    return np.full((model.n_states, model.n_actions), 1.0 / model.n_actions)


def test_zero_rewards_have_zero_value(fixture_path):
    model = load_tabular_model(fixture_path("zero_reward.txt"))
    V, J = exact_policy_value(model, _uniform(model))
    assert np.array_equal(V, np.zeros(2))
    assert J == 0.0


def test_single_state_values(fixture_path):
    model = load_tabular_model(fixture_path("single_state.txt"))
    _, J = exact_policy_value(model, np.array([[0.0, 1.0]]))
    assert J == pytest.approx(10.0, abs=1e-12)
    _, J = exact_policy_value(model, _uniform(model))
    assert J == pytest.approx(5.0, abs=1e-12)
    V, greedy = value_iteration(model)
    assert V == pytest.approx([10.0], abs=1e-9)
    assert greedy.tolist() == [1]


def test_value_iteration_on_chain(fixture_path):
    model = load_tabular_model(fixture_path("chain3.txt"))
    V, greedy = value_iteration(model)
    assert V == pytest.approx([8.1, 9.0, 10.0], abs=1e-9)
    assert greedy.tolist() == [1, 1, 1]
    _, J = exact_policy_value(model, greedy_matrix(model, greedy))
    assert J == pytest.approx(8.1, abs=1e-9)


def test_enumeration_matches_truncated_recursion(fixture_path):
    model = load_tabular_model(fixture_path("noisy_pair.txt"))
    pi = np.array([[0.3, 0.7], [0.9, 0.1]])
    _, J = truncated_policy_value(model, pi, 6)
    assert enumerate_returns(model, pi, 6) == pytest.approx(J, abs=1e-12)
    assert enumerate_returns(model, pi, 0) == 0.0


def test_enumeration_guard(fixture_path):
    model = load_tabular_model(fixture_path("chain3.txt"))
    with pytest.raises(PathCountExceeded):
        enumerate_returns(model, _uniform(model), 10)


def test_truncated_value_approaches_exact_value(fixture_path):
    model = load_tabular_model(fixture_path("noisy_pair.txt"))
    pi = _uniform(model)
    _, exact = exact_policy_value(model, pi)
    _, truncated = truncated_policy_value(model, pi, 200)
    assert truncated == pytest.approx(exact, abs=1e-12)
    _, short = truncated_policy_value(model, pi, 1)
    assert short == pytest.approx(model.rho @ (pi * model.r).sum(axis=1))


def test_policy_checks(fixture_path):
    model = load_tabular_model(fixture_path("chain3.txt"))
    with pytest.raises(DomainError):
        exact_policy_value(model, np.full((3, 2), 0.4))
    with pytest.raises(DomainError):
        exact_policy_value(model, np.full((2, 2), 0.5))


def test_model_validation():
    P = np.ones((1, 2, 1))
    with pytest.raises(DomainError):
        TabularModel(P=P * 0.5, r=np.zeros((1, 2)), gamma=0.9, rho=[1.0])
    with pytest.raises(DomainError):
        TabularModel(P=P, r=np.zeros((1, 3)), gamma=0.9, rho=[1.0])
    with pytest.raises(DomainError):
        TabularModel(P=P, r=np.ones((1, 2)), gamma=0.9, rho=[1.0], reward_bounds=(0.0, 0.5))
    with pytest.raises(DomainError):
        TabularModel(P=P, r=np.zeros((1, 2)), gamma=1.0, rho=[1.0])


def test_tabular_policy_of_zero_params_is_uniform():
    env = ChainMdp()
    pi = tabular_policy(default_family(env.spec).zeros(), 3)
    assert np.array_equal(pi, np.full((3, 2), 0.5))


def test_discounted_visitation_is_a_distribution(fixture_path):
    model = load_tabular_model(fixture_path("noisy_pair.txt"))
    d = discounted_visitation(model, _uniform(model))
    assert d.sum() == pytest.approx(1.0)
    assert np.all(d >= 0)


def test_fisher_information_is_symmetric_psd():
    env = ChainMdp()
    params = default_family(env.spec).zeros()
    F = fisher_information(env.tabular_model, params)
    assert F.shape == (6, 6)
    assert np.allclose(F, F.T)
    assert np.min(np.linalg.eigvalsh(F)) >= -1e-12


def test_finite_difference_on_quadratic():
    grad = finite_difference_grad(lambda x: x[0] ** 2 + x[1] ** 2, [1.0, 2.0])
    assert grad == pytest.approx([2.0, 4.0], abs=1e-8)
    with pytest.raises(DomainError):
        finite_difference_grad(lambda x: 0.0, [1.0], h=0.0)
    with pytest.raises(NumericError):
        finite_difference_grad(lambda x: np.inf, [1.0])


def test_relative_error():
    assert relative_error(1.5, 1.0) == pytest.approx(0.5)
    assert relative_error(110.0, 100.0) == pytest.approx(0.1)


def test_chain_fixture_matches_builder(fixture_path):
    loaded = load_tabular_model(fixture_path("chain3.txt"))
    built = chain_model(3, 0.9)
    assert np.array_equal(loaded.P, built.P)
    assert np.array_equal(loaded.r, built.r)
    assert loaded.gamma == built.gamma
    assert loaded.reward_bounds == (0.0, 1.0)


def test_dump_and_load_preserve_model(fixture_path, tmp_path):
    model = load_tabular_model(fixture_path("noisy_pair.txt"))
    path = tmp_path / "model.txt"
    dump_tabular_model(model, str(path))
    again = load_tabular_model(str(path))
    assert np.array_equal(again.P, model.P)
    assert np.array_equal(again.r, model.r)
    assert np.array_equal(again.rho, model.rho)
    assert again.reward_bounds == model.reward_bounds


@pytest.mark.parametrize("text", [
    "actions 2\ngamma 0.9\nrho 1\nP 0 0 : 1\nP 0 1 : 1\n",
    "states 1\nactions 2\ngamma 0.9\nrho 1\nP 0 0 : 1\n",
    "states 1\nactions 2\ngamma 0.9\nrho 1\nP 0 0 : 1\nP 0 1 : 1\nwind 3\n",
    "states 1\nactions 2\ngamma 0.9\nrho 1\nP 0 0 1\nP 0 1 : 1\n",
    "states 1\nactions 2\ngamma 0.9\nrho 1\nP 0 0 : 1\nP 0 1 : 1\nr 0 5 : 1\n",
])
def test_malformed_fixtures(text):
    with pytest.raises(DomainError):
        parse_tabular_model(text)


def test_missing_fixture_file(tmp_path):
    with pytest.raises(ResultsIOError):
        load_tabular_model(str(tmp_path / "absent.txt"))
