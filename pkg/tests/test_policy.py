import numpy as np
import pytest

from reward_profiling.mdp.chain import ChainMdp
from reward_profiling.mdp.reacher import PointMassReacher
from reward_profiling.oracle import finite_difference_grad
from reward_profiling.policy.checkpoint import HEADER, dumps_params, load_params, loads_params, save_params
from reward_profiling.policy.families import (DETERMINISTIC, GAUSSIAN, SOFTMAX, PolicyFamily, PolicyParams,
                                              act, action_probabilities, default_family, grad_log_prob, log_prob,
                                              mean_action, mix_params)
from reward_profiling.policy.features import IDENTITY, ONE_HOT, POLYNOMIAL, FeatureMap
from reward_profiling.utils.errors import (ConfigError, DivergedParametersError, DomainError, ResultsIOError,
                                           UnsupportedOperationError)
from reward_profiling.utils.rng import make_rng


@pytest.fixture()
def softmax_family():
    return PolicyFamily(SOFTMAX, FeatureMap(POLYNOMIAL, input_dim=2, degree=2), n_actions=3)


@pytest.fixture()
def gaussian_family():
    return PolicyFamily(GAUSSIAN, FeatureMap(IDENTITY, input_dim=3), action_dim=2)


def test_feature_maps():
    one_hot = FeatureMap(ONE_HOT, input_dim=1, n_states=3)
    assert np.array_equal(one_hot([2.0]), [0.0, 0.0, 1.0])
    poly = FeatureMap(POLYNOMIAL, input_dim=1, degree=2)
    psi = poly([3.0])
    assert np.linalg.norm(psi) == pytest.approx(1.0)
    assert psi[2] / psi[1] == pytest.approx(3.0)
    assert FeatureMap(IDENTITY, input_dim=2, normalize=True)([3.0, 4.0]) == pytest.approx([0.6, 0.8])
    with pytest.raises(DomainError):
        one_hot([3.0])


def test_softmax_needs_bounded_features():
    with pytest.raises(ConfigError):
        PolicyFamily(SOFTMAX, FeatureMap(IDENTITY, input_dim=2), n_actions=2)


def test_params_shape_and_finiteness(softmax_family):
    with pytest.raises(DomainError):
        PolicyParams(np.zeros(softmax_family.param_count + 1), softmax_family)
    theta = np.zeros(softmax_family.param_count)
    theta[0] = np.inf
    with pytest.raises(DivergedParametersError):
        PolicyParams(theta, softmax_family)


def test_params_are_read_only(softmax_family):
    params = softmax_family.zeros()
    with pytest.raises(ValueError):
        params.theta[0] = 1.0


def test_zero_softmax_is_uniform(softmax_family):
    probs = action_probabilities(softmax_family.zeros(), [0.3, -0.2])
    assert probs == pytest.approx(np.full(3, 1 / 3))


def test_gaussian_zeros_use_initial_log_std(gaussian_family):
    params = gaussian_family.zeros()
    assert np.array_equal(params.log_std, [-0.5, -0.5])
    assert np.array_equal(mean_action(params, [1.0, 2.0, 3.0]), [0.0, 0.0])


def test_act_is_deterministic_given_seed(softmax_family, gaussian_family):
    rng = make_rng(1)
    params = PolicyParams(rng.normal(size=softmax_family.param_count), softmax_family)
    assert act(params, [0.1, 0.2], (4, 2)) == act(params, [0.1, 0.2], (4, 2))
    g = PolicyParams(rng.normal(size=gaussian_family.param_count), gaussian_family)
    assert np.array_equal(act(g, [0.1, 0.2, 0.3], 9), act(g, [0.1, 0.2, 0.3], 9))


def test_deterministic_family_has_no_log_prob():
    family = default_family(PointMassReacher().spec, deterministic=True)
    assert family.kind == DETERMINISTIC
    params = family.zeros()
    state = np.zeros(4)
    assert np.array_equal(act(params, state, 0), mean_action(params, state))
    with pytest.raises(UnsupportedOperationError):
        log_prob(params, state, np.zeros(2))
    with pytest.raises(UnsupportedOperationError):
        grad_log_prob(params, state, np.zeros(2))


def test_default_family_for_chain_is_tabular_softmax():
    family = default_family(ChainMdp().spec)
    assert family.kind == SOFTMAX
    assert family.feature_map.kind == ONE_HOT
    assert family.param_count == 6
    with pytest.raises(ConfigError):
        default_family(ChainMdp().spec, deterministic=True)


def test_gaussian_log_prob_matches_density(gaussian_family):
    params = gaussian_family.zeros()
    action = np.array([0.3, -0.1])
    std = np.exp(-0.5)
    expected = np.sum(-0.5 * (action / std) ** 2 - np.log(std) - 0.5 * np.log(2 * np.pi))
    assert log_prob(params, [1.0, 0.0, 0.0], action) == pytest.approx(expected)


@pytest.mark.parametrize("family_name", ["softmax_family", "gaussian_family"])
def test_grad_log_prob_matches_finite_differences(family_name, request):
    family = request.getfixturevalue(family_name)
    rng = make_rng(2)
    for k in range(10):
        params = PolicyParams(rng.normal(scale=0.5, size=family.param_count), family)
        state = rng.uniform(-1, 1, size=family.feature_map.input_dim)
        action = act(params, state, (k,))
        numeric = finite_difference_grad(lambda t: log_prob(params.with_theta(t), state, action), params.theta)
        assert np.allclose(grad_log_prob(params, state, action), numeric, atol=1e-6)


def test_softmax_score_norm_bounded_by_two():
    family = PolicyFamily(SOFTMAX, FeatureMap(IDENTITY, input_dim=3, normalize=True), n_actions=4)
    rng = make_rng(3)
    for _ in range(200):
        params = PolicyParams(rng.normal(scale=5.0, size=family.param_count), family)
        g = grad_log_prob(params, rng.normal(size=3), int(rng.integers(4)))
        assert np.linalg.norm(g) <= 2.0 + 1e-9


def test_mix_params_midpoint_and_endpoints(softmax_family):
    old = softmax_family.zeros()
    new = old.with_theta(np.arange(softmax_family.param_count, dtype=float))
    assert np.array_equal(mix_params(old, new, 0.5).theta, new.theta / 2)
    assert mix_params(old, new, 0.0) is old
    assert mix_params(old, new, 1.0) is new
    with pytest.raises(DomainError):
        mix_params(old, new, 1.5)


def test_mix_params_rejects_family_mismatch(softmax_family, gaussian_family):
    with pytest.raises(DomainError):
        mix_params(softmax_family.zeros(), gaussian_family.zeros(), 0.5)


def test_checksum_tracks_parameters(softmax_family):
    params = softmax_family.zeros()
    assert params.checksum() == softmax_family.zeros().checksum()
    assert params.checksum() != params.with_theta(params.theta + 1e-12).checksum()
    assert len(params.checksum()) == 16


def test_checkpoint_roundtrip(gaussian_family, tmp_path):
    params = PolicyParams(make_rng(4).normal(size=gaussian_family.param_count), gaussian_family)
    blob = dumps_params(params)
    assert blob[:4] == b"RPCK"
    assert len(blob) == HEADER.size + 8 * gaussian_family.param_count
    restored = loads_params(blob)
    assert restored.family == gaussian_family
    assert restored.theta.tobytes() == params.theta.tobytes()

    path = tmp_path / "policy.rpck"
    save_params(params, str(path))
    assert load_params(str(path)).checksum() == params.checksum()


def test_checkpoint_rejects_corrupt_data(softmax_family, tmp_path):
    blob = dumps_params(softmax_family.zeros())
    with pytest.raises(DomainError):
        loads_params(b"XXXX" + blob[4:])
    with pytest.raises(DomainError):
        loads_params(blob[:-8])
    with pytest.raises(ResultsIOError):
        load_params(str(tmp_path / "missing.rpck"))


@pytest.mark.parametrize("lam", [0.0, 0.3, 0.5, 0.8, 1.0])
def test_mix_params_is_symmetric(softmax_family, lam):
    rng = make_rng(4)
    a = PolicyParams(rng.normal(size=softmax_family.param_count), softmax_family)
    b = PolicyParams(rng.normal(size=softmax_family.param_count), softmax_family)
    assert np.allclose(mix_params(a, b, lam).theta, mix_params(b, a, 1.0 - lam).theta, rtol=0, atol=1e-12)


def test_softmax_log_probs_normalise(softmax_family):
    rng = make_rng(5)
    for scale in (0.1, 1.0, 20.0):
        params = PolicyParams(rng.normal(scale=scale, size=softmax_family.param_count), softmax_family)
        state = rng.uniform(-1.0, 1.0, size=2)
        total = sum(np.exp(log_prob(params, state, a)) for a in range(3))
        assert abs(total - 1.0) <= 1e-10
