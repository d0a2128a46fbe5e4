from reward_profiling.mdp.cartpole import CartPole
from reward_profiling.mdp.chain import ChainMdp
from reward_profiling.mdp.linear_quadratic import LinearQuadraticEnv
from reward_profiling.mdp.reacher import PointMassReacher
from reward_profiling.utils.errors import ConfigError

ENVIRONMENTS = {
    ChainMdp.kind: ChainMdp,
    CartPole.kind: CartPole,
    PointMassReacher.kind: PointMassReacher,
    LinearQuadraticEnv.kind: LinearQuadraticEnv,
}


def make_env(kind, **overrides):
    """Build an environment by name; ``None`` overrides keep the class default."""
    try:
        env_cls = ENVIRONMENTS[kind]
    except KeyError:
        raise ConfigError(f"unknown environment {kind!r}; expected one of {sorted(ENVIRONMENTS)}") from None
    kwargs = {key: value for key, value in overrides.items() if value is not None}
    try:
        return env_cls(**kwargs)
    except TypeError as e:
        raise ConfigError(f"invalid overrides for {kind}: {e}") from e
