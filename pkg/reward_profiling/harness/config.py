"""Experiment configuration.

Config files use the flat ``key=value`` grammar of ``.env`` files and are
parsed with python-dotenv. Keys are the command-line flag names with ``-``
replaced by ``_``. An explicit flag beats the file, and the file beats the
built-in default.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

from dotenv import dotenv_values

from reward_profiling.algos.config import AlgoConfig, DdpgSettings, PpoSettings, REINFORCE
from reward_profiling.estimation import EvalBudget
from reward_profiling.mdp.core import return_bound
from reward_profiling.mdp.registry import make_env
from reward_profiling.profiling import BETA, FIXED, ProfilingConfig
from reward_profiling.utils.errors import ConfigError, ResultsIOError
from reward_profiling.utils.validate_and_get_file import validate_and_get_file

logger = logging.getLogger(__name__)

SINGLE, SWEEP = "single", "sweep"
GRID_AXES = ("eval_rollouts", "variant", "lambda")
AUTO = "auto"

ENV_KEYS = ("gamma", "horizon", "clip_actions", "n_states", "slip")
PPO_KEYS = ("clip_ratio", "epochs", "minibatch")
DDPG_KEYS = ("buffer_size", "batch", "tau", "noise_sigma", "noise", "critic_lr")
KNOWN_KEYS = frozenset(ENV_KEYS + PPO_KEYS + DDPG_KEYS + (
    "env", "algo", "variant", "eval_rollouts", "lambda", "beta", "rounds", "steps_per_round", "seeds", "out",
    "independent_eval_seeds", "rollback", "learning_rate", "epsilon", "delta", "reuse_eval_samples",
    "reuse_old_estimate", "lambda_schedule", "grid"))

INT_KEYS = frozenset(("horizon", "n_states", "rounds", "steps_per_round", "epochs", "minibatch", "buffer_size",
                      "batch"))
FLOAT_KEYS = frozenset(("gamma", "slip", "lambda", "learning_rate", "epsilon", "delta", "clip_ratio", "tau",
                        "noise_sigma", "critic_lr"))
BOOL_KEYS = frozenset(("clip_actions", "independent_eval_seeds", "reuse_eval_samples", "reuse_old_estimate"))
TRUE_WORDS = ("1", "true", "yes", "on")
FALSE_WORDS = ("0", "false", "no", "off")


def parse_bool(key, value):
    if isinstance(value, bool):
        return value
    word = str(value).strip().lower()
    if word in TRUE_WORDS:
        return True
    if word in FALSE_WORDS:
        return False
    raise ConfigError(f"{key}: expected a boolean, got {value!r}")


def parse_seeds(text):
    """``0..4`` (inclusive range), ``0,3,7`` or a mix of both."""
    if isinstance(text, (list, tuple)):
        return tuple(int(s) for s in text)
    seeds = []
    try:
        for part in str(text).split(","):
            part = part.strip()
            if ".." in part:
                lo, hi = part.split("..", 1)
                seeds.extend(range(int(lo), int(hi) + 1))
            elif part:
                seeds.append(int(part))
    except ValueError:
        raise ConfigError(f"seeds: cannot parse {text!r}; use e.g. 0..4 or 0,1,2") from None
    if not seeds:
        raise ConfigError("at least one seed is required")
    if min(seeds) < 0:
        raise ConfigError("seeds must be non-negative")
    if len(set(seeds)) != len(seeds):
        raise ConfigError(f"duplicate seeds in {text!r}")
    return tuple(seeds)


def parse_beta(text):
    try:
        a, b = (float(v) for v in str(text).split(","))
    except ValueError:
        raise ConfigError(f"beta: expected 'a,b', got {text!r}") from None
    return a, b


def parse_grid(text):
    """``axis:v1,v2,...`` with axis one of eval_rollouts, variant, lambda."""
    axis, sep, values = str(text).partition(":")
    axis = axis.strip().replace("-", "_")
    if not sep or axis not in GRID_AXES:
        raise ConfigError(f"grid: expected '<axis>:<v1>,<v2>' with axis in {GRID_AXES}, got {text!r}")
    items = [v.strip() for v in values.split(",") if v.strip()]
    if not items:
        raise ConfigError("grid: sweep grids must not be empty")
    try:
        if axis == "eval_rollouts":
            items = [int(v) for v in items]
        elif axis == "lambda":
            items = [float(v) for v in items]
    except ValueError:
        raise ConfigError(f"grid: non-numeric value in {text!r}") from None
    return axis, tuple(items)


def _coerce(key, value):
    if value is None:
        return None
    try:
        if key in BOOL_KEYS:
            return parse_bool(key, value)
        if key in INT_KEYS:
            return int(value)
        if key in FLOAT_KEYS:
            return float(value)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {value!r}") from None
    return value


def read_config_file(path):
    valid_path, error = validate_and_get_file(path)
    if error:
        raise ResultsIOError(f"Failed to read config from {path}. {error}")
    try:
        values = dotenv_values(valid_path)
    except OSError as e:
        raise ResultsIOError(f"Failed to read config from {path}. {e}") from e
    normalized = {key.strip().replace("-", "_"): value for key, value in values.items()}
    unknown = sorted(set(normalized) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys in {path}: {', '.join(unknown)}")
    return normalized


@dataclass(frozen=True)
class ExperimentConfig:
    env: str = "chain"
    env_overrides: dict = field(default_factory=dict)
    algo: AlgoConfig = field(default_factory=lambda: AlgoConfig(REINFORCE))
    profiling: ProfilingConfig = field(default_factory=ProfilingConfig)
    seeds: tuple = (0,)
    out: str = "results"
    mode: str = SINGLE
    grid: tuple | None = None
    auto_eval_rollouts: bool = False
    clip_actions_defaulted: bool = False

    def __post_init__(self):
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if self.mode not in (SINGLE, SWEEP):
            raise ConfigError(f"mode must be {SINGLE!r} or {SWEEP!r}, got {self.mode!r}")
        if self.mode == SWEEP and (self.grid is None or not self.grid[1]):
            raise ConfigError("sweep mode needs a non-empty grid")

    def make_env(self):
        return make_env(self.env, **self.env_overrides)

    def profiling_for(self, axis=None, value=None):
        """Profiling config of one grid point."""
        prof = self.profiling
        if axis == "eval_rollouts":
            return replace(prof, eval_rollouts=value)
        if axis == "lambda":
            return replace(prof, lambda_mode=FIXED, mix_lambda=value)
        if axis == "variant":
            prof = replace(prof, variant=value)
            if self.auto_eval_rollouts:
                prof = replace(prof, eval_rollouts=auto_rollouts(self.make_env(), prof))
            return prof
        return prof

    def as_manifest(self):
        prof, algo = self.profiling, self.algo
        values = {
            "env": self.env,
            "algo": algo.kind,
            "variant": prof.variant,
            "eval_rollouts": prof.eval_rollouts,
            "auto_eval_rollouts": self.auto_eval_rollouts,
            "lambda_mode": prof.lambda_mode,
            "lambda": prof.mix_lambda,
            "beta": ",".join(repr(float(v)) for v in prof.beta),
            "lambda_schedule": prof.lambda_schedule,
            "epsilon": prof.epsilon,
            "delta": prof.delta,
            "rounds": prof.total_rounds,
            "steps_per_round": algo.steps_per_round,
            "learning_rate": algo.learning_rate,
            "gamma": algo.gamma,
            "critic_ridge": algo.critic_ridge,
            "clip_ratio": algo.ppo.clip_ratio,
            "epochs": algo.ppo.epochs,
            "minibatch": algo.ppo.minibatch,
            "buffer_size": algo.ddpg.buffer_size,
            "batch": algo.ddpg.batch,
            "tau": algo.ddpg.tau,
            "noise": algo.ddpg.noise,
            "noise_sigma": algo.ddpg.noise_sigma,
            "critic_lr": algo.ddpg.critic_lr,
            "reuse_eval_samples": prof.reuse_eval_samples,
            "reuse_old_estimate": prof.reuse_old_estimate,
            "independent_eval_seeds": prof.independent_eval_seeds,
            "rollback": prof.rollback_scope,
            "seeds": ",".join(str(s) for s in self.seeds),
            "mode": self.mode,
        }
        for key, value in sorted(self.env_overrides.items()):
            values[f"env_{key}"] = value
        if "clip_actions" in self.env_overrides:
            values["env_clip_actions_source"] = "harness_default" if self.clip_actions_defaulted else "explicit"
        if self.grid is not None:
            values["grid"] = f"{self.grid[0]}:" + ",".join(str(v) for v in self.grid[1])
        return values


def auto_rollouts(env, prof):
    budget = EvalBudget.for_variant(return_bound(env.spec), prof.epsilon, prof.delta, prof.total_rounds, prof.variant)
    return budget.rollouts


def build_experiment_config(config_path=None, mode=SINGLE, default_out="results", **flags):
    """Merge built-in defaults, an optional config file and explicit flags."""
    values = read_config_file(config_path) if config_path else {}
    for key, value in flags.items():
        if value is not None:
            values[key.replace("-", "_")] = value
    unknown = sorted(set(values) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown settings: {', '.join(unknown)}")
    values = {key: _coerce(key, value) for key, value in values.items() if value is not None and value != ""}

    env_kind = values.get("env", "chain")
    env_overrides = {key: values[key] for key in ENV_KEYS if key in values}
    env = make_env(env_kind, **env_overrides)
    clip_defaulted = "clip_actions" not in env_overrides and not env.spec.action_space.is_discrete
    if clip_defaulted:
        # unbounded Gaussian actions would otherwise be rejected on the first out-of-box sample
        logger.info("%s has continuous actions; clipping them (set clip_actions=false to reject instead)", env_kind)
        env_overrides["clip_actions"] = True
        env = make_env(env_kind, **env_overrides)

    algo = AlgoConfig(
        kind=values.get("algo", REINFORCE),
        learning_rate=values.get("learning_rate"),
        steps_per_round=values.get("steps_per_round", 1000),
        gamma=env.spec.gamma,
        ppo=PpoSettings(**{key: values[key] for key in PPO_KEYS if key in values}),
        ddpg=DdpgSettings(**{key: values[key] for key in DDPG_KEYS if key in values}),
    )

    eval_rollouts = values.get("eval_rollouts", 10)
    auto = str(eval_rollouts).strip().lower() == AUTO
    prof = ProfilingConfig(
        variant=values.get("variant", "lb"),
        eval_rollouts=1 if auto else _coerce_int("eval_rollouts", eval_rollouts),
        lambda_mode=BETA if "beta" in values else FIXED,
        mix_lambda=values.get("lambda", 0.5),
        beta=parse_beta(values["beta"]) if "beta" in values else (2.0, 2.0),
        epsilon=values.get("epsilon", 0.1),
        delta=values.get("delta", 0.05),
        total_rounds=values.get("rounds", 10),
        reuse_eval_samples=values.get("reuse_eval_samples", False),
        rollback_scope=values.get("rollback", "actor"),
        independent_eval_seeds=values.get("independent_eval_seeds", False),
        reuse_old_estimate=values.get("reuse_old_estimate", False),
        lambda_schedule=values.get("lambda_schedule", "round"),
    )
    if auto:
        prof = replace(prof, eval_rollouts=auto_rollouts(env, prof))
        logger.info("eval_rollouts=auto resolved to E=%d", prof.eval_rollouts)

    grid = parse_grid(values["grid"]) if "grid" in values else None
    if mode == SWEEP and grid is None:
        raise ConfigError("sweep needs --grid or a grid= entry in the config file")
    return ExperimentConfig(
        env=env_kind,
        env_overrides=env_overrides,
        algo=algo,
        profiling=prof,
        seeds=parse_seeds(values.get("seeds", "0")),
        out=values.get("out", default_out),
        mode=mode,
        grid=grid if mode == SWEEP else None,
        auto_eval_rollouts=auto,
        clip_actions_defaulted=clip_defaulted,
    )


def _coerce_int(key, value):
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer or 'auto', got {value!r}") from None
