from dataclasses import dataclass, field

from reward_profiling.utils.errors import ConfigError

REINFORCE = "reinforce"
REINFORCE_BASELINE = "reinforce-baseline"
PPO_CLIP = "ppo-clip"
DDPG_LITE = "ddpg-lite"
ALGO_KINDS = (REINFORCE, REINFORCE_BASELINE, PPO_CLIP, DDPG_LITE)

DEFAULT_LEARNING_RATES = {
    REINFORCE: 1e-3,
    REINFORCE_BASELINE: 1e-3,
    PPO_CLIP: 3e-4,
    DDPG_LITE: 1e-3,
}


@dataclass(frozen=True)
class PpoSettings:
    clip_ratio: float = 0.2
    epochs: int = 4
    minibatch: int = 64

    def __post_init__(self):
        if not 0.0 < self.clip_ratio < 1.0:
            raise ConfigError(f"clip ratio must lie in (0, 1), got {self.clip_ratio}")
        if self.epochs < 1 or self.minibatch < 1:
            raise ConfigError("PPO epochs and minibatch size must be positive")


@dataclass(frozen=True)
class DdpgSettings:
    buffer_size: int = 100_000
    batch: int = 100
    tau: float = 0.005
    noise_sigma: float = 0.2
    critic_lr: float = 1e-3
    noise: str = "gaussian"
    ou_theta: float = 0.15

    def __post_init__(self):
        if self.batch < 1 or self.buffer_size < self.batch:
            raise ConfigError("DDPG batch must be positive and fit in the replay buffer")
        if not 0.0 <= self.tau <= 1.0:
            raise ConfigError(f"tau must lie in [0, 1], got {self.tau}")
        if self.noise not in ("gaussian", "ou"):
            raise ConfigError(f"unknown exploration noise {self.noise!r}")
        if self.critic_lr <= 0 or self.noise_sigma < 0:
            raise ConfigError("critic learning rate must be positive and noise sigma non-negative")


@dataclass(frozen=True)
class AlgoConfig:
    kind: str
    learning_rate: float | None = None
    steps_per_round: int = 1000
    gamma: float = 0.99
    critic_ridge: float = 1e-3
    ppo: PpoSettings = field(default_factory=PpoSettings)
    ddpg: DdpgSettings = field(default_factory=DdpgSettings)

    def __post_init__(self):
        if self.kind not in ALGO_KINDS:
            raise ConfigError(f"unknown algorithm {self.kind!r}; expected one of {ALGO_KINDS}")
        if self.learning_rate is None:
            object.__setattr__(self, "learning_rate", DEFAULT_LEARNING_RATES[self.kind])
        # zero is allowed: it turns the inner update into the identity
        if self.learning_rate < 0:
            raise ConfigError(f"learning rate must be non-negative, got {self.learning_rate}")
        if self.steps_per_round < 1:
            raise ConfigError(f"steps_per_round must be at least 1, got {self.steps_per_round}")

    @property
    def off_policy(self):
        return self.kind == DDPG_LITE
