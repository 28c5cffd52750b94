"""Scheduling environment, actor-critic network, PPO training, direct rollout."""

from .env import (
    BUFFER_VARIANT,
    MOVEUP_VARIANT,
    EnvState,
    RewardConfig,
    build_observation,
    observation_size,
    reset,
    step,
)
from .net import PolicyWeights, init_weights, log_prob_grads, masked_softmax, policy_forward, value_grads
from .ppo import TrainConfig, clipped_policy_loss, train_ppo
from .schedule import GREEDY, SAMPLE, check_compatible, reward_config_from, rl_schedule

__all__ = [
    "BUFFER_VARIANT",
    "MOVEUP_VARIANT",
    "EnvState",
    "RewardConfig",
    "build_observation",
    "observation_size",
    "reset",
    "step",
    "PolicyWeights",
    "init_weights",
    "log_prob_grads",
    "masked_softmax",
    "policy_forward",
    "value_grads",
    "TrainConfig",
    "clipped_policy_loss",
    "train_ppo",
    "GREEDY",
    "SAMPLE",
    "check_compatible",
    "reward_config_from",
    "rl_schedule",
]
