"""Proximal policy optimization on the scheduling environment.

Rollouts sample actions from the masked policy on freshly generated
one-week instances; updates use the clipped surrogate objective with GAE
advantages, an entropy bonus, and a clipped-gradient Adam step. Every source
of randomness (weight init, episode instances, action sampling, minibatch
shuffling) draws from a named stream under the config seed, so a seed fully
determines the trained weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import CrewSchedError
from ..generator import DAYS_PER_WEEK, DatasetProfile, GeneratorConfig, generate_instance
from ..seeding import stream_rng, stream_seed
from . import env as des
from .net import Adam, PolicyWeights, backward, clip_grads, forward, init_weights, masked_softmax


@dataclass(frozen=True)
class TrainConfig:
    density: float = 1.0
    seed: int = 0
    total_steps: int = 120_000
    batch_steps: int = 2048
    minibatch_size: int = 256
    epochs: int = 4
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_ratio: float = 0.2
    learning_rate: float = 3e-4
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    max_grad_norm: float = 0.5
    hidden: tuple[int, int] = (128, 128)
    reward_variant: str = des.BUFFER_VARIANT
    weeks: int = 1
    t_move: int = 2
    # Rewards are scaled for GAE/value targets only (logs stay in raw units);
    # without this the value-loss gradient saturates the shared norm clip and
    # the policy barely moves.
    reward_scale: float = 0.04

    def __post_init__(self) -> None:
        if self.total_steps < self.batch_steps:
            raise ValueError("total_steps must cover at least one batch")
        if not 0 < self.clip_ratio < 1:
            raise ValueError("clip_ratio must be in (0, 1)")


def clipped_policy_loss(
    ratio: np.ndarray, advantage: np.ndarray, clip_ratio: float
) -> np.ndarray:
    """Per-sample clipped surrogate loss (the quantity PPO minimizes)."""
    unclipped = ratio * advantage
    clipped = np.clip(ratio, 1.0 - clip_ratio, 1.0 + clip_ratio) * advantage
    return -np.minimum(unclipped, clipped)


class _EpisodeStream:
    """Rolls episodes on demand, yielding one transition per call."""

    def __init__(self, profile: DatasetProfile, cfg: TrainConfig):
        self.profile = profile
        self.cfg = cfg
        self.reward_cfg = des.RewardConfig(
            horizon=cfg.weeks * DAYS_PER_WEEK,
            variant=cfg.reward_variant,
            t_move=cfg.t_move,
        )
        self.episode_index = 0
        self.state = None
        self.obs = None
        self.episode_return = 0.0
        self.finished_returns: list[float] = []
        self.finished_complete: list[bool] = []

    def _next_episode(self) -> None:
        while True:
            inst = generate_instance(
                self.profile,
                GeneratorConfig(
                    density=self.cfg.density,
                    weeks=self.cfg.weeks,
                    seed=stream_seed(self.cfg.seed, "episode", self.episode_index),
                ),
            )
            self.episode_index += 1
            state, obs = des.reset(inst, self.reward_cfg)
            if obs is not None:
                self.state, self.obs = state, obs
                self.episode_return = 0.0
                return

    def ensure_ready(self) -> np.ndarray:
        if self.state is None or self.state.done:
            self._next_episode()
        return self.obs

    def advance(self, action: int) -> tuple[float, bool]:
        self.state, self.obs, reward, done = des.step(self.state, action)
        self.episode_return += reward
        if done:
            self.finished_returns.append(self.episode_return)
            self.finished_complete.append(self.state.complete)
        return reward, done

    def drain_stats(self) -> tuple[float, float, int]:
        if not self.finished_returns:
            return float("nan"), float("nan"), 0
        mean_return = float(np.mean(self.finished_returns))
        completion = float(np.mean(self.finished_complete))
        count = len(self.finished_returns)
        self.finished_returns = []
        self.finished_complete = []
        return mean_return, completion, count


def train_ppo(
    profile: DatasetProfile, cfg: TrainConfig
) -> tuple[PolicyWeights, list[dict]]:
    """Train a policy on freshly generated instances; reproducible per seed.

    Returns the trained weights and a per-batch training log.
    """
    num_pilots = profile.num_pilots
    input_dim = des.observation_size(num_pilots, profile.num_flight_types)
    weights = init_weights(
        input_dim,
        num_pilots,
        cfg.hidden,
        stream_rng(cfg.seed, "init"),
        metadata={
            "reward_variant": cfg.reward_variant,
            "density": cfg.density,
            "seed": cfg.seed,
            "horizon": cfg.weeks * DAYS_PER_WEEK,
            "weeks": cfg.weeks,
            "t_move": cfg.t_move,
            "num_pilots": num_pilots,
            "num_flight_types": profile.num_flight_types,
            "total_steps": cfg.total_steps,
        },
    )
    optimizer = Adam(weights.params, cfg.learning_rate)
    action_rng = stream_rng(cfg.seed, "actions")
    shuffle_rng = stream_rng(cfg.seed, "shuffle")
    stream = _EpisodeStream(profile, cfg)
    log: list[dict] = []

    steps_done = 0
    while steps_done < cfg.total_steps:
        batch = _collect_batch(stream, weights, cfg, action_rng)
        steps_done += len(batch["rewards"])
        losses = _update(weights, optimizer, cfg, batch, shuffle_rng)
        mean_return, completion, episodes = stream.drain_stats()
        log.append(
            {
                "step": steps_done,
                "episodes": episodes,
                "mean_return": mean_return,
                "completion_rate": completion,
                **losses,
            }
        )
    weights.check_finite()
    return weights, log


def _collect_batch(stream, weights, cfg, action_rng):
    size = cfg.batch_steps
    obs_buf = np.empty((size, weights.input_dim))
    actions = np.empty(size, dtype=np.int64)
    logp_old = np.empty(size)
    values = np.empty(size)
    rewards = np.empty(size)
    dones = np.empty(size, dtype=bool)

    for t in range(size):
        obs = stream.ensure_ready()
        cache = forward(weights.params, obs[None, :])
        probs = masked_softmax(cache["logits"][0], obs[: weights.num_pilots])
        action = int(np.searchsorted(np.cumsum(probs), action_rng.random(), side="right"))
        action = min(action, weights.num_pilots - 1)
        if probs[action] <= 0.0:
            action = int(np.argmax(probs))
        obs_buf[t] = obs
        actions[t] = action
        logp_old[t] = np.log(probs[action])
        values[t] = cache["values"][0]
        raw_reward, dones[t] = stream.advance(action)
        rewards[t] = raw_reward * cfg.reward_scale

    if stream.state is not None and not stream.state.done:
        tail_cache = forward(weights.params, stream.obs[None, :])
        bootstrap = float(tail_cache["values"][0])
    else:
        bootstrap = 0.0

    advantages = _gae(rewards, values, dones, bootstrap, cfg.gamma, cfg.gae_lambda)
    returns = advantages + values
    std = advantages.std()
    norm_adv = (advantages - advantages.mean()) / (std + 1e-8)
    return {
        "obs": obs_buf,
        "actions": actions,
        "logp_old": logp_old,
        "rewards": rewards,
        "returns": returns,
        "advantages": norm_adv,
    }


def _gae(rewards, values, dones, bootstrap, gamma, lam):
    size = len(rewards)
    advantages = np.empty(size)
    next_value = bootstrap
    carry = 0.0
    for t in range(size - 1, -1, -1):
        nonterminal = 0.0 if dones[t] else 1.0
        delta = rewards[t] + gamma * next_value * nonterminal - values[t]
        carry = delta + gamma * lam * nonterminal * carry
        advantages[t] = carry
        next_value = values[t]
    return advantages


def _update(weights, optimizer, cfg, batch, shuffle_rng):
    size = len(batch["rewards"])
    num_pilots = weights.num_pilots
    last = {}
    for _ in range(cfg.epochs):
        order = shuffle_rng.permutation(size)
        for start in range(0, size, cfg.minibatch_size):
            idx = order[start : start + cfg.minibatch_size]
            obs = batch["obs"][idx]
            actions = batch["actions"][idx]
            adv = batch["advantages"][idx]
            ret = batch["returns"][idx]
            logp_old = batch["logp_old"][idx]
            B = len(idx)

            cache = forward(weights.params, obs)
            mask = obs[:, :num_pilots]
            probs = masked_softmax(cache["logits"], mask)
            picked = probs[np.arange(B), actions]
            logp = np.log(picked)
            ratio = np.exp(logp - logp_old)

            policy_loss_vec = clipped_policy_loss(ratio, adv, cfg.clip_ratio)
            inside = (ratio >= 1.0 - cfg.clip_ratio) & (ratio <= 1.0 + cfg.clip_ratio)
            use_unclipped = ratio * adv <= np.clip(
                ratio, 1.0 - cfg.clip_ratio, 1.0 + cfg.clip_ratio
            ) * adv
            d_ratio = -adv * np.where(use_unclipped, 1.0, inside.astype(float))
            d_logp = d_ratio * ratio / B

            safe_log = np.where(probs > 0, np.log(np.where(probs > 0, probs, 1.0)), 0.0)
            entropy_vec = -(probs * safe_log).sum(axis=1)
            one_hot = np.zeros_like(probs)
            one_hot[np.arange(B), actions] = 1.0
            d_logits = d_logp[:, None] * (one_hot - probs)
            # Entropy bonus: loss term -entropy_coef * mean(H).
            d_h = -probs * (safe_log + entropy_vec[:, None])
            d_logits += -(cfg.entropy_coef / B) * d_h
            d_logits[mask <= 0] = 0.0

            value_err = cache["values"] - ret
            d_values = cfg.value_coef * 2.0 * value_err / B

            grads = backward(weights.params, cache, d_logits, d_values)
            grads = clip_grads(grads, cfg.max_grad_norm)
            optimizer.step(weights.params, grads)

            last = {
                "policy_loss": float(policy_loss_vec.mean()),
                "value_loss": float(cfg.value_coef * (value_err**2).mean()),
                "entropy": float(entropy_vec.mean()),
            }
            if not all(np.isfinite(v) for v in last.values()):
                raise CrewSchedError(f"training diverged: non-finite loss {last}")
    return last
