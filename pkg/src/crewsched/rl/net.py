"""Actor-critic multilayer perceptron with hand-rolled forward/backward passes.

A shared two-layer tanh trunk feeds a linear actor head (one logit per pilot)
and a linear critic head. The actor distribution is a masked softmax: logits
of unavailable pilots are removed before normalization, so their probability
is exactly zero. Everything is plain numpy; gradients are exact and are
verified against central finite differences in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import CrewSchedError

PARAM_KEYS = ("w1", "b1", "w2", "b2", "wa", "ba", "wv", "bv")


@dataclass
class PolicyWeights:
    input_dim: int
    hidden: tuple[int, int]
    num_pilots: int
    params: dict[str, np.ndarray]
    metadata: dict[str, Any] = field(default_factory=dict)

    def copy(self) -> "PolicyWeights":
        return PolicyWeights(
            input_dim=self.input_dim,
            hidden=self.hidden,
            num_pilots=self.num_pilots,
            params={k: v.copy() for k, v in self.params.items()},
            metadata=dict(self.metadata),
        )

    def check_finite(self) -> None:
        for key, value in self.params.items():
            if not np.isfinite(value).all():
                raise CrewSchedError(f"non-finite parameter {key}")


def init_weights(
    input_dim: int,
    num_pilots: int,
    hidden: tuple[int, int],
    rng: np.random.Generator,
    metadata: dict[str, Any] | None = None,
) -> PolicyWeights:
    h1, h2 = hidden

    def layer(fan_in, fan_out, scale=1.0):
        limit = scale * np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, size=(fan_in, fan_out))

    params = {
        "w1": layer(input_dim, h1),
        "b1": np.zeros(h1),
        "w2": layer(h1, h2),
        "b2": np.zeros(h2),
        # Small actor head keeps the initial policy near uniform.
        "wa": layer(h2, num_pilots, scale=0.01),
        "ba": np.zeros(num_pilots),
        "wv": layer(h2, 1),
        "bv": np.zeros(1),
    }
    return PolicyWeights(input_dim, (h1, h2), num_pilots, params, metadata or {})


def forward(params: dict[str, np.ndarray], x: np.ndarray) -> dict[str, np.ndarray]:
    """Batched trunk + heads; returns the cache needed for backprop."""
    z1 = x @ params["w1"] + params["b1"]
    h1 = np.tanh(z1)
    z2 = h1 @ params["w2"] + params["b2"]
    h2 = np.tanh(z2)
    logits = h2 @ params["wa"] + params["ba"]
    values = (h2 @ params["wv"] + params["bv"])[:, 0]
    return {"x": x, "h1": h1, "h2": h2, "logits": logits, "values": values}


def masked_softmax(logits: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Probabilities over available entries; masked entries are exactly 0."""
    if logits.ndim == 1:
        return masked_softmax(logits[None, :], mask[None, :])[0]
    available = mask > 0
    if not available.any(axis=1).all():
        raise CrewSchedError("all pilots masked: empty action distribution")
    shifted = np.where(available, logits, -np.inf)
    shifted = shifted - shifted.max(axis=1, keepdims=True)
    expd = np.where(available, np.exp(shifted), 0.0)
    return expd / expd.sum(axis=1, keepdims=True)


def policy_forward(weights: PolicyWeights, obs: np.ndarray) -> tuple[np.ndarray, float]:
    """Masked action distribution and value estimate for one observation.

    The availability mask is the observation's leading num_pilots entries.
    """
    if obs.shape != (weights.input_dim,):
        raise CrewSchedError(
            f"observation length {obs.shape} does not match network input "
            f"({weights.input_dim})"
        )
    cache = forward(weights.params, obs[None, :])
    mask = obs[: weights.num_pilots]
    probs = masked_softmax(cache["logits"][0], mask)
    return probs, float(cache["values"][0])


def backward(
    params: dict[str, np.ndarray],
    cache: dict[str, np.ndarray],
    d_logits: np.ndarray,
    d_values: np.ndarray,
) -> dict[str, np.ndarray]:
    """Gradients of a scalar loss given its derivatives at both heads."""
    h2, h1, x = cache["h2"], cache["h1"], cache["x"]
    grads: dict[str, np.ndarray] = {}
    grads["wa"] = h2.T @ d_logits
    grads["ba"] = d_logits.sum(axis=0)
    dv = d_values[:, None]
    grads["wv"] = h2.T @ dv
    grads["bv"] = dv.sum(axis=0)
    d_h2 = d_logits @ params["wa"].T + dv @ params["wv"].T
    d_z2 = d_h2 * (1.0 - h2 * h2)
    grads["w2"] = h1.T @ d_z2
    grads["b2"] = d_z2.sum(axis=0)
    d_h1 = d_z2 @ params["w2"].T
    d_z1 = d_h1 * (1.0 - h1 * h1)
    grads["w1"] = x.T @ d_z1
    grads["b1"] = d_z1.sum(axis=0)
    return grads


def log_prob_grads(
    weights: PolicyWeights, obs: np.ndarray, action: int
) -> tuple[float, dict[str, np.ndarray]]:
    """log pi(action | obs) and its gradient w.r.t. every parameter."""
    cache = forward(weights.params, obs[None, :])
    mask = obs[: weights.num_pilots]
    probs = masked_softmax(cache["logits"][0], mask)
    if probs[action] <= 0.0:
        raise CrewSchedError("action is masked; log-probability undefined")
    logp = float(np.log(probs[action]))
    d_logits = -probs[None, :].copy()
    d_logits[0, action] += 1.0
    d_logits[0, mask <= 0] = 0.0
    grads = backward(weights.params, cache, d_logits, np.zeros(1))
    return logp, grads


def value_grads(
    weights: PolicyWeights, obs: np.ndarray
) -> tuple[float, dict[str, np.ndarray]]:
    """Critic output and its gradient w.r.t. every parameter."""
    cache = forward(weights.params, obs[None, :])
    grads = backward(
        weights.params, cache, np.zeros_like(cache["logits"]), np.ones(1)
    )
    return float(cache["values"][0]), grads


def global_norm(grads: dict[str, np.ndarray]) -> float:
    return float(np.sqrt(sum(float((g * g).sum()) for g in grads.values())))


def clip_grads(grads: dict[str, np.ndarray], max_norm: float) -> dict[str, np.ndarray]:
    norm = global_norm(grads)
    if norm <= max_norm or norm == 0.0:
        return grads
    scale = max_norm / norm
    return {k: g * scale for k, g in grads.items()}


class Adam:
    """Standard Adam on the parameter dict."""

    def __init__(self, params: dict[str, np.ndarray], lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1**self.t
        b2c = 1.0 - self.beta2**self.t
        for key, grad in grads.items():
            self.m[key] = self.beta1 * self.m[key] + (1 - self.beta1) * grad
            self.v[key] = self.beta2 * self.v[key] + (1 - self.beta2) * grad * grad
            m_hat = self.m[key] / b1c
            v_hat = self.v[key] / b2c
            params[key] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
