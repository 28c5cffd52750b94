import numpy as np
import pytest

from crewsched.errors import CrewSchedError
from crewsched.rl.net import (
    Adam,
    clip_grads,
    forward,
    global_norm,
    init_weights,
    log_prob_grads,
    masked_softmax,
    policy_forward,
    value_grads,
)
from crewsched.rl.ppo import TrainConfig, clipped_policy_loss, train_ppo, _update
from crewsched.generator import default_desk_profile

from conftest import constant_policy


def _numeric_grad(fn, arr, idx, eps=1e-6):
    old = arr[idx]
    arr[idx] = old + eps
    up = fn()
    arr[idx] = old - eps
    down = fn()
    arr[idx] = old
    return (up - down) / (2 * eps)


class TestMaskedSoftmax:
    def test_single_available_pilot_gets_probability_one(self):
        w = constant_policy(4, 2, actor_bias=[3.0, -1.0, 0.5, 0.0])
        obs = np.zeros(w.input_dim)
        obs[:4] = [0, 0, 1, 0]
        probs, _ = policy_forward(w, obs)
        assert probs[2] == 1.0
        assert probs.sum() == 1.0

    def test_uniform_logits_give_equal_share(self):
        w = constant_policy(5, 2)
        obs = np.zeros(w.input_dim)
        obs[:5] = [1, 1, 0, 1, 0]
        probs, _ = policy_forward(w, obs)
        for idx in (0, 1, 3):
            assert probs[idx] == pytest.approx(1 / 3, abs=1e-12)
        assert probs[2] == 0.0 and probs[4] == 0.0

    def test_masked_probabilities_exactly_zero_and_rest_normalized(self, rng):
        w = constant_policy(8, 3, actor_bias=rng.normal(size=8))
        for _ in range(20):
            obs = rng.normal(size=w.input_dim)
            mask = (rng.random(8) < 0.6).astype(float)
            if not mask.any():
                mask[0] = 1.0
            obs[:8] = mask
            probs, _ = policy_forward(w, obs)
            assert (probs[mask == 0] == 0.0).all()
            assert abs(probs.sum() - 1.0) < 1e-9

    def test_all_masked_signals_failure(self):
        w = constant_policy(3, 2)
        obs = np.zeros(w.input_dim)
        with pytest.raises(CrewSchedError):
            policy_forward(w, obs)


class TestGradients:
    def test_actor_and_critic_match_finite_differences(self):
        rng = np.random.default_rng(0)
        P, types = 6, 4
        w = init_weights(3 * P + types + 5, P, (16, 12), rng)
        worst = 0.0
        for _ in range(20):
            obs = rng.normal(size=w.input_dim)
            mask = (rng.random(P) < 0.7).astype(float)
            if not mask.any():
                mask[int(rng.integers(P))] = 1.0
            obs[:P] = mask
            action = int(rng.choice(np.flatnonzero(mask)))
            _, grads = log_prob_grads(w, obs, action)
            _, vgrads = value_grads(w, obs)
            for key in w.params:
                arr = w.params[key]
                flat = int(rng.integers(arr.size))
                idx = np.unravel_index(flat, arr.shape)
                num = _numeric_grad(lambda: log_prob_grads(w, obs, action)[0], arr, idx)
                rel = abs(grads[key][idx] - num) / max(abs(num), 1e-4)
                worst = max(worst, rel)
                num_v = _numeric_grad(lambda: value_grads(w, obs)[0], arr, idx)
                rel_v = abs(vgrads[key][idx] - num_v) / max(abs(num_v), 1e-4)
                worst = max(worst, rel_v)
        assert worst < 1e-4

    def test_masked_action_logprob_rejected(self):
        w = constant_policy(3, 2)
        obs = np.zeros(w.input_dim)
        obs[:3] = [1, 0, 1]
        with pytest.raises(CrewSchedError):
            log_prob_grads(w, obs, 1)

    def test_grad_clip_preserves_direction(self):
        grads = {"a": np.array([3.0, 4.0])}
        clipped = clip_grads(grads, 0.5)
        assert global_norm(clipped) == pytest.approx(0.5)
        assert clipped["a"][0] / clipped["a"][1] == pytest.approx(3 / 4)


class TestClippedLoss:
    def test_constant_outside_clip_range_for_positive_advantage(self):
        adv = np.array([2.0])
        eps = 0.2
        inside = clipped_policy_loss(np.array([1.2]), adv, eps)
        for ratio in (1.3, 2.0, 10.0):
            out = clipped_policy_loss(np.array([ratio]), adv, eps)
            assert out == pytest.approx(inside)

    def test_constant_below_clip_range_for_negative_advantage(self):
        adv = np.array([-1.5])
        eps = 0.2
        edge = clipped_policy_loss(np.array([0.8]), adv, eps)
        for ratio in (0.5, 0.1, 0.01):
            out = clipped_policy_loss(np.array([ratio]), adv, eps)
            assert out == pytest.approx(edge)

    def test_unclipped_inside_window(self):
        adv = np.array([1.0])
        for ratio in (0.9, 1.0, 1.1):
            got = clipped_policy_loss(np.array([ratio]), adv, 0.2)
            assert got == pytest.approx(-ratio)


class TestTraining:
    def test_update_learns_synthetic_preference(self):
        rng = np.random.default_rng(0)
        P = 8
        input_dim = 3 * P + 4 + 5
        w = init_weights(input_dim, P, (32, 32), rng)
        opt = Adam(w.params, 3e-4)
        cfg = TrainConfig(seed=0, total_steps=2048, batch_steps=2048, entropy_coef=0.005)
        for _ in range(50):
            B = 512
            obs = rng.normal(size=(B, input_dim))
            obs[:, :P] = 1.0
            cache = forward(w.params, obs)
            probs = masked_softmax(cache["logits"], obs[:, :P])
            actions = np.array([rng.choice(P, p=p) for p in probs])
            adv = np.where(actions == 3, 1.0, -1.0)
            adv = (adv - adv.mean()) / (adv.std() + 1e-8)
            batch = {
                "obs": obs,
                "actions": actions,
                "logp_old": np.log(probs[np.arange(B), actions]),
                "rewards": np.zeros(B),
                "returns": np.zeros(B),
                "advantages": adv,
            }
            _update(w, opt, cfg, batch, rng)
        cache = forward(w.params, obs)
        probs = masked_softmax(cache["logits"], obs[:, :P])
        assert probs[:, 3].mean() > 0.8

    def test_two_seeded_runs_identical(self):
        profile = default_desk_profile()
        cfg = TrainConfig(seed=7, total_steps=2048, batch_steps=1024, minibatch_size=256)
        w1, log1 = train_ppo(profile, cfg)
        w2, log2 = train_ppo(profile, cfg)
        for key in w1.params:
            np.testing.assert_array_equal(w1.params[key], w2.params[key])
        assert log1 == log2

    def test_training_log_fields(self):
        profile = default_desk_profile()
        cfg = TrainConfig(seed=3, total_steps=1024, batch_steps=1024)
        _, log = train_ppo(profile, cfg)
        assert len(log) == 1
        for field in ("step", "episodes", "mean_return", "completion_rate", "policy_loss", "value_loss", "entropy"):
            assert field in log[0]
