"""Off-policy machinery: replay eviction order, sampling guards, and a
short live-environment training run."""
import numpy as np
import pytest
import torch

from dttrainer.maddpg import MaddpgTrainer, ReplayBuffer, Transition

from conftest import settings_for_tests


def make_transition(tag: float) -> Transition:
    return Transition(state=np.zeros(3), obs=[np.zeros(2)],
                      actions=[np.zeros(2)], reward_global=tag,
                      reward_center=tag, next_state=np.zeros(3),
                      next_obs=[np.zeros(2)], done=False)


def test_replay_evicts_oldest_first():
    buffer = ReplayBuffer(capacity=5)
    for tag in range(7):
        buffer.push(make_transition(float(tag)))
    assert len(buffer) == 5
    kept = [t.reward_global for t in buffer.items]
    assert kept == [2.0, 3.0, 4.0, 5.0, 6.0]


def test_replay_rejects_sampling_when_empty():
    buffer = ReplayBuffer(capacity=3)
    with pytest.raises(RuntimeError, match="empty replay buffer"):
        buffer.sample(np.random.default_rng(0), batch=4)


def test_replay_rejects_nonpositive_capacity():
    with pytest.raises(ValueError):
        ReplayBuffer(capacity=0)


def test_replay_sample_size_and_membership():
    buffer = ReplayBuffer(capacity=10)
    for tag in range(4):
        buffer.push(make_transition(float(tag)))
    picks = buffer.sample(np.random.default_rng(1), batch=16)
    assert len(picks) == 16
    assert all(0.0 <= t.reward_global <= 3.0 for t in picks)


def test_short_live_training_run(client):
    # Two micro episodes: transitions accumulate, updates fire after the
    # warmup, and the curve rows stay finite.
    spec = client.spec()
    settings = settings_for_tests(replay_batch=8, warmup_steps=5,
                                  replay_capacity=1000)
    trainer = MaddpgTrainer(spec, settings, seed=0)
    rows = trainer.train(client, episodes=2)
    assert len(rows) == 2
    assert len(trainer.replay) == 2 * int(spec["episode_slots"])
    for row in rows:
        assert np.isfinite(row.reward_global)
        assert np.isfinite(row.energy_j) and row.energy_j >= 0.0
        assert 0.0 <= row.failure_ratio <= 1.0
    losses = trainer.update()
    assert np.isfinite(losses["actor_loss"])
    assert np.isfinite(losses["critic_loss"])


def test_exploration_respects_continuous_bounds(client):
    spec = client.spec()
    trainer = MaddpgTrainer(spec, settings_for_tests(), seed=3)
    torch.manual_seed(3)
    obs, _ = client.reset(seed=11)
    for _ in range(50):
        wires, _ = trainer.act(obs, explore=True)
        for wire, agent in zip(wires, spec["agents"]):
            assert len(wire["discrete"]) == len(agent["discrete"])
            assert len(wire["continuous"]) == int(agent["continuous"])
            for card, choice in zip(agent["discrete"], wire["discrete"]):
                assert 0 <= choice < card
            for value in wire["continuous"]:
                assert 0.0 <= value <= 1.0
