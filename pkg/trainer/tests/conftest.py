"""Shared fixtures: a live simulator process and synthetic trainer builders.

One micro-sized simulator is spawned per test session; tests that talk to
it open their own protocol sessions so state never leaks between them.
"""
import json
from pathlib import Path

import numpy as np
import pytest
import torch

from dttrainer.buffer import StepRecord
from dttrainer.client import EnvironmentClient
from dttrainer.config import TrainerSettings
from dttrainer.launch import SimulatorProcess
from dttrainer.nets import DTYPE

# Small enough that a full episode lasts 10 slots.
MICRO_CONFIG = {
    "num_mus": 2,
    "num_bss": 2,
    "frame_slots": 5,
    "episode_frames": 2,
    "migration_slots": 0,
    "bandwidth_hz": 1.0e9,
    "f_max_hz": 2.0e10,
    "seed": 0,
}


@pytest.fixture(scope="session")
def micro_config_path(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("cfg") / "micro.json"
    path.write_text(json.dumps(MICRO_CONFIG))
    return path


@pytest.fixture(scope="session")
def simulator(micro_config_path):
    with SimulatorProcess(str(micro_config_path)) as proc:
        yield proc


@pytest.fixture
def client(simulator):
    with EnvironmentClient(simulator.host, simulator.port) as c:
        yield c


def synthetic_spec(state_dim: int = 6, obs_dim: int = 4) -> dict:
    """A three-agent layout covering every head combination."""
    return {
        "num_agents": 3,
        "num_mus": 2,
        "num_bss": 1,
        "episode_slots": 8,
        "state_dim": state_dim,
        "agents": [
            {"role": "mu", "obs_dim": obs_dim, "discrete": [3], "continuous": 1},
            {"role": "bs", "obs_dim": obs_dim, "discrete": [], "continuous": 2},
            {"role": "center", "obs_dim": obs_dim, "discrete": [2, 2],
             "continuous": 0},
        ],
    }


def single_agent_spec(state_dim: int = 5, obs_dim: int = 3) -> dict:
    return {
        "num_agents": 1,
        "num_mus": 1,
        "num_bss": 1,
        "episode_slots": 6,
        "state_dim": state_dim,
        "agents": [
            {"role": "mu", "obs_dim": obs_dim, "discrete": [2], "continuous": 1},
        ],
    }


def fill_buffer(trainer, steps: int, rng: np.random.Generator) -> None:
    """Populate a trainer's rollout buffer with policy-consistent records."""
    state_dim = int(trainer.spec_reply["state_dim"])
    for t in range(steps):
        obs = [rng.normal(size=h.obs_dim) for h in trainer.agents]
        samples = [h.actor.act(torch.as_tensor(o, dtype=DTYPE))
                   for h, o in zip(trainer.agents, obs)]
        trainer.buffer.append(StepRecord(
            state=rng.normal(size=state_dim),
            obs=obs,
            discrete=[np.asarray(s.discrete, dtype=np.int64) for s in samples],
            continuous=[np.asarray(s.stored, dtype=float) for s in samples],
            log_prob=np.array([s.log_prob for s in samples]),
            entropy=np.array([s.entropy for s in samples]),
            reward_global=float(rng.normal()),
            reward_center=float(rng.normal()),
            done=(t == steps - 1),
        ))
    trainer.buffer.final_state = rng.normal(size=state_dim)


def settings_for_tests(**overrides) -> TrainerSettings:
    base = {"update_epochs": 2, "normalize_advantages": True}
    base.update(overrides)
    return TrainerSettings(**base)
