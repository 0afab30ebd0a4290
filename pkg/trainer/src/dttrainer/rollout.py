"""Episode-level statistics and the uniform-random reference policy."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .client import EnvironmentClient


@dataclass
class EpisodeStats:
    """Aggregates of one episode, normalized for curve reporting."""

    steps: int
    num_users: int
    reward_global_sum: float = 0.0
    reward_center_sum: float = 0.0
    energy_sum_j: float = 0.0
    failures: int = 0
    requests: int = 0

    @property
    def reward_global_mean(self) -> float:
        return self.reward_global_sum / self.steps

    @property
    def reward_center_mean(self) -> float:
        return self.reward_center_sum / self.steps

    @property
    def energy_per_user_slot(self) -> float:
        return self.energy_sum_j / (self.num_users * self.steps)

    @property
    def failure_ratio(self) -> float:
        return self.failures / (self.num_users * self.steps)

    def absorb(self, reply) -> None:
        self.reward_global_sum += reply.reward_global
        self.reward_center_sum += reply.reward_center
        self.energy_sum_j += float(reply.info.get("energy_j", 0.0))
        self.failures += int(reply.info.get("failures", 0))
        self.requests += int(reply.info.get("requests", 0))


def uniform_wire_actions(spec_reply: dict, rng: np.random.Generator) -> list[dict]:
    """Uniform-random valid actions for every agent (the RandomAll reference)."""
    actions = []
    for agent in spec_reply["agents"]:
        discrete = [int(rng.integers(card)) for card in agent["discrete"]]
        continuous = rng.random(int(agent["continuous"])).tolist()
        actions.append({"discrete": discrete, "continuous": continuous})
    return actions


def run_random_episode(client: EnvironmentClient, spec_reply: dict,
                       rng: np.random.Generator,
                       seed: int | None = None) -> EpisodeStats:
    """One full episode under uniform-random actions."""
    client.reset(seed)
    num_steps = int(spec_reply["episode_slots"])
    stats = EpisodeStats(steps=num_steps, num_users=int(spec_reply["num_mus"]))
    done = False
    steps = 0
    while not done:
        reply = client.step(uniform_wire_actions(spec_reply, rng))
        stats.absorb(reply)
        done = reply.done
        steps += 1
    stats.steps = steps
    return stats
