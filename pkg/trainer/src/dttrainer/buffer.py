"""On-policy rollout storage: one finished episode, cleared after each update."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ROLE_CENTER = "center"


@dataclass
class StepRecord:
    """Everything one environment transition contributes to the update."""

    state: np.ndarray                 # global state before the step
    obs: list[np.ndarray]             # per-agent observations before the step
    discrete: list[np.ndarray]        # per-agent integer choices
    continuous: list[np.ndarray]      # per-agent stored continuous values
    log_prob: np.ndarray              # per-agent action log-prob at collection
    entropy: np.ndarray               # per-agent policy entropy at collection
    reward_global: float
    reward_center: float
    done: bool


@dataclass
class RolloutBuffer:
    """Per-step records for a set of agents with class-dependent rewards.

    Rows for the placement-coordinator agent train on the placement reward;
    every other row trains on the global reward.
    """

    roles: list[str]
    records: list[StepRecord] = field(default_factory=list)
    final_state: np.ndarray | None = None

    @property
    def is_empty(self) -> bool:
        return not self.records

    def __len__(self) -> int:
        return len(self.records)

    def append(self, record: StepRecord) -> None:
        if len(record.obs) != len(self.roles):
            raise ValueError(
                f"record carries {len(record.obs)} observations for "
                f"{len(self.roles)} agents")
        self.records.append(record)

    def clear(self) -> None:
        self.records.clear()
        self.final_state = None

    # -- stacked views -------------------------------------------------------

    def states(self) -> np.ndarray:
        return np.stack([r.state for r in self.records])

    def next_states(self) -> np.ndarray:
        """State after each step; the final step uses the episode-end state."""
        if self.final_state is None:
            raise RuntimeError("final_state not recorded for this episode")
        later = [r.state for r in self.records[1:]] + [self.final_state]
        return np.stack(later)

    def dones(self) -> np.ndarray:
        return np.array([r.done for r in self.records], dtype=float)

    def agent_obs(self, agent: int) -> np.ndarray:
        return np.stack([r.obs[agent] for r in self.records])

    def agent_discrete(self, agent: int) -> np.ndarray:
        return np.stack([r.discrete[agent] for r in self.records]).astype(np.int64)

    def agent_continuous(self, agent: int) -> np.ndarray:
        return np.stack([r.continuous[agent] for r in self.records])

    def log_probs(self, agent: int) -> np.ndarray:
        return np.array([r.log_prob[agent] for r in self.records])

    def entropies(self, agent: int) -> np.ndarray:
        return np.array([r.entropy[agent] for r in self.records])

    def rewards_for(self, agent: int) -> np.ndarray:
        if self.roles[agent] == ROLE_CENTER:
            return np.array([r.reward_center for r in self.records])
        return np.array([r.reward_global for r in self.records])
