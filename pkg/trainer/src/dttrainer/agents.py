"""Agent construction from the simulator's wire-protocol spec reply."""
from __future__ import annotations

from dataclasses import dataclass

import torch

from .config import TrainerSettings
from .nets import Actor, ActionSample, Critic


@dataclass
class AgentHandle:
    """One agent's networks and optimizers, plus its wire-level layout."""

    index: int
    role: str
    obs_dim: int
    discrete: tuple[int, ...]
    continuous: int
    actor: Actor
    critic: Critic
    actor_opt: torch.optim.Adam
    critic_opt: torch.optim.Adam


def build_agents(spec_reply: dict, settings: TrainerSettings,
                 head_kind: str) -> list[AgentHandle]:
    """Instantiate per-agent actors and centralized critics.

    The agent ordering and dimensions come verbatim from the spec reply:
    users first, then base stations, then the placement coordinator.
    """
    state_dim = int(spec_reply["state_dim"])
    handles: list[AgentHandle] = []
    for index, agent in enumerate(spec_reply["agents"]):
        actor = Actor(
            obs_dim=int(agent["obs_dim"]),
            discrete=tuple(int(c) for c in agent["discrete"]),
            continuous=int(agent["continuous"]),
            hidden_sizes=settings.hidden_sizes,
            head_kind=head_kind,
            gaussian_std=settings.gaussian_std,
        )
        critic = Critic(state_dim, settings.hidden_sizes)
        handles.append(AgentHandle(
            index=index,
            role=str(agent["role"]),
            obs_dim=int(agent["obs_dim"]),
            discrete=tuple(int(c) for c in agent["discrete"]),
            continuous=int(agent["continuous"]),
            actor=actor,
            critic=critic,
            actor_opt=torch.optim.Adam(actor.parameters(), lr=settings.lr_actor),
            critic_opt=torch.optim.Adam(critic.parameters(), lr=settings.lr_critic),
        ))
    return handles


def wire_action(sample: ActionSample) -> dict:
    """Convert a sampled action to the protocol's action object."""
    return {"discrete": list(sample.discrete),
            "continuous": list(sample.continuous)}
