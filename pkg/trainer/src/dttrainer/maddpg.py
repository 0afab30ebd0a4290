"""Off-policy benchmark: deterministic per-agent actors with exploration
noise, centralized action-value critics, and a FIFO replay buffer.

Discrete choices use straight-through estimation: rollouts execute the
noisy argmax, the actor update differentiates through a hard
softmax-with-noise relaxation.
"""
from __future__ import annotations

import copy
from collections import deque
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from .buffer import ROLE_CENTER
from .client import EnvironmentClient
from .config import TrainerSettings
from .curves import CurveRow
from .nets import DTYPE, abort_on_non_finite_grads, build_mlp
from .rollout import EpisodeStats


@dataclass
class Transition:
    """One step for every agent, with encoded joint actions."""

    state: np.ndarray
    obs: list[np.ndarray]
    actions: list[np.ndarray]          # per-agent [one-hots..., continuous...]
    reward_global: float
    reward_center: float
    next_state: np.ndarray
    next_obs: list[np.ndarray]
    done: bool


class ReplayBuffer:
    """Bounded FIFO transition store: at capacity, the oldest entry leaves."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._items: deque[Transition] = deque(maxlen=capacity)

    def push(self, item: Transition) -> None:
        self._items.append(item)

    def __len__(self) -> int:
        return len(self._items)

    @property
    def items(self) -> list[Transition]:
        return list(self._items)

    def sample(self, rng: np.random.Generator, batch: int) -> list[Transition]:
        if not self._items:
            raise RuntimeError("cannot sample from an empty replay buffer")
        picks = rng.integers(len(self._items), size=batch)
        return [self._items[int(i)] for i in picks]


class DeterministicActor(nn.Module):
    """Maps an observation to logits per discrete head and sigmoids per
    continuous dim."""

    def __init__(self, obs_dim: int, discrete: tuple[int, ...],
                 continuous: int, hidden_sizes: tuple[int, ...]):
        super().__init__()
        self.discrete = discrete
        self.continuous = continuous
        out_dim = sum(discrete) + continuous
        self.trunk = build_mlp(obs_dim, hidden_sizes, out_dim, final_scale=0.01)

    def forward(self, obs: torch.Tensor) -> tuple[list[torch.Tensor], torch.Tensor]:
        raw = self.trunk(obs)
        logits: list[torch.Tensor] = []
        offset = 0
        for card in self.discrete:
            logits.append(raw[..., offset:offset + card])
            offset += card
        continuous = torch.sigmoid(raw[..., offset:offset + self.continuous])
        return logits, continuous

    def encoded_dim(self) -> int:
        return sum(self.discrete) + self.continuous


class MaddpgTrainer:
    """Centralized-critic deterministic-policy training over one session."""

    def __init__(self, spec_reply: dict, settings: TrainerSettings, seed: int = 0):
        self.settings = settings
        self.spec_reply = spec_reply
        self.seed = seed
        torch.manual_seed(seed)
        self.rng = np.random.default_rng(seed)
        self.noise_std = float(np.sqrt(settings.exploration_noise_var))

        state_dim = int(spec_reply["state_dim"])
        self.roles = [str(a["role"]) for a in spec_reply["agents"]]
        self.actors: list[DeterministicActor] = []
        for agent in spec_reply["agents"]:
            self.actors.append(DeterministicActor(
                obs_dim=int(agent["obs_dim"]),
                discrete=tuple(int(c) for c in agent["discrete"]),
                continuous=int(agent["continuous"]),
                hidden_sizes=settings.hidden_sizes))
        joint_dim = sum(actor.encoded_dim() for actor in self.actors)
        self.critics = [build_mlp(state_dim + joint_dim, settings.hidden_sizes, 1)
                        for _ in self.actors]
        self.target_actors = [copy.deepcopy(a) for a in self.actors]
        self.target_critics = [copy.deepcopy(c) for c in self.critics]
        self.actor_opts = [torch.optim.Adam(a.parameters(), lr=settings.lr_actor)
                           for a in self.actors]
        self.critic_opts = [torch.optim.Adam(c.parameters(), lr=settings.lr_critic)
                            for c in self.critics]
        self.replay = ReplayBuffer(settings.replay_capacity)

    # -- acting --------------------------------------------------------------

    def _encode(self, actor: DeterministicActor, logits: list[torch.Tensor],
                continuous: torch.Tensor, explore: bool) -> tuple[dict, np.ndarray]:
        """One agent's wire action plus its flat encoding."""
        onehots: list[torch.Tensor] = []
        discrete: list[int] = []
        for head_logits, card in zip(logits, actor.discrete):
            if explore:
                noise = -torch.log(-torch.log(
                    torch.rand(card, dtype=DTYPE).clamp_min(1e-12)).clamp_min(1e-12))
                index = int(torch.argmax(head_logits + noise))
            else:
                index = int(torch.argmax(head_logits))
            discrete.append(index)
            onehots.append(F.one_hot(torch.tensor(index), card).to(DTYPE))
        cont = continuous
        if explore and actor.continuous:
            cont = (cont + self.noise_std
                    * torch.randn(actor.continuous, dtype=DTYPE)).clamp(0.0, 1.0)
        flat = torch.cat(onehots + [cont]) if (onehots or actor.continuous) \
            else torch.zeros(0, dtype=DTYPE)
        wire = {"discrete": discrete, "continuous": [float(v) for v in cont]}
        return wire, flat.numpy()

    @torch.no_grad()
    def act(self, obs: list[np.ndarray], explore: bool) -> tuple[list[dict], list[np.ndarray]]:
        wires: list[dict] = []
        flats: list[np.ndarray] = []
        for actor, o in zip(self.actors, obs):
            logits, continuous = actor(torch.as_tensor(o, dtype=DTYPE))
            wire, flat = self._encode(actor, logits, continuous, explore)
            wires.append(wire)
            flats.append(flat)
        return wires, flats

    @torch.no_grad()
    def _target_joint(self, next_obs_batch: list[torch.Tensor]) -> torch.Tensor:
        """Flat joint action of all target actors on the next observations."""
        parts: list[torch.Tensor] = []
        for actor, obs in zip(self.target_actors, next_obs_batch):
            logits, continuous = actor(obs)
            for head_logits, card in zip(logits, actor.discrete):
                parts.append(F.one_hot(torch.argmax(head_logits, dim=-1), card).to(DTYPE))
            parts.append(continuous)
        return torch.cat(parts, dim=-1)

    def _differentiable_joint(self, agent: int, obs: torch.Tensor,
                              buffered: torch.Tensor) -> torch.Tensor:
        """Joint action with agent's own slice re-derived differentiably."""
        actor = self.actors[agent]
        logits, continuous = actor(obs)
        parts = [F.gumbel_softmax(head_logits, tau=self.settings.gumbel_tau, hard=True)
                 for head_logits in logits]
        parts.append(continuous)
        own = torch.cat(parts, dim=-1) if parts else buffered[:, 0:0]
        start = sum(self.actors[i].encoded_dim() for i in range(agent))
        stop = start + actor.encoded_dim()
        return torch.cat([buffered[:, :start], own, buffered[:, stop:]], dim=-1)

    # -- learning -----------------------------------------------------------------

    def update(self) -> dict:
        settings = self.settings
        batch = self.replay.sample(self.rng, settings.replay_batch)
        states = torch.as_tensor(np.stack([t.state for t in batch]), dtype=DTYPE)
        next_states = torch.as_tensor(np.stack([t.next_state for t in batch]), dtype=DTYPE)
        joint = torch.as_tensor(np.concatenate(
            [np.concatenate(t.actions) for t in batch]).reshape(len(batch), -1), dtype=DTYPE)
        nonterminal = torch.as_tensor(
            np.array([1.0 - float(t.done) for t in batch]), dtype=DTYPE)
        reward_global = torch.as_tensor(
            np.array([t.reward_global for t in batch]), dtype=DTYPE)
        reward_center = torch.as_tensor(
            np.array([t.reward_center for t in batch]), dtype=DTYPE)
        obs_batches = [torch.as_tensor(np.stack([t.obs[u] for t in batch]), dtype=DTYPE)
                       for u in range(len(self.actors))]
        next_obs_batches = [torch.as_tensor(np.stack([t.next_obs[u] for t in batch]),
                                            dtype=DTYPE)
                            for u in range(len(self.actors))]
        next_joint = self._target_joint(next_obs_batches)

        actor_losses: list[float] = []
        critic_losses: list[float] = []
        for u in range(len(self.actors)):
            rewards = reward_center if self.roles[u] == ROLE_CENTER else reward_global
            with torch.no_grad():
                target_q = self.target_critics[u](
                    torch.cat([next_states, next_joint], dim=-1)).squeeze(-1)
                target = rewards + settings.discount * nonterminal * target_q
            q = self.critics[u](torch.cat([states, joint], dim=-1)).squeeze(-1)
            critic_loss = torch.mean((q - target) ** 2)
            self.critic_opts[u].zero_grad()
            critic_loss.backward()
            abort_on_non_finite_grads(self.critics[u], f"critic[{u}]")
            self.critic_opts[u].step()

            own_joint = self._differentiable_joint(u, obs_batches[u], joint)
            actor_loss = -self.critics[u](
                torch.cat([states, own_joint], dim=-1)).squeeze(-1).mean()
            self.actor_opts[u].zero_grad()
            actor_loss.backward()
            abort_on_non_finite_grads(self.actors[u], f"actor[{u}]")
            self.actor_opts[u].step()

            actor_losses.append(float(actor_loss.detach()))
            critic_losses.append(float(critic_loss.detach()))

        self._soft_update()
        return {"actor_loss": float(np.mean(actor_losses)),
                "critic_loss": float(np.mean(critic_losses))}

    def _soft_update(self) -> None:
        mix = self.settings.soft_update
        pairs = list(zip(self.actors, self.target_actors)) \
            + list(zip(self.critics, self.target_critics))
        with torch.no_grad():
            for live, target in pairs:
                for p, tp in zip(live.parameters(), target.parameters()):
                    tp.mul_(1.0 - mix).add_(mix * p)

    # -- outer loop -----------------------------------------------------------------

    def train(self, client: EnvironmentClient, episodes: int,
              log=None) -> list[CurveRow]:
        rows: list[CurveRow] = []
        total_steps = 0
        for episode in range(episodes):
            env_seed = int(np.random.SeedSequence(
                (self.seed, episode)).generate_state(1)[0])
            obs, state = client.reset(env_seed)
            stats = EpisodeStats(steps=int(self.spec_reply["episode_slots"]),
                                 num_users=int(self.spec_reply["num_mus"]))
            done = False
            steps = 0
            while not done:
                wires, flats = self.act(obs, explore=True)
                reply = client.step(wires)
                self.replay.push(Transition(
                    state=state, obs=obs, actions=flats,
                    reward_global=reply.reward_global,
                    reward_center=reply.reward_center,
                    next_state=reply.state, next_obs=reply.obs,
                    done=reply.done))
                stats.absorb(reply)
                obs, state, done = reply.obs, reply.state, reply.done
                steps += 1
                total_steps += 1
                if total_steps >= self.settings.warmup_steps:
                    self.update()
            stats.steps = steps
            rows.append(CurveRow(step=episode,
                                 reward_global=stats.reward_global_mean,
                                 reward_center=stats.reward_center_mean,
                                 energy_j=stats.energy_per_user_slot,
                                 failure_ratio=stats.failure_ratio))
            if log is not None:
                row = rows[-1]
                log(f"episode {episode + 1}/{episodes}  "
                    f"reward_global={row.reward_global:.5f}  "
                    f"energy_j={row.energy_j:.3e}  "
                    f"failure_ratio={row.failure_ratio:.4f}")
        return rows
