"""On-policy multi-agent trainers: sequential clipped-surrogate updates with
a running ratio product, and the simultaneous-update benchmark.

One training iteration collects exactly one episode, estimates per-agent
advantages once, then runs a fixed number of update epochs over the full
batch. The sequential variants draw a fresh agent permutation every epoch,
update each agent's critic and actor in turn, and fold the agent's
post-update ratio into the running product that weights the next agent's
advantages. The simultaneous variant keeps per-agent advantages unweighted
and a fixed agent order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .agents import AgentHandle, build_agents, wire_action
from .buffer import RolloutBuffer, StepRecord
from .client import EnvironmentClient
from .config import TrainerSettings
from .curves import CurveRow
from .gae import compute_gae
from .nets import DTYPE, HEAD_BETA, HEAD_GAUSSIAN, abort_on_non_finite_grads
from .rollout import EpisodeStats

ON_POLICY_ALGOS = ("beta-happo", "gauss-happo", "beta-mappo")
SEQUENTIAL_ALGOS = ("beta-happo", "gauss-happo")


def clipped_objective(log_prob_new: torch.Tensor, log_prob_old: torch.Tensor,
                      weight: torch.Tensor, clip_ratio: float) -> torch.Tensor:
    """Per-sample pessimistic surrogate: min of the weighted ratio and its clip.

    Where the clipped branch is active and the weight sign matches, the
    gradient through the ratio is exactly zero.
    """
    ratio = torch.exp(log_prob_new - log_prob_old)
    clipped = torch.clamp(ratio, 1.0 - clip_ratio, 1.0 + clip_ratio)
    return torch.minimum(ratio * weight, clipped * weight)


@dataclass
class AgentUpdateTrace:
    """Diagnostics for one agent's update inside one epoch."""

    epoch: int
    agent: int
    advantage: np.ndarray
    weight: np.ndarray                  # what the surrogate multiplied
    log_prob_before: np.ndarray         # current policy before this agent's step
    log_prob_after: np.ndarray          # after the step (sequential only)
    ratio_product_after: np.ndarray | None


class OnPolicyTrainer:
    """Collect-then-update training over one protocol session."""

    def __init__(self, spec_reply: dict, settings: TrainerSettings,
                 algo: str = "beta-happo", seed: int = 0):
        if algo not in ON_POLICY_ALGOS:
            raise ValueError(f"unknown on-policy algorithm: {algo!r}")
        self.algo = algo
        self.sequential = algo in SEQUENTIAL_ALGOS
        self.settings = settings
        self.spec_reply = spec_reply
        self.seed = seed
        torch.manual_seed(seed)
        self.rng = np.random.default_rng(seed)
        head_kind = HEAD_GAUSSIAN if algo == "gauss-happo" else HEAD_BETA
        self.agents: list[AgentHandle] = build_agents(spec_reply, settings, head_kind)
        self.buffer = RolloutBuffer(roles=[a.role for a in self.agents])

    # -- interaction ----------------------------------------------------------

    def collect_episode(self, client: EnvironmentClient,
                        env_seed: int | None = None) -> EpisodeStats:
        """Run one episode under the current policies, filling the buffer."""
        if not self.buffer.is_empty:
            raise RuntimeError(
                "rollout buffer must be empty at the start of an interaction phase")
        obs, state = client.reset(env_seed)
        stats = EpisodeStats(steps=int(self.spec_reply["episode_slots"]),
                             num_users=int(self.spec_reply["num_mus"]))
        done = False
        steps = 0
        while not done:
            samples = [handle.actor.act(torch.as_tensor(o, dtype=DTYPE))
                       for handle, o in zip(self.agents, obs)]
            reply = client.step([wire_action(s) for s in samples])
            self.buffer.append(StepRecord(
                state=state,
                obs=obs,
                discrete=[np.asarray(s.discrete, dtype=np.int64) for s in samples],
                continuous=[np.asarray(s.stored, dtype=float) for s in samples],
                log_prob=np.array([s.log_prob for s in samples]),
                entropy=np.array([s.entropy for s in samples]),
                reward_global=reply.reward_global,
                reward_center=reply.reward_center,
                done=reply.done,
            ))
            stats.absorb(reply)
            obs, state, done = reply.obs, reply.state, reply.done
            steps += 1
        self.buffer.final_state = state
        stats.steps = steps
        return stats

    # -- learning --------------------------------------------------------------

    def update(self, trace: list[AgentUpdateTrace] | None = None) -> dict:
        """One full update cycle over the buffered episode, then clear it."""
        settings = self.settings
        if self.buffer.is_empty:
            raise RuntimeError("cannot update from an empty rollout buffer")
        num_steps = len(self.buffer)
        states = torch.as_tensor(self.buffer.states(), dtype=DTYPE)
        next_states = torch.as_tensor(self.buffer.next_states(), dtype=DTYPE)
        nonterminal = torch.as_tensor(1.0 - self.buffer.dones(), dtype=DTYPE)

        per_agent = []
        for handle in self.agents:
            rewards_np = self.buffer.rewards_for(handle.index)
            with torch.no_grad():
                values = handle.critic(states).numpy()
            advantages = compute_gae(rewards_np, values,
                                     settings.discount, settings.gae_decay)
            if settings.normalize_advantages:
                advantages = ((advantages - advantages.mean())
                              / (advantages.std() + 1e-8))
            per_agent.append({
                "obs": torch.as_tensor(self.buffer.agent_obs(handle.index), dtype=DTYPE),
                "disc": torch.as_tensor(self.buffer.agent_discrete(handle.index)),
                "cont": torch.as_tensor(self.buffer.agent_continuous(handle.index), dtype=DTYPE),
                "old_log_prob": torch.as_tensor(self.buffer.log_probs(handle.index), dtype=DTYPE),
                "rewards": torch.as_tensor(rewards_np, dtype=DTYPE),
                "advantage": torch.as_tensor(advantages, dtype=DTYPE),
            })

        actor_losses: list[float] = []
        critic_losses: list[float] = []
        for epoch in range(settings.update_epochs):
            if self.sequential:
                order = self.rng.permutation(len(self.agents))
            else:
                order = np.arange(len(self.agents))
            if settings.minibatches == 1:
                chunks = [np.arange(num_steps)]
            else:
                chunks = np.array_split(self.rng.permutation(num_steps),
                                        settings.minibatches)
            for rows_np in chunks:
                rows = torch.as_tensor(rows_np, dtype=torch.long)
                product = torch.ones(len(rows_np), dtype=DTYPE)
                for raw_u in order:
                    u = int(raw_u)
                    handle = self.agents[u]
                    data = per_agent[u]

                    # Value update: one-step bootstrapped regression with a
                    # detached target recomputed from the current critic.
                    with torch.no_grad():
                        target = (data["rewards"][rows]
                                  + settings.discount * nonterminal[rows]
                                  * handle.critic(next_states[rows]))
                    value = handle.critic(states[rows])
                    critic_loss = torch.mean((value - target) ** 2)
                    handle.critic_opt.zero_grad()
                    critic_loss.backward()
                    abort_on_non_finite_grads(handle.critic, f"critic[{u}] epoch {epoch}")
                    handle.critic_opt.step()

                    # Policy update against the running-product-weighted
                    # advantages (sequential) or plain advantages.
                    log_prob_new, entropy = handle.actor.evaluate(
                        data["obs"][rows], data["disc"][rows], data["cont"][rows])
                    if self.sequential:
                        weight = product * data["advantage"][rows]
                    else:
                        weight = data["advantage"][rows]
                    objective = clipped_objective(
                        log_prob_new, data["old_log_prob"][rows], weight,
                        settings.clip_ratio)
                    actor_loss = -(objective.mean()
                                   + settings.entropy_coef * entropy.mean())
                    handle.actor_opt.zero_grad()
                    actor_loss.backward()
                    abort_on_non_finite_grads(handle.actor, f"actor[{u}] epoch {epoch}")
                    handle.actor_opt.step()

                    log_prob_after = None
                    if self.sequential or trace is not None:
                        with torch.no_grad():
                            log_prob_after, _ = handle.actor.evaluate(
                                data["obs"][rows], data["disc"][rows],
                                data["cont"][rows])
                    if self.sequential:
                        product = product * torch.exp(
                            log_prob_after - log_prob_new.detach())
                    if trace is not None:
                        trace.append(AgentUpdateTrace(
                            epoch=epoch,
                            agent=u,
                            advantage=data["advantage"][rows].numpy().copy(),
                            weight=weight.detach().numpy().copy(),
                            log_prob_before=log_prob_new.detach().numpy().copy(),
                            log_prob_after=log_prob_after.numpy().copy(),
                            ratio_product_after=(product.numpy().copy()
                                                 if self.sequential else None),
                        ))
                    actor_losses.append(float(actor_loss.detach()))
                    critic_losses.append(float(critic_loss.detach()))

        self.buffer.clear()
        return {"actor_loss": float(np.mean(actor_losses)),
                "critic_loss": float(np.mean(critic_losses))}

    # -- outer loop --------------------------------------------------------------

    def train(self, client: EnvironmentClient, episodes: int,
              log=None) -> list[CurveRow]:
        """Alternate collect/update for the requested number of episodes."""
        rows: list[CurveRow] = []
        for episode in range(episodes):
            env_seed = episode_seed(self.seed, episode)
            stats = self.collect_episode(client, env_seed)
            losses = self.update()
            row = CurveRow(step=episode,
                           reward_global=stats.reward_global_mean,
                           reward_center=stats.reward_center_mean,
                           energy_j=stats.energy_per_user_slot,
                           failure_ratio=stats.failure_ratio)
            rows.append(row)
            if log is not None:
                log(f"episode {episode + 1}/{episodes}  "
                    f"reward_global={row.reward_global:.5f}  "
                    f"energy_j={row.energy_j:.3e}  "
                    f"failure_ratio={row.failure_ratio:.4f}  "
                    f"actor_loss={losses['actor_loss']:.4f}")
        return rows


def episode_seed(trainer_seed: int, episode: int) -> int:
    """Deterministic, collision-resistant per-episode environment seed."""
    return int(np.random.SeedSequence((trainer_seed, episode)).generate_state(1)[0])

