"""Actor and critic networks (float64 multilayer perceptrons)."""
from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from .heads import BetaHead, CategoricalHead, ClampedGaussianHead

DTYPE = torch.float64

HEAD_BETA = "beta"
HEAD_GAUSSIAN = "gaussian"


def build_mlp(in_dim: int, hidden_sizes: tuple[int, ...], out_dim: int,
              final_scale: float = 1.0) -> nn.Sequential:
    """Tanh MLP with orthogonal init; the last layer can start near zero."""
    layers: list[nn.Module] = []
    prev = in_dim
    for width in hidden_sizes:
        linear = nn.Linear(prev, width, dtype=DTYPE)
        nn.init.orthogonal_(linear.weight, gain=nn.init.calculate_gain("tanh"))
        nn.init.zeros_(linear.bias)
        layers += [linear, nn.Tanh()]
        prev = width
    last = nn.Linear(prev, out_dim, dtype=DTYPE)
    nn.init.orthogonal_(last.weight, gain=final_scale)
    nn.init.zeros_(last.bias)
    layers.append(last)
    return nn.Sequential(*layers)


@dataclass
class ActionSample:
    """One agent's sampled action plus what the update phase needs."""

    discrete: list[int]
    continuous: list[float]        # executed values, sent to the env
    stored: list[float]            # values log-probs are evaluated at
    log_prob: float
    entropy: float


class Actor(nn.Module):
    """Per-agent policy: shared trunk feeding categorical and continuous heads."""

    def __init__(self, obs_dim: int, discrete: tuple[int, ...],
                 continuous: int, hidden_sizes: tuple[int, ...],
                 head_kind: str = HEAD_BETA, gaussian_std: float = 0.5):
        super().__init__()
        if head_kind not in (HEAD_BETA, HEAD_GAUSSIAN):
            raise ValueError(f"unknown head kind: {head_kind!r}")
        self.obs_dim = obs_dim
        self.head_kind = head_kind
        self.discrete_heads = [CategoricalHead(card) for card in discrete]
        if continuous > 0:
            self.continuous_head = (BetaHead(continuous)
                                    if head_kind == HEAD_BETA
                                    else ClampedGaussianHead(continuous))
        else:
            self.continuous_head = None
        out_dim = sum(h.raw_dim for h in self.discrete_heads)
        if self.continuous_head is not None:
            out_dim += self.continuous_head.raw_dim
        self.trunk = build_mlp(obs_dim, hidden_sizes, out_dim, final_scale=0.01)
        if head_kind == HEAD_GAUSSIAN and continuous > 0:
            self.log_std = nn.Parameter(
                torch.full((continuous,), float(torch.log(torch.tensor(gaussian_std))),
                           dtype=DTYPE))
        else:
            self.log_std = None

    # -- raw output slicing -------------------------------------------------

    def _split(self, raw: torch.Tensor):
        """Yield (head, raw slice) pairs along the last dim."""
        offset = 0
        for head in self.discrete_heads:
            yield head, raw[..., offset:offset + head.raw_dim]
            offset += head.raw_dim
        if self.continuous_head is not None:
            yield self.continuous_head, raw[..., offset:offset + self.continuous_head.raw_dim]

    # -- acting ---------------------------------------------------------------

    @torch.no_grad()
    def act(self, obs: torch.Tensor) -> ActionSample:
        raw = self.trunk(obs)
        discrete: list[int] = []
        continuous: list[float] = []
        stored: list[float] = []
        log_prob = torch.zeros((), dtype=DTYPE)
        entropy = torch.zeros((), dtype=DTYPE)
        for head, chunk in self._split(raw):
            if isinstance(head, CategoricalHead):
                index, lp, ent = head.sample(chunk)
                discrete.append(int(index.item()))
            elif isinstance(head, BetaHead):
                executed, kept, lp, ent = head.sample(chunk)
                continuous = [float(v) for v in executed]
                stored = [float(v) for v in kept]
            else:
                executed, kept, lp, ent = head.sample(chunk, self.log_std)
                continuous = [float(v) for v in executed]
                stored = [float(v) for v in kept]
            log_prob = log_prob + lp
            entropy = entropy + ent
        return ActionSample(discrete, continuous, stored,
                            float(log_prob), float(entropy))

    # -- scoring stored actions -------------------------------------------------

    def evaluate(self, obs: torch.Tensor, discrete: torch.Tensor,
                 stored: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """Log-prob and entropy of stored actions under the current policy.

        Args:
            obs: (batch, obs_dim)
            discrete: (batch, num_discrete_heads) integer choices
            stored: (batch, continuous_dim) stored continuous values
        """
        raw = self.trunk(obs)
        log_prob = torch.zeros(obs.shape[0], dtype=DTYPE)
        entropy = torch.zeros(obs.shape[0], dtype=DTYPE)
        disc_idx = 0
        for head, chunk in self._split(raw):
            if isinstance(head, CategoricalHead):
                lp, ent = head.log_prob(chunk, discrete[:, disc_idx])
                disc_idx += 1
            elif isinstance(head, BetaHead):
                lp, ent = head.log_prob(chunk, stored)
            else:
                lp, ent = head.log_prob(chunk, stored, self.log_std)
            log_prob = log_prob + lp
            entropy = entropy + ent
        return log_prob, entropy


class Critic(nn.Module):
    """Centralized value function over the normalized global state."""

    def __init__(self, state_dim: int, hidden_sizes: tuple[int, ...]):
        super().__init__()
        self.net = build_mlp(state_dim, hidden_sizes, 1)

    def forward(self, state: torch.Tensor) -> torch.Tensor:
        return self.net(state).squeeze(-1)


def abort_on_non_finite_grads(module: nn.Module, label: str) -> None:
    """Training must stop, with context, rather than silently diverge."""
    for name, param in module.named_parameters():
        if param.grad is not None and not torch.isfinite(param.grad).all():
            raise RuntimeError(f"non-finite gradient in {label} ({name})")
