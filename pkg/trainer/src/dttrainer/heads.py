"""Policy output heads: Beta, clamped Gaussian, and categorical.

Continuous actions live on (0, 1). The Beta head keeps samples inside the
open interval by construction; the Gaussian benchmark samples on the whole
real line, executes the clamped value, and scores the unclamped draw — the
boundary-probability-mass bias the Beta head exists to avoid.
"""
from __future__ import annotations

import torch
import torch.nn.functional as F
from torch.distributions import Beta, Categorical, Normal

# Executed continuous actions stay inside [EDGE_NUDGE, 1 - EDGE_NUDGE] so
# every log-density stays finite.
EDGE_NUDGE = 1e-6


def beta_parameters(raw: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    """Map raw network outputs to Beta shape pairs, both strictly > 1.

    The +1 offset keeps the density unimodal with mass away from the
    boundaries, avoiding edge-seeking early policies.
    """
    if raw.shape[-1] % 2:
        raise ValueError("Beta head needs an even number of raw outputs")
    half = raw.shape[-1] // 2
    return F.softplus(raw[..., :half]) + 1.0, F.softplus(raw[..., half:]) + 1.0


def beta_log_prob(shape_a: torch.Tensor, shape_b: torch.Tensor,
                  value: torch.Tensor) -> torch.Tensor:
    """Log-density of a Beta distribution, differentiable in both shapes."""
    return Beta(shape_a, shape_b).log_prob(value)


class BetaHead:
    """Beta distribution per continuous dim, parameterized by 2*dim raws."""

    def __init__(self, dim: int):
        self.dim = dim
        self.raw_dim = 2 * dim

    def sample(self, raw: torch.Tensor):
        """Draw actions; returns (executed, stored, log_prob, entropy).

        For this head the stored value is the executed one: the ratio at the
        first update epoch is exactly 1.
        """
        shape_a, shape_b = beta_parameters(raw)
        dist = Beta(shape_a, shape_b)
        value = dist.sample().clamp(EDGE_NUDGE, 1.0 - EDGE_NUDGE)
        log_prob = dist.log_prob(value).sum(-1)
        entropy = dist.entropy().sum(-1)
        return value, value, log_prob, entropy

    def log_prob(self, raw: torch.Tensor, stored: torch.Tensor):
        shape_a, shape_b = beta_parameters(raw)
        dist = Beta(shape_a, shape_b)
        return dist.log_prob(stored).sum(-1), dist.entropy().sum(-1)


class ClampedGaussianHead:
    """Benchmark head: Gaussian around sigmoid(raw), executed clamped.

    The stored value is the unclamped draw; log-probs are evaluated there,
    both at collection and at update time, so ratios stay consistent while
    the executed action respects the env bounds.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self.raw_dim = dim

    def sample(self, raw: torch.Tensor, log_std: torch.Tensor):
        mean = torch.sigmoid(raw)
        dist = Normal(mean, log_std.exp())
        drawn = dist.sample()
        executed = drawn.clamp(EDGE_NUDGE, 1.0 - EDGE_NUDGE)
        log_prob = dist.log_prob(drawn).sum(-1)
        entropy = dist.entropy().sum(-1)
        return executed, drawn, log_prob, entropy

    def log_prob(self, raw: torch.Tensor, stored: torch.Tensor,
                 log_std: torch.Tensor):
        dist = Normal(torch.sigmoid(raw), log_std.exp())
        return dist.log_prob(stored).sum(-1), dist.entropy().sum(-1)


class CategoricalHead:
    """One discrete choice from raw logits."""

    def __init__(self, cardinality: int):
        self.cardinality = cardinality
        self.raw_dim = cardinality

    def sample(self, logits: torch.Tensor):
        dist = Categorical(logits=logits)
        index = dist.sample()
        return index, dist.log_prob(index), dist.entropy()

    def log_prob(self, logits: torch.Tensor, index: torch.Tensor):
        dist = Categorical(logits=logits)
        return dist.log_prob(index), dist.entropy()
