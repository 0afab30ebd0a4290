"""Distribution heads: closed-form densities, finite-difference gradients,
sampling statistics, and hard action bounds."""
import math

import numpy as np
import pytest
import torch

from dttrainer.heads import (EDGE_NUDGE, BetaHead, CategoricalHead,
                             ClampedGaussianHead, beta_log_prob,
                             beta_parameters)

DT = torch.float64


# -- closed-form density values -------------------------------------------------

def test_uniform_beta_density_is_one():
    one = torch.tensor(1.0, dtype=DT)
    for x in (0.05, 0.3, 0.5, 0.71, 0.99):
        lp = beta_log_prob(one, one, torch.tensor(x, dtype=DT))
        assert abs(float(lp)) < 1e-12


def test_symmetric_beta_two_two_at_half():
    # f(x) = 6 x (1 - x) so f(0.5) = 1.5
    lp = beta_log_prob(torch.tensor(2.0, dtype=DT), torch.tensor(2.0, dtype=DT),
                       torch.tensor(0.5, dtype=DT))
    assert abs(float(lp.exp()) - 1.5) < 1e-12


def test_beta_three_one_sample_mean():
    # mean 3/4, variance 3/80; a million draws pin the mean to ~2e-4
    torch.manual_seed(99)
    n = 1_000_000
    draws = torch.distributions.Beta(
        torch.tensor(3.0, dtype=DT), torch.tensor(1.0, dtype=DT)).sample((n,))
    sigma_mean = math.sqrt((3.0 / 80.0) / n)
    assert abs(float(draws.mean()) - 0.75) < 3.0 * sigma_mean


# -- gradients vs central finite differences -------------------------------------

def central_difference(f, x0: float, h: float = 1e-5) -> float:
    return (f(x0 + h) - f(x0 - h)) / (2.0 * h)


def test_log_prob_gradients_match_finite_differences():
    rng = np.random.default_rng(2026)
    worst = 0.0
    for _ in range(100):
        a0 = float(rng.uniform(1.05, 5.0))
        b0 = float(rng.uniform(1.05, 5.0))
        x0 = float(rng.uniform(0.05, 0.95))

        a = torch.tensor(a0, dtype=DT, requires_grad=True)
        b = torch.tensor(b0, dtype=DT, requires_grad=True)
        x = torch.tensor(x0, dtype=DT, requires_grad=True)
        beta_log_prob(a, b, x).backward()

        fd_a = central_difference(
            lambda v: float(beta_log_prob(torch.tensor(v, dtype=DT),
                                          torch.tensor(b0, dtype=DT),
                                          torch.tensor(x0, dtype=DT))), a0)
        fd_b = central_difference(
            lambda v: float(beta_log_prob(torch.tensor(a0, dtype=DT),
                                          torch.tensor(v, dtype=DT),
                                          torch.tensor(x0, dtype=DT))), b0)
        fd_x = central_difference(
            lambda v: float(beta_log_prob(torch.tensor(a0, dtype=DT),
                                          torch.tensor(b0, dtype=DT),
                                          torch.tensor(v, dtype=DT))), x0)

        for auto, fd in ((float(a.grad), fd_a), (float(b.grad), fd_b),
                         (float(x.grad), fd_x)):
            rel = abs(auto - fd) / max(abs(fd), 1e-8)
            worst = max(worst, rel)
    assert worst < 1e-4


# -- parameter mapping ------------------------------------------------------------

def test_beta_parameters_never_fall_below_one():
    # softplus underflows to exactly zero for very negative inputs, so the
    # floor is inclusive there and strict on any realistic activation range
    raw = torch.linspace(-50.0, 50.0, 64, dtype=DT)
    shape_a, shape_b = beta_parameters(raw)
    assert bool((shape_a >= 1.0).all())
    assert bool((shape_b >= 1.0).all())
    moderate = torch.linspace(-10.0, 10.0, 64, dtype=DT)
    shape_a, shape_b = beta_parameters(moderate)
    assert bool((shape_a > 1.0).all())
    assert bool((shape_b > 1.0).all())


def test_beta_parameters_reject_odd_width():
    with pytest.raises(ValueError):
        beta_parameters(torch.zeros(5, dtype=DT))


# -- sampling behavior ------------------------------------------------------------

def test_beta_head_stores_the_executed_action():
    torch.manual_seed(0)
    head = BetaHead(dim=3)
    raw = torch.randn(head.raw_dim, dtype=DT)
    executed, stored, log_prob, entropy = head.sample(raw)
    assert torch.equal(executed, stored)
    replay_lp, replay_ent = head.log_prob(raw, stored)
    assert abs(float(replay_lp) - float(log_prob)) < 1e-12
    assert abs(float(replay_ent) - float(entropy)) < 1e-12


def test_action_bounds_hold_over_many_samples():
    torch.manual_seed(1)
    n = 100_000
    lo, hi = EDGE_NUDGE, 1.0 - EDGE_NUDGE

    beta = BetaHead(dim=1)
    executed, _, _, _ = beta.sample(torch.zeros(n, 2, dtype=DT))
    assert bool((executed >= lo).all()) and bool((executed <= hi).all())

    gauss = ClampedGaussianHead(dim=1)
    wide = torch.log(torch.full((1,), 5.0, dtype=DT))  # huge std forces clamping
    executed, stored, _, _ = gauss.sample(torch.zeros(n, 1, dtype=DT), wide)
    assert bool((executed >= lo).all()) and bool((executed <= hi).all())
    assert torch.equal(executed, stored.clamp(lo, hi))
    assert bool((stored < lo).any()) and bool((stored > hi).any())

    cat = CategoricalHead(cardinality=4)
    index, _, _ = cat.sample(torch.zeros(n, 4, dtype=DT))
    assert bool((index >= 0).all()) and bool((index <= 3).all())


def test_gaussian_head_collapses_to_mean_at_tiny_std():
    torch.manual_seed(2)
    head = ClampedGaussianHead(dim=4)
    raw = torch.randn(4, dtype=DT)
    tiny = torch.full((4,), -30.0, dtype=DT)  # std = e^-30
    executed, _, _, _ = head.sample(raw, tiny)
    assert float((executed - torch.sigmoid(raw)).abs().max()) < 1e-9


def test_gaussian_log_prob_scored_at_the_unclamped_draw():
    torch.manual_seed(3)
    head = ClampedGaussianHead(dim=2)
    raw = torch.randn(2, dtype=DT)
    log_std = torch.zeros(2, dtype=DT)
    _, stored, log_prob, _ = head.sample(raw, log_std)
    dist = torch.distributions.Normal(torch.sigmoid(raw), log_std.exp())
    assert abs(float(dist.log_prob(stored).sum()) - float(log_prob)) < 1e-12


def test_categorical_log_prob_matches_softmax():
    logits = torch.tensor([0.3, -1.2, 2.0], dtype=DT)
    head = CategoricalHead(cardinality=3)
    for k in range(3):
        lp, _ = head.log_prob(logits, torch.tensor(k))
        expected = float(torch.log_softmax(logits, dim=-1)[k])
        assert abs(float(lp) - expected) < 1e-12
