"""Uplink radio links and the wired backhaul between edge servers.

Uplink channels are Rician-faded with distance path loss and are drawn
fresh every slot (the slot length is taken as one coherence interval).
Interference at a user's serving BS comes only from the other users that
actually transmit that slot.  The wired side tracks per-link capacities
and per-user rate allocations for relayed twin updates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class ChannelParams:
    ref_gain: float        # linear power gain at 1 m
    path_loss_exp: float
    rician_k: float        # linear line-of-sight / scatter power ratio
    noise_w: float
    bandwidth_hz: float

    def __post_init__(self):
        if self.ref_gain <= 0 or self.noise_w <= 0 or self.bandwidth_hz <= 0:
            raise ValueError("ref_gain, noise_w and bandwidth_hz must be positive")
        if self.path_loss_exp < 2.0:
            raise ValueError("path_loss_exp must be >= 2")
        if self.rician_k < 0.0:
            raise ValueError("rician_k must be >= 0")


def draw_channels(mu_positions: np.ndarray, bs_positions: np.ndarray,
                  params: ChannelParams, rng: np.random.Generator) -> np.ndarray:
    """Complex channel coefficients for every MU-BS pair, shape (K, M).

    Deterministic line-of-sight part plus circularly-symmetric unit-power
    scatter, weighted by the Rician factor; the whole coefficient is scaled
    so that E|h|^2 equals ref_gain / d^path_loss_exp.
    """
    diff = mu_positions[:, None, :] - bs_positions[None, :, :]
    dist = np.linalg.norm(diff, axis=2)
    dist = np.maximum(dist, 1.0)  # the gain model is calibrated at 1 m
    kf = params.rician_k
    los = math.sqrt(kf / (kf + 1.0))
    scatter_scale = math.sqrt(1.0 / (kf + 1.0))
    shape = dist.shape
    scatter = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) \
        / math.sqrt(2.0)
    return np.sqrt(params.ref_gain / dist ** params.path_loss_exp) \
        * (los + scatter_scale * scatter)


def sinr(k: int, gains: np.ndarray, serving: np.ndarray, powers: np.ndarray,
         transmitting: np.ndarray, params: ChannelParams) -> float:
    """Uplink SINR of user k at its serving BS.

    ``gains`` is the complex (K, M) channel matrix, ``serving`` the per-user
    serving BS index, ``powers`` the per-user transmit powers in watts and
    ``transmitting`` the mask of users actually on the air this slot.
    """
    m = int(serving[k])
    if m < 0:
        raise ValueError(f"user {k} has no serving BS")
    power_gain = np.abs(gains[:, m]) ** 2
    interference = 0.0
    for i in range(gains.shape[0]):
        if i != k and transmitting[i]:
            interference += powers[i] * power_gain[i]
    return powers[k] * power_gain[k] / (interference + params.noise_w)


def uplink_rate(k: int, gains: np.ndarray, serving: np.ndarray,
                powers: np.ndarray, transmitting: np.ndarray,
                params: ChannelParams) -> float:
    """Shannon uplink rate in bits/s at the serving BS."""
    value = sinr(k, gains, serving, powers, transmitting, params)
    return params.bandwidth_hz * math.log2(1.0 + value)


@dataclass
class WiredTopology:
    """Backhaul state: per-link capacities, per-user relay flags and the
    current per-user rate allocations.

    ``relay[i, j, k]`` is 1 when user k's update enters at server i and its
    twin lives at server j != i; at most one link is flagged per user.
    """
    capacity: np.ndarray      # (M, M) bits/s
    relay: np.ndarray         # (M, M, K) {0, 1}
    allocations: np.ndarray   # (M, M, K) bits/s

    def __post_init__(self):
        m = self.capacity.shape[0]
        if self.capacity.shape != (m, m):
            raise ValueError("capacity must be square (M, M)")
        if self.relay.shape[:2] != (m, m) or self.relay.shape != self.allocations.shape:
            raise ValueError("relay and allocations must be (M, M, K)")
        per_user = self.relay.reshape(m * m, -1).sum(axis=0)
        if np.any(per_user > 1):
            raise ValueError("a user may relay over at most one link")
        if np.any(self.relay * np.eye(m, dtype=int)[:, :, None]):
            raise ValueError("relay flags on a server's own diagonal are meaningless")


def relay_pattern(serving: np.ndarray, deployment: np.ndarray,
                  needs_link: np.ndarray, num_bss: int) -> np.ndarray:
    """(M, M, K) relay flags derived from associations and twin placement.

    A user occupies link (i, j) exactly when it is served by i, its twin
    sits at j != i, and ``needs_link`` marks it as syncing this slot.  The
    flags are never free decisions.
    """
    k = serving.shape[0]
    flags = np.zeros((num_bss, num_bss, k), dtype=np.int8)
    for u in range(k):
        i = int(serving[u])
        j = int(deployment[u])
        if needs_link[u] and i >= 0 and i != j:
            flags[i, j, u] = 1
    return flags


def project_wired_allocations(raw: np.ndarray, capacity: np.ndarray,
                              relay: np.ndarray) -> np.ndarray:
    """Scale requested wired rates so each link stays within capacity.

    ``raw`` holds nonnegative requested rates (M, M, K); entries without a
    relay flag are dropped.  On every link whose total demand exceeds its
    capacity, all allocations shrink by the same factor, preserving
    proportions; otherwise they pass through unchanged.
    """
    if np.any(raw < 0):
        raise ValueError("requested wired rates must be >= 0")
    alloc = raw * relay
    totals = alloc.sum(axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(totals > capacity, capacity / totals, 1.0)
    scale = np.where(np.isfinite(scale), scale, 1.0)
    return alloc * scale[:, :, None]


def wired_rate(k: int, topology: WiredTopology) -> float:
    """Total wired rate serving user k's relayed update (0 if not relayed)."""
    return float(np.sum(topology.relay[:, :, k] * topology.allocations[:, :, k]))
