"""Per-slot twin synchronization: workloads, delays, failures, energy.

Each slot a user raises a sync request with fixed probability; the
request carries a payload size, a compute density and a hard deadline
shorter than the slot.  Serving it takes an uplink leg, an optional
wired relay leg when the twin lives away from the serving BS, and a
compute leg at the hosting server.  A request fails when its twin is
mid-migration or the end-to-end delay overruns the deadline.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class SyncRequests:
    """Slot workload for all users; inactive entries are zeroed."""
    active: np.ndarray           # (K,) bool
    data_bits: np.ndarray        # (K,) payload size
    cycles_per_bit: np.ndarray   # (K,) compute density
    deadline_s: np.ndarray       # (K,) hard deadline, < slot length


def draw_requests(count: int, request_prob: float,
                  data_bits_range: tuple[float, float],
                  cycles_range: tuple[float, float],
                  deadline_frac_range: tuple[float, float],
                  slot_s: float, rng: np.random.Generator) -> SyncRequests:
    """Draw one slot of requests.

    Payloads, densities and deadlines are drawn for every user so the
    random stream advances identically regardless of who turns out
    active; inactive users are then zeroed.
    """
    active = rng.random(count) < request_prob
    data_bits = rng.uniform(data_bits_range[0], data_bits_range[1], size=count)
    cycles = rng.uniform(cycles_range[0], cycles_range[1], size=count)
    deadline = rng.uniform(deadline_frac_range[0], deadline_frac_range[1],
                           size=count) * slot_s
    data_bits[~active] = 0.0
    cycles[~active] = 0.0
    deadline[~active] = 0.0
    return SyncRequests(active=active, data_bits=data_bits,
                        cycles_per_bit=cycles, deadline_s=deadline)


def sync_delay(data_bits: float, cycles_per_bit: float, uplink_bps: float,
               wired_bps: float, compute_hz: float, colocated: bool) -> float:
    """End-to-end delay of one update in seconds.

    Uplink leg plus compute leg; a relay leg is added when the twin is
    not co-located with the serving BS.  A zero rate or frequency on any
    needed leg makes the update impossible: +inf.
    """
    if data_bits <= 0.0:
        return 0.0
    if uplink_bps <= 0.0 or compute_hz <= 0.0:
        return math.inf
    delay = data_bits / uplink_bps
    if not colocated:
        if wired_bps <= 0.0:
            return math.inf
        delay += data_bits / wired_bps
    delay += data_bits * cycles_per_bit / compute_hz
    return delay


def failure_indicator(active: bool, blocked: bool, delay_s: float,
                      deadline_s: float) -> int:
    """1 when an active request cannot be honored this slot.

    Requests raised while the twin is migrating fail outright; otherwise
    a request fails exactly when its delay overruns the deadline.
    """
    if not active:
        return 0
    if blocked:
        return 1
    return 1 if delay_s > deadline_s else 0


def project_compute(raw: np.ndarray, f_max_hz: float | np.ndarray) -> np.ndarray:
    """Scale requested CPU shares so each server stays within its budget.

    ``raw`` holds nonnegative requested frequencies (M, K).  Servers whose
    total demand exceeds the budget shrink all their shares by a common
    factor, preserving proportions.
    """
    if np.any(raw < 0):
        raise ValueError("requested compute shares must be >= 0")
    totals = raw.sum(axis=1)
    budget = np.broadcast_to(np.asarray(f_max_hz, dtype=float), totals.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(totals > budget, budget / totals, 1.0)
    scale = np.where(np.isfinite(scale), scale, 1.0)
    return raw * scale[:, None]


def transmit_energy(power_w: float, data_bits: float, uplink_bps: float,
                    slot_s: float) -> float:
    """Uplink energy of one update: power times airtime.

    A dead link (zero rate) still burns the slot: the user keys the
    transmitter for the whole slot without completing the upload.
    """
    if data_bits <= 0.0:
        return 0.0
    if uplink_bps <= 0.0:
        return power_w * slot_s
    return power_w * data_bits / uplink_bps
