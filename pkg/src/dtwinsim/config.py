"""Run configuration for the digital-twin network simulator.

A single dataclass holds every model parameter plus the implementation
knobs (mobility noise, path-loss exponent, BS layout, seed).  Values
quoted in dB / dBW in the literature are stored in dB here and converted
to linear scale once, at load time, through the derived properties.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class NetworkConfig:
    # population and clocks
    num_mus: int = 30                 # mobile users K
    num_bss: int = 5                  # base stations / edge servers M
    frame_slots: int = 100            # slots per frame T
    episode_frames: int = 50          # frames per episode Q
    slot_s: float = 0.05              # slot length in seconds

    # radio and backhaul
    bandwidth_hz: float = 1.0e7       # uplink bandwidth B
    wired_rate_bps: float = 1.0e7     # capacity of each inter-BS link
    p_max_w: float = 0.5              # MU transmit power ceiling
    ref_gain_db: float = -30.0        # channel power gain at 1 m, in dB
    rician_k: float = 10.0            # Rician factor, linear
    noise_dbw: float = -90.0          # receiver noise power, in dBW
    path_loss_exp: float = 2.0

    # edge compute
    f_max_hz: float = 1.0e10          # per-server CPU frequency ceiling

    # synchronization workload
    request_prob: float = 0.5         # per-slot request probability lambda
    data_bits_min: float = 15000.0
    data_bits_max: float = 25000.0
    cycles_per_bit_min: float = 550.0
    cycles_per_bit_max: float = 700.0
    tau_frac_min: float = 0.5         # deadline as a fraction of the slot
    tau_frac_max: float = 1.0         # exclusive upper bound

    # migration
    migration_slots: int = 10         # blackout length G at a frame boundary

    # reliability bookkeeping
    fail_tolerance: float = 0.2       # long-run failure-ratio budget epsilon
    queue_weight: float = 1.0         # queue term weight eta in the slot cost
    reward_scale: float = 100.0       # nu applied to the global reward

    # service area and mobility
    area_width_m: float = 1000.0
    speed_min_mps: float = 2.0        # per-MU mean speed drawn from this range
    speed_max_mps: float = 10.0
    speed_memory: float = 0.9         # AR(1) weight on the previous speed
    heading_memory: float = 0.9
    mean_heading_rad: float = 0.0
    speed_noise_mean: float = 0.0
    speed_noise_std: float = 1.0
    heading_noise_mean: float = 0.0
    heading_noise_std: float = 0.3

    # deterministic BS layout; None selects the built-in center+ring layout
    bs_positions: list | None = None

    seed: int = 0

    def __post_init__(self):
        if self.num_mus < 1 or self.num_bss < 1:
            raise ValueError("need at least one MU and one BS")
        if self.frame_slots < 1 or self.episode_frames < 1:
            raise ValueError("frame_slots and episode_frames must be >= 1")
        if self.slot_s <= 0:
            raise ValueError("slot_s must be positive")
        for name in ("bandwidth_hz", "wired_rate_bps", "p_max_w", "f_max_hz"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.request_prob <= 1.0:
            raise ValueError("request_prob must lie in [0, 1]")
        if not 0.0 < self.fail_tolerance < 1.0:
            raise ValueError("fail_tolerance must lie in (0, 1)")
        if self.queue_weight < 0 or self.reward_scale <= 0:
            raise ValueError("queue_weight must be >= 0, reward_scale > 0")
        if self.path_loss_exp < 2.0:
            raise ValueError("path_loss_exp must be >= 2")
        if self.rician_k < 0:
            raise ValueError("rician_k must be >= 0 (linear scale)")
        if not 0 <= self.migration_slots < self.frame_slots:
            raise ValueError("migration_slots must satisfy 0 <= G < frame_slots")
        if not 0.0 < self.tau_frac_min <= self.tau_frac_max <= 1.0:
            raise ValueError("deadline fractions must satisfy 0 < min <= max <= 1")
        if not 0.0 < self.data_bits_min <= self.data_bits_max:
            raise ValueError("data_bits range must be positive and ordered")
        if not 0.0 < self.cycles_per_bit_min <= self.cycles_per_bit_max:
            raise ValueError("cycles_per_bit range must be positive and ordered")
        if not 0.0 < self.speed_min_mps <= self.speed_max_mps:
            raise ValueError("speed range must be positive and ordered")
        if self.area_width_m <= 0:
            raise ValueError("area_width_m must be positive")
        for name in ("speed_memory", "heading_memory"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        for name in ("speed_noise_std", "heading_noise_std"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.bs_positions is not None:
            arr = np.asarray(self.bs_positions, dtype=float)
            if arr.shape != (self.num_bss, 2):
                raise ValueError("bs_positions must be a (num_bss, 2) coordinate list")
            if np.any(arr < 0) or np.any(arr > self.area_width_m):
                raise ValueError("bs_positions must lie inside the service area")

    # ---- derived, linear-scale quantities -------------------------------

    @property
    def ref_gain_lin(self) -> float:
        """Reference channel power gain at 1 m, linear."""
        return 10.0 ** (self.ref_gain_db / 10.0)

    @property
    def noise_w(self) -> float:
        """Receiver noise power in watts."""
        return 10.0 ** (self.noise_dbw / 10.0)

    @property
    def episode_slots(self) -> int:
        return self.frame_slots * self.episode_frames

    @property
    def num_agents(self) -> int:
        """MU agents + BS agents + one control center."""
        return self.num_mus + self.num_bss + 1

    @property
    def cost_normalizer(self) -> float:
        """Energy divisor Q*K*T of the per-slot cost."""
        return float(self.episode_frames * self.num_mus * self.frame_slots)

    def bs_position_array(self) -> np.ndarray:
        """Deterministic (M, 2) BS coordinates in meters."""
        if self.bs_positions is not None:
            return np.asarray(self.bs_positions, dtype=float)
        w = self.area_width_m
        center = np.array([w / 2.0, w / 2.0])
        if self.num_bss == 1:
            return center[None, :]
        # one server at the center, the rest spread on a ring
        angles = 2.0 * math.pi * np.arange(self.num_bss - 1) / (self.num_bss - 1)
        ring = center + (w / 3.0) * np.stack([np.cos(angles), np.sin(angles)], axis=1)
        return np.vstack([center[None, :], ring])

    # ---- (de)serialization ----------------------------------------------

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "NetworkConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)


def load_config(path: str | Path) -> NetworkConfig:
    """Load a JSON config file; missing keys fall back to defaults,
    unknown keys are rejected."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("config file must contain a JSON object")
    return NetworkConfig.from_dict(data)


def save_config(config: NetworkConfig, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
