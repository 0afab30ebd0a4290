"""Gauss-Markov mobility for mobile users in a square service area.

Speed and heading follow independent AR(1) recursions around their
long-run means; the position integrates the *previous* slot's velocity,
so a slot's displacement is decided before the new speed/heading noise
is drawn.  Boundary contact mirrors the position about the violated
wall and reflects the heading across that axis, leaving speed intact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class MobilityParams:
    """Recursion parameters shared by a population of users.

    ``mean_speed`` may be a scalar or a per-user array; memory weights of 1
    freeze the respective process, 0 makes it jump straight to its mean
    plus noise.
    """
    mean_speed: np.ndarray | float
    mean_heading: float = 0.0
    speed_memory: float = 0.9
    heading_memory: float = 0.9
    speed_noise_mean: float = 0.0
    speed_noise_std: float = 1.0
    heading_noise_mean: float = 0.0
    heading_noise_std: float = 0.3
    slot_s: float = 0.05
    area_width_m: float = 1000.0

    def __post_init__(self):
        if not 0.0 <= self.speed_memory <= 1.0:
            raise ValueError("speed_memory must lie in [0, 1]")
        if not 0.0 <= self.heading_memory <= 1.0:
            raise ValueError("heading_memory must lie in [0, 1]")
        if self.speed_noise_std < 0 or self.heading_noise_std < 0:
            raise ValueError("noise std-devs must be >= 0")
        if self.slot_s <= 0 or self.area_width_m <= 0:
            raise ValueError("slot_s and area_width_m must be positive")
        if np.any(np.asarray(self.mean_speed) < 0):
            raise ValueError("mean_speed must be >= 0")


@dataclass
class MobilityState:
    position: np.ndarray  # (K, 2) meters, inside [0, W]^2
    speed: np.ndarray     # (K,) m/s, >= 0
    heading: np.ndarray   # (K,) radians


def init_mobility(params: MobilityParams, rng: np.random.Generator,
                  count: int) -> MobilityState:
    """Uniform positions, speeds at their per-user means, uniform headings."""
    position = rng.uniform(0.0, params.area_width_m, size=(count, 2))
    speed = np.broadcast_to(np.asarray(params.mean_speed, dtype=float),
                            (count,)).copy()
    heading = rng.uniform(0.0, 2.0 * math.pi, size=count)
    return MobilityState(position=position, speed=speed, heading=heading)


def step_mobility(state: MobilityState, params: MobilityParams,
                  rng: np.random.Generator) -> MobilityState:
    """Advance one slot: move with the old velocity, then refresh it."""
    dt = params.slot_s
    position = state.position + dt * state.speed[:, None] * np.stack(
        [np.cos(state.heading), np.sin(state.heading)], axis=1)

    k = state.speed.shape[0]
    mu_v = params.speed_memory
    mu_t = params.heading_memory
    noise_v = rng.normal(params.speed_noise_mean, params.speed_noise_std, size=k)
    noise_t = rng.normal(params.heading_noise_mean, params.heading_noise_std, size=k)
    speed = (mu_v * state.speed
             + (1.0 - mu_v) * np.asarray(params.mean_speed, dtype=float)
             + math.sqrt(1.0 - mu_v * mu_v) * noise_v)
    speed = np.maximum(speed, 0.0)  # physical speeds only
    heading = (mu_t * state.heading
               + (1.0 - mu_t) * params.mean_heading
               + math.sqrt(1.0 - mu_t * mu_t) * noise_t)

    position, heading = _reflect(position, heading, params.area_width_m)
    return MobilityState(position=position, speed=speed, heading=heading)


def _reflect(position: np.ndarray, heading: np.ndarray,
             width: float) -> tuple[np.ndarray, np.ndarray]:
    """Mirror positions that left the area and flip headings accordingly.

    A slot's displacement is tiny against the area width, but the loop
    makes the treatment exact for arbitrary overshoot.
    """
    position = position.copy()
    heading = heading.copy()
    for _ in range(64):
        out_lo_x = position[:, 0] < 0.0
        out_hi_x = position[:, 0] > width
        out_lo_y = position[:, 1] < 0.0
        out_hi_y = position[:, 1] > width
        if not (out_lo_x.any() or out_hi_x.any()
                or out_lo_y.any() or out_hi_y.any()):
            break
        position[out_lo_x, 0] = -position[out_lo_x, 0]
        position[out_hi_x, 0] = 2.0 * width - position[out_hi_x, 0]
        flip_x = out_lo_x | out_hi_x
        heading[flip_x] = math.pi - heading[flip_x]
        position[out_lo_y, 1] = -position[out_lo_y, 1]
        position[out_hi_y, 1] = 2.0 * width - position[out_hi_y, 1]
        flip_y = out_lo_y | out_hi_y
        heading[flip_y] = -heading[flip_y]
    return position, heading
