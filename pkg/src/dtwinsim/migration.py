"""Frame-level twin placement and the two-timescale clock.

Twin placement can only change at frame boundaries.  When a twin moves,
its user enters a blackout window covering the first G slots of the new
frame: no synchronization happens and every request raised inside the
window counts as failed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class TwoTimescaleClock:
    """Slot counter with frame bookkeeping."""
    frame_slots: int
    episode_frames: int
    slot: int = 0

    def __post_init__(self):
        if self.frame_slots < 1 or self.episode_frames < 1:
            raise ValueError("frame_slots and episode_frames must be >= 1")
        if self.slot < 0:
            raise ValueError("slot must be >= 0")

    @property
    def frame(self) -> int:
        return self.slot // self.frame_slots

    @property
    def is_frame_boundary(self) -> bool:
        return self.slot % self.frame_slots == 0

    @property
    def total_slots(self) -> int:
        return self.frame_slots * self.episode_frames

    @property
    def done(self) -> bool:
        return self.slot >= self.total_slots

    def advance(self) -> None:
        self.slot += 1


@dataclass
class DeploymentMap:
    """Current twin placement plus the per-user blackout windows.

    ``window_end`` holds the first slot index at which a user is free
    again; users that did not move in the last frame carry a window that
    ended before it began.
    """
    server: np.ndarray       # (K,) int, hosting server per user
    window_end: np.ndarray   # (K,) int, exclusive blackout end (absolute slot)

    def __post_init__(self):
        if self.server.shape != self.window_end.shape:
            raise ValueError("server and window_end must have equal shape")


def initial_deployment(mu_positions: np.ndarray,
                       bs_positions: np.ndarray) -> np.ndarray:
    """Place each twin at the server closest to its user."""
    diff = mu_positions[:, None, :] - bs_positions[None, :, :]
    return np.argmin(np.linalg.norm(diff, axis=2), axis=1).astype(int)


def apply_deployment(current: DeploymentMap, decision: np.ndarray,
                     slot: int, frame_slots: int,
                     migration_slots: int) -> DeploymentMap:
    """Adopt a placement decision at a frame boundary.

    Users whose hosting server changes get a blackout window spanning
    the first ``migration_slots`` slots of the new frame; everyone else
    keeps an already-expired window.  Calling this off-boundary is a
    programming error.
    """
    if slot % frame_slots != 0:
        raise ValueError(f"placement can only change at frame boundaries, got slot {slot}")
    decision = np.asarray(decision, dtype=int)
    if decision.shape != current.server.shape:
        raise ValueError("decision must cover every user")
    moved = decision != current.server
    window_end = np.where(moved, slot + migration_slots, slot).astype(int)
    return DeploymentMap(server=decision.copy(), window_end=window_end)


def is_blocked(deployment: DeploymentMap, k: int, slot: int) -> bool:
    """True while user k's twin is still migrating at this slot."""
    return slot < int(deployment.window_end[k])


def blocked_mask(deployment: DeploymentMap, slot: int) -> np.ndarray:
    """Vectorized blackout mask over all users."""
    return slot < deployment.window_end
