"""Virtual reliability queues and their frame-drift bounds.

Each user carries a virtual queue that absorbs sync failures and drains
by the tolerated failure ratio every slot; keeping the queue mean-rate
stable enforces the long-run reliability budget.  The quadratic
Lyapunov drift of a queue over one frame admits two closed-form upper
bounds (one slot-coupled, one frame-start decoupled) that the simulator
can verify empirically against sampled traces.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def queue_step(backlog, fail, tolerance):
    """One slot of the virtual queue: grow by the failure indicator,
    drain by the tolerance, never below zero.  Works element-wise."""
    return np.maximum(backlog + fail - tolerance, 0.0)


def per_slot_cost(energy_j, backlog_frame_start, fail, tolerance,
                  queue_weight, normalizer):
    """Weighted per-slot cost: normalized transmit energy plus the
    queue-weighted failure surplus.  The backlog is the value frozen at
    the frame start, not the running one.  Works element-wise."""
    return energy_j / normalizer \
        + queue_weight * backlog_frame_start * (fail - tolerance)


def drift_constant_slot(request_prob: float, tolerance: float) -> float:
    """Constant of the slot-coupled drift bound (per slot)."""
    return 0.5 * (request_prob + tolerance * tolerance)


def drift_constant_frame(request_prob: float, tolerance: float,
                         frame_slots: int) -> float:
    """Constant of the frame-start-decoupled drift bound (per slot).

    Pays an extra per-slot term for replacing the running backlog with
    its frame-start value; never smaller than the slot-coupled constant.
    """
    extra = (frame_slots - 1) * ((1.0 - tolerance) * request_prob
                                 + tolerance * tolerance) / 2.0
    return drift_constant_slot(request_prob, tolerance) + extra


def simulate_queue(fails: np.ndarray, tolerance: float,
                   start: float = 0.0) -> np.ndarray:
    """Backlog trajectory of length n+1 driven by a failure sequence.

    Applies the literal per-slot recursion so the trajectory is
    bit-identical to what the slot loop would produce.
    """
    fails = np.asarray(fails, dtype=float).ravel()
    out = np.empty(fails.shape[0] + 1)
    backlog = float(start)
    out[0] = backlog
    for i, fail in enumerate(fails):
        backlog = max(backlog + fail - tolerance, 0.0)
        out[i + 1] = backlog
    return out


@dataclass
class DriftBoundReport:
    """Empirical check of the two frame-drift bounds on a queue trace."""
    frames: int
    frame_slots: int
    request_prob: float
    tolerance: float
    constant_slot: float          # per-slot constant of the coupled bound
    constant_frame: float         # per-slot constant of the decoupled bound
    mean_drift: float
    mean_bound_slot: float
    mean_bound_frame: float
    margin_slot_sigma: float      # (bound_slot - drift) in units of its SE
    margin_frame_sigma: float     # (bound_frame - bound_slot) in units of its SE
    envelope_violations: int
    per_frame_drift: np.ndarray = field(repr=False)
    per_frame_bound_slot: np.ndarray = field(repr=False)
    per_frame_bound_frame: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "frames": self.frames,
            "frame_slots": self.frame_slots,
            "request_prob": self.request_prob,
            "tolerance": self.tolerance,
            "constant_slot": self.constant_slot,
            "constant_frame": self.constant_frame,
            "mean_drift": self.mean_drift,
            "mean_bound_slot": self.mean_bound_slot,
            "mean_bound_frame": self.mean_bound_frame,
            "margin_slot_sigma": self.margin_slot_sigma,
            "margin_frame_sigma": self.margin_frame_sigma,
            "envelope_violations": self.envelope_violations,
        }


def check_envelope(backlog: np.ndarray, frame_slots: int,
                   tolerance: float) -> int:
    """Count violations of the per-frame backlog envelope.

    Within a frame the backlog can drop at most ``tolerance`` per slot
    and climb at most ``1 - tolerance`` per slot relative to its
    frame-start value; the bound is pathwise, so any violation is an
    implementation bug, not noise.  A small float slack absorbs
    accumulated rounding.
    """
    backlog = np.asarray(backlog, dtype=float).ravel()
    slots = backlog.shape[0] - 1
    frames = slots // frame_slots
    slack = 1e-9
    violations = 0
    for q in range(frames):
        start = backlog[q * frame_slots]
        for j in range(frame_slots + 1):
            value = backlog[q * frame_slots + j]
            lo = start - j * tolerance
            hi = start + j * (1.0 - tolerance)
            if value < lo - slack or value > hi + slack:
                violations += 1
    return violations


def verify_drift_bounds(fails: np.ndarray, request_prob: float,
                        tolerance: float, start: float = 0.0) -> DriftBoundReport:
    """Measure per-frame drift against both closed-form bounds.

    ``fails`` has shape (frames, frame_slots) with {0,1} entries; the
    queue is chained across frames starting from ``start``.  The bounds
    hold in expectation, so the report carries paired standard-error
    margins rather than pathwise guarantees; the envelope check, by
    contrast, is pathwise.
    """
    fails = np.asarray(fails, dtype=float)
    if fails.ndim != 2:
        raise ValueError("fails must be (frames, frame_slots)")
    frames, frame_slots = fails.shape
    backlog = simulate_queue(fails.ravel(), tolerance, start=start)

    b_slot = drift_constant_slot(request_prob, tolerance)
    b_frame = drift_constant_frame(request_prob, tolerance, frame_slots)

    drift = np.empty(frames)
    bound_slot = np.empty(frames)
    bound_frame = np.empty(frames)
    for q in range(frames):
        lo = q * frame_slots
        hi = lo + frame_slots
        y_start = backlog[lo]
        y_end = backlog[hi]
        surplus = fails[q] - tolerance
        drift[q] = 0.5 * (y_end * y_end - y_start * y_start)
        bound_slot[q] = b_slot * frame_slots + float(
            np.dot(backlog[lo:hi], surplus))
        bound_frame[q] = b_frame * frame_slots + y_start * float(surplus.sum())

    def _margin(upper: np.ndarray, lower: np.ndarray) -> float:
        gap = upper - lower
        se = gap.std(ddof=1) / np.sqrt(frames) if frames > 1 else 0.0
        return float(gap.mean() / se) if se > 0 else np.inf

    return DriftBoundReport(
        frames=frames,
        frame_slots=frame_slots,
        request_prob=request_prob,
        tolerance=tolerance,
        constant_slot=b_slot,
        constant_frame=b_frame,
        mean_drift=float(drift.mean()),
        mean_bound_slot=float(bound_slot.mean()),
        mean_bound_frame=float(bound_frame.mean()),
        margin_slot_sigma=_margin(bound_slot, drift),
        margin_frame_sigma=_margin(bound_frame, bound_slot),
        envelope_violations=check_envelope(backlog, frame_slots, tolerance),
        per_frame_drift=drift,
        per_frame_bound_slot=bound_slot,
        per_frame_bound_frame=bound_frame,
    )


def stability_diagnostic(fails: np.ndarray, tolerance: float,
                         tail_fraction: float = 0.25) -> float:
    """Largest backlog-to-time ratio over the trailing part of a trace.

    Converges to zero exactly when the queue is mean-rate stable, i.e.
    the long-run failure ratio stays within the tolerance.
    """
    backlog = simulate_queue(np.asarray(fails).ravel(), tolerance)
    n = backlog.shape[0] - 1
    lo = max(1, int(n * (1.0 - tail_fraction)))
    idx = np.arange(lo, n + 1)
    return float(np.max(backlog[idx] / idx))
