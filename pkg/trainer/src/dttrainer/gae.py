"""Generalized advantage estimation over one finished episode."""
from __future__ import annotations

import numpy as np


def compute_gae(rewards, values, discount: float, decay: float,
                terminal_value: float = 0.0) -> np.ndarray:
    """Exponentially weighted sum of one-step TD errors.

    ``advantage[n] = sum_l (discount*decay)^l * delta[n+l]`` with
    ``delta[n] = rewards[n] + discount*V[n+1] - V[n]`` and the value after
    the last step fixed to ``terminal_value`` (0 at an episode end).

    Args:
        rewards: per-step rewards, length ``n``.
        values: critic estimates for the same steps, length ``n``.
        discount: reward discount per step.
        decay: TD-error decay; 0 gives one-step TD errors, 1 gives the full
            discounted-return advantage.
        terminal_value: bootstrap value after the final step.

    Returns:
        Advantages, one per step.

    Raises:
        ValueError: if the two sequences differ in length or are empty.
    """
    rewards = np.asarray(rewards, dtype=float)
    values = np.asarray(values, dtype=float)
    if rewards.ndim != 1 or values.ndim != 1:
        raise ValueError("rewards and values must be 1-D sequences")
    if rewards.shape != values.shape:
        raise ValueError(
            f"length mismatch: {rewards.shape[0]} rewards vs "
            f"{values.shape[0]} values")
    if rewards.size == 0:
        raise ValueError("cannot estimate advantages for an empty episode")

    steps = rewards.size
    advantages = np.empty(steps, dtype=float)
    running = 0.0
    next_value = float(terminal_value)
    for n in range(steps - 1, -1, -1):
        delta = rewards[n] + discount * next_value - values[n]
        running = delta + discount * decay * running
        advantages[n] = running
        next_value = values[n]
    return advantages
