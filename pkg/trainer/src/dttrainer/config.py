"""Trainer hyperparameters with JSON round-trip, mirroring the simulator's config style."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class TrainerSettings:
    """Everything the learners need beyond what the environment reports.

    The on-policy block applies to the clipped-surrogate algorithms; the
    replay block only to the deterministic off-policy benchmark.
    """

    # --- shared network / optimizer ---
    hidden_sizes: tuple[int, ...] = (128, 64)
    lr_actor: float = 1e-4
    lr_critic: float = 1e-4
    discount: float = 0.9

    # --- on-policy (clipped surrogate) ---
    gae_decay: float = 0.95
    clip_ratio: float = 0.2
    entropy_coef: float = 0.01
    update_epochs: int = 25
    minibatches: int = 1
    normalize_advantages: bool = True
    gaussian_std: float = 0.5

    # --- off-policy benchmark ---
    replay_capacity: int = 100_000
    replay_batch: int = 256
    warmup_steps: int = 1_000
    exploration_noise_var: float = 0.5
    soft_update: float = 0.01
    gumbel_tau: float = 1.0

    def __post_init__(self):
        if not self.hidden_sizes or any(h <= 0 for h in self.hidden_sizes):
            raise ValueError("hidden_sizes must be positive")
        for name in ("lr_actor", "lr_critic"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.discount <= 1.0:
            raise ValueError("discount must lie in [0, 1]")
        if not 0.0 <= self.gae_decay <= 1.0:
            raise ValueError("gae_decay must lie in [0, 1]")
        if not 0.0 < self.clip_ratio < 1.0:
            raise ValueError("clip_ratio must lie in (0, 1)")
        if self.update_epochs < 1 or self.minibatches < 1:
            raise ValueError("update_epochs and minibatches must be >= 1")
        if self.replay_capacity < 1 or self.replay_batch < 1:
            raise ValueError("replay sizes must be >= 1")
        if self.exploration_noise_var < 0:
            raise ValueError("exploration_noise_var must be >= 0")
        if not 0.0 < self.soft_update <= 1.0:
            raise ValueError("soft_update must lie in (0, 1]")
        if self.gaussian_std <= 0 or self.gumbel_tau <= 0:
            raise ValueError("gaussian_std and gumbel_tau must be positive")

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["hidden_sizes"] = list(self.hidden_sizes)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "TrainerSettings":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown settings keys: {sorted(unknown)}")
        cleaned = dict(data)
        if "hidden_sizes" in cleaned:
            cleaned["hidden_sizes"] = tuple(int(h) for h in cleaned["hidden_sizes"])
        return cls(**cleaned)


def load_settings(path: str | Path) -> TrainerSettings:
    with open(path, "r", encoding="utf-8") as fh:
        return TrainerSettings.from_dict(json.load(fh))


def save_settings(settings: TrainerSettings, path: str | Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(settings.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
