"""Training-curve rows and their CSV serialization."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

FIELDS = ("step", "reward_global", "reward_center", "energy_j", "failure_ratio")


@dataclass
class CurveRow:
    """One training iteration: per-slot means over the collected episode."""

    step: int
    reward_global: float
    reward_center: float
    energy_j: float
    failure_ratio: float


def write_curves(path: str | Path, rows: list[CurveRow]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(FIELDS)
        for row in rows:
            writer.writerow([row.step, repr(row.reward_global),
                             repr(row.reward_center), repr(row.energy_j),
                             repr(row.failure_ratio)])


def read_curves(path: str | Path) -> list[CurveRow]:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return [CurveRow(step=int(r["step"]),
                         reward_global=float(r["reward_global"]),
                         reward_center=float(r["reward_center"]),
                         energy_j=float(r["energy_j"]),
                         failure_ratio=float(r["failure_ratio"]))
                for r in reader]
