"""Metrics sinks: per-slot CSV, full JSON-lines records, summaries.

Floats are serialized with 17 significant digits so a value survives the
round trip to decimal and back bit-exactly; two runs of the same config
and seed therefore produce byte-identical files.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .env import SlotOutcome

CSV_HEADER = "episode,slot,mu,t,X,E,Xi,Y,r_g,r_c"


def fmt(value: float) -> str:
    """Decimal form that round-trips float64 exactly."""
    return format(float(value), ".17g")


class MetricsWriter:
    """Writes the per-slot per-user CSV table and, optionally, one JSON
    record per slot with the richer outcome fields."""

    def __init__(self, csv_path: str | Path | None,
                 jsonl_path: str | Path | None = None):
        self._csv = open(csv_path, "w", encoding="utf-8", newline="\n") \
            if csv_path else None
        self._jsonl = open(jsonl_path, "w", encoding="utf-8", newline="\n") \
            if jsonl_path else None
        if self._csv:
            self._csv.write(CSV_HEADER + "\n")

    def write_slot(self, episode: int, outcome: SlotOutcome) -> None:
        if self._csv:
            for k in range(outcome.fail.shape[0]):
                row = [str(episode), str(outcome.slot), str(k),
                       fmt(outcome.delay_s[k]), str(int(outcome.fail[k])),
                       fmt(outcome.energy_j[k]), fmt(outcome.cost[k]),
                       fmt(outcome.queue[k]), fmt(outcome.reward_global),
                       fmt(outcome.reward_center)]
                self._csv.write(",".join(row) + "\n")
        if self._jsonl:
            ex = outcome.extras
            record = {
                "episode": episode,
                "slot": outcome.slot,
                "frame": outcome.frame,
                "t": [fmt(v) for v in outcome.delay_s],
                "X": [int(v) for v in outcome.fail],
                "E": [fmt(v) for v in outcome.energy_j],
                "Xi": [fmt(v) for v in outcome.cost],
                "Y": [fmt(v) for v in outcome.queue],
                "r_g": fmt(outcome.reward_global),
                "r_c": fmt(outcome.reward_center),
                "serving": [int(v) for v in ex["serving"]],
                "power_w": [fmt(v) for v in ex["powers_w"]],
                "deployment": [int(v) for v in ex["deployment"]],
                "blocked": [int(v) for v in ex["blocked"]],
                "rate_bps": [fmt(v) for v in ex["rates_bps"]],
                "done": outcome.done,
            }
            self._jsonl.write(json.dumps(record, separators=(",", ":")) + "\n")

    def close(self) -> None:
        if self._csv:
            self._csv.close()
            self._csv = None
        if self._jsonl:
            self._jsonl.close()
            self._jsonl = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


@dataclass
class EpisodeSummary:
    """Aggregates of one episode, aligned with the objective terms."""
    episode: int
    seed: int
    avg_energy_j: float          # mean transmit energy per user per slot
    failure_ratio: float         # mean failure indicator per user per slot
    mean_queue: float
    final_queue_mean: float
    total_reward_global: float
    total_reward_center: float
    per_mu_failure_ratio: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "episode": self.episode,
            "seed": self.seed,
            "avg_energy_j": self.avg_energy_j,
            "failure_ratio": self.failure_ratio,
            "mean_queue": self.mean_queue,
            "final_queue_mean": self.final_queue_mean,
            "total_reward_global": self.total_reward_global,
            "total_reward_center": self.total_reward_center,
            "per_mu_failure_ratio": self.per_mu_failure_ratio,
        }


def summarize(episode: int, seed: int,
              outcomes: list[SlotOutcome]) -> EpisodeSummary:
    energy = np.stack([o.energy_j for o in outcomes])
    fail = np.stack([o.fail for o in outcomes])
    queues = np.stack([o.queue for o in outcomes])
    return EpisodeSummary(
        episode=episode,
        seed=seed,
        avg_energy_j=float(energy.mean()),
        failure_ratio=float(fail.mean()),
        mean_queue=float(queues.mean()),
        final_queue_mean=float(queues[-1].mean()),
        total_reward_global=float(sum(o.reward_global for o in outcomes)),
        total_reward_center=float(sum(o.reward_center for o in outcomes)),
        per_mu_failure_ratio=[float(v) for v in fail.mean(axis=0)],
    )
