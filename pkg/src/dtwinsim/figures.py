"""Figure rendering for run, sweep and verification reports.

Every CLI report path drops PNG figures next to its CSV output; all
plots read from the same in-memory records the sinks serialize.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FIG_SIZE = (7.0, 4.2)
DPI = 130


def _save(fig, outdir: Path, name: str) -> Path:
    path = Path(outdir) / name
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def _rolling(values: np.ndarray, window: int) -> np.ndarray:
    if window <= 1 or values.shape[0] < window:
        return values
    kernel = np.ones(window) / window
    return np.convolve(values, kernel, mode="valid")


def episode_figures(outcomes, outdir: str | Path, tolerance: float) -> list[Path]:
    """Render per-slot aggregates of one or more episodes."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    energy = np.array([o.energy_j.mean() for o in outcomes])
    fail = np.array([o.fail.mean() for o in outcomes])
    queue = np.array([o.queue.mean() for o in outcomes])
    r_g = np.array([o.reward_global for o in outcomes])
    r_c = np.array([o.reward_center for o in outcomes])
    slots = np.arange(energy.shape[0])
    window = max(1, energy.shape[0] // 50)
    paths = []

    fig, ax = plt.subplots(figsize=FIG_SIZE)
    ax.plot(slots[:_rolling(energy, window).shape[0]],
            _rolling(energy, window), color="tab:blue")
    ax.set_xlabel("slot")
    ax.set_ylabel("mean transmit energy (J)")
    ax.set_title(f"per-slot energy (rolling mean, window {window})")
    ax.grid(alpha=0.3)
    paths.append(_save(fig, outdir, "fig_energy.png"))

    fig, ax = plt.subplots(figsize=FIG_SIZE)
    running = np.cumsum(fail) / (slots + 1)
    ax.plot(slots, running, color="tab:red", label="running failure ratio")
    ax.axhline(tolerance, color="k", linestyle="--", linewidth=1,
               label="tolerance")
    ax.set_xlabel("slot")
    ax.set_ylabel("failure ratio")
    ax.legend()
    ax.grid(alpha=0.3)
    paths.append(_save(fig, outdir, "fig_failure_ratio.png"))

    fig, ax = plt.subplots(figsize=FIG_SIZE)
    ax.plot(slots, queue, color="tab:green")
    ax.set_xlabel("slot")
    ax.set_ylabel("mean virtual queue")
    ax.grid(alpha=0.3)
    paths.append(_save(fig, outdir, "fig_queue.png"))

    fig, ax = plt.subplots(figsize=FIG_SIZE)
    ax.plot(slots[:_rolling(r_g, window).shape[0]], _rolling(r_g, window),
            label="global reward", color="tab:purple")
    ax.plot(slots[:_rolling(r_c, window).shape[0]], _rolling(r_c, window),
            label="placement reward", color="tab:orange")
    ax.set_xlabel("slot")
    ax.set_ylabel("reward (rolling mean)")
    ax.legend()
    ax.grid(alpha=0.3)
    paths.append(_save(fig, outdir, "fig_rewards.png"))
    return paths


def sweep_figures(rows: list[dict], outdir: str | Path) -> list[Path]:
    """Render aggregate metrics against the swept parameter."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    values = [r["value"] for r in rows]
    param = rows[0]["param"] if rows else "value"
    paths = []
    for key, label, color in (
            ("avg_energy_j", "avg transmit energy (J)", "tab:blue"),
            ("failure_ratio", "failure ratio", "tab:red"),
            ("mean_queue", "mean virtual queue", "tab:green")):
        fig, ax = plt.subplots(figsize=FIG_SIZE)
        ax.plot(values, [r[key] for r in rows], marker="o", color=color)
        ax.set_xlabel(param)
        ax.set_ylabel(label)
        ax.grid(alpha=0.3)
        paths.append(_save(fig, outdir, f"fig_sweep_{key}.png"))
    return paths


def drift_figures(report, backlog: np.ndarray, outdir: str | Path) -> list[Path]:
    """Render the drift-bound comparison and one frame's backlog envelope."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []

    fig, ax = plt.subplots(figsize=FIG_SIZE)
    labels = ["measured drift", "slot-coupled bound", "frame-start bound"]
    means = [report.mean_drift, report.mean_bound_slot,
             report.mean_bound_frame]
    ax.bar(labels, means, color=["tab:gray", "tab:blue", "tab:orange"])
    ax.set_ylabel("per-frame value")
    ax.set_title(f"drift vs bounds over {report.frames} frames")
    ax.grid(alpha=0.3, axis="y")
    paths.append(_save(fig, outdir, "fig_drift_bounds.png"))

    t = report.frame_slots
    frame = np.argmax([backlog[q * t] for q in range(report.frames)])
    lo = frame * t
    ys = backlog[lo:lo + t]
    j = np.arange(t)
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    ax.plot(j, ys, color="tab:green", label="backlog")
    ax.plot(j, ys[0] - j * report.tolerance, "k--", linewidth=1,
            label="envelope")
    ax.plot(j, ys[0] + j * (1.0 - report.tolerance), "k--", linewidth=1)
    ax.set_xlabel("slot within frame")
    ax.set_ylabel("virtual queue")
    ax.legend()
    ax.grid(alpha=0.3)
    paths.append(_save(fig, outdir, "fig_envelope.png"))
    return paths
