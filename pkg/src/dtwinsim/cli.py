"""Command-line entry points: run, serve, verify, sweep."""
from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np

from .baselines import PolicyKind
from .config import NetworkConfig, load_config, save_config
from .figures import drift_figures, episode_figures, sweep_figures
from .lyapunov import simulate_queue, verify_drift_bounds
from .metrics import fmt
from .protocol import serve_protocol
from .runner import SWEEPABLE, run_episodes, sweep


def _load(args) -> NetworkConfig:
    cfg = load_config(args.config) if args.config else NetworkConfig()
    if args.seed is not None:
        import dataclasses
        cfg = dataclasses.replace(cfg, seed=args.seed)
    return cfg


def _policy(value: str) -> PolicyKind:
    try:
        return PolicyKind(value)
    except ValueError:
        choices = ", ".join(k.value for k in PolicyKind)
        raise argparse.ArgumentTypeError(
            f"unknown policy '{value}'; choose from: {choices}")


def cmd_run(args) -> int:
    cfg = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "metrics.csv"
    jsonl_path = out / "records.jsonl"

    # summaries reuse the same episode loop that feeds the sinks
    from .metrics import MetricsWriter
    from .runner import build_policies, run_episode
    from .env import TwinSyncEnv

    summaries = []
    all_outcomes = []
    with MetricsWriter(csv_path, jsonl_path) as writer:
        env = TwinSyncEnv(cfg)
        for ep in range(args.episodes):
            policies = build_policies(cfg, args.mu_policy, args.bs_policy,
                                      args.center_policy)
            summary, outcomes = run_episode(
                cfg, policies, seed=cfg.seed + ep, episode=ep,
                writer=writer, env=env)
            summaries.append(summary)
            all_outcomes.extend(outcomes)
            print(f"episode {ep}: energy/slot {fmt(summary.avg_energy_j)} J, "
                  f"failure ratio {fmt(summary.failure_ratio)}, "
                  f"mean queue {fmt(summary.mean_queue)}")

    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump([s.to_dict() for s in summaries], fh, indent=2)
        fh.write("\n")
    save_config(cfg, out / "config.json")
    figures = episode_figures(all_outcomes, out, cfg.fail_tolerance)
    print(f"wrote {csv_path}, {jsonl_path}, summary.json and "
          f"{len(figures)} figures to {out}")
    return 0


def cmd_serve(args) -> int:
    cfg = _load(args)
    serve_protocol(cfg, host=args.host, port=args.port)
    return 0


def cmd_verify(args) -> int:
    cfg = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(cfg.seed)
    prob = args.fail_prob if args.fail_prob is not None else cfg.request_prob
    fails = (rng.random((args.frames, cfg.frame_slots)) < prob).astype(float)
    report = verify_drift_bounds(fails, prob, cfg.fail_tolerance)
    backlog = simulate_queue(fails.ravel(), cfg.fail_tolerance)

    print(f"frames: {report.frames}  slots/frame: {report.frame_slots}")
    print(f"mean drift:             {fmt(report.mean_drift)}")
    print(f"mean slot-coupled bound:  {fmt(report.mean_bound_slot)} "
          f"(margin {report.margin_slot_sigma:.1f} sigma)")
    print(f"mean frame-start bound: {fmt(report.mean_bound_frame)} "
          f"(margin {report.margin_frame_sigma:.1f} sigma)")
    print(f"envelope violations:    {report.envelope_violations}")
    ok = (report.mean_drift <= report.mean_bound_slot
          <= report.mean_bound_frame and report.envelope_violations == 0)
    print("verification PASSED" if ok else "verification FAILED")

    with open(out / "drift_report.json", "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")
    drift_figures(report, backlog, out)
    return 0 if ok else 1


def cmd_sweep(args) -> int:
    cfg = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    values = [float(v) for v in args.values.split(",")]
    rows = sweep(cfg, args.param, values, args.episodes, cfg.seed,
                 args.mu_policy, args.bs_policy, args.center_policy)
    csv_path = out / "sweep.csv"
    keys = ["param", "value", "episodes", "avg_energy_j", "failure_ratio",
            "mean_queue", "total_reward_global", "total_reward_center"]
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(keys) + "\n")
        for row in rows:
            fh.write(",".join(
                str(row[k]) if k in ("param", "episodes")
                else fmt(row[k]) for k in keys) + "\n")
        for row in rows:
            print(f"{args.param}={row['value']}: "
                  f"energy {fmt(row['avg_energy_j'])} J, "
                  f"failure ratio {fmt(row['failure_ratio'])}")
    sweep_figures(rows, out)
    print(f"wrote {csv_path} and figures to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dtwinsim",
        description="two-timescale digital-twin edge network simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=str, default=None,
                       help="JSON config file (defaults apply otherwise)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--out", type=str, default="out",
                       help="output directory")

    def policies(p):
        p.add_argument("--mu-policy", type=_policy,
                       default=PolicyKind.NEAREST_BS_FIXED_POWER)
        p.add_argument("--bs-policy", type=_policy,
                       default=PolicyKind.EQUAL_COMPUTE_SPLIT)
        p.add_argument("--center-policy", type=_policy,
                       default=PolicyKind.NEAREST_DEPLOYMENT)

    p_run = sub.add_parser("run", help="run scripted-policy episodes")
    common(p_run)
    policies(p_run)
    p_run.add_argument("--episodes", type=int, default=1)
    p_run.set_defaults(func=cmd_run)

    p_serve = sub.add_parser("serve", help="serve the trainer protocol")
    common(p_serve)
    p_serve.add_argument("--host", type=str, default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=5858)
    p_serve.set_defaults(func=cmd_serve)

    p_verify = sub.add_parser(
        "verify", help="check the queue drift bounds on sampled traces")
    common(p_verify)
    p_verify.add_argument("--frames", type=int, default=10000)
    p_verify.add_argument("--fail-prob", type=float, default=None,
                          help="per-slot failure probability "
                               "(defaults to the request probability)")
    p_verify.set_defaults(func=cmd_verify)

    p_sweep = sub.add_parser("sweep", help="sweep one config parameter")
    common(p_sweep)
    policies(p_sweep)
    p_sweep.add_argument("--param", type=str, required=True,
                         choices=sorted(SWEEPABLE))
    p_sweep.add_argument("--values", type=str, required=True,
                         help="comma-separated values")
    p_sweep.add_argument("--episodes", type=int, default=1)
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
