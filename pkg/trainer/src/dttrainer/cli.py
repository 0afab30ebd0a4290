"""Command-line entry point: train one algorithm against a simulator."""
from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np

from .client import EnvironmentClient
from .config import TrainerSettings, load_settings, save_settings
from .curves import write_curves
from .happo import ON_POLICY_ALGOS, OnPolicyTrainer
from .launch import SimulatorProcess
from .maddpg import MaddpgTrainer

ALGOS = ON_POLICY_ALGOS + ("maddpg",)


def cmd_train(args) -> int:
    settings = load_settings(args.settings) if args.settings else TrainerSettings()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    simulator = None
    try:
        if args.port is not None:
            host, port = args.host, args.port
        else:
            if not args.config:
                raise SystemExit(
                    "either --port (running simulator) or --config "
                    "(to launch one) is required")
            simulator = SimulatorProcess(args.config, host=args.host).start()
            host, port = simulator.host, simulator.port
            print(f"launched simulator on {host}:{port}")

        with EnvironmentClient(host, port) as client:
            spec_reply = client.spec()
            print(f"agents: {spec_reply['num_agents']}  "
                  f"users: {spec_reply['num_mus']}  "
                  f"stations: {spec_reply['num_bss']}  "
                  f"slots/episode: {spec_reply['episode_slots']}")
            if args.algo == "maddpg":
                trainer = MaddpgTrainer(spec_reply, settings, seed=args.seed)
            else:
                trainer = OnPolicyTrainer(spec_reply, settings,
                                          algo=args.algo, seed=args.seed)
            rows = trainer.train(client, args.episodes, log=print)
    finally:
        if simulator is not None:
            simulator.stop()

    write_curves(out / "curves.csv", rows)
    save_settings(settings, out / "settings.json")
    tail = rows[-min(10, len(rows)):]
    summary = {
        "algo": args.algo,
        "seed": args.seed,
        "episodes": args.episodes,
        "trailing_reward_global": float(np.mean([r.reward_global for r in tail])),
        "trailing_energy_j": float(np.mean([r.energy_j for r in tail])),
        "trailing_failure_ratio": float(np.mean([r.failure_ratio for r in tail])),
    }
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {out / 'curves.csv'}")
    print(f"wrote {out / 'summary.json'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dttrainer",
        description="Multi-agent trainers for the digital-twin network simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train one algorithm")
    train.add_argument("--algo", required=True, choices=ALGOS)
    train.add_argument("--config",
                       help="simulator config JSON; used to launch a local "
                            "simulator when --port is absent")
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--episodes", type=int, default=150,
                       help="training iterations (one episode each)")
    train.add_argument("--host", default="127.0.0.1")
    train.add_argument("--port", type=int,
                       help="connect to an already-running simulator")
    train.add_argument("--settings", help="trainer settings JSON")
    train.add_argument("--out", default="out/train",
                       help="directory for curves.csv and summaries")
    train.set_defaults(func=cmd_train)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
