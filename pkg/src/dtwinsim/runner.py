"""Episode driving: wire baseline policies to the environment, collect
outcomes, persist metrics, and sweep configs across parameter values."""
from __future__ import annotations

import dataclasses
from pathlib import Path

import numpy as np

from .baselines import PolicyKind, make_policy
from .config import NetworkConfig
from .env import ROLE_BS, ROLE_CENTER, ROLE_MU, TwinSyncEnv
from .metrics import EpisodeSummary, MetricsWriter, summarize


def build_policies(cfg: NetworkConfig,
                   mu_kind: PolicyKind = PolicyKind.NEAREST_BS_FIXED_POWER,
                   bs_kind: PolicyKind = PolicyKind.EQUAL_COMPUTE_SPLIT,
                   center_kind: PolicyKind = PolicyKind.NEAREST_DEPLOYMENT):
    """One policy object per agent, in agent order."""
    policies = [make_policy(mu_kind, ROLE_MU) for _ in range(cfg.num_mus)]
    policies += [make_policy(bs_kind, ROLE_BS) for _ in range(cfg.num_bss)]
    policies.append(make_policy(center_kind, ROLE_CENTER))
    return policies


def run_episode(cfg: NetworkConfig, policies, seed: int,
                episode: int = 0, writer: MetricsWriter | None = None,
                env: TwinSyncEnv | None = None):
    """Run one full episode under scripted policies.

    The policy randomness uses its own stream derived from (seed, 1) so
    the world's draws stay aligned with a policy-free replay.  Returns
    the episode summary and the per-slot outcomes.
    """
    env = env or TwinSyncEnv(cfg)
    obs = env.reset(seed=seed)
    policy_rng = np.random.default_rng(np.random.SeedSequence((seed, 1)))
    for p in policies:
        p.reset()
    outcomes = []
    while not env.done:
        actions = [p.act(o, policy_rng) for p, o in zip(policies, obs)]
        obs, outcome = env.step(actions)
        if writer is not None:
            writer.write_slot(episode, outcome)
        outcomes.append(outcome)
    return summarize(episode, seed, outcomes), outcomes


def run_episodes(cfg: NetworkConfig, episodes: int, seed: int,
                 mu_kind: PolicyKind = PolicyKind.NEAREST_BS_FIXED_POWER,
                 bs_kind: PolicyKind = PolicyKind.EQUAL_COMPUTE_SPLIT,
                 center_kind: PolicyKind = PolicyKind.NEAREST_DEPLOYMENT,
                 csv_path: str | Path | None = None,
                 jsonl_path: str | Path | None = None):
    """Run several episodes with consecutive seeds; returns summaries."""
    summaries: list[EpisodeSummary] = []
    writer = MetricsWriter(csv_path, jsonl_path) \
        if (csv_path or jsonl_path) else None
    try:
        env = TwinSyncEnv(cfg)
        for ep in range(episodes):
            policies = build_policies(cfg, mu_kind, bs_kind, center_kind)
            summary, _ = run_episode(cfg, policies, seed=seed + ep,
                                     episode=ep, writer=writer, env=env)
            summaries.append(summary)
    finally:
        if writer is not None:
            writer.close()
    return summaries


# sweepable config fields and how a swept value lands in the config
SWEEPABLE = {
    "num_mus": lambda cfg, v: dataclasses.replace(cfg, num_mus=int(v)),
    "num_bss": lambda cfg, v: dataclasses.replace(
        cfg, num_bss=int(v), bs_positions=None),
    "request_prob": lambda cfg, v: dataclasses.replace(cfg, request_prob=float(v)),
    "bandwidth_hz": lambda cfg, v: dataclasses.replace(cfg, bandwidth_hz=float(v)),
    "f_max_hz": lambda cfg, v: dataclasses.replace(cfg, f_max_hz=float(v)),
    "queue_weight": lambda cfg, v: dataclasses.replace(cfg, queue_weight=float(v)),
    "data_bits_max": lambda cfg, v: dataclasses.replace(
        cfg, data_bits_max=float(v),
        data_bits_min=min(cfg.data_bits_min, float(v))),
    "migration_slots": lambda cfg, v: dataclasses.replace(
        cfg, migration_slots=int(v)),
}


def sweep(cfg: NetworkConfig, param: str, values, episodes: int, seed: int,
          mu_kind: PolicyKind = PolicyKind.NEAREST_BS_FIXED_POWER,
          bs_kind: PolicyKind = PolicyKind.EQUAL_COMPUTE_SPLIT,
          center_kind: PolicyKind = PolicyKind.NEAREST_DEPLOYMENT):
    """Re-run the scripted policies across values of one config field.

    Returns one row per value with episode-averaged aggregates.
    """
    if param not in SWEEPABLE:
        raise ValueError(
            f"cannot sweep '{param}'; choose from {sorted(SWEEPABLE)}")
    rows = []
    for value in values:
        swept = SWEEPABLE[param](cfg, value)
        summaries = run_episodes(swept, episodes, seed, mu_kind, bs_kind,
                                 center_kind)
        rows.append({
            "param": param,
            "value": float(value),
            "episodes": episodes,
            "avg_energy_j": float(np.mean([s.avg_energy_j for s in summaries])),
            "failure_ratio": float(np.mean([s.failure_ratio for s in summaries])),
            "mean_queue": float(np.mean([s.mean_queue for s in summaries])),
            "total_reward_global": float(np.mean(
                [s.total_reward_global for s in summaries])),
            "total_reward_center": float(np.mean(
                [s.total_reward_center for s in summaries])),
        })
    return rows
