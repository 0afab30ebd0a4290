"""Two-timescale digital-twin edge network simulator.

Slot-level twin synchronization over Rician uplinks and a wired
backhaul, frame-level twin migration with blackout windows, Lyapunov
virtual queues enforcing a long-run reliability budget, and a
multi-agent control surface (users, base stations, one control center)
reachable in-process or over a line-delimited JSON protocol.
"""
from .config import NetworkConfig, load_config, save_config
from .env import (AgentSpec, BSAction, BSObservation, CenterAction,
                  CenterObservation, MUAction, MUObservation, SlotOutcome,
                  TwinSyncEnv, scale_unit)
from .baselines import PolicyKind, make_policy
from .lyapunov import (DriftBoundReport, check_envelope, drift_constant_frame,
                       drift_constant_slot, per_slot_cost, queue_step,
                       simulate_queue, stability_diagnostic,
                       verify_drift_bounds)
from .metrics import EpisodeSummary, MetricsWriter, summarize
from .protocol import ProtocolClient, ProtocolServer, serve_protocol
from .runner import build_policies, run_episode, run_episodes, sweep

__version__ = "0.1.0"

__all__ = [
    "NetworkConfig", "load_config", "save_config",
    "TwinSyncEnv", "SlotOutcome", "AgentSpec",
    "MUObservation", "BSObservation", "CenterObservation",
    "MUAction", "BSAction", "CenterAction", "scale_unit",
    "PolicyKind", "make_policy",
    "DriftBoundReport", "queue_step", "per_slot_cost", "simulate_queue",
    "check_envelope", "verify_drift_bounds", "stability_diagnostic",
    "drift_constant_slot", "drift_constant_frame",
    "EpisodeSummary", "MetricsWriter", "summarize",
    "ProtocolServer", "ProtocolClient", "serve_protocol",
    "build_policies", "run_episode", "run_episodes", "sweep",
    "__version__",
]
