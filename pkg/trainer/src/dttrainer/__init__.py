"""Multi-agent actor-critic trainers for the digital-twin network simulator.

The package talks to a running simulator exclusively through its
newline-delimited JSON wire protocol; it never imports the simulator.
Four algorithms share the same agent construction:

- ``beta-happo``  — sequential per-agent clipped-surrogate updates with the
  multi-agent ratio product, Beta policy heads on bounded continuous dims.
- ``gauss-happo`` — same update rule with clamped-Gaussian heads.
- ``beta-mappo``  — simultaneous per-agent updates, no ratio product.
- ``maddpg``      — off-policy deterministic actors with exploration noise
  and a FIFO replay buffer.
"""

from .client import EnvironmentClient, ProtocolError
from .config import TrainerSettings
from .gae import compute_gae
from .buffer import RolloutBuffer, StepRecord
from .happo import OnPolicyTrainer
from .maddpg import MaddpgTrainer

__all__ = [
    "EnvironmentClient",
    "ProtocolError",
    "TrainerSettings",
    "compute_gae",
    "RolloutBuffer",
    "StepRecord",
    "OnPolicyTrainer",
    "MaddpgTrainer",
]

__version__ = "0.1.0"
