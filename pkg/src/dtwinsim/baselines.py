"""Scripted reference policies for every agent class.

Each policy consumes only its own agent's observation, mirroring what a
learned policy would see.  All policies are stateless given
(observation, rng) except StickyDeployment, which pins its first
decision for the rest of the episode.
"""
from __future__ import annotations

import enum

import numpy as np

from .env import (BSAction, BSObservation, CenterAction, CenterObservation,
                  MUAction, MUObservation)


class PolicyKind(enum.Enum):
    NEAREST_BS_FIXED_POWER = "nearest-fixed"
    NEAREST_BS_RANDOM_POWER = "nearest-random"
    EQUAL_COMPUTE_SPLIT = "equal-split"
    PROPORTIONAL_COMPUTE_SPLIT = "proportional-split"
    NEAREST_DEPLOYMENT = "nearest-deploy"
    STICKY_DEPLOYMENT = "sticky-deploy"
    RANDOM_ALL = "random"


MU_KINDS = (PolicyKind.NEAREST_BS_FIXED_POWER,
            PolicyKind.NEAREST_BS_RANDOM_POWER, PolicyKind.RANDOM_ALL)
BS_KINDS = (PolicyKind.EQUAL_COMPUTE_SPLIT,
            PolicyKind.PROPORTIONAL_COMPUTE_SPLIT, PolicyKind.RANDOM_ALL)
CENTER_KINDS = (PolicyKind.NEAREST_DEPLOYMENT, PolicyKind.STICKY_DEPLOYMENT,
                PolicyKind.RANDOM_ALL)


class Policy:
    """Base: per-episode reset plus an observation-to-action map."""

    def reset(self) -> None:
        pass

    def act(self, observation, rng: np.random.Generator):
        raise NotImplementedError


def _nearest_bs(position: np.ndarray, bs_positions: np.ndarray) -> int:
    return int(np.argmin(np.linalg.norm(bs_positions - position, axis=1)))


class NearestBSFixedPower(Policy):
    """Associate with the closest BS, transmit at half the power ceiling."""

    def __init__(self, power_raw: float = 0.5):
        self.power_raw = power_raw

    def act(self, observation: MUObservation, rng):
        return MUAction(
            bs_choice=_nearest_bs(observation.position,
                                  observation.bs_positions),
            power_raw=self.power_raw)


class NearestBSRandomPower(Policy):
    """Associate with the closest BS, draw the power uniformly."""

    def act(self, observation: MUObservation, rng):
        return MUAction(
            bs_choice=_nearest_bs(observation.position,
                                  observation.bs_positions),
            power_raw=float(rng.random()))


class EqualComputeSplit(Policy):
    """Ask the full ceiling for every requester; the capacity projection
    then hands every contender at a server an equal share."""

    def act(self, observation: BSObservation, rng):
        want = observation.request_active.astype(float)
        return BSAction(wired_raw=want.copy(), compute_raw=want.copy())


class ProportionalComputeSplit(Policy):
    """Weight shares by workload: compute by bits*cycles, wired by bits,
    so heavier updates keep proportionally more of each resource."""

    def act(self, observation: BSObservation, rng):
        load = observation.data_bits * observation.cycles_per_bit
        top = load.max()
        compute = load / top if top > 0 else np.zeros_like(load)
        bits_top = observation.data_bits.max()
        wired = observation.data_bits / bits_top if bits_top > 0 \
            else np.zeros_like(load)
        return BSAction(wired_raw=wired, compute_raw=compute)


class NearestDeployment(Policy):
    """Suggest hosting every twin at its user's closest server."""

    def act(self, observation: CenterObservation, rng):
        dep = np.array([_nearest_bs(p, observation.bs_positions)
                        for p in observation.mu_positions])
        return CenterAction(deployment=dep)


class StickyDeployment(Policy):
    """Never migrate: pin the first slot's nearest-server map, which
    coincides with the initial placement, for the whole episode."""

    def __init__(self):
        self._pinned = None

    def reset(self):
        self._pinned = None

    def act(self, observation: CenterObservation, rng):
        if self._pinned is None:
            self._pinned = np.array([
                _nearest_bs(p, observation.bs_positions)
                for p in observation.mu_positions])
        return CenterAction(deployment=self._pinned.copy())


class RandomMU(Policy):
    def act(self, observation: MUObservation, rng):
        m = observation.bs_positions.shape[0]
        return MUAction(bs_choice=int(rng.integers(m)),
                        power_raw=float(rng.random()))


class RandomBS(Policy):
    def act(self, observation: BSObservation, rng):
        k = observation.request_active.shape[0]
        return BSAction(wired_raw=rng.random(k), compute_raw=rng.random(k))


class RandomCenter(Policy):
    def act(self, observation: CenterObservation, rng):
        k = observation.mu_positions.shape[0]
        m = observation.bs_positions.shape[0]
        return CenterAction(deployment=rng.integers(0, m, size=k))


def make_policy(kind: PolicyKind, role: str) -> Policy:
    """Instantiate a policy of the given kind for an agent class."""
    if kind == PolicyKind.RANDOM_ALL:
        return {"mu": RandomMU, "bs": RandomBS, "center": RandomCenter}[role]()
    table = {
        PolicyKind.NEAREST_BS_FIXED_POWER: ("mu", NearestBSFixedPower),
        PolicyKind.NEAREST_BS_RANDOM_POWER: ("mu", NearestBSRandomPower),
        PolicyKind.EQUAL_COMPUTE_SPLIT: ("bs", EqualComputeSplit),
        PolicyKind.PROPORTIONAL_COMPUTE_SPLIT: ("bs", ProportionalComputeSplit),
        PolicyKind.NEAREST_DEPLOYMENT: ("center", NearestDeployment),
        PolicyKind.STICKY_DEPLOYMENT: ("center", StickyDeployment),
    }
    expected_role, cls = table[kind]
    if role != expected_role:
        raise ValueError(f"{kind.value} is a {expected_role} policy, not {role}")
    return cls()
