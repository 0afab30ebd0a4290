"""Multi-agent environment for slot-level twin sync and frame-level placement.

Agents, in fixed order: one per mobile user (association + transmit
power), one per base station (wired-rate and CPU shares for the users
it touches), and one control center (a placement suggestion for every
twin, every slot, of which only the frame-boundary one binds).

Each step runs one slot: adopt placement at a frame boundary, settle
associations and resource shares, draw fresh channels, serve or fail
the slot's sync requests, update the reliability queues, and emit the
global cost reward plus the center's placement-quality reward.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import NetworkConfig
from .lyapunov import per_slot_cost, queue_step
from .migration import (DeploymentMap, TwoTimescaleClock, apply_deployment,
                        blocked_mask, initial_deployment)
from .mobility import MobilityParams, init_mobility, step_mobility
from .radio import (ChannelParams, draw_channels, project_wired_allocations,
                    relay_pattern, uplink_rate)
from .sync import (draw_requests, project_compute, sync_delay,
                   failure_indicator, transmit_energy)

ROLE_MU = "mu"
ROLE_BS = "bs"
ROLE_CENTER = "center"


def scale_unit(raw, low: float, high: float):
    """Map raw policy outputs in [0, 1] onto a physical interval."""
    raw = np.asarray(raw, dtype=float)
    if np.any(raw < 0.0) or np.any(raw > 1.0):
        raise ValueError("raw action values must lie in [0, 1]")
    return low + raw * (high - low)


# --------------------------------------------------------------------------
# observations


@dataclass
class MUObservation:
    """What a single user sees: itself, the server map, its own request."""
    mu_index: int
    position: np.ndarray          # (2,)
    bs_positions: np.ndarray      # (M, 2)
    request_active: bool
    data_bits: float
    cycles_per_bit: float
    deadline_s: float

    def vector(self, cfg: NetworkConfig) -> np.ndarray:
        w = cfg.area_width_m
        return np.concatenate([
            [self.mu_index / cfg.num_mus],
            self.position / w,
            self.bs_positions.ravel() / w,
            [float(self.request_active),
             self.data_bits / cfg.data_bits_max,
             self.cycles_per_bit / cfg.cycles_per_bit_max,
             self.deadline_s / cfg.slot_s],
        ])


@dataclass
class BSObservation:
    """What a base station sees: the server map plus one block per
    requesting user (position, workload, serving flag, relay target of
    its own outgoing link).  Non-requesters are zeroed out."""
    bs_index: int
    bs_positions: np.ndarray      # (M, 2)
    served_by_me: np.ndarray      # (K,) {0,1}, realized association lag
    request_active: np.ndarray    # (K,) bool
    mu_positions: np.ndarray      # (K, 2), zero where inactive
    data_bits: np.ndarray         # (K,)
    cycles_per_bit: np.ndarray    # (K,)
    deadline_s: np.ndarray        # (K,)
    relay_target: np.ndarray      # (K,) int, -1 when no relay from this BS

    def vector(self, cfg: NetworkConfig) -> np.ndarray:
        k, m = cfg.num_mus, cfg.num_bss
        w = cfg.area_width_m
        blocks = np.zeros((k, 7 + m))
        blocks[:, 0] = self.served_by_me
        blocks[:, 1:3] = self.mu_positions / w
        blocks[:, 3] = self.request_active.astype(float)
        blocks[:, 4] = self.data_bits / cfg.data_bits_max
        blocks[:, 5] = self.cycles_per_bit / cfg.cycles_per_bit_max
        blocks[:, 6] = self.deadline_s / cfg.slot_s
        for u in range(k):
            if self.relay_target[u] >= 0:
                blocks[u, 7 + int(self.relay_target[u])] = 1.0
        return np.concatenate([
            [self.bs_index / m],
            self.bs_positions.ravel() / w,
            blocks.ravel(),
        ])


@dataclass
class CenterObservation:
    """What the control center sees: the full association map and all
    positions.  Deliberately excludes per-user workloads and queues."""
    serving: np.ndarray           # (K,) int, realized association lag
    mu_positions: np.ndarray      # (K, 2)
    bs_positions: np.ndarray      # (M, 2)

    def vector(self, cfg: NetworkConfig) -> np.ndarray:
        k, m = cfg.num_mus, cfg.num_bss
        w = cfg.area_width_m
        assoc = np.zeros((k, m))
        assoc[np.arange(k), self.serving] = 1.0
        return np.concatenate([
            assoc.ravel(),
            self.mu_positions.ravel() / w,
            self.bs_positions.ravel() / w,
        ])


# --------------------------------------------------------------------------
# actions


@dataclass
class MUAction:
    bs_choice: int        # serving BS index
    power_raw: float      # transmit power in [0, 1] of the ceiling


@dataclass
class BSAction:
    """Per-user resource shares in [0, 1] of the respective ceilings.

    The wired share applies to the user's (determined) outgoing link when
    it relays through this BS; the compute share applies when the user's
    twin is hosted here.  Irrelevant entries are ignored.
    """
    wired_raw: np.ndarray    # (K,)
    compute_raw: np.ndarray  # (K,)


@dataclass
class CenterAction:
    deployment: np.ndarray   # (K,) int, suggested hosting server per twin


@dataclass
class AgentSpec:
    role: str
    obs_dim: int
    discrete: tuple[int, ...]   # cardinality per discrete head
    continuous: int             # number of [0, 1] continuous outputs


@dataclass
class SlotOutcome:
    """Everything measurable about one slot."""
    slot: int
    frame: int
    delay_s: np.ndarray          # (K,) 0 when idle, +inf when unreachable
    fail: np.ndarray             # (K,) {0, 1}
    energy_j: np.ndarray         # (K,)
    cost: np.ndarray             # (K,) per-slot weighted cost
    queue: np.ndarray            # (K,) backlog after this slot's update
    reward_global: float
    reward_center: float
    done: bool
    extras: dict = field(repr=False, default_factory=dict)


# --------------------------------------------------------------------------
# environment


class TwinSyncEnv:
    """Deterministic, seeded slot simulator behind a gym-like interface.

    ``reset`` returns one structured observation per agent (users, then
    base stations, then the control center); ``step`` consumes one action
    per agent in the same order and returns the next observations plus a
    ``SlotOutcome``.  Identical config and seed reproduce identical
    trajectories bit for bit.
    """

    def __init__(self, cfg: NetworkConfig):
        self.cfg = cfg
        self.bs_positions = cfg.bs_position_array()
        self.channel_params = ChannelParams(
            ref_gain=cfg.ref_gain_lin,
            path_loss_exp=cfg.path_loss_exp,
            rician_k=cfg.rician_k,
            noise_w=cfg.noise_w,
            bandwidth_hz=cfg.bandwidth_hz,
        )
        self.capacity = cfg.wired_rate_bps * (
            np.ones((cfg.num_bss, cfg.num_bss)) - np.eye(cfg.num_bss))
        self._rng: np.random.Generator | None = None
        self.clock: TwoTimescaleClock | None = None

    # ---- lifecycle -------------------------------------------------------

    def reset(self, seed: int | None = None):
        cfg = self.cfg
        self._rng = np.random.default_rng(cfg.seed if seed is None else seed)
        mean_speed = self._rng.uniform(cfg.speed_min_mps, cfg.speed_max_mps,
                                       size=cfg.num_mus)
        self.mobility_params = MobilityParams(
            mean_speed=mean_speed,
            mean_heading=cfg.mean_heading_rad,
            speed_memory=cfg.speed_memory,
            heading_memory=cfg.heading_memory,
            speed_noise_mean=cfg.speed_noise_mean,
            speed_noise_std=cfg.speed_noise_std,
            heading_noise_mean=cfg.heading_noise_mean,
            heading_noise_std=cfg.heading_noise_std,
            slot_s=cfg.slot_s,
            area_width_m=cfg.area_width_m,
        )
        self.mobility = init_mobility(self.mobility_params, self._rng,
                                      cfg.num_mus)
        server = initial_deployment(self.mobility.position, self.bs_positions)
        self.deployment = DeploymentMap(
            server=server, window_end=np.zeros(cfg.num_mus, dtype=int))
        self.clock = TwoTimescaleClock(cfg.frame_slots, cfg.episode_frames)
        self.queues = np.zeros(cfg.num_mus)
        self._y_frame_start = np.zeros(cfg.num_mus)
        # observations lag the association by one slot; seed it with the
        # nearest server, which also matches the initial twin placement
        self._assoc_last = server.copy()
        self._routes_last = np.full(cfg.num_mus, -1, dtype=int)
        self.requests = self._draw_requests()
        return self.observations()

    def _draw_requests(self):
        cfg = self.cfg
        return draw_requests(
            cfg.num_mus, cfg.request_prob,
            (cfg.data_bits_min, cfg.data_bits_max),
            (cfg.cycles_per_bit_min, cfg.cycles_per_bit_max),
            (cfg.tau_frac_min, cfg.tau_frac_max),
            cfg.slot_s, self._rng)

    @property
    def done(self) -> bool:
        return self.clock is not None and self.clock.done

    # ---- agent interface metadata -----------------------------------------

    def agent_specs(self) -> list[AgentSpec]:
        cfg = self.cfg
        k, m = cfg.num_mus, cfg.num_bss
        mu_dim = 7 + 2 * m
        bs_dim = 1 + 2 * m + k * (7 + m)
        center_dim = k * m + 2 * k + 2 * m
        specs = [AgentSpec(ROLE_MU, mu_dim, (m,), 1) for _ in range(k)]
        specs += [AgentSpec(ROLE_BS, bs_dim, (), 2 * k) for _ in range(m)]
        specs.append(AgentSpec(ROLE_CENTER, center_dim, (m,) * k, 0))
        return specs

    # ---- observations ------------------------------------------------------

    def observations(self):
        cfg = self.cfg
        req = self.requests
        obs: list = []
        for k in range(cfg.num_mus):
            obs.append(MUObservation(
                mu_index=k,
                position=self.mobility.position[k].copy(),
                bs_positions=self.bs_positions,
                request_active=bool(req.active[k]),
                data_bits=float(req.data_bits[k]),
                cycles_per_bit=float(req.cycles_per_bit[k]),
                deadline_s=float(req.deadline_s[k]),
            ))
        active = req.active
        masked_pos = np.where(active[:, None], self.mobility.position, 0.0)
        for m in range(cfg.num_bss):
            served = (self._assoc_last == m) & active
            relay_target = np.where(
                served & (self._routes_last >= 0), self._routes_last, -1)
            obs.append(BSObservation(
                bs_index=m,
                bs_positions=self.bs_positions,
                served_by_me=served.astype(float),
                request_active=active.copy(),
                mu_positions=masked_pos,
                data_bits=req.data_bits.copy(),
                cycles_per_bit=req.cycles_per_bit.copy(),
                deadline_s=req.deadline_s.copy(),
                relay_target=relay_target.astype(int),
            ))
        obs.append(CenterObservation(
            serving=self._assoc_last.copy(),
            mu_positions=self.mobility.position.copy(),
            bs_positions=self.bs_positions,
        ))
        return obs

    def global_state(self) -> np.ndarray:
        """Merge of all agents' views, deduplicated, normalized."""
        cfg = self.cfg
        k, m = cfg.num_mus, cfg.num_bss
        w = cfg.area_width_m
        req = self.requests
        assoc = np.zeros((k, m))
        assoc[np.arange(k), self._assoc_last] = 1.0
        return np.concatenate([
            self.mobility.position.ravel() / w,
            self.bs_positions.ravel() / w,
            req.active.astype(float),
            req.data_bits / cfg.data_bits_max,
            req.cycles_per_bit / cfg.cycles_per_bit_max,
            req.deadline_s / cfg.slot_s,
            assoc.ravel(),
            (self._routes_last >= 0).astype(float),
        ])

    # ---- stepping ----------------------------------------------------------

    def _split_actions(self, actions):
        cfg = self.cfg
        k, m = cfg.num_mus, cfg.num_bss
        if len(actions) != cfg.num_agents:
            raise ValueError(
                f"expected {cfg.num_agents} actions, got {len(actions)}")
        mu_actions = actions[:k]
        bs_actions = actions[k:k + m]
        center_action = actions[k + m]
        for a in mu_actions:
            if not isinstance(a, MUAction):
                raise ValueError("first K actions must be MUAction")
            if not 0 <= int(a.bs_choice) < m:
                raise ValueError(f"bs_choice out of range: {a.bs_choice}")
            if not 0.0 <= float(a.power_raw) <= 1.0:
                raise ValueError(f"power_raw out of [0, 1]: {a.power_raw}")
        for a in bs_actions:
            if not isinstance(a, BSAction):
                raise ValueError("middle M actions must be BSAction")
            for arr in (a.wired_raw, a.compute_raw):
                arr = np.asarray(arr, dtype=float)
                if arr.shape != (k,):
                    raise ValueError("BS shares must be (K,) vectors")
                if np.any(arr < 0.0) or np.any(arr > 1.0):
                    raise ValueError("BS shares must lie in [0, 1]")
        if not isinstance(center_action, CenterAction):
            raise ValueError("last action must be CenterAction")
        dep = np.asarray(center_action.deployment, dtype=int)
        if dep.shape != (k,):
            raise ValueError("deployment suggestion must cover every user")
        if np.any(dep < 0) or np.any(dep >= m):
            raise ValueError("deployment suggestion out of range")
        return mu_actions, bs_actions, dep

    def _gather_shares(self, bs_actions, serving, deployment, participating):
        """Physical wired/compute requests implied by the BS actions for a
        given placement, then capacity projections."""
        cfg = self.cfg
        k, m = cfg.num_mus, cfg.num_bss
        raw_w = np.zeros((m, m, k))
        raw_f = np.zeros((m, k))
        for u in range(k):
            if not participating[u]:
                continue
            i = int(serving[u])
            j = int(deployment[u])
            raw_f[j, u] = float(bs_actions[j].compute_raw[u]) * cfg.f_max_hz
            if i != j:
                raw_w[i, j, u] = float(bs_actions[i].wired_raw[u]) \
                    * self.capacity[i, j]
        relay = relay_pattern(serving, deployment, participating, m)
        alloc_w = project_wired_allocations(raw_w, self.capacity, relay)
        alloc_f = project_compute(raw_f, cfg.f_max_hz)
        return relay, alloc_w, alloc_f

    def step(self, actions):
        if self.clock is None:
            raise RuntimeError("call reset() before step()")
        if self.clock.done:
            raise RuntimeError("episode is over; call reset()")
        cfg = self.cfg
        k = cfg.num_mus
        n = self.clock.slot
        mu_actions, bs_actions, suggested = self._split_actions(actions)

        # placement binds only on the frame boundary; the frame-start
        # backlog freezes there for the whole frame's cost terms
        if self.clock.is_frame_boundary:
            self._y_frame_start = self.queues.copy()
            self.deployment = apply_deployment(
                self.deployment, suggested, n, cfg.frame_slots,
                cfg.migration_slots)

        serving = np.array([int(a.bs_choice) for a in mu_actions], dtype=int)
        powers = np.array([scale_unit(a.power_raw, 0.0, cfg.p_max_w)
                           for a in mu_actions])
        active = self.requests.active
        blocked = blocked_mask(self.deployment, n)
        transmitting = active & ~blocked

        relay, alloc_w, alloc_f = self._gather_shares(
            bs_actions, serving, self.deployment.server, transmitting)

        gains = draw_channels(self.mobility.position, self.bs_positions,
                              self.channel_params, self._rng)

        rates = np.zeros(k)
        for u in range(k):
            if transmitting[u]:
                rates[u] = uplink_rate(u, gains, serving, powers,
                                       transmitting, self.channel_params)

        delay = np.zeros(k)
        fail = np.zeros(k, dtype=np.int8)
        energy = np.zeros(k)
        wired = np.zeros(k)
        compute = np.zeros(k)
        for u in range(k):
            if not active[u]:
                continue
            if blocked[u]:
                delay[u] = math.inf
                fail[u] = 1
                continue
            i = int(serving[u])
            j = int(self.deployment.server[u])
            wired[u] = float(alloc_w[i, j, u]) if i != j else 0.0
            compute[u] = float(alloc_f[j, u])
            delay[u] = sync_delay(
                float(self.requests.data_bits[u]),
                float(self.requests.cycles_per_bit[u]),
                rates[u], wired[u], compute[u], colocated=(i == j))
            fail[u] = failure_indicator(
                True, False, delay[u], float(self.requests.deadline_s[u]))
            energy[u] = transmit_energy(
                powers[u], float(self.requests.data_bits[u]), rates[u],
                cfg.slot_s)

        reward_center, hypo_delay = self._placement_reward(
            bs_actions, serving, suggested, active)

        self.queues = queue_step(self.queues, fail, cfg.fail_tolerance)
        cost = per_slot_cost(energy, self._y_frame_start, fail,
                             cfg.fail_tolerance, cfg.queue_weight,
                             cfg.cost_normalizer)
        reward_global = -cfg.reward_scale * float(cost.sum())

        extras = {
            "gains": gains,
            "serving": serving,
            "powers_w": powers,
            "active": active.copy(),
            "blocked": blocked.copy(),
            "transmitting": transmitting.copy(),
            "data_bits": self.requests.data_bits.copy(),
            "cycles_per_bit": self.requests.cycles_per_bit.copy(),
            "deadline_s": self.requests.deadline_s.copy(),
            "deployment": self.deployment.server.copy(),
            "suggested": suggested.copy(),
            "rates_bps": rates,
            "wired_bps": wired,
            "compute_hz": compute,
            "relay": relay,
            "y_frame_start": self._y_frame_start.copy(),
            "hypothetical_delay_s": hypo_delay,
        }

        # advance to the next slot: move users, tick the clock, pre-draw
        # the next slot's requests so the new observations carry them
        self.mobility = step_mobility(self.mobility, self.mobility_params,
                                      self._rng)
        self.clock.advance()
        self._assoc_last = serving.copy()
        self._routes_last = np.where(
            (serving != self.deployment.server) & transmitting,
            self.deployment.server, -1).astype(int)
        self.requests = self._draw_requests()

        outcome = SlotOutcome(
            slot=n,
            frame=n // cfg.frame_slots,
            delay_s=delay,
            fail=fail,
            energy_j=energy,
            cost=cost,
            queue=self.queues.copy(),
            reward_global=reward_global,
            reward_center=reward_center,
            done=self.clock.done,
            extras=extras,
        )
        return self.observations(), outcome

    def _placement_reward(self, bs_actions, serving, suggested, active):
        """Score the center's per-slot placement suggestion.

        Evaluates the relay and compute legs as if every active twin sat
        at the suggested server, under the same BS shares and capacity
        projections; the radio leg is placement-independent and excluded.
        Each per-user delay is clipped to the slot length, which doubles
        as the penalty when a needed leg got no resources.
        """
        cfg = self.cfg
        k = cfg.num_mus
        _, alloc_w, alloc_f = self._gather_shares(
            bs_actions, serving, suggested, active)
        hypo = np.zeros(k)
        for u in range(k):
            if not active[u]:
                continue
            i = int(serving[u])
            j = int(suggested[u])
            bits = float(self.requests.data_bits[u])
            legs = 0.0
            if i != j:
                w = float(alloc_w[i, j, u])
                legs += bits / w if w > 0.0 else math.inf
            f = float(alloc_f[j, u])
            legs += bits * float(self.requests.cycles_per_bit[u]) / f \
                if f > 0.0 else math.inf
            hypo[u] = min(legs, cfg.slot_s)
        return -float(hypo.sum()) / k, hypo
