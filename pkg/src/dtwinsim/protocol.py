"""Line-delimited JSON control protocol for external trainers.

One TCP connection carries one isolated session with its own
environment instance; concurrent sessions never share random state.
Every request is a single JSON object on one line with an ``op`` field
(``spec``, ``reset``, ``step``, ``close``); every reply carries
``ok: true`` plus payload, or ``ok: false`` plus an error message.  A
malformed request poisons neither the session nor the server.
"""
from __future__ import annotations

import json
import socket
import socketserver
import threading

import numpy as np

from .config import NetworkConfig
from .env import BSAction, CenterAction, MUAction, TwinSyncEnv


def _wire_actions(env: TwinSyncEnv, payload):
    """Decode the wire action list into typed env actions."""
    cfg = env.cfg
    if not isinstance(payload, list) or len(payload) != cfg.num_agents:
        raise ValueError(f"expected {cfg.num_agents} actions")
    k, m = cfg.num_mus, cfg.num_bss
    actions = []
    for idx, item in enumerate(payload):
        if not isinstance(item, dict):
            raise ValueError(f"action {idx} must be an object")
        disc = item.get("discrete", [])
        cont = item.get("continuous", [])
        if idx < k:
            if len(disc) != 1 or len(cont) != 1:
                raise ValueError(f"user action {idx} needs 1 discrete + 1 continuous")
            actions.append(MUAction(bs_choice=int(disc[0]),
                                    power_raw=float(cont[0])))
        elif idx < k + m:
            if len(disc) != 0 or len(cont) != 2 * k:
                raise ValueError(f"BS action {idx} needs {2 * k} continuous values")
            cont = np.asarray(cont, dtype=float)
            actions.append(BSAction(wired_raw=cont[:k], compute_raw=cont[k:]))
        else:
            if len(disc) != k or len(cont) != 0:
                raise ValueError(f"center action needs {k} discrete values")
            actions.append(CenterAction(
                deployment=np.asarray(disc, dtype=int)))
    return actions


def _obs_payload(env: TwinSyncEnv, obs) -> dict:
    cfg = env.cfg
    return {
        "obs": [o.vector(cfg).tolist() for o in obs],
        "state": env.global_state().tolist(),
    }


class _Session:
    """One environment behind one connection."""

    def __init__(self, cfg: NetworkConfig):
        self.cfg = cfg
        self.env = TwinSyncEnv(cfg)
        self.started = False

    def handle(self, request: dict) -> dict:
        op = request.get("op")
        if op == "spec":
            return self._spec()
        if op == "reset":
            seed = request.get("seed")
            if seed is not None and not isinstance(seed, int):
                raise ValueError("seed must be an integer")
            obs = self.env.reset(seed=seed)
            self.started = True
            reply = {"ok": True, "slot": 0, "frame": 0}
            reply.update(_obs_payload(self.env, obs))
            return reply
        if op == "step":
            if not self.started:
                raise ValueError("reset the session before stepping")
            actions = _wire_actions(self.env, request.get("actions"))
            obs, outcome = self.env.step(actions)
            reply = {
                "ok": True,
                "slot": outcome.slot + 1,
                "frame": outcome.frame,
                "reward_global": outcome.reward_global,
                "reward_center": outcome.reward_center,
                "done": outcome.done,
                "info": {
                    "energy_j": float(outcome.energy_j.sum()),
                    "failures": int(outcome.fail.sum()),
                    "requests": int(outcome.extras["active"].sum()),
                    "mean_queue": float(outcome.queue.mean()),
                },
            }
            reply.update(_obs_payload(self.env, obs))
            return reply
        if op == "close":
            return {"ok": True, "closing": True}
        raise ValueError(f"unknown op: {op!r}")

    def _spec(self) -> dict:
        cfg = self.cfg
        specs = self.env.agent_specs()
        return {
            "ok": True,
            "num_agents": cfg.num_agents,
            "num_mus": cfg.num_mus,
            "num_bss": cfg.num_bss,
            "frame_slots": cfg.frame_slots,
            "episode_frames": cfg.episode_frames,
            "episode_slots": cfg.episode_slots,
            "slot_s": cfg.slot_s,
            "state_dim": self._state_dim(),
            "raw_action_range": [0.0, 1.0],
            "agents": [{
                "role": s.role,
                "obs_dim": s.obs_dim,
                "discrete": list(s.discrete),
                "continuous": s.continuous,
            } for s in specs],
            "config": cfg.to_dict(),
        }

    def _state_dim(self) -> int:
        cfg = self.cfg
        return 7 * cfg.num_mus + 2 * cfg.num_bss + cfg.num_mus * cfg.num_bss


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        session = _Session(self.server.cfg)  # type: ignore[attr-defined]
        while True:
            line = self.rfile.readline()
            if not line:
                break
            try:
                request = json.loads(line.decode("utf-8"))
                if not isinstance(request, dict):
                    raise ValueError("request must be a JSON object")
                reply = session.handle(request)
            except Exception as exc:  # session survives bad requests
                reply = {"ok": False, "error": str(exc)}
            self.wfile.write(json.dumps(reply).encode("utf-8") + b"\n")
            self.wfile.flush()
            if reply.get("closing"):
                break


class ProtocolServer(socketserver.ThreadingTCPServer):
    """Threaded server; each connection gets an isolated session."""
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, cfg: NetworkConfig, host: str = "127.0.0.1",
                 port: int = 0):
        super().__init__((host, port), _Handler)
        self.cfg = cfg

    @property
    def endpoint(self) -> tuple[str, int]:
        return self.server_address[0], self.server_address[1]

    def start_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread


def serve_protocol(cfg: NetworkConfig, host: str = "127.0.0.1",
                   port: int = 5858) -> None:
    """Serve sessions until interrupted."""
    with ProtocolServer(cfg, host, port) as server:
        addr = server.endpoint
        print(f"serving on {addr[0]}:{addr[1]} "
              f"(K={cfg.num_mus}, M={cfg.num_bss}, {cfg.episode_slots} slots)",
              flush=True)
        server.serve_forever()


class ProtocolClient:
    """Minimal blocking client, used by the test suite."""

    def __init__(self, host: str, port: int, timeout: float = 30.0):
        self.sock = socket.create_connection((host, port), timeout=timeout)
        self._file = self.sock.makefile("rwb")

    def request(self, payload: dict) -> dict:
        self._file.write(json.dumps(payload).encode("utf-8") + b"\n")
        self._file.flush()
        line = self._file.readline()
        if not line:
            raise ConnectionError("server closed the connection")
        return json.loads(line.decode("utf-8"))

    def close(self) -> None:
        try:
            self._file.close()
        finally:
            self.sock.close()
