"""Blocking client for the simulator's newline-delimited JSON protocol."""
from __future__ import annotations

import json
import socket
from dataclasses import dataclass, field

import numpy as np


class ProtocolError(RuntimeError):
    """Server replied ok=false; the session itself stays usable."""


@dataclass
class StepReply:
    """One environment transition as seen over the wire."""

    obs: list[np.ndarray]
    state: np.ndarray
    reward_global: float
    reward_center: float
    done: bool
    slot: int
    frame: int
    info: dict = field(default_factory=dict)


class EnvironmentClient:
    """One protocol session: a private environment behind one TCP connection."""

    def __init__(self, host: str, port: int, timeout: float = 120.0):
        self._sock = socket.create_connection((host, port), timeout=timeout)
        self._file = self._sock.makefile("rwb")

    # -- plumbing ---------------------------------------------------------

    def request(self, payload: dict) -> dict:
        """Send one message, return the raw reply; raise on ok=false."""
        self._file.write(json.dumps(payload).encode("utf-8") + b"\n")
        self._file.flush()
        line = self._file.readline()
        if not line:
            raise ConnectionError("server closed the connection")
        reply = json.loads(line.decode("utf-8"))
        if not reply.get("ok", False):
            raise ProtocolError(str(reply.get("error", "unknown protocol error")))
        return reply

    def close(self) -> None:
        try:
            self._file.write(json.dumps({"op": "close"}).encode("utf-8") + b"\n")
            self._file.flush()
            self._file.readline()
        except OSError:
            pass
        finally:
            self._file.close()
            self._sock.close()

    def __enter__(self) -> "EnvironmentClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- protocol ops ------------------------------------------------------

    def spec(self) -> dict:
        return self.request({"op": "spec"})

    def reset(self, seed: int | None = None) -> tuple[list[np.ndarray], np.ndarray]:
        payload: dict = {"op": "reset"}
        if seed is not None:
            payload["seed"] = int(seed)
        reply = self.request(payload)
        return _parse_obs(reply), np.asarray(reply["state"], dtype=float)

    def step(self, actions: list[dict]) -> StepReply:
        reply = self.request({"op": "step", "actions": actions})
        return StepReply(
            obs=_parse_obs(reply),
            state=np.asarray(reply["state"], dtype=float),
            reward_global=float(reply["reward_global"]),
            reward_center=float(reply["reward_center"]),
            done=bool(reply["done"]),
            slot=int(reply["slot"]),
            frame=int(reply["frame"]),
            info=dict(reply.get("info", {})),
        )


def _parse_obs(reply: dict) -> list[np.ndarray]:
    return [np.asarray(vec, dtype=float) for vec in reply["obs"]]
