"""Launching a local simulator process for self-contained training runs."""
from __future__ import annotations

import re
import subprocess
import sys
import time

_BANNER = re.compile(r"serving on ([\d.]+):(\d+)")


class SimulatorProcess:
    """Runs the simulator's protocol server as a child process.

    The server is started on an OS-assigned port; the bound address is parsed
    from its startup banner. Use as a context manager so the child is always
    terminated.
    """

    def __init__(self, config_path: str, host: str = "127.0.0.1",
                 python: str = sys.executable, startup_timeout: float = 30.0):
        self.config_path = config_path
        self.requested_host = host
        self.python = python
        self.startup_timeout = startup_timeout
        self.process: subprocess.Popen | None = None
        self.host: str | None = None
        self.port: int | None = None

    def start(self) -> "SimulatorProcess":
        # -u keeps the banner from sitting in a pipe buffer.
        self.process = subprocess.Popen(
            [self.python, "-u", "-m", "dtwinsim.cli", "serve",
             "--config", self.config_path,
             "--host", self.requested_host, "--port", "0"],
            stdout=subprocess.PIPE, stderr=subprocess.STDOUT, text=True)
        deadline = time.monotonic() + self.startup_timeout
        assert self.process.stdout is not None
        while time.monotonic() < deadline:
            line = self.process.stdout.readline()
            if not line:
                if self.process.poll() is not None:
                    raise RuntimeError(
                        f"simulator exited with code {self.process.returncode} "
                        "before binding")
                continue
            match = _BANNER.search(line)
            if match:
                self.host = match.group(1)
                self.port = int(match.group(2))
                return self
        self.stop()
        raise TimeoutError("simulator did not report a bound port in time")

    def stop(self) -> None:
        if self.process is None:
            return
        self.process.terminate()
        try:
            self.process.wait(timeout=10)
        except subprocess.TimeoutExpired:
            self.process.kill()
            self.process.wait()
        self.process = None

    def __enter__(self) -> "SimulatorProcess":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
