from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
SHIM_CMD = [sys.executable, "-m", "funcsmith_shim", "serve"]


class ShimClient:
    """Raw protocol client; gives tests full control over the byte stream."""

    def __init__(self):
        self.proc = subprocess.Popen(
            SHIM_CMD,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )

    def send_line(self, line: str) -> None:
        self.proc.stdin.write(line + "\n")
        self.proc.stdin.flush()

    def recv(self) -> dict:
        line = self.proc.stdout.readline()
        if not line:
            raise EOFError("shim closed its output")
        return json.loads(line)

    def request(self, payload: dict) -> dict:
        self.send_line(json.dumps(payload))
        return self.recv()

    def exec(self, source: str, wall_ms: float = 10000, memory_mb: float = 512) -> dict:
        response = self.request(
            {"op": "exec", "source": source, "wall_ms": wall_ms, "memory_mb": memory_mb}
        )
        assert response["status"] == "ok", response
        return response["result"]

    def extract_calls(self, source: str) -> list[dict]:
        response = self.request({"op": "extract_calls", "source": source})
        assert response["status"] == "ok", response
        return response["result"]["calls"]

    def close(self) -> int:
        self.proc.stdin.close()
        try:
            return self.proc.wait(timeout=10)
        except subprocess.TimeoutExpired:
            self.proc.kill()
            self.proc.wait()
            return -9


@pytest.fixture
def shim():
    client = ShimClient()
    yield client
    client.close()


@pytest.fixture(scope="module")
def shared_shim():
    client = ShimClient()
    yield client
    client.close()
