"""Candidate evaluation: sandboxed execution outcomes and pass@k.

Execution itself happens in external worker processes speaking a
newline-delimited JSON protocol on stdin/stdout (one request line, one
response line, in order). This module owns the client side: a small worker
pool, outcome classification, and the unbiased pass@k estimator.

The workers are a process-level boundary only; nothing here is hardened
against genuinely adversarial code.
"""

from __future__ import annotations

import json
import os
import select
import shlex
import subprocess
import threading
import time
from dataclasses import dataclass

from .errors import DomainError, ShimUnavailableError

FAILURE_KINDS = ("parse", "syntax", "runtime", "assertion", "timeout", "sandbox")

# Seconds of slack granted to a worker beyond the candidate's wall limit
# before the client declares it wedged and replaces it.
_WORKER_GRACE_S = 5.0


@dataclass(frozen=True)
class Limits:
    wall_ms: float = 10000.0
    memory_mb: float = 512.0

    def __post_init__(self):
        if self.wall_ms <= 0 or self.memory_mb <= 0:
            raise DomainError("limits must be positive")


@dataclass(frozen=True)
class EvalOutcome:
    """Pass/fail tag for one executed program."""

    tag: str  # "pass" | "fail"
    failure_kind: str | None = None
    detail: str = ""
    duration_ms: float = 0.0

    def __post_init__(self):
        if self.tag not in ("pass", "fail"):
            raise DomainError(f"unknown outcome tag {self.tag!r}")
        if (self.tag == "pass") != (self.failure_kind is None):
            raise DomainError("failure_kind must be present exactly when tag is fail")
        if self.failure_kind is not None and self.failure_kind not in FAILURE_KINDS:
            raise DomainError(f"unknown failure kind {self.failure_kind!r}")

    @property
    def passed(self) -> bool:
        return self.tag == "pass"


def pass_at_k(n: int, c: int, k: int) -> float:
    """Unbiased estimate of the chance that >=1 of k samples is correct.

    Standard estimator 1 - C(n-c, k) / C(n, k), computed in product form so
    large n cannot overflow.
    """
    if not (isinstance(n, int) and isinstance(c, int) and isinstance(k, int)):
        raise DomainError("n, c, k must be integers")
    if not (0 <= c <= n):
        raise DomainError(f"need 0 <= c <= n, got c={c}, n={n}")
    if not (1 <= k <= n):
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    if n - c < k:
        return 1.0
    out = 1.0
    for i in range(n - c + 1, n + 1):
        out *= 1.0 - k / i
    return 1.0 - out


class _Worker:
    """One external worker process plus its line-protocol plumbing."""

    def __init__(self, command: list[str]):
        self.proc = subprocess.Popen(
            command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            bufsize=0,
        )
        self._buffer = b""

    def request(self, payload: dict, deadline_s: float) -> dict:
        line = json.dumps(payload) + "\n"
        self.proc.stdin.write(line.encode("utf-8"))
        self.proc.stdin.flush()
        raw = self._read_line(deadline_s)
        return json.loads(raw)

    def _read_line(self, deadline_s: float) -> str:
        deadline = time.monotonic() + deadline_s
        fd = self.proc.stdout.fileno()
        while b"\n" not in self._buffer:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise TimeoutError("worker did not answer in time")
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                continue
            chunk = os.read(fd, 65536)
            if not chunk:
                raise EOFError("worker closed its output")
            self._buffer += chunk
        raw, self._buffer = self._buffer.split(b"\n", 1)
        return raw.decode("utf-8")

    def alive(self) -> bool:
        return self.proc.poll() is None

    def kill(self):
        if self.proc.poll() is None:
            self.proc.kill()
        try:
            self.proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            pass


DEFAULT_SHIM_COMMAND = "shim serve"


class ShimEvaluator:
    """Evaluates programs through a bounded pool of protocol workers.

    Safe to call from multiple threads; each worker serves one request at a
    time. Dead or wedged workers are replaced transparently; if no worker
    can be started at all, ShimUnavailableError is raised.
    """

    def __init__(self, command: str | list[str] = DEFAULT_SHIM_COMMAND, pool_size: int = 1,
                 acquire_timeout_s: float = 120.0):
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.pool_size = max(1, pool_size)
        self.acquire_timeout_s = acquire_timeout_s
        self._idle: list[_Worker] = []
        self._spawned = 0
        self._lock = threading.Lock()
        self._available = threading.Condition(self._lock)
        self._closed = False

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def evaluate(self, program: str, limits: Limits | None = None) -> EvalOutcome:
        """Run ``program`` in a fresh sandboxed child; classify the outcome."""
        limits = limits or Limits()
        payload = {
            "op": "exec",
            "source": program,
            "wall_ms": limits.wall_ms,
            "memory_mb": limits.memory_mb,
        }
        deadline = limits.wall_ms / 1000.0 + _WORKER_GRACE_S
        response = self._roundtrip(payload, deadline)
        if response is None:
            return EvalOutcome(
                tag="fail", failure_kind="sandbox",
                detail="worker crashed or broke protocol during execution",
            )
        if response.get("status") != "ok":
            return EvalOutcome(
                tag="fail", failure_kind="sandbox",
                detail=f"worker error: {response.get('error_kind')}: {response.get('detail', '')}"[:4096],
            )
        result = response.get("result", {})
        outcome = result.get("outcome")
        duration = float(result.get("duration_ms", 0.0))
        detail = str(result.get("stderr_tail", ""))[:4096]
        if outcome == "pass":
            return EvalOutcome(tag="pass", duration_ms=duration)
        if outcome in ("syntax", "assertion", "runtime", "timeout"):
            return EvalOutcome(tag="fail", failure_kind=outcome, detail=detail, duration_ms=duration)
        return EvalOutcome(
            tag="fail", failure_kind="sandbox",
            detail=f"unrecognized worker outcome {outcome!r}", duration_ms=duration,
        )

    def extract_calls(self, source: str) -> list[dict]:
        """Syntax-tree call extraction done by a worker; raises on failure."""
        response = self._roundtrip({"op": "extract_calls", "source": source}, 30.0)
        if response is None:
            raise ShimUnavailableError("worker crashed during extract_calls")
        if response.get("status") != "ok":
            raise ValueError(
                f"extract_calls failed: {response.get('error_kind')}: {response.get('detail', '')}"
            )
        return list(response["result"]["calls"])

    def ping(self) -> bool:
        response = self._roundtrip({"op": "ping"}, 10.0)
        return bool(response) and response.get("status") == "ok"

    def close(self):
        with self._lock:
            self._closed = True
            workers, self._idle = self._idle, []
            self._spawned = 0
        for worker in workers:
            worker.kill()

    def _roundtrip(self, payload: dict, deadline_s: float) -> dict | None:
        """Send one request on a pooled worker; None means the worker died."""
        worker = self._acquire()
        try:
            response = worker.request(payload, deadline_s)
        except (OSError, EOFError, TimeoutError, json.JSONDecodeError, ValueError):
            self._discard(worker)
            return None
        self._release(worker)
        return response

    def _acquire(self) -> _Worker:
        deadline = time.monotonic() + self.acquire_timeout_s
        with self._available:
            while True:
                if self._closed:
                    raise ShimUnavailableError("evaluator is closed")
                if self._idle:
                    return self._idle.pop()
                if self._spawned < self.pool_size:
                    self._spawned += 1
                    break  # spawn outside the lock
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    raise ShimUnavailableError(
                        f"no worker free after {self.acquire_timeout_s:.0f}s "
                        f"(pool size {self.pool_size})"
                    )
                self._available.wait(remaining)
        try:
            return _Worker(self.command)
        except OSError as exc:
            with self._available:
                self._spawned -= 1
                self._available.notify()
            raise ShimUnavailableError(
                f"cannot start worker {' '.join(self.command)!r}: {exc}"
            ) from exc

    def _release(self, worker: _Worker):
        if not worker.alive():
            self._discard(worker)
            return
        with self._available:
            if self._closed:
                pass
            else:
                self._idle.append(worker)
                self._available.notify()
                return
        worker.kill()

    def _discard(self, worker: _Worker):
        worker.kill()
        with self._available:
            self._spawned -= 1
            self._available.notify()
