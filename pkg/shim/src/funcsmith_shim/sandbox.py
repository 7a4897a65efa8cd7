"""Candidate execution in a fresh, resource-limited child process.

Every exec request gets its own interpreter (isolated mode, own session) so
no state leaks between candidates and a wall-clock overrun can be killed as
a whole process group, grandchildren included. Address-space and CPU rlimits
are applied in the child before exec. This is a process-level boundary, not
a security sandbox: it contains runaway candidates, not adversaries.
"""

from __future__ import annotations

import os
import signal
import subprocess
import sys
import time
from dataclasses import dataclass

STDERR_TAIL_BYTES = 4096

# Child exit codes; chosen clear of small codes candidate code might exit with.
_EXIT_SYNTAX = 113
_EXIT_ASSERTION = 114
_EXIT_RUNTIME = 115

_CHILD_RUNNER = f"""
import sys
src = sys.stdin.read()
try:
    code = compile(src, "<candidate>", "exec")
except SyntaxError:
    import traceback; traceback.print_exc(); sys.exit({_EXIT_SYNTAX})
try:
    exec(code, {{"__name__": "__main__"}})
except AssertionError:
    import traceback; traceback.print_exc(); sys.exit({_EXIT_ASSERTION})
except SystemExit as exc:
    sys.exit(0 if not exc.code else {_EXIT_RUNTIME})
except BaseException:
    import traceback; traceback.print_exc(); sys.exit({_EXIT_RUNTIME})
sys.exit(0)
"""

_EXIT_OUTCOMES = {
    0: "pass",
    _EXIT_SYNTAX: "syntax",
    _EXIT_ASSERTION: "assertion",
    _EXIT_RUNTIME: "runtime",
}


@dataclass(frozen=True)
class ExecResult:
    outcome: str  # pass | syntax | assertion | runtime | timeout
    stderr_tail: str
    duration_ms: float


def _limit_setter(memory_mb: float, wall_ms: float):
    def apply_limits():
        import resource

        memory_bytes = int(memory_mb * 1024 * 1024)
        resource.setrlimit(resource.RLIMIT_AS, (memory_bytes, memory_bytes))
        cpu_seconds = max(1, int(wall_ms / 1000.0) + 1)
        resource.setrlimit(resource.RLIMIT_CPU, (cpu_seconds, cpu_seconds))
        resource.setrlimit(resource.RLIMIT_CORE, (0, 0))

    return apply_limits


def run_candidate(source: str, wall_ms: float, memory_mb: float) -> ExecResult:
    """Compile and run ``source`` in a fresh child; always reaps the child."""
    start = time.monotonic()
    child = subprocess.Popen(
        [sys.executable, "-I", "-c", _CHILD_RUNNER],
        stdin=subprocess.PIPE,
        stdout=subprocess.DEVNULL,
        stderr=subprocess.PIPE,
        start_new_session=True,
        preexec_fn=_limit_setter(memory_mb, wall_ms),
    )
    timed_out = False
    try:
        _, stderr = child.communicate(source.encode("utf-8"), timeout=wall_ms / 1000.0)
    except subprocess.TimeoutExpired:
        timed_out = True
        _kill_group(child)
        _, stderr = child.communicate()
    duration_ms = (time.monotonic() - start) * 1000.0
    tail = (stderr or b"")[-STDERR_TAIL_BYTES:].decode("utf-8", "replace")
    if timed_out:
        return ExecResult(outcome="timeout", stderr_tail=tail, duration_ms=duration_ms)
    returncode = child.returncode
    if returncode in _EXIT_OUTCOMES:
        return ExecResult(_EXIT_OUTCOMES[returncode], tail, duration_ms)
    if returncode == -signal.SIGXCPU:
        return ExecResult("timeout", tail, duration_ms)
    if returncode < 0:
        detail = f"terminated by signal {-returncode}"
        return ExecResult("runtime", f"{tail}\n{detail}".strip(), duration_ms)
    return ExecResult("runtime", f"{tail}\nexit code {returncode}".strip(), duration_ms)


def _kill_group(child: subprocess.Popen) -> None:
    try:
        os.killpg(os.getpgid(child.pid), signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        # group already gone; fall back to the child itself
        try:
            child.kill()
        except ProcessLookupError:
            pass
