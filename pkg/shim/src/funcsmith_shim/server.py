"""Line protocol: one JSON request per stdin line, one JSON response out.

Responses are written and flushed in request order, so clients may pipeline.
Anything that cannot be served (bad JSON, unknown op, missing fields) gets a
``status: error`` response with ``error_kind: protocol`` and the loop keeps
going; only a broken stdout is unrecoverable.
"""

from __future__ import annotations

import json
import sys

from .calls import extract_calls
from .sandbox import run_candidate


def handle_request(request: dict) -> dict:
    op = request.get("op")
    if op == "ping":
        return {"status": "ok", "result": "pong"}
    if op == "exec":
        source = request.get("source")
        if not isinstance(source, str):
            return _protocol_error("exec needs a string 'source'")
        try:
            wall_ms = float(request.get("wall_ms", 10000.0))
            memory_mb = float(request.get("memory_mb", 512.0))
        except (TypeError, ValueError):
            return _protocol_error("exec limits must be numbers")
        if wall_ms <= 0 or memory_mb <= 0:
            return _protocol_error("exec limits must be positive")
        result = run_candidate(source, wall_ms, memory_mb)
        return {
            "status": "ok",
            "result": {
                "outcome": result.outcome,
                "stderr_tail": result.stderr_tail,
                "duration_ms": result.duration_ms,
            },
        }
    if op == "extract_calls":
        source = request.get("source")
        if not isinstance(source, str):
            return _protocol_error("extract_calls needs a string 'source'")
        try:
            calls = extract_calls(source)
        except SyntaxError as exc:
            return {"status": "error", "error_kind": "syntax", "detail": str(exc)}
        return {"status": "ok", "result": {"calls": calls}}
    return _protocol_error(f"unknown op {op!r}")


def _protocol_error(detail: str) -> dict:
    return {"status": "error", "error_kind": "protocol", "detail": detail}


def serve(stdin=None, stdout=None) -> int:
    """Serve until stdin closes. Returns the process exit code."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError as exc:
            response = _protocol_error(f"bad JSON: {exc.msg}")
        else:
            if isinstance(request, dict):
                response = handle_request(request)
            else:
                response = _protocol_error("request must be a JSON object")
        try:
            stdout.write(json.dumps(response) + "\n")
            stdout.flush()
        except (BrokenPipeError, OSError):
            return 1
    return 0
