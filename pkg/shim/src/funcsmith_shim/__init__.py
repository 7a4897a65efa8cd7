"""Execution worker for candidate programs, plus a syntax-tree call extractor.

Runs as a single-threaded subprocess speaking newline-delimited JSON on
stdin/stdout (`shim serve`); parallelism comes from running several workers.
"""

__version__ = "0.1.0"

from .calls import extract_calls
from .sandbox import ExecResult, run_candidate
from .server import handle_request, serve

__all__ = ["extract_calls", "ExecResult", "run_candidate", "handle_request", "serve"]
