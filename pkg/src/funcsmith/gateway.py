"""Chat-completion access: one live HTTP backend, one deterministic replay.

Requests are identified by a fingerprint (a sha-256 over model, temperature,
and the role-tagged message contents joined with unit separators), which is
what makes record/replay exact: a recorded transcript maps fingerprints to
the list of responses served for that exact request, consumed in order when
the same request repeats.

The live backend talks the ubiquitous ``/v1/chat/completions`` wire shape;
the endpoint base is configurable so any compatible server works. The API
key comes from the ``FUNCSMITH_API_KEY`` environment variable.
"""

from __future__ import annotations

import difflib
import hashlib
import json
import os
import random
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from .errors import GatewayError, HttpError, RateLimitedError, ReplayMissError
from .prompts import ChatMessage, PromptBundle

API_KEY_ENV = "FUNCSMITH_API_KEY"
BACKENDS = ("live", "replay", "record")

_UNIT_SEP = "\x1f"
_RECORD_SEP = "\x1e"


@dataclass(frozen=True)
class ChatRequest:
    model: str
    messages: tuple[ChatMessage, ...]
    temperature: float
    max_tokens: int | None = None

    def __post_init__(self):
        if not self.messages:
            raise ValueError("request needs at least one message")
        if not (0.0 <= self.temperature <= 2.0):
            raise ValueError(f"temperature {self.temperature} outside [0, 2]")


@dataclass(frozen=True)
class Completion:
    content: str
    finish_reason: str
    usage: dict | None = None


def request_from_bundle(bundle: PromptBundle, model: str, max_tokens: int | None = None) -> ChatRequest:
    return ChatRequest(
        model=model,
        messages=bundle.messages,
        temperature=bundle.temperature,
        max_tokens=max_tokens,
    )


def fingerprint(request: ChatRequest) -> str:
    """Stable 256-bit digest of (model, messages, temperature)."""
    parts = [request.model, repr(float(request.temperature))]
    parts.extend(f"{m.role}{_UNIT_SEP}{m.content}" for m in request.messages)
    blob = _RECORD_SEP.join(parts).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


class Transcript:
    """Fingerprint -> ordered response texts, with file persistence."""

    def __init__(self, entries: dict[str, list[str]] | None = None,
                 path: str | Path | None = None):
        self.entries: dict[str, list[str]] = {k: list(v) for k, v in (entries or {}).items()}
        self.path = Path(path) if path is not None else None
        self._cursor: dict[str, int] = {}

    @classmethod
    def load(cls, path: str | Path) -> "Transcript":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(doc, dict):
            raise GatewayError("transcript file must hold a JSON object")
        return cls(entries={k: list(v) for k, v in doc.items()}, path=path)

    def save(self) -> None:
        if self.path is None:
            return
        self.path.write_text(
            json.dumps(self.entries, indent=2) + "\n", encoding="utf-8"
        )

    def append(self, fp: str, content: str) -> None:
        self.entries.setdefault(fp, []).append(content)
        self.save()

    def next_response(self, fp: str) -> str:
        """Consume and return the next unserved entry for ``fp``."""
        served = self._cursor.get(fp, 0)
        available = self.entries.get(fp)
        if available is None:
            raise ReplayMissError(self._miss_message(fp))
        if served >= len(available):
            raise ReplayMissError(
                f"fingerprint {fp} exhausted after {served} response(s)"
            )
        self._cursor[fp] = served + 1
        return available[served]

    def _miss_message(self, fp: str) -> str:
        keys = list(self.entries)
        nearest = difflib.get_close_matches(fp, keys, n=1, cutoff=0.0)
        if not nearest:
            return f"fingerprint {fp} not in empty transcript"
        diff_at = next(
            (i for i, (a, b) in enumerate(zip(fp, nearest[0])) if a != b),
            min(len(fp), len(nearest[0])),
        )
        return (
            f"fingerprint {fp} not in transcript; nearest key {nearest[0]} "
            f"(first differing hex digit at position {diff_at}; "
            f"{len(keys)} key(s) available)"
        )


def default_transport(url: str, headers: dict, payload: dict, timeout_s: float):
    """POST JSON via requests; returns (status_code, body_text)."""
    import requests

    response = requests.post(url, headers=headers, json=payload, timeout=timeout_s)
    return response.status_code, response.text


class Gateway:
    """Uniform ``complete(request)`` over the configured backend.

    Thread-safe: transcript access and the optional request budget are
    internally serialized.
    """

    def __init__(
        self,
        backend: str = "replay",
        model: str = "gpt-4",
        endpoint_base: str = "https://api.openai.com",
        transcript: Transcript | None = None,
        api_key: str | None = None,
        transport=default_transport,
        sleep=time.sleep,
        rng: random.Random | None = None,
        max_tries: int = 5,
        backoff_base_s: float = 0.5,
        backoff_ceiling_s: float = 8.0,
        timeout_s: float = 120.0,
        request_budget: int | None = None,
    ):
        if backend not in BACKENDS:
            raise GatewayError(f"unknown backend {backend!r}")
        if backend in ("replay", "record") and transcript is None:
            raise GatewayError(f"backend {backend!r} needs a transcript")
        self.backend = backend
        self.model = model
        self.endpoint_base = endpoint_base.rstrip("/")
        self.transcript = transcript
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
        self.transport = transport
        self.sleep = sleep
        self.rng = rng or random.Random()
        self.max_tries = max_tries
        self.backoff_base_s = backoff_base_s
        self.backoff_ceiling_s = backoff_ceiling_s
        self.timeout_s = timeout_s
        self.request_budget = request_budget
        self._requests_made = 0
        self._lock = threading.Lock()

    def complete(self, request: ChatRequest) -> Completion:
        self._charge_budget()
        if self.backend == "replay":
            with self._lock:
                content = self.transcript.next_response(fingerprint(request))
            return Completion(content=content, finish_reason="replay")
        completion = self._complete_live(request)
        if self.backend == "record":
            with self._lock:
                self.transcript.append(fingerprint(request), completion.content)
        return completion

    def complete_bundle(self, bundle: PromptBundle) -> Completion:
        return self.complete(request_from_bundle(bundle, model=self.model))

    def _charge_budget(self) -> None:
        if self.request_budget is None:
            return
        with self._lock:
            if self._requests_made >= self.request_budget:
                raise GatewayError(
                    f"request budget of {self.request_budget} exhausted"
                )
            self._requests_made += 1

    def _complete_live(self, request: ChatRequest) -> Completion:
        url = f"{self.endpoint_base}/v1/chat/completions"
        headers = {
            "Authorization": f"Bearer {self.api_key}",
            "Content-Type": "application/json",
        }
        payload = {
            "model": request.model,
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
            "temperature": request.temperature,
        }
        if request.max_tokens is not None:
            payload["max_tokens"] = request.max_tokens
        for attempt in range(self.max_tries):
            status, body = self.transport(url, headers, payload, self.timeout_s)
            if status == 429:
                if attempt == self.max_tries - 1:
                    break
                delay = min(
                    self.backoff_ceiling_s,
                    self.backoff_base_s * (2 ** attempt)
                    + self.rng.random() * self.backoff_base_s,
                )
                self.sleep(delay)
                continue
            if status != 200:
                raise HttpError(status, body[:300])
            return _parse_completion(body)
        raise RateLimitedError(f"still rate-limited after {self.max_tries} tries")


def _parse_completion(body: str) -> Completion:
    try:
        doc = json.loads(body)
        choice = doc["choices"][0]
        return Completion(
            content=choice["message"]["content"],
            finish_reason=choice.get("finish_reason", ""),
            usage=doc.get("usage"),
        )
    except (json.JSONDecodeError, KeyError, IndexError, TypeError) as exc:
        raise GatewayError(f"malformed completion response: {exc}") from exc
