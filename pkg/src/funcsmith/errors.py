"""Exception hierarchy shared across the funcsmith package."""

from __future__ import annotations


class FuncsmithError(Exception):
    """Base class for all funcsmith errors."""


class InvalidSkillError(FuncsmithError):
    """A skill function violates its structural invariants."""


class DuplicateNameError(FuncsmithError):
    """A skill with this name is already in the valid set."""


class RestrictedNameError(FuncsmithError):
    """The name is on the invalid (restricted) list."""


class SchemaError(FuncsmithError):
    """A persisted file has the wrong version or violates invariants."""


class ParseError(FuncsmithError):
    """A dataset record could not be parsed.

    ``line`` is the 1-based line number for line-oriented formats, or None.
    """

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class MissingOutcomeError(FuncsmithError):
    """An outcome record required by a subset rule is absent."""


class MissingReferenceError(FuncsmithError):
    """A subset rule needs a reference solution the task does not have."""


class EmptyLibraryError(FuncsmithError):
    """Prompt rendering with full sources requires a non-empty valid set."""


class EmptyOutputError(FuncsmithError):
    """Model output is empty or whitespace-only."""


class NoFunctionFoundError(FuncsmithError):
    """Extracted code contains no function definition."""


class EmptyInputError(FuncsmithError):
    """An aggregation was asked for zero reports."""


class DomainError(FuncsmithError):
    """Arguments outside the documented domain of a computation."""


class ShimUnavailableError(FuncsmithError):
    """No execution worker could be started or acquired."""


class GatewayError(FuncsmithError):
    """Base class for chat-completion backend errors."""


class HttpError(GatewayError):
    """Non-retryable HTTP failure from the live backend."""

    def __init__(self, status: int, body: str):
        super().__init__(f"HTTP {status}: {body}")
        self.status = status
        self.body = body


class RateLimitedError(GatewayError):
    """Rate limit persisted through every retry."""


class ReplayMissError(GatewayError):
    """Replay transcript has no (remaining) entry for a request fingerprint."""


class ConfigError(FuncsmithError):
    """Invalid run configuration; message names the offending field."""


class EpisodeError(FuncsmithError):
    """A gateway or evaluator failure, annotated with the task it hit."""

