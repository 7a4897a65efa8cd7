"""Extraction of executable code from raw chat-model output.

Chat models answer in whatever shape they like: the requested comment-marker
format, a fenced markdown block, prose followed by code, or bare code. The
extractor tries those shapes in that fixed order and records which rule
produced the result. A rule only counts as having fired if it yields
non-empty code; otherwise the next rule gets a chance.

Fence delimiter lines never survive extraction, whichever rule fires.
"""

from __future__ import annotations

import re
import textwrap
from dataclasses import dataclass

from .errors import EmptyOutputError, NoFunctionFoundError
from .library import LibraryState

STRATEGIES = ("markers", "fenced_block", "heuristic", "whole_text")

_FENCE = "```"

_DEFINITION_RE = re.compile(r"^(?:async[ \t]+def|def|class)\b|^@\w|^import\b|^from\b")
_STATEMENT_KEYWORD_RE = re.compile(
    r"^(?:return|if|for|while|with|try|raise|assert|yield|del|global|nonlocal|"
    r"pass|break|continue|print|lambda)\b"
)
_ASSIGNMENT_RE = re.compile(r"^[A-Za-z_][\w.\[\]'\" ]*?(?:[-+*/%&|^]|//|\*\*)?=(?!=)")
_CALL_STMT_RE = re.compile(r"^[A-Za-z_][\w.]*\s*\(")
_DEF_NAME_RE = re.compile(r"^(?:async[ \t]+)?def[ \t]+([A-Za-z_]\w*)[ \t]*\(", re.M)


@dataclass(frozen=True)
class ParsedCode:
    code: str
    strategy: str
    warnings: tuple[str, ...] = ()


def extract_completion(raw: str, config) -> ParsedCode:
    """Pull the completion code out of ``raw`` model output.

    ``config`` supplies the marker strings (see prompts.TemplateConfig).
    """
    if not raw.strip():
        raise EmptyOutputError("model output is empty")
    return _extract(raw, config.marker_completion)


def extract_subfunction(raw: str, config) -> tuple[ParsedCode, str]:
    """Extract proposed sub-function code plus its defined name."""
    if not raw.strip():
        raise EmptyOutputError("model output is empty")
    parsed = _extract(raw, config.marker_subfunction)
    match = _DEF_NAME_RE.search(textwrap.dedent(parsed.code))
    if match is None:
        raise NoFunctionFoundError("extracted code defines no function")
    return parsed, match.group(1)


def _extract(raw: str, marker: str) -> ParsedCode:
    warnings: list[str] = []
    code = _try_markers(raw, marker)
    if code:
        return ParsedCode(code=code, strategy="markers", warnings=tuple(warnings))
    code = _try_fenced(raw)
    if code:
        return ParsedCode(code=code, strategy="fenced_block", warnings=tuple(warnings))
    code = _try_heuristic(raw)
    if code:
        return ParsedCode(code=code, strategy="heuristic", warnings=tuple(warnings))
    code = _trim_blank_lines(_drop_fence_lines(raw))
    if not code:
        warnings.append("output reduced to nothing after removing fence lines")
    return ParsedCode(code=code, strategy="whole_text", warnings=tuple(warnings))


def _try_markers(raw: str, marker: str) -> str:
    idx = raw.find(marker)
    if idx < 0:
        return ""
    tail = raw[idx + len(marker):]
    lines = tail.split("\n")
    if lines and lines[0].strip() == "":
        lines = lines[1:]
    k = 0
    while k < len(lines) and lines[k].strip() == "":
        k += 1
    body: list[str] = []
    if k < len(lines) and _is_fence(lines[k]):
        # The completion itself is wrapped in a fenced block.
        for line in lines[k + 1:]:
            if _is_fence(line):
                break
            body.append(line)
    else:
        # Stop at a fence: either the close of an outer block or an epilogue.
        for line in lines:
            if _is_fence(line):
                break
            body.append(line)
    return _trim_blank_lines("\n".join(body))


def _try_fenced(raw: str) -> str:
    lines = raw.split("\n")
    open_idx = None
    for idx, line in enumerate(lines):
        if _is_fence(line):
            open_idx = idx
            break
    if open_idx is None:
        return ""
    body: list[str] = []
    for line in lines[open_idx + 1:]:
        if _is_fence(line):
            break
        body.append(line)
    return _trim_blank_lines("\n".join(body))


def _try_heuristic(raw: str) -> str:
    lines = raw.split("\n")
    prose_before = False
    for idx, line in enumerate(lines):
        if not line.strip():
            continue
        if _DEFINITION_RE.match(line):
            return _trim_blank_lines(_drop_fence_lines("\n".join(lines[idx:])))
        statement = not line[0].isspace() and (
            _STATEMENT_KEYWORD_RE.match(line)
            or _ASSIGNMENT_RE.match(line)
            or _CALL_STMT_RE.match(line)
        )
        if statement and prose_before:
            return _trim_blank_lines(_drop_fence_lines("\n".join(lines[idx:])))
        prose_before = not statement
    return ""


def _is_fence(line: str) -> bool:
    return line.lstrip().startswith(_FENCE)


def _drop_fence_lines(text: str) -> str:
    return "\n".join(line for line in text.split("\n") if not _is_fence(line))


def _trim_blank_lines(text: str) -> str:
    lines = text.split("\n")
    start = 0
    end = len(lines)
    while start < end and not lines[start].strip():
        start += 1
    while end > start and not lines[end - 1].strip():
        end -= 1
    return "\n".join(lines[start:end])


def assemble_program(task, completion: ParsedCode, library: LibraryState) -> str:
    """Concatenate library sources, the completed function, and the tests.

    If the completion restates a top-level definition of the task's entry
    point, the task header is dropped in its favor. A zero-indent completion
    body that starts with a plain statement is nested one level under the
    header; definitions and already-indented bodies are left alone.
    """
    body = completion.code
    entry_def = re.compile(
        rf"^(?:async[ \t]+)?def[ \t]+{re.escape(task.entry_point)}[ \t]*\(", re.M
    )
    if entry_def.search(body):
        candidate = body
    else:
        first = _first_nonblank_line(body)
        if first is not None and not first[0].isspace() and not _DEFINITION_RE.match(first):
            body = _indent(body)
        candidate = task.prompt.rstrip("\n") + "\n" + body
    sections = []
    lib_block = "\n\n".join(skill.source.rstrip("\n") for skill in library.valid)
    if lib_block:
        sections.append(lib_block)
    sections.append(candidate.rstrip("\n"))
    sections.append(task.tests.rstrip("\n"))
    return "\n\n".join(sections) + "\n"


def _first_nonblank_line(text: str) -> str | None:
    for line in text.split("\n"):
        if line.strip():
            return line
    return None


def _indent(text: str, prefix: str = "    ") -> str:
    return "\n".join(prefix + line if line.strip() else line for line in text.split("\n"))
