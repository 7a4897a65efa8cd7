"""Call-site extraction and constraint-compliance metrics.

``extract_calls`` is a deliberate lexical scanner, not a parser: it must
tolerate the broken code candidates models produce. It skips comments and
string literals (including triple-quoted ones), records every dotted name
immediately followed by ``(``, and suppresses names bound by ``def`` /
``class``. Known divergences from a syntax-tree walk: calls inside f-string
braces are not seen (the whole literal is skipped), and dotted chains broken
across lines without parentheses context are not joined.

On top of the scanner sit the two per-solution flags: utilization (some
valid-set function is called) and non-compliance (a restricted function is
called; or in strict mode, anything outside valid set, local definitions,
and a configurable builtin allowlist).
"""

from __future__ import annotations

import keyword
from dataclasses import dataclass, field

from .errors import EmptyInputError
from .library import LibraryState

_KEYWORDS = frozenset(keyword.kwlist)
_STRING_PREFIXES = frozenset("rbufRBUF")
_NAME_START = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_NAME_CHARS = _NAME_START | frozenset("0123456789")
_HSPACE = frozenset(" \t")

# Structural builtins a candidate may reasonably call without "using a
# function outside the provided set" in spirit: iteration/printing helpers
# and exception constructors. Deliberately excludes everything the seed
# replicas stand in for.
DEFAULT_ALLOWLIST = frozenset(
    {
        "range", "print", "enumerate", "zip", "reversed", "any", "iter",
        "next", "dict", "tuple", "bool", "divmod", "pow", "repr", "hash",
        "super", "Exception", "ValueError", "TypeError", "KeyError",
        "IndexError", "StopIteration", "ZeroDivisionError", "RuntimeError",
        "NotImplementedError",
    }
)


@dataclass(frozen=True)
class CallSite:
    """One call of a bare or dotted name; line is 1-based."""

    name: str
    line: int


@dataclass(frozen=True)
class ComplianceReport:
    calls: tuple[CallSite, ...]
    used_valid: frozenset[str]
    used_invalid: frozenset[str]
    locally_defined: frozenset[str]
    ur_flag: bool
    ncr_flag: bool


@dataclass
class _ScanResult:
    calls: list[CallSite] = field(default_factory=list)
    defined: list[str] = field(default_factory=list)
    warnings: int = 0


def extract_calls(source: str) -> list[CallSite]:
    """Best-effort list of call sites in ``source``, in textual order."""
    return _scan(source).calls


def locally_defined_names(source: str) -> set[str]:
    """Names bound by def/class statements anywhere in ``source``."""
    return set(_scan(source).defined)


def _scan(source: str) -> _ScanResult:
    out = _ScanResult()
    n = len(source)
    i = 0
    line = 1
    prev = ""  # last significant character seen outside strings/comments
    pending_def = False  # a def/class keyword awaits its bound name
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            i += 1
            continue
        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue
        if ch in "\"'":
            i, line, ok = _skip_string(source, i, line)
            if not ok:
                out.warnings += 1
            prev = '"'
            continue
        if ch.isdigit():
            # Number literal; consume eagerly so `1.5` is not read as a name chain.
            while i < n and (source[i] in _NAME_CHARS or source[i] == "."):
                i += 1
            prev = "0"
            continue
        if ch in _NAME_START:
            start_line = line
            name, i = _read_name(source, i)
            if i < n and source[i] in "\"'" and _is_string_prefix(name):
                i, line, ok = _skip_string(source, i, line)
                if not ok:
                    out.warnings += 1
                prev = '"'
                continue
            if name in _KEYWORDS:
                if name in ("def", "class"):
                    pending_def = True
                prev = name[-1]
                continue
            attribute_of_expr = prev == "."
            chain, i, line = _read_chain(source, i, name, line)
            j = _skip_hspace(source, i)
            is_call = j < n and source[j] == "("
            if is_call:
                if pending_def:
                    out.defined.append(chain)
                    pending_def = False
                elif not attribute_of_expr:
                    out.calls.append(CallSite(name=chain, line=start_line))
            elif pending_def:
                # def/class without parentheses (e.g. `class A:`)
                out.defined.append(chain)
                pending_def = False
            prev = chain[-1]
            continue
        if ch not in _HSPACE and ch != "\\":
            prev = ch
        i += 1
    return out


def _read_name(source: str, i: int) -> tuple[str, int]:
    start = i
    n = len(source)
    while i < n and source[i] in _NAME_CHARS:
        i += 1
    return source[start:i], i


def _read_chain(source: str, i: int, first: str, line: int) -> tuple[str, int, int]:
    """Extend ``first`` through `.name` links, allowing horizontal space."""
    parts = [first]
    n = len(source)
    while True:
        j = _skip_hspace(source, i)
        if j >= n or source[j] != ".":
            return ".".join(parts), i, line
        j = _skip_hspace(source, j + 1)
        if j >= n or source[j] not in _NAME_START:
            return ".".join(parts), i, line
        name, j = _read_name(source, j)
        if name in _KEYWORDS:
            return ".".join(parts), i, line
        parts.append(name)
        i = j


def _skip_hspace(source: str, i: int) -> int:
    n = len(source)
    while i < n and source[i] in _HSPACE:
        i += 1
    return i


def _is_string_prefix(name: str) -> bool:
    return 0 < len(name) <= 3 and all(c in _STRING_PREFIXES for c in name)


def _skip_string(source: str, i: int, line: int) -> tuple[int, int, bool]:
    """Advance past the string literal opening at ``i``.

    Returns (new index, new line, terminated?). Backslash always escapes the
    next character for end-finding purposes; that matches how the tokenizer
    delimits raw strings too.
    """
    n = len(source)
    quote = source[i]
    if source.startswith(quote * 3, i):
        delim = quote * 3
        i += 3
    else:
        delim = quote
        i += 1
    while i < n:
        ch = source[i]
        if ch == "\\":
            i += 2
            continue
        if ch == "\n":
            line += 1
            if len(delim) == 1:
                # Unterminated single-quoted string; resume scanning.
                return i + 1, line, False
            i += 1
            continue
        if source.startswith(delim, i):
            return i + len(delim), line, True
        i += 1
    return n, line, False


def compliance_report(
    source: str,
    library: LibraryState,
    mode: str = "listed",
    allowlist: frozenset[str] = DEFAULT_ALLOWLIST,
) -> ComplianceReport:
    """Flags for one candidate solution against a library.

    mode="listed": non-compliance means calling a name on the restricted
    list. mode="strict": non-compliance means calling anything that is not a
    valid-set function, a locally defined name, or an allowlisted builtin.
    """
    if mode not in ("listed", "strict"):
        raise ValueError(f"unknown compliance mode {mode!r}")
    scan = _scan(source)
    called = {site.name for site in scan.calls}
    valid_names = set(library.valid_names())
    used_valid = frozenset(called & valid_names)
    used_invalid = frozenset(called & set(library.invalid))
    local = frozenset(scan.defined)
    if mode == "listed":
        ncr_flag = bool(used_invalid)
    else:
        ncr_flag = bool(called - valid_names - local - allowlist)
    return ComplianceReport(
        calls=tuple(scan.calls),
        used_valid=used_valid,
        used_invalid=used_invalid,
        locally_defined=local,
        ur_flag=bool(used_valid),
        ncr_flag=ncr_flag,
    )


def aggregate(reports) -> dict:
    """Percent of reports with the utilization / non-compliance flag set."""
    reports = list(reports)
    if not reports:
        raise EmptyInputError("cannot aggregate zero compliance reports")
    total = len(reports)
    ur = 100.0 * sum(1 for r in reports if r.ur_flag) / total
    ncr = 100.0 * sum(1 for r in reports if r.ncr_flag) / total
    return {"ur_percent": ur, "ncr_percent": ncr}
