"""Skill library: the valid / relevant / invalid function sets.

A library is an immutable value. ``valid`` holds the full set of functions a
model may call, ``relevant`` names the subset proposed specifically for the
task currently being attempted, and ``invalid`` lists restricted call names
(possibly dotted, e.g. ``math.sqrt``). Operations return new states; callers
that share a library across workers must serialize mutation themselves.
"""

from __future__ import annotations

import ast
import json
import re
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import DuplicateNameError, InvalidSkillError, RestrictedNameError, SchemaError
from .replicas import ORIGIN_NAMES, REPLICAS

SCHEMA_VERSION = 1
PROVENANCES = ("replica", "llm_generated", "human")

# Fixed stamp for embedded seed data, so seeded libraries are reproducible.
SEED_CREATED_AT = "2024-01-01T00:00:00+00:00"

_IDENTIFIER_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class SkillFunction:
    """A named function with source text and provenance."""

    name: str
    source: str
    summary: str
    provenance: str
    origin_function: str | None = None
    created_for_task: str | None = None
    created_at: str = SEED_CREATED_AT

    def __post_init__(self):
        if not _IDENTIFIER_RE.match(self.name):
            raise InvalidSkillError(f"skill name {self.name!r} is not a valid identifier")
        if self.provenance not in PROVENANCES:
            raise InvalidSkillError(f"unknown provenance {self.provenance!r}")
        if self.provenance == "replica" and not self.origin_function:
            raise InvalidSkillError(f"replica {self.name!r} must name its origin function")
        if self.provenance != "replica" and self.origin_function is not None:
            raise InvalidSkillError(f"non-replica {self.name!r} must not carry an origin function")
        defined = _defined_function_names(self.source)
        if len(defined) != 1:
            raise InvalidSkillError(
                f"skill {self.name!r} source must contain exactly one top-level "
                f"function definition, found {len(defined)}"
            )
        if defined[0] != self.name:
            raise InvalidSkillError(
                f"skill {self.name!r} source defines {defined[0]!r} instead"
            )

    def signature(self) -> str:
        """First def line of the source, without the trailing colon's body."""
        for line in self.source.splitlines():
            if line.lstrip().startswith("def "):
                return line.strip()
        return f"def {self.name}(...):"


def _defined_function_names(source: str) -> list[str]:
    try:
        tree = ast.parse(source)
    except SyntaxError as exc:
        raise InvalidSkillError(f"skill source does not parse: {exc}") from exc
    return [
        node.name
        for node in tree.body
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef))
    ]


@dataclass(frozen=True)
class LibraryState:
    """The (valid, relevant, invalid) triple constraining generation."""

    valid: tuple[SkillFunction, ...] = ()
    relevant: tuple[str, ...] = ()
    invalid: tuple[str, ...] = ()

    def valid_names(self) -> tuple[str, ...]:
        return tuple(skill.name for skill in self.valid)

    def get(self, name: str) -> SkillFunction | None:
        for skill in self.valid:
            if skill.name == name:
                return skill
        return None

    def relevant_skills(self) -> tuple[SkillFunction, ...]:
        by_name = {skill.name: skill for skill in self.valid}
        return tuple(by_name[name] for name in self.relevant)


def check_invariants(state: LibraryState) -> None:
    """Raise SchemaError if the state violates the library invariants."""
    names = state.valid_names()
    seen = set()
    for name in names:
        if name in seen:
            raise SchemaError(f"duplicate skill name {name!r} in valid set")
        seen.add(name)
    for name in state.relevant:
        if name not in seen:
            raise SchemaError(f"relevant name {name!r} is not in the valid set")
    invalid = set(state.invalid)
    overlap = seen & invalid
    if overlap:
        raise SchemaError(f"names both valid and invalid: {sorted(overlap)}")


def seed_replicas() -> LibraryState:
    """Library seeded with the 21 hand-written replicas.

    The restricted list is exactly the replicas' origin names; nothing is
    marked relevant yet.
    """
    skills = tuple(
        SkillFunction(
            name=name,
            source=source,
            summary=summary,
            provenance="replica",
            origin_function=origin,
            created_at=SEED_CREATED_AT,
        )
        for origin, name, summary, source in REPLICAS
    )
    return LibraryState(valid=skills, relevant=(), invalid=ORIGIN_NAMES)


def add_skill(state: LibraryState, skill: SkillFunction, mark_relevant: bool = False) -> LibraryState:
    """Append ``skill`` to the valid set; optionally mark it relevant."""
    if skill.name in state.invalid:
        raise RestrictedNameError(f"{skill.name!r} is on the restricted list")
    if skill.name in state.valid_names():
        raise DuplicateNameError(f"{skill.name!r} is already in the valid set")
    relevant = state.relevant + (skill.name,) if mark_relevant else state.relevant
    return replace(state, valid=state.valid + (skill,), relevant=relevant)


def reset_relevant(state: LibraryState) -> LibraryState:
    """Clear the relevant subset; valid and invalid sets are untouched."""
    if not state.relevant:
        return state
    return replace(state, relevant=())


def save_library(state: LibraryState, path: str | Path) -> None:
    """Write the library as a versioned JSON document."""
    check_invariants(state)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "valid": [_skill_to_dict(skill) for skill in state.valid],
        "relevant": list(state.relevant),
        "invalid": list(state.invalid),
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_library(path: str | Path) -> LibraryState:
    """Load a library written by :func:`save_library`.

    Raises SchemaError on version mismatch, malformed documents, or invariant
    violations; I/O failures propagate as OSError.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"library file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("library file must hold a JSON object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(
            f"unsupported schema_version {doc.get('schema_version')!r}, expected {SCHEMA_VERSION}"
        )
    try:
        skills = tuple(_skill_from_dict(entry) for entry in doc["valid"])
        state = LibraryState(
            valid=skills,
            relevant=tuple(doc["relevant"]),
            invalid=tuple(doc["invalid"]),
        )
    except (KeyError, TypeError, InvalidSkillError) as exc:
        raise SchemaError(f"malformed library document: {exc}") from exc
    check_invariants(state)
    return state


def _skill_to_dict(skill: SkillFunction) -> dict:
    entry = {
        "name": skill.name,
        "source": skill.source,
        "summary": skill.summary,
        "provenance": skill.provenance,
        "created_at": skill.created_at,
    }
    if skill.origin_function is not None:
        entry["origin_function"] = skill.origin_function
    if skill.created_for_task is not None:
        entry["created_for_task"] = skill.created_for_task
    return entry


def _skill_from_dict(entry: dict) -> SkillFunction:
    return SkillFunction(
        name=entry["name"],
        source=entry["source"],
        summary=entry["summary"],
        provenance=entry["provenance"],
        origin_function=entry.get("origin_function"),
        created_for_task=entry.get("created_for_task"),
        created_at=entry["created_at"],
    )
