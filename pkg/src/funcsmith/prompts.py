"""Prompt rendering for the three request families.

Three builders, all pure functions of their inputs:

* codegen — asks for a completion of the task using only library functions,
  with the relevant subset called out separately when present;
* skill proposal — shows a failed completion (and optionally a working
  unconstrained reference) and asks for one new helper function;
* half-shot baseline — the task prompt plus a formatting string, no library.

Every piece of wording lives on TemplateConfig so templates can be re-tuned
without touching code. The defaults put the markers in comment style, which
chat models preserve far more reliably than bracket-style sentinels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import EmptyLibraryError
from .library import LibraryState

PURPOSES = ("codegen", "skill_proposal", "baseline")


@dataclass(frozen=True)
class ChatMessage:
    role: str  # "system" | "user"
    content: str

    def __post_init__(self):
        if self.role not in ("system", "user"):
            raise ValueError(f"unsupported role {self.role!r}")
        if not self.content:
            raise ValueError("message content must be non-empty")


@dataclass(frozen=True)
class PromptBundle:
    messages: tuple[ChatMessage, ...]
    temperature: float
    purpose: str

    def __post_init__(self):
        if not (0.0 <= self.temperature <= 2.0):
            raise ValueError(f"temperature {self.temperature} outside [0, 2]")
        if self.purpose not in PURPOSES:
            raise ValueError(f"unknown purpose {self.purpose!r}")
        if not self.messages or self.messages[0].role != "system":
            raise ValueError("first message must be the system message")
        if sum(1 for m in self.messages if m.role == "system") != 1:
            raise ValueError("exactly one system message required")

    @property
    def user_content(self) -> str:
        return self.messages[-1].content


_DEFAULT_FORMAT_BLOCK_INTRO = "You must write the completion in the following form:"


def _default_formatting_string() -> str:
    return (
        f"{_DEFAULT_FORMAT_BLOCK_INTRO}\n\n"
        "# FUNCTION HEADER\n...\n# START OF COMPLETION\n...\n\n"
        "You may only write your response in code/comments. Do not be verbose."
    )


@dataclass(frozen=True)
class TemplateConfig:
    """Markers and wording for all prompt families."""

    marker_header: str = "# FUNCTION HEADER"
    marker_completion: str = "# START OF COMPLETION"
    marker_subfunction: str = "# BEGIN NEW-SUB FUNCTION"
    include_full_source: bool = True
    formatting_string: str = field(default_factory=_default_formatting_string)

    codegen_system: str = (
        "You are an intelligent programmer. You must complete the python function "
        "given to you by the user using only the functions they give you. And you "
        "must follow the format they present when giving your answer!"
    )
    codegen_intro: str = "You have access to the following Python functions:"
    valid_header: str = "# VALID FUNCTIONS"
    relevant_intro: str = "The following functions may be particularly useful:"
    relevant_header: str = "# RELEVANT FUNCTIONS"
    codegen_constraint: str = (
        "You must complete the python function I give you using ONLY the given "
        "functions. You CANNOT use any of the following invalid functions:"
    )
    invalid_header: str = "# INVALID FUNCTIONS"
    format_intro: str = _DEFAULT_FORMAT_BLOCK_INTRO
    codegen_outro: str = (
        "You may only write your response in code/comments. Do not be verbose. "
        "The function you are to complete is:"
    )

    skill_system: str = (
        "Follow the user instructions and provide an implementation of what you "
        "deem to be the most useful sub-function."
    )
    skill_docstring_intro: str = "I have the following docstring:"
    skill_reference_intro: str = "A correct completion to this function is:"
    skill_valid_intro: str = (
        "I constrained a language model to generate a new completion using only "
        "custom Python functions that I provided.\n"
        "I gave it access to the following functions:"
    )
    skill_failed_intro: str = "It generated the following incorrect completion:"
    skill_invalid_intro: str = "Note that none of the following functions are allowed:"
    skill_request: str = (
        'What new function would be useful to provide to the "constrained" '
        "language model to help it produce a working completion?\n"
        "Propose a completely new function. Only output code implementing the "
        "new function you propose. Only output executable code. Format your "
        "answer as follows:"
    )

    halfshot_system: str = (
        "You are an intelligent programmer. You must complete the python function "
        "given to you by the user. And you must follow the format they present "
        "when giving your answer!"
    )

    def __post_init__(self):
        markers = (self.marker_header, self.marker_completion, self.marker_subfunction)
        if any(not m for m in markers):
            raise ValueError("markers must be non-empty")
        if len(set(markers)) != len(markers):
            raise ValueError("markers must be mutually distinct")


def build_codegen_prompt(
    task,
    library: LibraryState,
    config: TemplateConfig | None = None,
    *,
    temperature: float = 0.0,
) -> PromptBundle:
    """Constrained code-generation prompt for ``task`` against ``library``."""
    config = config or TemplateConfig()
    if config.include_full_source and not library.valid:
        raise EmptyLibraryError("cannot render full sources of an empty valid set")
    paragraphs = [config.codegen_intro]
    paragraphs.append(config.valid_header + "\n" + _valid_block(library, config))
    relevant = library.relevant_skills()
    if relevant:
        paragraphs.append(config.relevant_intro)
        paragraphs.append(
            config.relevant_header + "\n" + _sources_block(skill for skill in relevant)
        )
    paragraphs.append(config.codegen_constraint)
    paragraphs.append(config.invalid_header + "\n" + "\n".join(library.invalid))
    paragraphs.append(config.format_intro)
    paragraphs.append(f"{config.marker_header}\n...\n{config.marker_completion}\n...")
    paragraphs.append(config.codegen_outro)
    paragraphs.append(task.prompt.rstrip("\n"))
    return PromptBundle(
        messages=(
            ChatMessage("system", config.codegen_system),
            ChatMessage("user", "\n\n".join(paragraphs)),
        ),
        temperature=temperature,
        purpose="codegen",
    )


def build_skill_prompt(
    task,
    library: LibraryState,
    failed_code: str,
    reference_solution: str | None = None,
    config: TemplateConfig | None = None,
    *,
    temperature: float = 0.5,
) -> PromptBundle:
    """Sub-function proposal prompt built from a failed completion."""
    if not failed_code.strip():
        raise ValueError("failed_code must be non-empty")
    config = config or TemplateConfig()
    paragraphs = [config.skill_docstring_intro + "\n" + task.prompt.strip("\n")]
    if reference_solution is not None:
        paragraphs.append(
            config.skill_reference_intro + "\n" + reference_solution.strip("\n")
        )
    paragraphs.append(
        config.skill_valid_intro + "\n" + _sources_block(library.valid)
    )
    paragraphs.append(config.skill_failed_intro + "\n" + failed_code.strip("\n"))
    paragraphs.append(config.skill_invalid_intro + "\n" + "\n".join(library.invalid))
    paragraphs.append(config.skill_request)
    paragraphs.append(config.marker_subfunction + "\n...")
    return PromptBundle(
        messages=(
            ChatMessage("system", config.skill_system),
            ChatMessage("user", "\n\n".join(paragraphs)),
        ),
        temperature=temperature,
        purpose="skill_proposal",
    )


def build_halfshot_prompt(
    task,
    config: TemplateConfig | None = None,
    *,
    temperature: float = 0.0,
) -> PromptBundle:
    """Unconstrained baseline: dataset prompt plus the formatting string."""
    config = config or TemplateConfig()
    content = task.prompt.rstrip("\n") + "\n\n" + config.formatting_string
    return PromptBundle(
        messages=(
            ChatMessage("system", config.halfshot_system),
            ChatMessage("user", content),
        ),
        temperature=temperature,
        purpose="baseline",
    )


def _valid_block(library: LibraryState, config: TemplateConfig) -> str:
    if config.include_full_source:
        return _sources_block(library.valid)
    return "\n".join(
        f"{skill.signature()}  # {skill.summary}" for skill in library.valid
    )


def _sources_block(skills) -> str:
    return "\n\n".join(skill.source.rstrip("\n") for skill in skills)
