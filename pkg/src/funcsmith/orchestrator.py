"""The per-task episode loop and benchmark-level aggregation.

An episode alternates constrained code-generation attempts with sub-function
proposals: generate, parse, assemble, execute; on failure, ask for one new
helper function, validate it (it must be a single well-formed definition,
carry an unrestricted name, and execute standalone), add it to the valid set
marked relevant, and try again. The relevant subset is capped; the oldest
entry is evicted first. The valid set only ever grows within a run.

A benchmark run threads the library through episodes in dataset order when
skills persist across tasks; otherwise every episode starts from the initial
library.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

from .compliance import ComplianceReport, aggregate, compliance_report
from .errors import (
    EmptyOutputError,
    EpisodeError,
    FuncsmithError,
    GatewayError,
    InvalidSkillError,
    NoFunctionFoundError,
    ShimUnavailableError,
)
from .evaluator import EvalOutcome, Limits, pass_at_k
from .gateway import Gateway, fingerprint, request_from_bundle
from .library import LibraryState, SkillFunction, add_skill, check_invariants, reset_relevant
from .parsing import ParsedCode, assemble_program, extract_completion, extract_subfunction
from .prompts import TemplateConfig, build_codegen_prompt, build_skill_prompt


def _utc_now() -> datetime:
    return datetime.now(timezone.utc)


@dataclass(frozen=True)
class EpisodeConfig:
    max_rounds: int = 3
    samples_per_round: int = 1
    first_temperature: float = 0.0
    retry_temperature: float = 0.5
    provide_reference: bool = False
    vstar_capacity: int = 1
    persist_skills_across_tasks: bool = True

    def __post_init__(self):
        if self.max_rounds < 1 or self.samples_per_round < 1 or self.vstar_capacity < 1:
            raise ValueError("counts must be >= 1")
        for temp in (self.first_temperature, self.retry_temperature):
            if not (0.0 <= temp <= 2.0):
                raise ValueError(f"temperature {temp} outside [0, 2]")


@dataclass(frozen=True)
class AttemptRecord:
    round: int
    prompt_fingerprint: str
    raw_output: str
    parsed_strategy: str
    eval: EvalOutcome
    compliance: ComplianceReport


@dataclass(frozen=True)
class EpisodeResult:
    task_id: str
    solved: bool
    attempts: tuple[AttemptRecord, ...]
    skills_added: tuple[str, ...]
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        if self.solved and (not self.attempts or not self.attempts[-1].eval.passed):
            raise ValueError("solved episodes must end on a passing attempt")
        rounds = [a.round for a in self.attempts]
        if rounds:
            if rounds[0] != 0:
                raise ValueError("attempt rounds must start at 0")
            for prev, cur in zip(rounds, rounds[1:]):
                if cur not in (prev, prev + 1):
                    raise ValueError("attempt rounds must be consecutive")


@dataclass(frozen=True)
class RunReport:
    episodes: tuple[EpisodeResult, ...]
    k: int
    pass_at_1: float
    pass_at_k: float
    ur_percent: float
    ncr_percent: float
    library_growth: int
    partial: bool
    started_at: str
    finished_at: str

    @property
    def task_count(self) -> int:
        return len(self.episodes)

    @property
    def solved_count(self) -> int:
        return sum(1 for e in self.episodes if e.solved)


def run_episode(
    task,
    library: LibraryState,
    config: EpisodeConfig,
    gateway: Gateway,
    evaluator,
    *,
    template: TemplateConfig | None = None,
    limits: Limits | None = None,
    ncr_mode: str = "listed",
    clock=None,
) -> tuple[EpisodeResult, LibraryState]:
    """Run the iterative loop for one task.

    Returns the episode result and the library to carry forward (the input
    library, unchanged, when skills do not persist across tasks).
    """
    template = template or TemplateConfig()
    limits = limits or Limits()
    clock = clock or _utc_now
    check_invariants(library)
    lib = reset_relevant(library)
    attempts: list[AttemptRecord] = []
    skills_added: list[str] = []
    warnings: list[str] = []
    solved = False
    last_failed_code = ""

    for rnd in range(config.max_rounds + 1):
        for sample in range(config.samples_per_round):
            first = rnd == 0 and sample == 0
            temp = config.first_temperature if first else config.retry_temperature
            bundle = build_codegen_prompt(task, lib, template, temperature=temp)
            request = request_from_bundle(bundle, model=gateway.model)
            raw = _complete(gateway, request, task)
            try:
                parsed = extract_completion(raw, template)
                program = assemble_program(task, parsed, lib)
                outcome = _evaluate(evaluator, program, limits, task)
            except EmptyOutputError:
                parsed = ParsedCode(code="", strategy="whole_text", warnings=("empty model output",))
                outcome = EvalOutcome(tag="fail", failure_kind="parse", detail="empty model output")
            attempts.append(
                AttemptRecord(
                    round=rnd,
                    prompt_fingerprint=fingerprint(request),
                    raw_output=raw,
                    parsed_strategy=parsed.strategy,
                    eval=outcome,
                    compliance=compliance_report(parsed.code, lib, ncr_mode),
                )
            )
            if parsed.code.strip():
                last_failed_code = parsed.code
            if outcome.passed:
                solved = True
                break
        if solved or rnd >= config.max_rounds:
            break
        lib = _propose_skill(
            task, lib, config, gateway, evaluator, template, limits,
            last_failed_code, skills_added, warnings, clock,
        )

    result = EpisodeResult(
        task_id=task.id,
        solved=solved,
        attempts=tuple(attempts),
        skills_added=tuple(skills_added),
        warnings=tuple(warnings),
    )
    out_lib = lib if config.persist_skills_across_tasks else reset_relevant(library)
    return result, out_lib


def _propose_skill(
    task, lib, config, gateway, evaluator, template, limits,
    failed_code, skills_added, warnings, clock,
) -> LibraryState:
    """One proposal round; on any validation failure the library is unchanged."""
    if not failed_code.strip():
        warnings.append(f"task {task.id}: no failed code to seed a proposal; skipped")
        return lib
    reference = task.reference_solution if config.provide_reference else None
    bundle = build_skill_prompt(
        task, lib, failed_code, reference, template,
        temperature=config.retry_temperature,
    )
    request = request_from_bundle(bundle, model=gateway.model)
    raw = _complete(gateway, request, task)
    try:
        parsed, name = extract_subfunction(raw, template)
    except (EmptyOutputError, NoFunctionFoundError) as exc:
        warnings.append(f"task {task.id}: unusable proposal: {exc}")
        return lib
    source = parsed.code
    if name in lib.invalid:
        warnings.append(f"task {task.id}: proposed name {name!r} is restricted; discarded")
        return lib
    if name in lib.valid_names():
        name, source = _rename_skill(name, source, lib)
    try:
        skill = SkillFunction(
            name=name,
            source=source,
            summary=f"Sub-function proposed while solving task {task.id}.",
            provenance="llm_generated",
            created_for_task=task.id,
            created_at=clock().isoformat(),
        )
    except InvalidSkillError as exc:
        warnings.append(f"task {task.id}: malformed proposal: {exc}")
        return lib
    check = _evaluate(evaluator, source, limits, task)
    if not check.passed:
        warnings.append(
            f"task {task.id}: proposed skill {name!r} failed standalone execution "
            f"({check.failure_kind}); discarded"
        )
        return lib
    lib = add_skill(lib, skill, mark_relevant=True)
    if len(lib.relevant) > config.vstar_capacity:
        lib = replace(lib, relevant=lib.relevant[-config.vstar_capacity:])
    skills_added.append(name)
    return lib


def _rename_skill(name: str, source: str, lib: LibraryState) -> tuple[str, str]:
    """Suffix a colliding proposal name and rewrite the source to match."""
    import re

    taken = set(lib.valid_names()) | set(lib.invalid)
    counter = 2
    while f"{name}_{counter}" in taken:
        counter += 1
    new_name = f"{name}_{counter}"
    return new_name, re.sub(rf"\b{re.escape(name)}\b", new_name, source)


def _complete(gateway: Gateway, request, task) -> str:
    try:
        return gateway.complete(request).content
    except GatewayError as exc:
        raise EpisodeError(f"task {task.id}: gateway failure: {exc}") from exc


def _evaluate(evaluator, program: str, limits: Limits, task) -> EvalOutcome:
    try:
        return evaluator.evaluate(program, limits)
    except ShimUnavailableError as exc:
        raise EpisodeError(f"task {task.id}: evaluator failure: {exc}") from exc


def run_benchmark(
    dataset,
    library: LibraryState,
    config: EpisodeConfig,
    gateway: Gateway,
    evaluator,
    *,
    k: int = 1,
    template: TemplateConfig | None = None,
    limits: Limits | None = None,
    ncr_mode: str = "listed",
    clock=None,
) -> tuple[RunReport, LibraryState]:
    """Run every task in dataset order; an interrupt yields a partial report."""
    if not dataset.tasks:
        raise FuncsmithError("dataset is empty")
    clock = clock or _utc_now
    started_at = clock().isoformat()
    lib = library
    episodes: list[EpisodeResult] = []
    partial = False
    try:
        for task in dataset.tasks:
            result, lib = run_episode(
                task, lib, config, gateway, evaluator,
                template=template, limits=limits, ncr_mode=ncr_mode, clock=clock,
            )
            episodes.append(result)
    except KeyboardInterrupt:
        partial = True
    report = _build_report(
        episodes,
        k=k,
        library_growth=len(lib.valid) - len(library.valid),
        partial=partial,
        started_at=started_at,
        finished_at=clock().isoformat(),
    )
    return report, lib


def _build_report(episodes, k, library_growth, partial, started_at, finished_at) -> RunReport:
    task_count = len(episodes)
    if task_count:
        first_passes = sum(1 for e in episodes if e.attempts and e.attempts[0].eval.passed)
        pass1 = 100.0 * first_passes / task_count
        per_task = []
        for e in episodes:
            n = len(e.attempts)
            c = sum(1 for a in e.attempts if a.eval.passed)
            if n:
                per_task.append(pass_at_k(n, c, min(k, n)))
        passk = 100.0 * sum(per_task) / len(per_task) if per_task else 0.0
    else:
        pass1 = passk = 0.0
    reports = [a.compliance for e in episodes for a in e.attempts]
    if reports:
        agg = aggregate(reports)
    else:
        agg = {"ur_percent": 0.0, "ncr_percent": 0.0}
    return RunReport(
        episodes=tuple(episodes),
        k=k,
        pass_at_1=pass1,
        pass_at_k=passk,
        ur_percent=agg["ur_percent"],
        ncr_percent=agg["ncr_percent"],
        library_growth=library_growth,
        partial=partial,
        started_at=started_at,
        finished_at=finished_at,
    )


def recompute_metrics(report: RunReport) -> dict:
    """Metrics derived afresh from the raw attempt records.

    Must equal the stored aggregates; used as a consistency check.
    """
    fresh = _build_report(
        list(report.episodes),
        k=report.k,
        library_growth=report.library_growth,
        partial=report.partial,
        started_at=report.started_at,
        finished_at=report.finished_at,
    )
    return {
        "pass_at_1": fresh.pass_at_1,
        "pass_at_k": fresh.pass_at_k,
        "ur_percent": fresh.ur_percent,
        "ncr_percent": fresh.ncr_percent,
    }


def report_to_dict(report: RunReport) -> dict:
    return {
        "schema_version": 1,
        "partial": report.partial,
        "started_at": report.started_at,
        "finished_at": report.finished_at,
        "metrics": {
            "task_count": report.task_count,
            "solved_count": report.solved_count,
            "k": report.k,
            "pass_at_1": report.pass_at_1,
            "pass_at_k": report.pass_at_k,
            "ur_percent": report.ur_percent,
            "ncr_percent": report.ncr_percent,
            "library_growth": report.library_growth,
        },
        "episodes": [_episode_to_dict(e) for e in report.episodes],
    }


def _episode_to_dict(episode: EpisodeResult) -> dict:
    return {
        "task_id": episode.task_id,
        "solved": episode.solved,
        "skills_added": list(episode.skills_added),
        "warnings": list(episode.warnings),
        "attempts": [
            {
                "round": a.round,
                "prompt_fingerprint": a.prompt_fingerprint,
                "raw_output": a.raw_output,
                "parsed_strategy": a.parsed_strategy,
                "eval": {
                    "tag": a.eval.tag,
                    "failure_kind": a.eval.failure_kind,
                    "detail": a.eval.detail,
                    "duration_ms": a.eval.duration_ms,
                },
                "compliance": {
                    "calls": [{"name": c.name, "line": c.line} for c in a.compliance.calls],
                    "used_valid": sorted(a.compliance.used_valid),
                    "used_invalid": sorted(a.compliance.used_invalid),
                    "locally_defined": sorted(a.compliance.locally_defined),
                    "ur_flag": a.compliance.ur_flag,
                    "ncr_flag": a.compliance.ncr_flag,
                },
            }
            for a in episode.attempts
        ],
    }


def save_report(report: RunReport, json_path: str | Path, text_path: str | Path | None = None) -> None:
    Path(json_path).write_text(
        json.dumps(report_to_dict(report), indent=2) + "\n", encoding="utf-8"
    )
    if text_path is not None:
        Path(text_path).write_text(render_report_text(report), encoding="utf-8")


def render_report_text(report: RunReport) -> str:
    lines = [
        "funcsmith run report",
        "====================",
        f"tasks:          {report.task_count}",
        f"solved:         {report.solved_count}"
        + (f" ({100.0 * report.solved_count / report.task_count:.1f}%)" if report.task_count else ""),
        f"pass@1:         {report.pass_at_1:.1f}%",
        f"pass@k (k={report.k}): {report.pass_at_k:.1f}%",
        f"UR:             {report.ur_percent:.1f}%",
        f"NCR:            {report.ncr_percent:.1f}%",
        f"library growth: +{report.library_growth}",
        f"partial:        {report.partial}",
        "",
        f"{'task':<28} {'solved':<8} {'attempts':<9} skills added",
        "-" * 70,
    ]
    for episode in report.episodes:
        skills = ", ".join(episode.skills_added) or "-"
        lines.append(
            f"{episode.task_id:<28} {str(episode.solved).lower():<8} "
            f"{len(episode.attempts):<9} {skills}"
        )
    return "\n".join(lines) + "\n"
