"""Command-line surface for batch runs.

Subcommands:

* ``run``            constrained benchmark run with skill proposals
* ``eval-baseline``  unconstrained half-shot pass over a dataset
* ``derive-subsets`` cut sub-datasets from recorded outcomes
* ``library``        inspect or export a skill library

Configuration comes from defaults, an optional TOML file (``--config``), and
flags, with flags winning. Every run writes its artifacts under
``<out>/<run-id>/`` where the run id is a UTC stamp plus a digest of the
resolved configuration.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import corpus as corpus_mod
from .compliance import compliance_report
from .corpus import Dataset, OutcomeRecord, OutcomeTable, load_dataset, save_dataset_jsonl
from .errors import ConfigError, EmptyOutputError, FuncsmithError
from .evaluator import EvalOutcome, Limits, ShimEvaluator
from .gateway import API_KEY_ENV, Gateway, Transcript, fingerprint, request_from_bundle
from .library import LibraryState, load_library, save_library, seed_replicas
from .orchestrator import (
    AttemptRecord,
    EpisodeConfig,
    EpisodeResult,
    run_benchmark,
    _build_report,
    save_report,
)
from .parsing import ParsedCode, assemble_program, extract_completion
from .prompts import TemplateConfig, build_codegen_prompt, build_halfshot_prompt, build_skill_prompt

_FORMAT_ALIASES = {"jsonl": "jsonl_humaneval", "apps": "json_apps"}

_DEFAULTS = {
    "dataset": None,
    "format": "jsonl",
    "library": None,
    "seed_replicas": False,
    "backend": "replay",
    "transcript": None,
    "model": "gpt-4",
    "endpoint_base": "https://api.openai.com",
    "max_rounds": 3,
    "samples_per_round": 1,
    "first_temp": 0.0,
    "retry_temp": 0.5,
    "vstar": 1,
    "provide_reference": False,
    "persist_skills": True,
    "ncr_mode": "listed",
    "k": 1,
    "out": "runs",
    "shim_cmd": "shim serve",
    "wall_ms": 10000.0,
    "memory_mb": 512.0,
    "dry_run": False,
    "rules": "BP,CF,BFF",
    "outcomes": [],
}


@dataclass
class RunConfig:
    """Resolved, validated configuration for one command invocation."""

    values: dict

    def __getattr__(self, key):
        try:
            return self.values[key]
        except KeyError as exc:
            raise AttributeError(key) from exc


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 1
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FuncsmithError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="funcsmith")
    sub = parser.add_subparsers(dest="command")
    parser.set_defaults(command=None)

    run_p = sub.add_parser("run", help="constrained benchmark run")
    _add_common_flags(run_p)
    run_p.set_defaults(handler=cmd_run)

    base_p = sub.add_parser("eval-baseline", help="unconstrained half-shot pass")
    _add_common_flags(base_p)
    base_p.set_defaults(handler=cmd_eval_baseline)

    der_p = sub.add_parser("derive-subsets", help="derive sub-datasets from outcomes")
    _add_common_flags(der_p)
    der_p.add_argument("--outcomes", action="append", default=None,
                       help="outcome table JSON (repeatable; tables are merged)")
    der_p.add_argument("--rules", default=None,
                       help="comma-separated subset rules (BP, BP_R, CF, BFF, "
                            "APPS_BP_pass, APPS_BP_fail)")
    der_p.set_defaults(handler=cmd_derive_subsets)

    lib_p = sub.add_parser("library", help="inspect or export a skill library")
    lib_p.add_argument("action", choices=["list", "show", "export"])
    lib_p.add_argument("name", nargs="?", help="skill name (for show)")
    lib_p.add_argument("--library", default=None)
    lib_p.add_argument("--seed-replicas", action="store_true", default=False)
    lib_p.add_argument("--out", default=None, help="output file for export")
    lib_p.set_defaults(handler=cmd_library, command="library")
    return parser


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="TOML config file")
    p.add_argument("--dataset", default=None)
    p.add_argument("--format", choices=["jsonl", "apps"], default=None)
    p.add_argument("--library", default=None)
    p.add_argument("--seed-replicas", dest="seed_replicas", action="store_true", default=None)
    p.add_argument("--backend", choices=["live", "replay", "record"], default=None)
    p.add_argument("--transcript", default=None)
    p.add_argument("--model", default=None)
    p.add_argument("--endpoint-base", dest="endpoint_base", default=None)
    p.add_argument("--max-rounds", dest="max_rounds", type=int, default=None)
    p.add_argument("--samples-per-round", dest="samples_per_round", type=int, default=None)
    p.add_argument("--first-temp", dest="first_temp", type=float, default=None)
    p.add_argument("--retry-temp", dest="retry_temp", type=float, default=None)
    p.add_argument("--vstar", type=int, default=None)
    p.add_argument("--provide-reference", dest="provide_reference",
                   action="store_true", default=None)
    p.add_argument("--no-persist-skills", dest="persist_skills",
                   action="store_false", default=None)
    p.add_argument("--ncr-mode", dest="ncr_mode", choices=["listed", "strict"], default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--shim-cmd", dest="shim_cmd", default=None)
    p.add_argument("--wall-ms", dest="wall_ms", type=float, default=None)
    p.add_argument("--memory-mb", dest="memory_mb", type=float, default=None)
    p.add_argument("--dry-run", dest="dry_run", action="store_true", default=None)


def _resolve(args: argparse.Namespace) -> RunConfig:
    values = dict(_DEFAULTS)
    config_path = getattr(args, "config", None)
    if config_path:
        path = Path(config_path)
        if not path.exists():
            raise ConfigError(f"config: file not found: {path}")
        with path.open("rb") as handle:
            try:
                file_values = tomllib.load(handle)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"config: invalid TOML: {exc}") from exc
        unknown = set(file_values) - set(values)
        if unknown:
            raise ConfigError(f"config: unknown keys {sorted(unknown)}")
        values.update(file_values)
    for key in values:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return RunConfig(values)


def _validate_run(config: RunConfig, need_backend: bool = True) -> None:
    if not config.dataset:
        raise ConfigError("dataset: a dataset path is required")
    if not Path(config.dataset).exists():
        raise ConfigError(f"dataset: file not found: {config.dataset}")
    if config.format not in _FORMAT_ALIASES:
        raise ConfigError(f"format: unknown format {config.format!r}")
    if config.library and config.seed_replicas:
        raise ConfigError("library: give either --library or --seed-replicas, not both")
    if config.library and not Path(config.library).exists():
        raise ConfigError(f"library: file not found: {config.library}")
    if not need_backend:
        return
    if config.backend not in ("live", "replay", "record"):
        raise ConfigError(f"backend: unknown backend {config.backend!r}")
    if config.backend in ("replay", "record") and not config.transcript:
        raise ConfigError(f"transcript: backend {config.backend!r} needs --transcript")
    if config.backend == "replay" and not Path(config.transcript).exists():
        raise ConfigError(f"transcript: file not found: {config.transcript}")
    if config.backend in ("live", "record"):
        import os

        if not os.environ.get(API_KEY_ENV):
            raise ConfigError(f"api key: set {API_KEY_ENV} for backend {config.backend!r}")


def _load_library_or_seed(config: RunConfig) -> LibraryState:
    if config.library:
        return load_library(config.library)
    if config.seed_replicas:
        return seed_replicas()
    raise ConfigError("library: give --library <path> or --seed-replicas")


def _episode_config(config: RunConfig) -> EpisodeConfig:
    return EpisodeConfig(
        max_rounds=config.max_rounds,
        samples_per_round=config.samples_per_round,
        first_temperature=config.first_temp,
        retry_temperature=config.retry_temp,
        provide_reference=config.provide_reference,
        vstar_capacity=config.vstar,
        persist_skills_across_tasks=config.persist_skills,
    )


def _make_gateway(config: RunConfig) -> Gateway:
    transcript = None
    if config.backend == "replay":
        transcript = Transcript.load(config.transcript)
    elif config.backend == "record":
        path = Path(config.transcript)
        transcript = Transcript.load(path) if path.exists() else Transcript(path=path)
    return Gateway(
        backend=config.backend,
        model=config.model,
        endpoint_base=config.endpoint_base,
        transcript=transcript,
    )


def _run_dir(config: RunConfig) -> Path:
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    digest = hashlib.sha256(
        json.dumps(config.values, sort_keys=True, default=str).encode("utf-8")
    ).hexdigest()[:8]
    run_dir = Path(config.out) / f"{stamp}-{digest}"
    run_dir.mkdir(parents=True, exist_ok=True)
    return run_dir


def cmd_run(args: argparse.Namespace) -> int:
    config = _resolve(args)
    _validate_run(config, need_backend=not config.dry_run)
    library = _load_library_or_seed(config)
    dataset = load_dataset(config.dataset, _FORMAT_ALIASES[config.format])
    template = TemplateConfig()
    if config.dry_run:
        _print_dry_run(dataset, library, template)
        return 0
    gateway = _make_gateway(config)
    limits = Limits(wall_ms=config.wall_ms, memory_mb=config.memory_mb)
    run_dir = _run_dir(config)
    with ShimEvaluator(command=config.shim_cmd) as evaluator:
        report, final_library = run_benchmark(
            dataset, library, _episode_config(config), gateway, evaluator,
            k=config.k, template=template, limits=limits, ncr_mode=config.ncr_mode,
        )
    save_report(report, run_dir / "report.json", run_dir / "report.txt")
    save_library(final_library, run_dir / "library.json")
    outcomes = OutcomeTable()
    for episode in report.episodes:
        outcomes.put(
            episode.task_id,
            "constrained",
            OutcomeRecord(
                passed=episode.solved,
                attempts=len(episode.attempts),
                temperature=config.retry_temp,
            ),
        )
    outcomes.save(run_dir / "outcomes.json")
    print(f"run artifacts written to {run_dir}")
    return 2 if report.partial else 0


def cmd_eval_baseline(args: argparse.Namespace) -> int:
    config = _resolve(args)
    _validate_run(config, need_backend=not config.dry_run)
    dataset = load_dataset(config.dataset, _FORMAT_ALIASES[config.format])
    template = TemplateConfig()
    if config.dry_run:
        task = dataset.tasks[0]
        bundle = build_halfshot_prompt(task, template, temperature=config.first_temp)
        _print_bundle("half-shot prompt", bundle)
        return 0
    gateway = _make_gateway(config)
    limits = Limits(wall_ms=config.wall_ms, memory_mb=config.memory_mb)
    run_dir = _run_dir(config)
    empty = LibraryState()
    episodes: list[EpisodeResult] = []
    outcomes = OutcomeTable()
    started = datetime.now(timezone.utc).isoformat()
    partial = False
    with ShimEvaluator(command=config.shim_cmd) as evaluator:
        try:
            for task in dataset.tasks:
                bundle = build_halfshot_prompt(task, template, temperature=config.first_temp)
                request = request_from_bundle(bundle, model=gateway.model)
                raw = gateway.complete(request).content
                try:
                    parsed = extract_completion(raw, template)
                    program = assemble_program(task, parsed, empty)
                    outcome = evaluator.evaluate(program, limits)
                except EmptyOutputError:
                    parsed = ParsedCode(code="", strategy="whole_text")
                    outcome = EvalOutcome(tag="fail", failure_kind="parse",
                                          detail="empty model output")
                record = AttemptRecord(
                    round=0,
                    prompt_fingerprint=fingerprint(request),
                    raw_output=raw,
                    parsed_strategy=parsed.strategy,
                    eval=outcome,
                    compliance=compliance_report(parsed.code, empty, config.ncr_mode),
                )
                episodes.append(
                    EpisodeResult(
                        task_id=task.id,
                        solved=outcome.passed,
                        attempts=(record,),
                        skills_added=(),
                    )
                )
                outcomes.put(
                    task.id,
                    "baseline",
                    OutcomeRecord(passed=outcome.passed, attempts=1,
                                  temperature=config.first_temp),
                )
        except KeyboardInterrupt:
            partial = True
    report = _build_report(
        episodes, k=config.k, library_growth=0, partial=partial,
        started_at=started, finished_at=datetime.now(timezone.utc).isoformat(),
    )
    save_report(report, run_dir / "report.json", run_dir / "report.txt")
    outcomes.save(run_dir / "outcomes.json")
    print(f"baseline artifacts written to {run_dir}")
    return 2 if partial else 0


def cmd_derive_subsets(args: argparse.Namespace) -> int:
    config = _resolve(args)
    _validate_run(config, need_backend=False)
    if not config.outcomes:
        raise ConfigError("outcomes: at least one --outcomes file is required")
    dataset = load_dataset(config.dataset, _FORMAT_ALIASES[config.format])
    table = OutcomeTable()
    for outcome_path in config.outcomes:
        if not Path(outcome_path).exists():
            raise ConfigError(f"outcomes: file not found: {outcome_path}")
        table.merge(OutcomeTable.load(outcome_path))
    rules = [r.strip() for r in config.rules.split(",") if r.strip()]
    for rule in rules:
        if rule not in corpus_mod.SUBSET_RULES:
            raise ConfigError(f"rules: unknown rule {rule!r}")
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for rule in rules:
        subset = corpus_mod.derive_subset(dataset, table, rule)
        path = out_dir / f"{dataset.name}_{rule}.jsonl"
        save_dataset_jsonl(subset, path)
        print(f"{rule}: {len(subset)} task(s) -> {path}")
    return 0


def cmd_library(args: argparse.Namespace) -> int:
    if args.library and args.seed_replicas:
        raise ConfigError("library: give either --library or --seed-replicas, not both")
    if args.library:
        if not Path(args.library).exists():
            raise ConfigError(f"library: file not found: {args.library}")
        state = load_library(args.library)
    elif args.seed_replicas:
        state = seed_replicas()
    else:
        raise ConfigError("library: give --library <path> or --seed-replicas")

    if args.action == "list":
        print(f"{'name':<32} {'provenance':<14} created_for_task")
        print("-" * 64)
        for skill in state.valid:
            print(f"{skill.name:<32} {skill.provenance:<14} {skill.created_for_task or '-'}")
        return 0
    if args.action == "show":
        if not args.name:
            raise ConfigError("name: show requires a skill name")
        skill = state.get(args.name)
        if skill is None:
            print(f"error: no skill named {args.name!r}", file=sys.stderr)
            return 1
        print(skill.source)
        return 0
    # export
    blob = "\n\n".join(skill.source.rstrip("\n") for skill in state.valid) + "\n"
    if args.out:
        Path(args.out).write_text(blob, encoding="utf-8")
        print(f"exported {len(state.valid)} skill(s) to {args.out}")
    else:
        print(blob, end="")
    return 0


def _print_dry_run(dataset: Dataset, library: LibraryState, template: TemplateConfig) -> None:
    task = dataset.tasks[0]
    _print_bundle("codegen prompt", build_codegen_prompt(task, library, template))
    _print_bundle(
        "skill-proposal prompt",
        build_skill_prompt(task, library, "# (failed completion placeholder)",
                           task.reference_solution, template),
    )
    _print_bundle("half-shot prompt", build_halfshot_prompt(task, template))


def _print_bundle(title: str, bundle) -> None:
    print(f"=== {title} ===")
    for message in bundle.messages:
        print(f"--- {message.role} ---")
        print(message.content)
    print()


if __name__ == "__main__":
    sys.exit(main())
