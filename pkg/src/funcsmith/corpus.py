"""Benchmark task loading and outcome-based sub-dataset derivation.

Two input formats are supported: jsonl records in the HumanEval field layout
(task_id/prompt/entry_point/test/canonical_solution) and a JSON array in an
APPS-like layout whose input/output examples are flattened into an
assertion-style test program. Tasks whose tests could never execute anything
(a HumanEval ``check`` function that is defined but never invoked) get the
invocation appended so every stored test program is runnable as-is.

Sub-datasets are cut from recorded (task, condition) outcomes, where the
condition is ``baseline`` (unconstrained) or ``constrained``.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from .compliance import extract_calls
from .errors import MissingOutcomeError, MissingReferenceError, ParseError

logger = logging.getLogger(__name__)

FORMATS = ("jsonl_humaneval", "json_apps")
CONDITIONS = ("baseline", "constrained")
SUBSET_RULES = ("BP", "BP_R", "CF", "BFF", "APPS_BP_pass", "APPS_BP_fail")

_CHECK_DEF_RE = re.compile(r"^def check\(", re.M)
_CHECK_CALL_RE = re.compile(r"^check\(", re.M)


@dataclass(frozen=True)
class Task:
    """One benchmark item: prompt header, entry point, and test program."""

    id: str
    prompt: str
    entry_point: str
    tests: str
    reference_solution: str | None = None

    def __post_init__(self):
        if not self.id:
            raise ParseError("task id must be non-empty")
        if not self.prompt or not self.tests:
            raise ParseError(f"task {self.id!r} needs a non-empty prompt and tests")


@dataclass(frozen=True)
class Dataset:
    name: str
    tasks: tuple[Task, ...] = ()

    def __post_init__(self):
        ids = [task.id for task in self.tasks]
        if len(ids) != len(set(ids)):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ParseError(f"duplicate task ids: {dupes}")

    def __len__(self) -> int:
        return len(self.tasks)

    def get(self, task_id: str) -> Task | None:
        for task in self.tasks:
            if task.id == task_id:
                return task
        return None


@dataclass(frozen=True)
class OutcomeRecord:
    passed: bool
    attempts: int = 1
    temperature: float = 0.0

    def __post_init__(self):
        if self.attempts < 1:
            raise ValueError("attempts must be >= 1")


@dataclass
class OutcomeTable:
    """Recorded per-(task, condition) results of earlier runs."""

    records: dict[tuple[str, str], OutcomeRecord] = field(default_factory=dict)

    def put(self, task_id: str, condition: str, record: OutcomeRecord) -> None:
        if condition not in CONDITIONS:
            raise ValueError(f"unknown condition {condition!r}")
        self.records[(task_id, condition)] = record

    def get(self, task_id: str, condition: str) -> OutcomeRecord | None:
        return self.records.get((task_id, condition))

    def require(self, task_id: str, condition: str) -> OutcomeRecord:
        record = self.get(task_id, condition)
        if record is None:
            raise MissingOutcomeError(f"no {condition} outcome recorded for task {task_id!r}")
        return record

    def merge(self, other: "OutcomeTable") -> None:
        self.records.update(other.records)

    def save(self, path: str | Path) -> None:
        doc = {
            f"{task_id}/{condition}": {
                "passed": rec.passed,
                "attempts": rec.attempts,
                "temperature": rec.temperature,
            }
            for (task_id, condition), rec in sorted(self.records.items())
        }
        Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "OutcomeTable":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        table = cls()
        for key, value in doc.items():
            task_id, _, condition = key.rpartition("/")
            if not task_id or condition not in CONDITIONS:
                raise ParseError(f"bad outcome key {key!r}")
            table.put(
                task_id,
                condition,
                OutcomeRecord(
                    passed=bool(value["passed"]),
                    attempts=int(value.get("attempts", 1)),
                    temperature=float(value.get("temperature", 0.0)),
                ),
            )
        return table


def load_dataset(path: str | Path, format: str) -> Dataset:
    """Load tasks from ``path`` in one of the supported formats."""
    if format not in FORMATS:
        raise ParseError(f"unknown dataset format {format!r}")
    path = Path(path)
    if format == "jsonl_humaneval":
        tasks = _load_jsonl_humaneval(path)
    else:
        tasks = _load_json_apps(path)
    return Dataset(name=path.stem, tasks=tuple(tasks))


def _load_jsonl_humaneval(path: Path) -> list[Task]:
    tasks: list[Task] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line=lineno) from exc
            try:
                task_id = record["task_id"]
                task = Task(
                    id=task_id,
                    prompt=record["prompt"],
                    entry_point=record["entry_point"],
                    tests=_ensure_check_invoked(record["test"], record["entry_point"]),
                    reference_solution=record.get("canonical_solution"),
                )
            except KeyError as exc:
                raise ParseError(f"missing field {exc.args[0]!r}", line=lineno) from exc
            if task_id in seen:
                raise ParseError(f"duplicate task_id {task_id!r}", line=lineno)
            seen.add(task_id)
            tasks.append(task)
    return tasks


def _ensure_check_invoked(test: str, entry_point: str) -> str:
    """Append ``check(entry_point)`` when the test defines but never runs it."""
    if _CHECK_DEF_RE.search(test) and not _CHECK_CALL_RE.search(test):
        return test.rstrip("\n") + f"\n\ncheck({entry_point})\n"
    return test


def _load_json_apps(path: Path) -> list[Task]:
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}") from exc
    if not isinstance(doc, list):
        raise ParseError("APPS-style file must hold a JSON array of problems")
    tasks: list[Task] = []
    seen: set[str] = set()
    for index, record in enumerate(doc):
        task_id = str(record.get("id", index))
        if task_id in seen:
            raise ParseError(f"duplicate task id {task_id!r}")
        io_spec = record.get("input_output") or {}
        fn_name = io_spec.get("fn_name")
        inputs = io_spec.get("inputs") or []
        outputs = io_spec.get("outputs") or []
        if not fn_name or not inputs or len(inputs) != len(outputs):
            logger.warning(
                "skipping problem %s: no machine-checkable function tests", task_id
            )
            continue
        tests = _assertions_for(fn_name, inputs, outputs)
        solutions = record.get("solutions") or []
        try:
            question = record["question"]
        except KeyError as exc:
            raise ParseError(f"problem {task_id!r} missing field 'question'") from exc
        seen.add(task_id)
        tasks.append(
            Task(
                id=task_id,
                prompt=question,
                entry_point=fn_name,
                tests=tests,
                reference_solution=solutions[0] if solutions else None,
            )
        )
    return tasks


def _assertions_for(fn_name: str, inputs: list, outputs: list) -> str:
    lines = []
    for args, expected in zip(inputs, outputs):
        call_args = ", ".join(repr(a) for a in args) if isinstance(args, list) else repr(args)
        lines.append(f"assert {fn_name}({call_args}) == {expr_literal(expected)}")
    return "\n".join(lines) + "\n"


def expr_literal(value) -> str:
    """Literal source for an expected value; unwraps APPS' 1-element lists."""
    if isinstance(value, list) and len(value) == 1:
        return repr(value[0])
    return repr(value)


def derive_subset(dataset: Dataset, outcomes: OutcomeTable, rule: str) -> Dataset:
    """Cut the sub-dataset selected by ``rule`` from ``dataset``.

    BP          baseline passed on a single attempt
    BP_R        BP, and the reference solution contains >=1 call site
    CF          BP, but the constrained condition failed every attempt
    BFF         baseline failed and the constrained condition failed
    APPS_BP_pass / APPS_BP_fail
                both polarities of "passed with one attempt", kept separate
                because upstream descriptions of this cut disagree
    """
    if rule not in SUBSET_RULES:
        raise ValueError(f"unknown subset rule {rule!r}, expected one of {SUBSET_RULES}")
    selected: list[Task] = []
    for task in dataset.tasks:
        baseline = outcomes.require(task.id, "baseline")
        single_pass = baseline.passed and baseline.attempts == 1
        if rule in ("BP", "APPS_BP_pass"):
            keep = single_pass
        elif rule == "APPS_BP_fail":
            keep = not single_pass
        elif rule == "BP_R":
            if not single_pass:
                keep = False
            else:
                if task.reference_solution is None:
                    raise MissingReferenceError(
                        f"task {task.id!r} has no reference solution for rule BP_R"
                    )
                keep = bool(extract_calls(task.reference_solution))
        elif rule == "CF":
            constrained = outcomes.require(task.id, "constrained")
            keep = single_pass and not constrained.passed
        else:  # BFF
            constrained = outcomes.require(task.id, "constrained")
            keep = not baseline.passed and not constrained.passed
        if keep:
            selected.append(task)
    return Dataset(name=f"{dataset.name}_{rule}", tasks=tuple(selected))


def save_dataset_jsonl(dataset: Dataset, path: str | Path) -> None:
    """Write a dataset back out in the jsonl field layout."""
    with Path(path).open("w", encoding="utf-8") as handle:
        for task in dataset.tasks:
            record = {
                "task_id": task.id,
                "prompt": task.prompt,
                "entry_point": task.entry_point,
                "test": task.tests,
            }
            if task.reference_solution is not None:
                record["canonical_solution"] = task.reference_solution
            handle.write(json.dumps(record) + "\n")
