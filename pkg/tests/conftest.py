from __future__ import annotations

import sys
from pathlib import Path

import pytest

from funcsmith.corpus import Task
from funcsmith.library import LibraryState, SkillFunction
from funcsmith.replicas import REPLICAS

TESTS_DIR = Path(__file__).parent
SNIPPETS_DIR = TESTS_DIR / "snippets"
PARSER_CORPUS_DIR = TESTS_DIR / "parser_corpus"
GOLDENS_DIR = TESTS_DIR / "goldens"

MINISHIM_CMD = [sys.executable, str(TESTS_DIR / "minishim.py")]


def replica_skill(name: str) -> SkillFunction:
    for origin, rep_name, summary, source in REPLICAS:
        if rep_name == name:
            return SkillFunction(
                name=rep_name,
                source=source,
                summary=summary,
                provenance="replica",
                origin_function=origin,
            )
    raise KeyError(name)


@pytest.fixture
def add_one_task() -> Task:
    return Task(
        id="fix/001",
        prompt=(
            'def add_one(x):\n'
            '    """Return x plus one.\n'
            '\n'
            '    >>> add_one(1)\n'
            '    2\n'
            '    """\n'
        ),
        entry_point="add_one",
        tests="assert add_one(1) == 2\nassert add_one(-1) == 0\n",
        reference_solution="    return x + 1\n",
    )


@pytest.fixture
def small_library() -> LibraryState:
    """Two replicas and their two restricted origins; enough for prompts."""
    return LibraryState(
        valid=(replica_skill("get_length"), replica_skill("absolute_value")),
        relevant=(),
        invalid=("len", "abs"),
    )


# --- scripted fail -> propose -> pass episode -------------------------------
#
# Task 1 fails its first constrained attempt, gets an is_prime sub-function
# proposed, and succeeds on the retry; task 2 passes immediately. The
# completions are real code, so the same script works against a live
# execution worker and against a stub evaluator.

def scripted_tasks() -> tuple[Task, Task]:
    next_prime = Task(
        id="rep/001",
        prompt=(
            'def next_prime(n):\n'
            '    """Return the smallest prime strictly greater than n.\n'
            '\n'
            '    >>> next_prime(10)\n'
            '    11\n'
            '    """\n'
        ),
        entry_point="next_prime",
        tests="assert next_prime(10) == 11\nassert next_prime(11) == 13\n",
        reference_solution=(
            "    candidate = n + 1\n"
            "    while any(candidate % d == 0 for d in range(2, candidate)):\n"
            "        candidate += 1\n"
            "    return candidate\n"
        ),
    )
    double = Task(
        id="rep/002",
        prompt='def double(x):\n    """Return twice x."""\n',
        entry_point="double",
        tests="assert double(2) == 4\nassert double(0) == 0\n",
    )
    return next_prime, double


SCRIPT_T1_ROUND0 = (
    "# FUNCTION HEADER\n"
    "def next_prime(n):\n"
    "# START OF COMPLETION\n"
    "    if len(str(n)) > 0:\n"
    "        return n + 1"
)

SCRIPT_T1_PROPOSAL = (
    "# BEGIN NEW-SUB FUNCTION\n"
    "def is_prime(m):\n"
    "    if m < 2:\n"
    "        return False\n"
    "    d = 2\n"
    "    while d * d <= m:\n"
    "        if m % d == 0:\n"
    "            return False\n"
    "        d = d + 1\n"
    "    return True"
)

SCRIPT_T1_ROUND1 = (
    "# FUNCTION HEADER\n"
    "def next_prime(n):\n"
    "# START OF COMPLETION\n"
    "    candidate = n + 1\n"
    "    while not is_prime(candidate):\n"
    "        candidate = candidate + 1\n"
    "    return candidate"
)

SCRIPT_T2_ROUND0 = (
    "# FUNCTION HEADER\n"
    "def double(x):\n"
    "# START OF COMPLETION\n"
    "    return x * 2"
)

SCRIPTED_RESPONSES = [
    SCRIPT_T1_ROUND0,
    SCRIPT_T1_PROPOSAL,
    SCRIPT_T1_ROUND1,
    SCRIPT_T2_ROUND0,
]


class SequenceGateway:
    """Serves canned response texts in call order.

    Also records fingerprint -> contents, so a scripted session can be dumped
    as a transcript and replayed through the real replay backend.
    """

    def __init__(self, responses, model="gpt-test"):
        self.model = model
        self.responses = list(responses)
        self.requests = []
        self.recorded: dict[str, list[str]] = {}

    def complete(self, request):
        from funcsmith.gateway import Completion, fingerprint

        if not self.responses:
            raise AssertionError("scripted gateway ran out of responses")
        self.requests.append(request)
        content = self.responses.pop(0)
        self.recorded.setdefault(fingerprint(request), []).append(content)
        return Completion(content=content, finish_reason="scripted")


class StubEvaluator:
    """Returns canned outcomes in call order; records the programs it saw."""

    def __init__(self, outcomes):
        self.outcomes = list(outcomes)
        self.programs = []

    def evaluate(self, program, limits=None):
        if not self.outcomes:
            raise AssertionError("stub evaluator ran out of outcomes")
        self.programs.append(program)
        return self.outcomes.pop(0)


def fail_assertion(detail="assert next_prime(11) == 13"):
    from funcsmith.evaluator import EvalOutcome

    return EvalOutcome(tag="fail", failure_kind="assertion", detail=detail,
                       duration_ms=12.0)


def passed(duration_ms=8.0):
    from funcsmith.evaluator import EvalOutcome

    return EvalOutcome(tag="pass", duration_ms=duration_ms)


def scripted_stub_outcomes():
    """Outcome order: t1 round-0 eval, skill validation, t1 round-1 eval,
    t2 round-0 eval."""
    return [fail_assertion(), passed(duration_ms=1.0), passed(), passed()]


def fixed_clock():
    from datetime import datetime, timezone

    stamp = datetime(2024, 6, 1, 12, 0, 0, tzinfo=timezone.utc)
    return lambda: stamp


def build_scripted_run_fixture(tmp_path, model="gpt-test"):
    """Dataset file plus replay transcript for the scripted 2-task session.

    The transcript is produced by driving the real orchestrator with the
    scripted gateway, so its fingerprints match whatever prompts a replay
    run will build from the same dataset and defaults.
    """
    import json

    from funcsmith.corpus import Dataset, save_dataset_jsonl
    from funcsmith.library import seed_replicas
    from funcsmith.orchestrator import EpisodeConfig, run_benchmark

    t1, t2 = scripted_tasks()
    dataset = Dataset(name="scripted", tasks=(t1, t2))
    dataset_path = tmp_path / "dataset.jsonl"
    save_dataset_jsonl(dataset, dataset_path)
    gateway = SequenceGateway(SCRIPTED_RESPONSES, model=model)
    run_benchmark(
        dataset, seed_replicas(), EpisodeConfig(), gateway,
        StubEvaluator(scripted_stub_outcomes()), clock=fixed_clock(),
    )
    transcript_path = tmp_path / "transcript.json"
    transcript_path.write_text(json.dumps(gateway.recorded, indent=2))
    return dataset_path, transcript_path


def build_baseline_fixture(tmp_path, model="gpt-test"):
    """Dataset + transcript for a 3-task unconstrained half-shot pass.

    Two completions are correct, one is wrong, so pass@1 is 2/3.
    """
    import json

    from funcsmith.corpus import Dataset, Task, save_dataset_jsonl
    from funcsmith.gateway import fingerprint, request_from_bundle
    from funcsmith.prompts import TemplateConfig, build_halfshot_prompt

    tasks = (
        Task(id="base/001", prompt='def double(x):\n    """Return twice x."""\n',
             entry_point="double", tests="assert double(2) == 4\n"),
        Task(id="base/002", prompt='def negate(x):\n    """Return -x."""\n',
             entry_point="negate", tests="assert negate(2) == -2\n"),
        Task(id="base/003", prompt='def triple(x):\n    """Return 3 * x."""\n',
             entry_point="triple", tests="assert triple(2) == 6\n"),
    )
    completions = {
        "base/001": "# FUNCTION HEADER\ndef double(x):\n# START OF COMPLETION\n    return x * 2",
        "base/002": "# FUNCTION HEADER\ndef negate(x):\n# START OF COMPLETION\n    return -x",
        "base/003": "# FUNCTION HEADER\ndef triple(x):\n# START OF COMPLETION\n    return x",  # wrong
    }
    dataset = Dataset(name="baseline", tasks=tasks)
    dataset_path = tmp_path / "baseline.jsonl"
    save_dataset_jsonl(dataset, dataset_path)
    template = TemplateConfig()
    entries = {}
    for task in tasks:
        bundle = build_halfshot_prompt(task, template, temperature=0.0)
        request = request_from_bundle(bundle, model=model)
        entries[fingerprint(request)] = [completions[task.id]]
    transcript_path = tmp_path / "baseline_transcript.json"
    transcript_path.write_text(json.dumps(entries, indent=2))
    return dataset_path, transcript_path
