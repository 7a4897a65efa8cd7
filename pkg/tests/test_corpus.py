from __future__ import annotations

import json
import random

import pytest

from funcsmith.corpus import (
    Dataset,
    OutcomeRecord,
    OutcomeTable,
    Task,
    derive_subset,
    load_dataset,
    save_dataset_jsonl,
)
from funcsmith.errors import MissingOutcomeError, MissingReferenceError, ParseError


def jsonl_record(task_id: str, **overrides) -> dict:
    record = {
        "task_id": task_id,
        "prompt": f"def f_{task_id.replace('/', '_')}(x):\n    \"\"\"Do the thing.\"\"\"\n",
        "entry_point": f"f_{task_id.replace('/', '_')}",
        "test": f"assert f_{task_id.replace('/', '_')}(1) is not None\n",
        "canonical_solution": "    return x\n",
    }
    record.update(overrides)
    return record


def write_jsonl(path, records):
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n")


class TestLoadJsonl:
    def test_two_tasks(self, tmp_path):
        path = tmp_path / "d.jsonl"
        write_jsonl(path, [jsonl_record("t/1"), jsonl_record("t/2")])
        dataset = load_dataset(path, "jsonl_humaneval")
        assert len(dataset) == 2
        assert dataset.tasks[0].id == "t/1"
        assert dataset.tasks[0].reference_solution == "    return x\n"

    def test_missing_test_field(self, tmp_path):
        path = tmp_path / "d.jsonl"
        record = jsonl_record("t/1")
        del record["test"]
        write_jsonl(path, [jsonl_record("t/0"), record])
        with pytest.raises(ParseError) as err:
            load_dataset(path, "jsonl_humaneval")
        assert err.value.line == 2
        assert "test" in str(err.value)

    def test_duplicate_id(self, tmp_path):
        path = tmp_path / "d.jsonl"
        write_jsonl(path, [jsonl_record("t/1"), jsonl_record("t/1")])
        with pytest.raises(ParseError) as err:
            load_dataset(path, "jsonl_humaneval")
        assert "t/1" in str(err.value)

    def test_invalid_json_line(self, tmp_path):
        path = tmp_path / "d.jsonl"
        path.write_text(json.dumps(jsonl_record("t/1")) + "\n{broken\n")
        with pytest.raises(ParseError) as err:
            load_dataset(path, "jsonl_humaneval")
        assert err.value.line == 2

    def test_check_call_appended_when_absent(self, tmp_path):
        path = tmp_path / "d.jsonl"
        test_text = "def check(candidate):\n    assert candidate(1) == 2\n"
        write_jsonl(path, [jsonl_record("t/1", test=test_text)])
        dataset = load_dataset(path, "jsonl_humaneval")
        assert dataset.tasks[0].tests.rstrip().endswith("check(f_t_1)")

    def test_existing_check_call_untouched(self, tmp_path):
        path = tmp_path / "d.jsonl"
        test_text = "def check(candidate):\n    assert candidate(1) == 2\n\ncheck(f_t_1)\n"
        write_jsonl(path, [jsonl_record("t/1", test=test_text)])
        dataset = load_dataset(path, "jsonl_humaneval")
        assert dataset.tasks[0].tests == test_text

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ParseError):
            load_dataset(tmp_path / "d.jsonl", "csv")


class TestLoadApps:
    def test_function_style_problem(self, tmp_path):
        path = tmp_path / "apps.json"
        path.write_text(json.dumps([
            {
                "id": "apps/0",
                "question": "Add two numbers.",
                "input_output": {"fn_name": "add", "inputs": [[1, 2], [3, 4]], "outputs": [3, 7]},
                "solutions": ["def add(a, b):\n    return a + b\n"],
            }
        ]))
        dataset = load_dataset(path, "json_apps")
        assert len(dataset) == 1
        task = dataset.tasks[0]
        assert task.entry_point == "add"
        assert "assert add(1, 2) == 3" in task.tests
        assert "assert add(3, 4) == 7" in task.tests

    def test_stdin_style_problem_skipped(self, tmp_path, caplog):
        path = tmp_path / "apps.json"
        path.write_text(json.dumps([
            {"id": "apps/0", "question": "Read stdin.", "input_output": {"inputs": ["1 2"], "outputs": ["3"]}},
            {"id": "apps/1", "question": "Add.", "input_output": {"fn_name": "add", "inputs": [[1, 1]], "outputs": [2]}},
        ]))
        with caplog.at_level("WARNING"):
            dataset = load_dataset(path, "json_apps")
        assert [t.id for t in dataset.tasks] == ["apps/1"]
        assert any("apps/0" in message for message in caplog.messages)


def synthetic_setup():
    """The 4-task table: t1 (B pass, C pass), t2 (B pass, C fail),
    t3 (B fail, C fail), t4 (B pass, C fail)."""
    tasks = tuple(
        Task(id=f"t{i}", prompt="def f(x):\n", entry_point="f",
             tests="assert True\n", reference_solution=ref)
        for i, ref in (
            (1, "return 1"),            # no call sites
            (2, "return len(x)"),       # one call site
            (3, "return 1"),
            (4, "return max(x)"),
        )
    )
    dataset = Dataset(name="synth", tasks=tasks)
    outcomes = OutcomeTable()
    flags = {"t1": (True, True), "t2": (True, False), "t3": (False, False), "t4": (True, False)}
    for task_id, (b, c) in flags.items():
        outcomes.put(task_id, "baseline", OutcomeRecord(passed=b, attempts=1, temperature=0.0))
        outcomes.put(task_id, "constrained", OutcomeRecord(passed=c, attempts=3, temperature=0.5))
    return dataset, outcomes


class TestDeriveSubset:
    def test_cf_rule(self):
        dataset, outcomes = synthetic_setup()
        subset = derive_subset(dataset, outcomes, "CF")
        assert [t.id for t in subset.tasks] == ["t2", "t4"]

    def test_bff_rule(self):
        dataset, outcomes = synthetic_setup()
        subset = derive_subset(dataset, outcomes, "BFF")
        assert [t.id for t in subset.tasks] == ["t3"]

    def test_bp_rule(self):
        dataset, outcomes = synthetic_setup()
        subset = derive_subset(dataset, outcomes, "BP")
        assert [t.id for t in subset.tasks] == ["t1", "t2", "t4"]

    def test_bp_r_rule_requires_call_site(self):
        """t1's reference has no calls, t2's calls len; only t2 (and t4) stay."""
        dataset, outcomes = synthetic_setup()
        subset = derive_subset(dataset, outcomes, "BP_R")
        assert [t.id for t in subset.tasks] == ["t2", "t4"]

    def test_bp_r_missing_reference(self):
        dataset, outcomes = synthetic_setup()
        stripped = Dataset(
            name="synth",
            tasks=tuple(
                Task(id=t.id, prompt=t.prompt, entry_point=t.entry_point, tests=t.tests)
                for t in dataset.tasks
            ),
        )
        with pytest.raises(MissingReferenceError):
            derive_subset(stripped, outcomes, "BP_R")

    def test_missing_outcome(self):
        dataset, outcomes = synthetic_setup()
        del outcomes.records[("t3", "baseline")]
        with pytest.raises(MissingOutcomeError) as err:
            derive_subset(dataset, outcomes, "BP")
        assert "t3" in str(err.value)

    def test_apps_polarities_partition(self):
        dataset, outcomes = synthetic_setup()
        passed = derive_subset(dataset, outcomes, "APPS_BP_pass")
        failed = derive_subset(dataset, outcomes, "APPS_BP_fail")
        assert {t.id for t in passed.tasks} | {t.id for t in failed.tasks} == {
            t.id for t in dataset.tasks
        }
        assert not ({t.id for t in passed.tasks} & {t.id for t in failed.tasks})

    def test_deterministic(self):
        dataset, outcomes = synthetic_setup()
        first = derive_subset(dataset, outcomes, "CF")
        second = derive_subset(dataset, outcomes, "CF")
        assert [t.id for t in first.tasks] == [t.id for t in second.tasks]

    def test_set_identities_random_tables(self):
        rng = random.Random(2024)
        for _ in range(200):
            n = rng.randint(1, 12)
            tasks = tuple(
                Task(id=f"t{i}", prompt="def f(x):\n", entry_point="f",
                     tests="assert True\n",
                     reference_solution=rng.choice(["return 1", "return len(x)"]))
                for i in range(n)
            )
            dataset = Dataset(name="r", tasks=tasks)
            outcomes = OutcomeTable()
            for task in tasks:
                outcomes.put(task.id, "baseline",
                             OutcomeRecord(passed=rng.random() < 0.5,
                                           attempts=rng.choice([1, 1, 2])))
                outcomes.put(task.id, "constrained",
                             OutcomeRecord(passed=rng.random() < 0.5, attempts=3))
            bp = {t.id for t in derive_subset(dataset, outcomes, "BP").tasks}
            cf = {t.id for t in derive_subset(dataset, outcomes, "CF").tasks}
            bff = {t.id for t in derive_subset(dataset, outcomes, "BFF").tasks}
            ids = {t.id for t in tasks}
            assert cf <= bp
            assert not (bp & bff)
            assert bp <= ids and cf <= ids and bff <= ids


class TestOutcomeTable:
    def test_round_trip(self, tmp_path):
        _, outcomes = synthetic_setup()
        path = tmp_path / "outcomes.json"
        outcomes.save(path)
        loaded = OutcomeTable.load(path)
        assert loaded.records == outcomes.records

    def test_task_ids_with_slashes(self, tmp_path):
        outcomes = OutcomeTable()
        outcomes.put("HumanEval/0", "baseline", OutcomeRecord(passed=True))
        path = tmp_path / "outcomes.json"
        outcomes.save(path)
        loaded = OutcomeTable.load(path)
        assert loaded.get("HumanEval/0", "baseline").passed is True

    def test_bad_condition_rejected(self):
        outcomes = OutcomeTable()
        with pytest.raises(ValueError):
            outcomes.put("t1", "weird", OutcomeRecord(passed=True))


class TestSaveDataset:
    def test_jsonl_round_trip(self, tmp_path):
        dataset, _ = synthetic_setup()
        path = tmp_path / "subset.jsonl"
        save_dataset_jsonl(dataset, path)
        loaded = load_dataset(path, "jsonl_humaneval")
        assert [t.id for t in loaded.tasks] == [t.id for t in dataset.tasks]
        assert loaded.tasks[1].reference_solution == "return len(x)"
