"""Tests for the synthetic benchmark generator and runner."""

from __future__ import annotations

import json

import pytest

from distdescribe.bench import (
    default_suite,
    generate_task,
    load_suite,
    run_bench,
    save_suite,
)
from distdescribe.config import RunConfig
from distdescribe.errors import UnsatisfiablePredicateError
from distdescribe.predicates import get_predicate, predicate_ids


def _satisfied_count(task, side):
    pred = get_predicate(task.gold)
    corpus = task.pair.d1 if side == 1 else task.pair.d0
    return sum(pred.satisfied(s.text) for s in corpus.samples)


def test_generate_task_exact_satisfaction_counts():
    task = generate_task("question", 0.8, 0.1, 200, seed=3)
    assert len(task.pair.d1.samples) == 200
    assert len(task.pair.d0.samples) == 200
    assert _satisfied_count(task, 1) == 160
    assert _satisfied_count(task, 0) == 20


def test_generate_task_counts_hold_for_every_predicate():
    for pid in predicate_ids():
        task = generate_task(pid, 0.7, 0.2, 40, seed=11)
        assert _satisfied_count(task, 1) == 28, pid
        assert _satisfied_count(task, 0) == 8, pid


def test_generate_task_rounding_is_half_up():
    task = generate_task("question", 0.25, 0.05, 30, seed=1)
    # 0.25*30 = 7.5 -> 8; 0.05*30 = 1.5 -> 2
    assert _satisfied_count(task, 1) == 8
    assert _satisfied_count(task, 0) == 2


def test_generate_task_deterministic():
    a = generate_task("zebra", 0.8, 0.1, 50, seed=9)
    b = generate_task("zebra", 0.8, 0.1, 50, seed=9)
    assert [s.text for s in a.pair.d1.samples] == [s.text for s in b.pair.d1.samples]
    assert [s.text for s in a.pair.d0.samples] == [s.text for s in b.pair.d0.samples]
    c = generate_task("zebra", 0.8, 0.1, 50, seed=10)
    assert [s.text for s in a.pair.d1.samples] != [s.text for s in c.pair.d1.samples]


def test_generate_task_validates_inputs():
    with pytest.raises(UnsatisfiablePredicateError):
        generate_task("not-a-predicate", 0.8, 0.1, 50, seed=0)
    with pytest.raises(ValueError):
        generate_task("question", 0.1, 0.8, 50, seed=0)  # q0 > q1
    with pytest.raises(ValueError):
        generate_task("question", 0.5, 0.5, 50, seed=0)  # no signal
    with pytest.raises(ValueError):
        generate_task("question", 0.8, 0.1, 5, seed=0)  # too small


def test_generate_task_varied_sentence_lengths():
    """Template sentences vary in word count, so length is not a proxy gold."""
    task = generate_task("question", 0.8, 0.1, 100, seed=4)
    lengths = {len(s.text.split()) for s in task.pair.d0.samples}
    assert len(lengths) >= 4


def test_default_suite_shape():
    tasks = default_suite(task_count=8, n_per_side=20, seed=1)
    assert len(tasks) == 8
    golds = [t.gold for t in tasks]
    assert len(set(golds)) == 8  # cycles the registry before repeating
    for task in tasks:
        assert len(task.pair.d1.samples) == 20


def test_save_load_suite_round_trip(tmp_path):
    tasks = default_suite(task_count=3, n_per_side=15, seed=2)
    save_suite(tasks, tmp_path / "suite")
    manifest = (tmp_path / "suite" / "manifest.jsonl").read_text(encoding="utf-8")
    rows = [json.loads(line) for line in manifest.splitlines()]
    assert len(rows) == 3
    assert {"task", "gold", "q1", "q0", "n_per_side", "seed"} <= set(rows[0])

    loaded = load_suite(tmp_path / "suite")
    assert len(loaded) == 3
    for original, back in zip(tasks, loaded):
        assert back.gold == original.gold
        assert [s.text for s in back.pair.d1.samples] == [
            s.text for s in original.pair.d1.samples
        ]


def test_run_bench_recovers_gold_on_noiseless_tasks():
    tasks = default_suite(task_count=4, n_per_side=60, seed=1)
    report = run_bench(tasks, RunConfig())
    assert len(report.results) == 4
    assert report.hit_rate == 1.0
    for result in report.results:
        assert result.gold_rank == 1
        assert result.gold_ca > 0.9
        assert result.top1_ca > 0.9


def test_run_bench_report_serializes():
    tasks = default_suite(task_count=2, n_per_side=30, seed=5)
    report = run_bench(tasks, RunConfig())
    payload = report.to_dict()
    assert payload["kind"] == "bench"
    assert payload["aggregate"]["hit_rate"] == report.hit_rate
    assert len(payload["tasks"]) == 2
    table = report.table()
    assert "hit rate" in table
