"""Shared fixtures and small factories for the test suite."""

from __future__ import annotations

import json

import pytest

from distdescribe.corpus import Corpus, DistributionPair, Sample


def make_corpus(name, texts):
    """Build an in-memory corpus with the same id scheme the loader uses."""
    samples = tuple(Sample(id=f"{name}:{i}", text=t) for i, t in enumerate(texts))
    return Corpus(name=name, samples=samples)


def make_pair(d0_texts, d1_texts):
    return DistributionPair(d0=make_corpus("d0", d0_texts), d1=make_corpus("d1", d1_texts))


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row) + "\n")
    return path


@pytest.fixture
def jsonl_corpus(tmp_path):
    """A three-sample jsonl corpus file on disk."""
    return write_jsonl(tmp_path / "small.jsonl", [{"text": "a"}, {"text": "b"}, {"text": "c"}])
