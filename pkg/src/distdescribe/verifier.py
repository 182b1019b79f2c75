"""Pairwise judgment and classification-accuracy estimation.

A hypothesis s is scored on a pair (x1, x0) by asking the judgment backend
the same question in both orientations and combining the answers as

    h_hat = (V(s, x1, x0) - V(s, x0, x1) + 1) / 2

which cancels positional bias and makes h_hat(a, b) + h_hat(b, a) = 1 hold
exactly.  Classification accuracy is the mean of h_hat over random
cross-distribution pairs; small corpora are enumerated exhaustively.
"""

from __future__ import annotations

import hashlib
import json
import math
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .backends import Backend, JudgmentRequest
from .corpus import DistributionPair, Sample
from .errors import AuthError, BackendError, ReplayMissError
from .proposer import Hypothesis

ABSTAIN = 0.5

QUESTION_TEMPLATE = "Is it true that sentence A {s}?"
CONTEXT_TEMPLATE = "A: {x1}\nB: {x0}"


def _s_text(s: Hypothesis | str) -> str:
    return s.s if isinstance(s, Hypothesis) else s


@dataclass(frozen=True)
class VerifierQuestion:
    context: str
    question: str


def build_question(s: Hypothesis | str, a: Sample, b: Sample) -> VerifierQuestion:
    return VerifierQuestion(
        context=CONTEXT_TEMPLATE.format(x1=a.text, x0=b.text),
        question=QUESTION_TEMPLATE.format(s=_s_text(s)),
    )


@dataclass(frozen=True)
class PairJudgment:
    forward: float
    backward: float

    @property
    def h_hat(self) -> float:
        return (self.forward - self.backward + 1.0) / 2.0


@dataclass(frozen=True)
class CAEstimate:
    mean: float
    stderr: float
    n_pairs: int
    seed: int
    exhaustive: bool = False

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "n_pairs": self.n_pairs,
            "seed": self.seed,
            "exhaustive": self.exhaustive,
        }


def _answer_value(answer: str) -> float:
    cleaned = answer.strip().lower()
    if cleaned.startswith("yes"):
        return 1.0
    if cleaned.startswith("no"):
        return 0.0
    return ABSTAIN


class JudgmentCache:
    """In-memory judgment memo with an optional append-only jsonl store."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._memo: dict[str, float] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            with open(self.path, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        row = json.loads(line)
                        self._memo[row["key"]] = row["value"]

    @staticmethod
    def key(backend_id: str, s: str, a_text: str, b_text: str) -> str:
        blob = json.dumps([backend_id, s, a_text, b_text], ensure_ascii=False)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def get(self, key: str) -> float | None:
        with self._lock:
            return self._memo.get(key)

    def put(self, key: str, s: str, a_id: str, b_id: str, answer: str, value: float) -> None:
        with self._lock:
            if key in self._memo:
                return
            self._memo[key] = value
            if self.path is not None:
                row = {
                    "key": key,
                    "s": s,
                    "a_id": a_id,
                    "b_id": b_id,
                    "answer": answer,
                    "value": value,
                }
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")


class Verifier:
    """Stateful wrapper tying a judgment backend to a cache and counters."""

    def __init__(self, backend: Backend, cache: JudgmentCache | None = None):
        self.backend = backend
        self.cache = cache if cache is not None else JudgmentCache()
        self._lock = threading.Lock()
        self.judgment_count = 0
        self.abstain_count = 0
        self.failed_count = 0

    def _count(self, value: float, failed: bool) -> None:
        with self._lock:
            self.judgment_count += 1
            if value == ABSTAIN:
                self.abstain_count += 1
            if failed:
                self.failed_count += 1

    @property
    def abstain_fraction(self) -> float:
        with self._lock:
            if self.judgment_count == 0:
                return 0.0
            return self.abstain_count / self.judgment_count

    def judge(self, s: Hypothesis | str, a: Sample, b: Sample) -> float:
        """One directed judgment in {0, 0.5, 1}; 0.5 is abstention."""
        s_text = _s_text(s)
        key = JudgmentCache.key(self.backend.id, s_text, a.text, b.text)
        cached = self.cache.get(key)
        if cached is not None:
            self._count(cached, failed=False)
            return cached

        q = build_question(s_text, a, b)
        try:
            answer = self.backend.judge(
                JudgmentRequest(question=q.question, context=q.context)
            )
        except (AuthError, ReplayMissError):
            raise  # configuration mistakes; retrying other pairs cannot help
        except BackendError:
            # Retry budget exhausted inside the backend: score the pair as
            # an abstention and flag it, but do not poison the cache.
            self._count(ABSTAIN, failed=True)
            return ABSTAIN
        value = _answer_value(answer)
        self.cache.put(key, s_text, a.id, b.id, answer, value)
        self._count(value, failed=False)
        return value

    def h_hat(self, s: Hypothesis | str, x1: Sample, x0: Sample) -> float:
        forward = self.judge(s, x1, x0)
        backward = self.judge(s, x0, x1)
        return (forward - backward + 1.0) / 2.0

    def estimate_ca(
        self,
        s: Hypothesis | str,
        pair: DistributionPair,
        n_pairs: int = 400,
        seed: int = 0,
    ) -> CAEstimate:
        """Mean and stderr of h_hat over cross-distribution pairs.

        Pairs are drawn with replacement from a seeded generator; when the
        full cross product is no larger than ``n_pairs`` it is enumerated
        instead, which removes Monte-Carlo noise entirely.
        """
        d1, d0 = pair.d1.samples, pair.d0.samples
        exhaustive = len(d1) * len(d0) <= n_pairs
        if exhaustive:
            drawn = [(x1, x0) for x1 in d1 for x0 in d0]
        else:
            rng = np.random.default_rng(seed)
            idx1 = rng.integers(0, len(d1), size=n_pairs)
            idx0 = rng.integers(0, len(d0), size=n_pairs)
            drawn = [(d1[int(i)], d0[int(j)]) for i, j in zip(idx1, idx0)]

        values = np.array([self.h_hat(s, x1, x0) for x1, x0 in drawn])
        mean = float(values.mean())
        if len(values) > 1:
            stderr = float(values.std(ddof=1) / math.sqrt(len(values)))
        else:
            stderr = 0.0
        return CAEstimate(
            mean=mean,
            stderr=stderr,
            n_pairs=len(values),
            seed=seed,
            exhaustive=exhaustive,
        )


def judge(backend: Backend, s: Hypothesis | str, a: Sample, b: Sample) -> float:
    return Verifier(backend).judge(s, a, b)


def h_hat(backend: Backend, s: Hypothesis | str, x1: Sample, x0: Sample) -> float:
    return Verifier(backend).h_hat(s, x1, x0)


def estimate_ca(
    backend: Backend,
    s: Hypothesis | str,
    pair: DistributionPair,
    n_pairs: int = 400,
    seed: int = 0,
) -> CAEstimate:
    return Verifier(backend).estimate_ca(s, pair, n_pairs=n_pairs, seed=seed)


def benchmark_verifier(
    backend: Backend,
    gold: Hypothesis | str,
    pair: DistributionPair,
    n_pairs: int = 400,
    seed: int = 0,
) -> CAEstimate:
    """CA of an externally supplied gold hypothesis (verifier quality metric)."""
    return estimate_ca(backend, gold, pair, n_pairs=n_pairs, seed=seed)
