"""Lightweight binary classifier separating the two sides of a pair.

The classifier's only job is ranking how representative each sample is of
its own side, so prompts can be built from the most clearly separated
samples.  A hashed-n-gram logistic regression is enough for that at desk
scale and keeps the artifact self-contained.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Corpus, DistributionPair, Sample
from .errors import DegenerateDataError

FEATURE_SPACE = 1 << 18
MODEL_FORMAT = "distdescribe-disc-v1"

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def _fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a; fixed so feature indices are stable across platforms."""
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def feature_index(token: str) -> int:
    return _fnv1a64(token.encode("utf-8")) % FEATURE_SPACE


def featurize(text: str) -> dict[int, int]:
    """Hashed counts of lowercased unigrams and adjacent bigrams.

    Tokenization is whitespace splitting; bigrams are joined with "_".
    Empty text maps to an empty vector.
    """
    tokens = text.lower().split()
    vector: dict[int, int] = {}
    for token in tokens:
        index = feature_index(token)
        vector[index] = vector.get(index, 0) + 1
    for left, right in zip(tokens, tokens[1:]):
        index = feature_index(f"{left}_{right}")
        vector[index] = vector.get(index, 0) + 1
    return vector


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 5
    learning_rate: float = 0.1
    seed: int = 0


@dataclass(frozen=True)
class Discriminator:
    """Trained logistic-regression weights; label 1 means "drawn from d1"."""

    weights: np.ndarray
    bias: float
    config: TrainConfig

    def score(self, text: str) -> float:
        """Signed log-odds that ``text`` came from the d1 side."""
        total = self.bias
        for index, count in featurize(text).items():
            total += self.weights[index] * count
        return total


@dataclass(frozen=True)
class RepresentativeSet:
    """Top-percentile samples per side, sorted by descending own-side confidence."""

    percentile: int
    d1_samples: tuple[Sample, ...]
    d0_samples: tuple[Sample, ...]


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _holdout_mask(n: int) -> list[bool]:
    # Every fifth sample (starting at 0) is held out: a deterministic 80/20
    # split that gives every non-empty side at least one held-out sample.
    return [i % 5 == 0 for i in range(n)]


def _split(corpus: Corpus) -> tuple[list[Sample], list[Sample]]:
    mask = _holdout_mask(len(corpus))
    train = [s for s, held in zip(corpus.samples, mask) if not held]
    held = [s for s, held in zip(corpus.samples, mask) if held]
    return train, held


def train(pair: DistributionPair, config: TrainConfig | None = None) -> Discriminator:
    """Fit logistic regression by per-sample SGD with seeded epoch shuffles.

    Training uses the 80% split of each side; the held-out 20% is scored by
    :func:`held_out_accuracy`.  Given the same seed and data order the
    result is bit-identical across runs.
    """
    config = config or TrainConfig()
    if len(pair.d0) < 2 or len(pair.d1) < 2:
        raise DegenerateDataError(
            f"need at least 2 samples per side, got {len(pair.d0)} and {len(pair.d1)}"
        )

    train0, _ = _split(pair.d0)
    train1, _ = _split(pair.d1)
    examples = [(featurize(s.text), 0.0) for s in train0]
    examples += [(featurize(s.text), 1.0) for s in train1]

    weights = np.zeros(FEATURE_SPACE, dtype=np.float64)
    bias = 0.0
    rng = np.random.default_rng(config.seed)
    for _ in range(config.epochs):
        for i in rng.permutation(len(examples)):
            vector, label = examples[i]
            z = bias
            for index, count in vector.items():
                z += weights[index] * count
            error = _sigmoid(z) - label
            step = config.learning_rate * error
            for index, count in vector.items():
                weights[index] -= step * count
            bias -= step
    return Discriminator(weights=weights, bias=bias, config=config)


def held_out_accuracy(disc: Discriminator, pair: DistributionPair) -> float:
    """Accuracy on the deterministic 20% holdout of each side."""
    _, held0 = _split(pair.d0)
    _, held1 = _split(pair.d1)
    correct = sum(1 for s in held0 if disc.score(s.text) <= 0)
    correct += sum(1 for s in held1 if disc.score(s.text) > 0)
    return correct / (len(held0) + len(held1))


def confidence(disc: Discriminator, sample: Sample, side: int) -> float:
    """Probability the model assigns to ``sample`` belonging to ``side``.

    The two sides are exact complements: confidence(x, 1) + confidence(x, 0)
    is 1.0 by construction.
    """
    if side not in (0, 1):
        raise ValueError(f"side must be 0 or 1, got {side}")
    p1 = _sigmoid(disc.score(sample.text))
    return p1 if side == 1 else 1.0 - p1


def _kept_count(n: int, percentile: int) -> int:
    # ceil(p% of n), floored at 5 when the side has at least 5 samples.
    return min(n, max(math.ceil(percentile * n / 100), 5))


def select_percentile(
    disc: Discriminator, pair: DistributionPair, percentile: int
) -> RepresentativeSet:
    """Keep the most confidently classified samples of each side.

    Ties are broken by sample id ascending so selection is deterministic.
    """
    if not 1 <= percentile <= 100:
        raise ValueError(f"percentile must be in [1, 100], got {percentile}")

    def top(corpus: Corpus, side: int) -> tuple[Sample, ...]:
        ranked = sorted(
            corpus.samples, key=lambda s: (-confidence(disc, s, side), s.id)
        )
        return tuple(ranked[: _kept_count(len(corpus), percentile)])

    return RepresentativeSet(
        percentile=percentile,
        d1_samples=top(pair.d1, 1),
        d0_samples=top(pair.d0, 0),
    )


def save_discriminator(disc: Discriminator, path: str | Path) -> None:
    """Dump nonzero weights as jsonl with a version header."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        header = {
            "format": MODEL_FORMAT,
            "bias": disc.bias,
            "epochs": disc.config.epochs,
            "learning_rate": disc.config.learning_rate,
            "seed": disc.config.seed,
        }
        fh.write(json.dumps(header) + "\n")
        for index in np.flatnonzero(disc.weights):
            fh.write(json.dumps([int(index), float(disc.weights[index])]) + "\n")


def load_discriminator(path: str | Path) -> Discriminator:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("format") != MODEL_FORMAT:
            raise ValueError(f"{path}: not a {MODEL_FORMAT} model file")
        weights = np.zeros(FEATURE_SPACE, dtype=np.float64)
        for line in fh:
            index, weight = json.loads(line)
            weights[index] = weight
    config = TrainConfig(
        epochs=header["epochs"],
        learning_rate=header["learning_rate"],
        seed=header["seed"],
    )
    return Discriminator(weights=weights, bias=header["bias"], config=config)
