"""Seeded train/validation/test splitting and exact test-train overlap
handling."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from corpusforge.align import SentencePair
from corpusforge.errors import DataError


@dataclass
class CorpusSplit:
    train: list[SentencePair]
    valid: list[SentencePair]
    test: list[SentencePair]
    ratios: tuple[float, float, float]
    seed: int


def split_corpus(
    pairs: list[SentencePair],
    ratios: tuple[float, float, float],
    seed: int,
) -> CorpusSplit:
    """Deterministic seeded shuffle, then a contiguous partition: valid and
    test sizes floor to N*ratio, the remainder goes to train."""
    n = len(pairs)
    if n < 3:
        raise DataError(f"need at least 3 pairs to split, got {n}")
    r_train, r_valid, r_test = ratios
    if min(ratios) < 0 or abs(sum(ratios) - 1.0) > 1e-9:
        raise DataError(f"split ratios {ratios} must be non-negative and sum to 1")
    n_valid = math.floor(n * r_valid)
    n_test = math.floor(n * r_test)
    n_train = n - n_valid - n_test
    for size, ratio, name in (
        (n_train, r_train, "train"),
        (n_valid, r_valid, "valid"),
        (n_test, r_test, "test"),
    ):
        if ratio > 0 and size < 1:
            raise DataError(f"{n} pairs leave no {name} data at ratios {ratios}")

    indices = list(range(n))
    random.Random(seed).shuffle(indices)
    shuffled = [pairs[i] for i in indices]
    return CorpusSplit(
        train=shuffled[:n_train],
        valid=shuffled[n_train:n_train + n_valid],
        test=shuffled[n_train + n_valid:],
        ratios=ratios,
        seed=seed,
    )


def _key(pair: SentencePair) -> tuple[str, str]:
    return (pair.src, pair.tgt)


def find_overlap(
    train: list[SentencePair], test: list[SentencePair]
) -> list[tuple[int, int]]:
    """All (test_index, train_index) whose normalized (src, tgt) match exactly."""
    by_key: dict[tuple[str, str], list[int]] = {}
    for i, pair in enumerate(train):
        by_key.setdefault(_key(pair), []).append(i)
    hits = []
    for t_i, pair in enumerate(test):
        for tr_i in by_key.get(_key(pair), ()):
            hits.append((t_i, tr_i))
    return hits


def remove_overlap(
    train: list[SentencePair], test: list[SentencePair]
) -> list[SentencePair]:
    """Train minus every pair exactly matching any test pair; test unchanged."""
    test_keys = {_key(pair) for pair in test}
    return [pair for pair in train if _key(pair) not in test_keys]
