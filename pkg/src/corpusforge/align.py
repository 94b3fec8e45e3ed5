"""Document pairing, length-based sentence alignment and pair cleaning.

Document alignment proposes best-scoring partners per round, keeps the
winning claim per target (no two files may map to the same one) and lets
rejected documents re-enter the pool for a bounded number of rounds.
Sentence alignment is a dynamic program over bead categories
{1-1, 1-0, 0-1, 2-1, 1-2, 2-2} with categorical priors and a Gaussian
character-length-ratio cost; the DP fill runs in the kernel backend.
Cleaning drops empty, non-alphabetic and wrong-language pairs.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from corpusforge import kernels
from corpusforge.errors import ConfigError, DataError
from corpusforge.textprep import Document, LanguageProfile, detect_language

BEAD_CATEGORIES = ("1-1", "1-0", "0-1", "2-1", "1-2", "2-2")

# Canonical length-based defaults: bead priors, mean target/source character
# ratio and its per-character variance. The combined 0.0099 (one-side-empty)
# and 0.089 (merge) masses are split evenly so the priors sum below 1.
DEFAULT_PRIORS = {
    "1-1": 0.89,
    "1-0": 0.00495,
    "0-1": 0.00495,
    "2-1": 0.0445,
    "1-2": 0.0445,
    "2-2": 0.011,
}

_NUMBER = re.compile(r"\d+(?:[.,]\d+)*")

# Component weights for document similarity: length-ratio closeness,
# shared-number overlap, long-token overlap.
_W_LEN, _W_NUM, _W_TOK = 0.4, 0.3, 0.3


@dataclass
class AlignConfig:
    size_ratio_min: float = 0.75
    size_ratio_max: float = 1.33
    max_iterations: int = 3
    bead_priors: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_PRIORS))
    length_ratio_mean: float = 1.0
    length_ratio_variance: float = 6.8
    min_lang_detect_chars: int = 40
    doc_score_threshold: float = 0.2

    def __post_init__(self) -> None:
        if not 0 < self.size_ratio_min < self.size_ratio_max:
            raise ConfigError("size ratio bounds must satisfy 0 < min < max")
        total = 0.0
        for cat in BEAD_CATEGORIES:
            prior = self.bead_priors.get(cat)
            if prior is None or prior <= 0:
                raise ConfigError(f"bead prior for {cat} must be positive")
            total += prior
        if total > 1.0 + 1e-9:
            raise ConfigError(f"bead priors sum to {total}, expected <= 1")

    def priors_vector(self) -> np.ndarray:
        return np.array([self.bead_priors[c] for c in BEAD_CATEGORIES], dtype=np.float64)


@dataclass(frozen=True)
class DocMapping:
    src_id: str
    tgt_id: str
    score: float
    iteration: int


@dataclass(frozen=True)
class AlignmentBead:
    src_indices: tuple[int, ...]
    tgt_indices: tuple[int, ...]
    category: str
    cost: float


@dataclass(frozen=True)
class SentencePair:
    src: str
    tgt: str
    provenance: tuple = ()


def _dice(a: set, b: set) -> float:
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    return 2 * len(a & b) / (len(a) + len(b))


def _numbers(text: str) -> set[str]:
    return set(_NUMBER.findall(text))


def _long_tokens(text: str) -> set[str]:
    return {
        tok.lower()
        for tok in text.split()
        if len(tok) >= 6 and any(ch.isalpha() for ch in tok)
    }


def doc_similarity(a: Document, b: Document) -> float:
    """Symmetric [0, 1] score from length closeness, shared numbers and
    shared long tokens (a cheap cognate proxy across related scripts).

    Components where both documents are empty carry no signal and are
    dropped, with the remaining weights renormalized.
    """
    if not a.lines or not b.lines:
        raise DataError(f"cannot score empty document ({a.id if not a.lines else b.id})")
    size_a, size_b = a.char_size, b.char_size
    closeness = max(0.0, 2.0 * min(size_a, size_b) / max(size_a, size_b) - 1.0)

    parts = [(_W_LEN, closeness)]
    nums_a, nums_b = _numbers(a.text), _numbers(b.text)
    if nums_a or nums_b:
        parts.append((_W_NUM, _dice(nums_a, nums_b)))
    toks_a, toks_b = _long_tokens(a.text), _long_tokens(b.text)
    if toks_a or toks_b:
        parts.append((_W_TOK, _dice(toks_a, toks_b)))
    weight = sum(w for w, _ in parts)
    return sum(w * v for w, v in parts) / weight


def _ratio_ok(a: Document, b: Document, cfg: AlignConfig) -> bool:
    if b.char_size == 0:
        return False
    ratio = a.char_size / b.char_size
    return cfg.size_ratio_min <= ratio <= cfg.size_ratio_max


def align_documents(
    src_docs: list[Document],
    tgt_docs: list[Document],
    cfg: AlignConfig | None = None,
) -> tuple[list[DocMapping], list[str]]:
    """Greedy injective document matching with bounded retry rounds.

    Each round, every unmatched source proposes its best admissible target
    (size-ratio window and score threshold); conflicting claims on one
    target are resolved in favour of the highest score and losers re-enter
    the pool, for at most cfg.max_iterations rounds.
    """
    cfg = cfg or AlignConfig()
    langs_src = {d.lang for d in src_docs}
    langs_tgt = {d.lang for d in tgt_docs}
    for doc in list(src_docs) + list(tgt_docs):
        if doc.lang is None:
            raise DataError(f"document {doc.id} has no language tag")
    if len(langs_src) > 1:
        bad = sorted(d.id for d in src_docs)[0]
        raise DataError(f"mixed languages in source pool (e.g. document {bad})")
    if len(langs_tgt) > 1:
        bad = sorted(d.id for d in tgt_docs)[0]
        raise DataError(f"mixed languages in target pool (e.g. document {bad})")
    if src_docs and tgt_docs and langs_src == langs_tgt:
        raise DataError("source and target pools share one language")

    pool_src = {d.id: d for d in src_docs}
    pool_tgt = {d.id: d for d in tgt_docs}
    mappings: list[DocMapping] = []
    for iteration in range(1, cfg.max_iterations + 1):
        if not pool_src or not pool_tgt:
            break
        proposals: dict[str, tuple[float, str]] = {}
        for src_id in sorted(pool_src):
            src = pool_src[src_id]
            best: tuple[float, str] | None = None
            for tgt_id in sorted(pool_tgt):
                tgt = pool_tgt[tgt_id]
                if not _ratio_ok(src, tgt, cfg):
                    continue
                score = doc_similarity(src, tgt)
                if score < cfg.doc_score_threshold:
                    continue
                if best is None or score > best[0]:
                    best = (score, tgt_id)
            if best is not None:
                score, tgt_id = best
                held = proposals.get(tgt_id)
                if held is None or score > held[0]:
                    proposals[tgt_id] = (score, src_id)
        if not proposals:
            break
        for tgt_id, (score, src_id) in sorted(proposals.items()):
            mappings.append(DocMapping(src_id, tgt_id, score, iteration))
            del pool_src[src_id]
            del pool_tgt[tgt_id]
    unmatched = sorted(pool_src) + sorted(pool_tgt)
    return mappings, unmatched


def align_sentences(
    src_sents: list[str],
    tgt_sents: list[str],
    cfg: AlignConfig | None = None,
) -> list[AlignmentBead]:
    """Minimum-cost monotone bead cover of both sentence lists."""
    cfg = cfg or AlignConfig()
    if not src_sents and not tgt_sents:
        return []
    src_lens = np.array([len(s) for s in src_sents], dtype=np.float64)
    tgt_lens = np.array([len(s) for s in tgt_sents], dtype=np.float64)
    priors = cfg.priors_vector()
    c = cfg.length_ratio_mean
    s2 = cfg.length_ratio_variance
    _, back = kernels.gc_fill(src_lens, tgt_lens, priors, c, s2)

    beads: list[AlignmentBead] = []
    i, j = len(src_sents), len(tgt_sents)
    while i > 0 or j > 0:
        k = back[i][j]
        if k < 0:
            raise DataError("sentence alignment DP table is unreachable")
        di, dj = kernels.BEAD_DELTAS[k]
        src_idx = tuple(range(i - di, i))
        tgt_idx = tuple(range(j - dj, j))
        cost = kernels.length_cost(
            float(sum(src_lens[a] for a in src_idx)),
            float(sum(tgt_lens[b] for b in tgt_idx)),
            float(priors[k]), c, s2,
        )
        beads.append(AlignmentBead(src_idx, tgt_idx, BEAD_CATEGORIES[k], cost))
        i -= di
        j -= dj
    beads.reverse()
    return beads


def bead_to_pair(
    bead: AlignmentBead,
    src_sents: list[str],
    tgt_sents: list[str],
    provenance: tuple = (),
) -> SentencePair:
    """Render a bead as a sentence pair; 1-0/0-1 beads yield an empty side."""
    src = " ".join(src_sents[i] for i in bead.src_indices)
    tgt = " ".join(tgt_sents[j] for j in bead.tgt_indices)
    return SentencePair(src=src, tgt=tgt, provenance=provenance)


REASON_EMPTY = "empty"
REASON_NO_ALPHA = "no-alphabetic"
REASON_WRONG_LANG = "wrong-language"
CLEANING_REASONS = (REASON_EMPTY, REASON_NO_ALPHA, REASON_WRONG_LANG)


def _side_empty(text: str) -> bool:
    return not text.strip()


def _side_no_alpha(text: str) -> bool:
    return not any(ch.isalpha() for ch in text)


def clean_pairs(
    pairs: list[SentencePair],
    src_lang: str,
    tgt_lang: str,
    cfg: AlignConfig | None = None,
    profiles: list[LanguageProfile] | None = None,
    rules: tuple[str, ...] = CLEANING_REASONS,
) -> tuple[list[SentencePair], list[tuple[SentencePair, str]]]:
    """Drop pairs whose source or target is empty, has no alphabetic
    character, or (at >= min_lang_detect_chars characters) detects as the
    wrong language. Each removal carries the first matching reason; rules
    can be toggled off individually.
    """
    cfg = cfg or AlignConfig()
    for rule in rules:
        if rule not in CLEANING_REASONS:
            raise ConfigError(f"unknown cleaning rule {rule!r}")
    kept: list[SentencePair] = []
    removed: list[tuple[SentencePair, str]] = []
    for pair in pairs:
        reason = None
        if REASON_EMPTY in rules and (_side_empty(pair.src) or _side_empty(pair.tgt)):
            reason = REASON_EMPTY
        elif REASON_NO_ALPHA in rules and (
            _side_no_alpha(pair.src) or _side_no_alpha(pair.tgt)
        ):
            reason = REASON_NO_ALPHA
        elif REASON_WRONG_LANG in rules and profiles is not None:
            for text, expected in ((pair.src, src_lang), (pair.tgt, tgt_lang)):
                if len(text) >= cfg.min_lang_detect_chars:
                    detected, _ = detect_language(text, profiles)
                    if detected != expected:
                        reason = REASON_WRONG_LANG
                        break
        if reason is None:
            kept.append(pair)
        else:
            removed.append((pair, reason))
    return kept, removed
