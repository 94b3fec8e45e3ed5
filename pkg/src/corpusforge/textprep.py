"""Text normalization, character n-gram language detection and sentence
splitting.

The normalizer enforces NFC with BOM removal and single-space whitespace
runs; it never touches case and never tokenizes. The language detector is a
self-contained character n-gram model (n = 1..3, cosine similarity per
order) so the toolkit stays deterministic and dependency-free. The sentence
splitter works from capitalisation plus per-language abbreviation lists,
with list-item line starts forcing a boundary.
"""

from __future__ import annotations

import math
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from corpusforge.errors import ConfigError, DataError

BOM = "﻿"

_WS_RUN = re.compile(r"\s+")
_LANG_CODE = re.compile(r"^[a-z]{2,3}$")

# Line starts that begin a new sentence regardless of the previous line:
# "(a)"-style single-letter list markers and "12."-style numbered items.
_FORCED_LINE_START = re.compile(r"^(?:\([^\W\d_]\)|\d+\.)")

NGRAM_ORDERS = (1, 2, 3)

# First token of a would-be sentence must look capitalized; a single
# lowercase h/t fused to an uppercase letter (Irish prothesis, e.g. "hA",
# "tS") counts as capitalized.
_IRISH_PREFIX = ("h", "t")


def normalize_text(raw: str) -> str:
    """Normalize to NFC, drop a leading BOM, collapse whitespace runs.

    Case is never changed and no characters other than whitespace are
    touched; the function is idempotent.
    """
    if raw.startswith(BOM):
        raw = raw[len(BOM):]
    raw = unicodedata.normalize("NFC", raw)
    return _WS_RUN.sub(" ", raw)


def read_text_utf8(path: str | Path) -> str:
    """Read a file as UTF-8, reporting the byte offset on decode failure."""
    data = Path(path).read_bytes()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DataError(
            f"{path}: invalid UTF-8 at byte offset {exc.start}"
        ) from exc


@dataclass
class Document:
    """One raw monolingual text: identity, optional language, clean lines."""

    id: str
    path: str
    lang: str | None
    lines: list[str]

    def __post_init__(self) -> None:
        if self.lang is not None and not _LANG_CODE.match(self.lang):
            raise DataError(f"document {self.id}: unknown language code {self.lang!r}")

    @classmethod
    def load(cls, path: str | Path, doc_id: str | None = None,
             lang: str | None = None) -> "Document":
        """Load a plain-text file, normalizing each line and dropping blanks."""
        text = read_text_utf8(path)
        lines = []
        for raw_line in text.split("\n"):
            line = normalize_text(raw_line).strip()
            if line:
                lines.append(line)
        return cls(id=doc_id or Path(path).stem, path=str(path), lang=lang, lines=lines)

    @property
    def text(self) -> str:
        return " ".join(self.lines)

    @property
    def char_size(self) -> int:
        return len(self.text)


@dataclass(frozen=True)
class LanguageProfile:
    """Relative character n-gram frequencies (n = 1..3) for one language."""

    lang: str
    ngram_freqs: dict[str, float]

    def validate(self) -> None:
        sums = {n: 0.0 for n in NGRAM_ORDERS}
        for gram, freq in self.ngram_freqs.items():
            if freq < 0:
                raise DataError(f"profile {self.lang}: negative frequency for {gram!r}")
            if len(gram) not in sums:
                raise DataError(f"profile {self.lang}: bad n-gram length {gram!r}")
            sums[len(gram)] += freq
        for n, total in sums.items():
            if abs(total - 1.0) > 1e-9:
                raise DataError(
                    f"profile {self.lang}: {n}-gram frequencies sum to {total}, not 1"
                )


def _ngram_counts(text: str) -> dict[int, Counter]:
    counts: dict[int, Counter] = {n: Counter() for n in NGRAM_ORDERS}
    for n in NGRAM_ORDERS:
        bucket = counts[n]
        for i in range(len(text) - n + 1):
            bucket[text[i:i + n]] += 1
    return counts


def train_profile(text: str, lang: str) -> LanguageProfile:
    """Build a LanguageProfile from monolingual text."""
    text = normalize_text(text).strip()
    if not text:
        raise DataError("cannot train a language profile from empty text")
    freqs: dict[str, float] = {}
    for n, bucket in _ngram_counts(text).items():
        total = sum(bucket.values())
        if total == 0:
            raise DataError(f"text too short for {n}-grams")
        for gram, count in bucket.items():
            freqs[gram] = count / total
    return LanguageProfile(lang=lang, ngram_freqs=freqs)


def save_profile(profile: LanguageProfile, path: str | Path) -> None:
    """Write a profile as 'ngram<TAB>relative_frequency' lines."""
    grams = sorted(profile.ngram_freqs.items(), key=lambda kv: (len(kv[0]), kv[0]))
    with open(path, "w", encoding="utf-8") as fh:
        for gram, freq in grams:
            fh.write(f"{gram}\t{freq:.12g}\n")


def load_profile(path: str | Path, lang: str | None = None) -> LanguageProfile:
    lang = lang or Path(path).stem
    freqs: dict[str, float] = {}
    for lineno, line in enumerate(read_text_utf8(path).split("\n"), start=1):
        if not line:
            continue
        try:
            gram, freq = line.split("\t")
            freqs[gram] = float(freq)
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: bad profile line {line!r}") from exc
    profile = LanguageProfile(lang=lang, ngram_freqs=freqs)
    profile.validate()
    return profile


def load_profiles(directory: str | Path) -> list[LanguageProfile]:
    """Load every *.tsv profile in a directory (file stem = language code)."""
    paths = sorted(Path(directory).glob("*.tsv"))
    if not paths:
        raise ConfigError(f"no language profiles found in {directory}")
    return [load_profile(p) for p in paths]


def _cosine(counts: Counter, freqs: dict[str, float], order: int) -> float:
    total = sum(counts.values())
    if total == 0:
        return 0.0
    dot = 0.0
    norm_a = 0.0
    for gram, count in counts.items():
        fa = count / total
        norm_a += fa * fa
        fb = freqs.get(gram)
        if fb is not None:
            dot += fa * fb
    norm_b = 0.0
    for gram, freq in freqs.items():
        if len(gram) == order:
            norm_b += freq * freq
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return dot / math.sqrt(norm_a * norm_b)


def _profile_score(counts: dict[int, Counter], profile: LanguageProfile) -> float:
    # Higher orders are more discriminative, so each order's cosine enters
    # with exponent n; the product sharpens separation between languages.
    score = 1.0
    for n in NGRAM_ORDERS:
        score *= max(_cosine(counts[n], profile.ngram_freqs, n), 0.0) ** n
    return score


def detect_language(text: str, profiles: list[LanguageProfile]) -> tuple[str, float]:
    """Pick the best-matching profile; confidence = winning share of scores."""
    text = normalize_text(text).strip()
    if not text:
        raise DataError("cannot detect the language of empty text")
    if len(profiles) < 2:
        raise ConfigError("language detection needs at least two profiles")
    counts = _ngram_counts(text)
    scored = sorted(
        ((_profile_score(counts, p), p.lang) for p in profiles),
        key=lambda sl: (-sl[0], sl[1]),
    )
    total = sum(s for s, _ in scored)
    if total == 0.0:
        return scored[0][1], 1.0 / len(scored)
    return scored[0][1], scored[0][0] / total


def sample_line_indices(n_lines: int) -> list[int]:
    """1-based indices scanned for file language detection.

    The first min(50, N) lines, then every 100th line (100, 200, ...).
    """
    indices = list(range(1, min(50, n_lines) + 1))
    indices.extend(i for i in range(100, n_lines + 1, 100) if i > 50)
    return indices


def detect_file_language(doc: Document, profiles: list[LanguageProfile]) -> str:
    """Majority-vote language over the sampled lines; ties by summed confidence."""
    if not doc.lines:
        raise DataError(f"document {doc.id} is empty")
    votes: Counter = Counter()
    confidence: dict[str, float] = {}
    for idx in sample_line_indices(len(doc.lines)):
        line = doc.lines[idx - 1]
        if not any(ch.isalpha() for ch in line):
            continue  # digit/punctuation lines carry no language signal
        lang, conf = detect_language(line, profiles)
        votes[lang] += 1
        confidence[lang] = confidence.get(lang, 0.0) + conf
    if not votes:
        raise DataError(f"document {doc.id} has no detectable lines")
    best = max(votes.values())
    tied = [lang for lang, count in votes.items() if count == best]
    return max(tied, key=lambda lang: (confidence[lang], lang))


@dataclass
class AbbreviationList:
    """Abbreviations (all ending in '.') that never end a sentence."""

    lang: str
    entries: set[str] = field(default_factory=set)

    def __post_init__(self) -> None:
        for entry in self.entries:
            if not entry or not entry.endswith("."):
                raise DataError(f"bad abbreviation {entry!r}: must end with '.'")

    @classmethod
    def load(cls, path: str | Path, lang: str | None = None) -> "AbbreviationList":
        """One entry per line; '#' starts a comment."""
        entries = set()
        for line in read_text_utf8(path).split("\n"):
            line = line.strip()
            if line and not line.startswith("#"):
                entries.add(line)
        return cls(lang=lang or Path(path).stem, entries=entries)


def _starts_capitalized(token: str) -> bool:
    for i, ch in enumerate(token):
        if not ch.isalpha():
            continue
        if ch.isupper() or ch.istitle():
            return True
        if ch in _IRISH_PREFIX and i + 1 < len(token) and token[i + 1].isupper():
            return True
        return False
    return False


def _ends_sentence(token: str) -> bool:
    return token.endswith((".", "!", "?"))


def split_sentences(doc: Document, abbrevs: AbbreviationList | None = None) -> list[str]:
    """Reconstruct sentence boundaries from normalized document lines.

    A boundary follows a token ending in . ! or ? when the next token is
    capitalized and the finished token is not a known abbreviation. A line
    opening with a single-letter "(x)" marker or with digits plus "." always
    starts a new sentence. Joining the output with single spaces reproduces
    the document text.
    """
    entries = abbrevs.entries if abbrevs is not None else set()
    tokens: list[str] = []
    forced: list[bool] = []
    for line in doc.lines:
        line_tokens = line.split()
        if not line_tokens:
            continue
        is_forced = bool(_FORCED_LINE_START.match(line))
        for pos, token in enumerate(line_tokens):
            tokens.append(token)
            forced.append(is_forced and pos == 0)

    sentences: list[str] = []
    current: list[str] = []
    for idx, token in enumerate(tokens):
        if forced[idx] and current:
            sentences.append(" ".join(current))
            current = []
        current.append(token)
        if _ends_sentence(token) and token not in entries:
            nxt = tokens[idx + 1] if idx + 1 < len(tokens) else None
            if nxt is not None and not forced[idx + 1] and _starts_capitalized(nxt):
                sentences.append(" ".join(current))
                current = []
    if current:
        sentences.append(" ".join(current))
    return sentences
