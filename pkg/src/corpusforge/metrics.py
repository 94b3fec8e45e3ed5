"""Automatic MT evaluation: BLEU, TER, ChrF, exact-match Meteor, token F1.

Tokenization is whitespace-only on normalized text; the lowercase option
folds case before tokenizing. BLEU and ChrF are reported on 0-100, Meteor
and F1 on 0-1, TER as edits per reference token (lower is better).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from corpusforge import kernels
from corpusforge.errors import DataError

BLEU_MAX_NGRAM = 4
CHRF_MAX_NGRAM = 6
TER_MAX_BLOCK = 10
TER_MAX_ITER = 20
METEOR_EXACT_LIMIT = 30


@dataclass
class MetricOptions:
    lowercase: bool = False
    sentence_level: bool = False
    chrf_beta: int = 3
    max_ngram: int = BLEU_MAX_NGRAM
    chrf_max_ngram: int = CHRF_MAX_NGRAM
    smoothing: str = "none"  # "none" | "add_k"
    smooth_k: float = 1.0

    def __post_init__(self) -> None:
        if self.chrf_beta not in (1, 3):
            raise DataError(f"chrf_beta must be 1 or 3, got {self.chrf_beta}")
        if self.max_ngram < 1 or self.chrf_max_ngram < 1:
            raise DataError("max_ngram must be at least 1")
        if self.smoothing not in ("none", "add_k"):
            raise DataError(f"unknown smoothing {self.smoothing!r}")


@dataclass
class MetricReport:
    bleu: float
    ter: float
    chrf: float
    meteor: float
    f1: float
    counts: dict = field(default_factory=dict)
    sentence_scores: dict | None = None

    def to_dict(self) -> dict:
        doc = {
            "bleu": self.bleu,
            "ter": self.ter,
            "chrf": self.chrf,
            "meteor": self.meteor,
            "f1": self.f1,
            "counts": self.counts,
        }
        if self.sentence_scores is not None:
            doc["sentence_scores"] = self.sentence_scores
        return doc


def _check_corpus(hyps: list[str], refs: list[str]) -> None:
    if len(hyps) != len(refs):
        raise DataError(f"hypothesis/reference length mismatch: {len(hyps)} vs {len(refs)}")
    if not hyps:
        raise DataError("empty corpus")


def _tokens(line: str, lowercase: bool) -> list[str]:
    return (line.lower() if lowercase else line).split()


def _ngram_counter(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


# ---------------------------------------------------------------------------
# BLEU


def _bleu_stats(hyp: list[str], ref: list[str], max_n: int):
    matches = []
    totals = []
    for n in range(1, max_n + 1):
        hyp_grams = _ngram_counter(hyp, n)
        ref_grams = _ngram_counter(ref, n)
        matches.append(sum(min(c, ref_grams[g]) for g, c in hyp_grams.items()))
        totals.append(max(len(hyp) - n + 1, 0))
    return matches, totals


def _bleu_score(matches, totals, hyp_len, ref_len, max_n, smooth_k):
    if hyp_len == 0:
        return 0.0
    log_sum = 0.0
    for n in range(max_n):
        num, den = matches[n], totals[n]
        if smooth_k is not None and (num == 0 or den == 0):
            num += smooth_k
            den += smooth_k
        if num == 0 or den == 0:
            return 0.0
        log_sum += math.log(num / den)
    bp = 1.0 if hyp_len > ref_len else math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * bp * math.exp(log_sum / max_n)


def bleu(hyps: list[str], refs: list[str], opts: MetricOptions | None = None) -> float:
    """Corpus BLEU: brevity penalty times the geometric mean of clipped
    modified n-gram precisions, n = 1..4 with uniform weights."""
    opts = opts or MetricOptions()
    _check_corpus(hyps, refs)
    max_n = opts.max_ngram
    matches = [0] * max_n
    totals = [0] * max_n
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hyps, refs):
        h = _tokens(hyp, opts.lowercase)
        r = _tokens(ref, opts.lowercase)
        hyp_len += len(h)
        ref_len += len(r)
        m, t = _bleu_stats(h, r, max_n)
        for n in range(max_n):
            matches[n] += m[n]
            totals[n] += t[n]
    smooth_k = opts.smooth_k if opts.smoothing == "add_k" else None
    return _bleu_score(matches, totals, hyp_len, ref_len, max_n, smooth_k)


def bleu_sentences(hyps: list[str], refs: list[str],
                   opts: MetricOptions | None = None) -> list[float]:
    """Per-sentence BLEU with add-k smoothing (k=1) on zero counts."""
    opts = opts or MetricOptions()
    _check_corpus(hyps, refs)
    scores = []
    for hyp, ref in zip(hyps, refs):
        h = _tokens(hyp, opts.lowercase)
        r = _tokens(ref, opts.lowercase)
        m, t = _bleu_stats(h, r, opts.max_ngram)
        scores.append(_bleu_score(m, t, len(h), len(r), opts.max_ngram, opts.smooth_k))
    return scores


# ---------------------------------------------------------------------------
# TER


def _shift_candidates(ref: list[str], max_block: int) -> set[tuple[str, ...]]:
    blocks = set()
    for n in range(1, max_block + 1):
        for i in range(len(ref) - n + 1):
            blocks.add(tuple(ref[i:i + n]))
    return blocks


def _edit_distance(a: list[int], b: list[int]) -> int:
    return kernels.edit_distance(a, b)


def ter_edits(hyp: list[str], ref: list[str]) -> int:
    """Edits for one segment (shifts included)."""
    edits, _shifts = ter_stats(hyp, ref)
    return edits


def ter_stats(hyp: list[str], ref: list[str]) -> tuple[int, int]:
    """(edits, shifts) for one segment: greedy best-improvement block shifts
    (each costing 1) wrapped around word Levenshtein. Shift blocks are
    limited to length 10 and must occur contiguously in the reference."""
    ids: dict[str, int] = {}
    for tok in hyp + ref:
        ids.setdefault(tok, len(ids))
    cur = [ids[t] for t in hyp]
    ref_ids = [ids[t] for t in ref]
    allowed = _shift_candidates(ref, TER_MAX_BLOCK)
    tok_of = {v: k for k, v in ids.items()}

    dist = _edit_distance(cur, ref_ids)
    shifts = 0
    for _ in range(TER_MAX_ITER):
        best_dist = dist
        best_seq = None
        for start in range(len(cur)):
            for length in range(1, min(TER_MAX_BLOCK, len(cur) - start) + 1):
                block = cur[start:start + length]
                if tuple(tok_of[i] for i in block) not in allowed:
                    continue
                rest = cur[:start] + cur[start + length:]
                for pos in range(len(rest) + 1):
                    if pos == start:
                        continue
                    cand = rest[:pos] + block + rest[pos:]
                    cand_dist = _edit_distance(cand, ref_ids)
                    if cand_dist < best_dist:
                        best_dist = cand_dist
                        best_seq = cand
        if best_seq is None or best_dist + 1 >= dist:
            break
        cur = best_seq
        dist = best_dist
        shifts += 1
    return shifts + dist, shifts


def ter(hyps: list[str], refs: list[str], opts: MetricOptions | None = None) -> float:
    """Corpus TER: total edits over total reference tokens."""
    opts = opts or MetricOptions()
    _check_corpus(hyps, refs)
    edits = 0
    ref_tokens = 0
    for lineno, (hyp, ref) in enumerate(zip(hyps, refs), start=1):
        h = _tokens(hyp, opts.lowercase)
        r = _tokens(ref, opts.lowercase)
        if not r:
            raise DataError(f"line {lineno}: empty reference")
        edits += ter_edits(h, r)
        ref_tokens += len(r)
    return edits / ref_tokens


def ter_sentences(hyps: list[str], refs: list[str],
                  opts: MetricOptions | None = None) -> list[float]:
    opts = opts or MetricOptions()
    _check_corpus(hyps, refs)
    scores = []
    for lineno, (hyp, ref) in enumerate(zip(hyps, refs), start=1):
        h = _tokens(hyp, opts.lowercase)
        r = _tokens(ref, opts.lowercase)
        if not r:
            raise DataError(f"line {lineno}: empty reference")
        scores.append(ter_edits(h, r) / len(r))
    return scores


# ---------------------------------------------------------------------------
# ChrF


def _chrf_line_stats(hyp: str, ref: str, max_n: int):
    h = "".join(hyp.split())
    r = "".join(ref.split())
    stats = []
    for n in range(1, max_n + 1):
        hyp_grams = Counter(h[i:i + n] for i in range(len(h) - n + 1))
        ref_grams = Counter(r[i:i + n] for i in range(len(r) - n + 1))
        match = sum(min(c, ref_grams[g]) for g, c in hyp_grams.items())
        stats.append((match, max(len(h) - n + 1, 0), max(len(r) - n + 1, 0)))
    return stats


def _chrf_from_stats(stats, beta: int) -> float:
    precisions = []
    recalls = []
    for match, hyp_total, ref_total in stats:
        if hyp_total == 0 and ref_total == 0:
            continue
        precisions.append(match / hyp_total if hyp_total else 0.0)
        recalls.append(match / ref_total if ref_total else 0.0)
    if not precisions:
        return 0.0
    avg_p = sum(precisions) / len(precisions)
    avg_r = sum(recalls) / len(recalls)
    if avg_p == 0.0 and avg_r == 0.0:
        return 0.0
    b2 = beta * beta
    return 100.0 * (1 + b2) * avg_p * avg_r / (b2 * avg_p + avg_r)


def chrf(hyps: list[str], refs: list[str], opts: MetricOptions | None = None) -> float:
    """Character n-gram F_beta (n = 1..6, whitespace excluded), averaging
    per-order precision and recall over aggregate corpus counts."""
    opts = opts or MetricOptions()
    _check_corpus(hyps, refs)
    max_n = opts.chrf_max_ngram
    agg = [(0, 0, 0)] * max_n
    for hyp, ref in zip(hyps, refs):
        if opts.lowercase:
            hyp, ref = hyp.lower(), ref.lower()
        line = _chrf_line_stats(hyp, ref, max_n)
        agg = [tuple(a + b for a, b in zip(x, y)) for x, y in zip(agg, line)]
    return _chrf_from_stats(agg, opts.chrf_beta)


def chrf_sentences(hyps: list[str], refs: list[str],
                   opts: MetricOptions | None = None) -> list[float]:
    opts = opts or MetricOptions()
    _check_corpus(hyps, refs)
    out = []
    for hyp, ref in zip(hyps, refs):
        if opts.lowercase:
            hyp, ref = hyp.lower(), ref.lower()
        out.append(_chrf_from_stats(_chrf_line_stats(hyp, ref, opts.chrf_max_ngram),
                                    opts.chrf_beta))
    return out


# ---------------------------------------------------------------------------
# Meteor (exact matches only)


def meteor_stats(hyp: list[str], ref: list[str]) -> tuple[int, int]:
    """(matches, chunks): exact-token alignment maximizing matches, then
    minimizing the number of contiguous chunks."""
    max_matches = sum((Counter(hyp) & Counter(ref)).values())
    if max_matches == 0:
        return 0, 0

    ref_positions: dict[str, list[int]] = {}
    for j, tok in enumerate(ref):
        ref_positions.setdefault(tok, []).append(j)

    n = len(hyp)
    best_chunks = max_matches + 1
    order = list(range(n))

    def walk(idx: int, used: set, matched: int, chunks: int,
             last: tuple[int, int] | None) -> None:
        nonlocal best_chunks
        if chunks >= best_chunks:
            return
        remaining = n - idx
        if matched + remaining < max_matches:
            return
        if idx == n:
            if matched == max_matches:
                best_chunks = min(best_chunks, chunks)
            return
        i = order[idx]
        tok = hyp[i]
        for j in ref_positions.get(tok, ()):
            if j in used:
                continue
            contiguous = last is not None and i == last[0] + 1 and j == last[1] + 1
            used.add(j)
            walk(idx + 1, used, matched + 1, chunks + (0 if contiguous else 1), (i, j))
            used.remove(j)
        walk(idx + 1, used, matched, chunks, last)

    walk(0, set(), 0, 0, None)
    return max_matches, best_chunks


def _meteor_score(matches: int, chunks: int, hyp_len: int, ref_len: int) -> float:
    if matches == 0 or hyp_len == 0 or ref_len == 0:
        return 0.0
    p = matches / hyp_len
    r = matches / ref_len
    fmean = 10 * p * r / (r + 9 * p)
    penalty = 0.5 * (chunks / matches) ** 3
    return fmean * (1 - penalty)


def meteor_exact(hyps: list[str], refs: list[str],
                 opts: MetricOptions | None = None) -> float:
    """Corpus Meteor over aggregated matches, chunks and lengths."""
    opts = opts or MetricOptions()
    _check_corpus(hyps, refs)
    total = [0, 0, 0, 0]  # matches, chunks, hyp_len, ref_len
    for hyp, ref in zip(hyps, refs):
        h = _tokens(hyp, opts.lowercase)
        r = _tokens(ref, opts.lowercase)
        m, ch = meteor_stats(h, r)
        total[0] += m
        total[1] += ch
        total[2] += len(h)
        total[3] += len(r)
    return _meteor_score(*total)


def meteor_sentences(hyps: list[str], refs: list[str],
                     opts: MetricOptions | None = None) -> list[float]:
    opts = opts or MetricOptions()
    _check_corpus(hyps, refs)
    out = []
    for hyp, ref in zip(hyps, refs):
        h = _tokens(hyp, opts.lowercase)
        r = _tokens(ref, opts.lowercase)
        m, ch = meteor_stats(h, r)
        out.append(_meteor_score(m, ch, len(h), len(r)))
    return out


# ---------------------------------------------------------------------------
# Token F1


def token_f1(hyps: list[str], refs: list[str],
             opts: MetricOptions | None = None) -> float:
    """Micro-averaged F1 over per-sentence bag-of-token intersections."""
    opts = opts or MetricOptions()
    _check_corpus(hyps, refs)
    tp = 0
    hyp_total = 0
    ref_total = 0
    for hyp, ref in zip(hyps, refs):
        h = Counter(_tokens(hyp, opts.lowercase))
        r = Counter(_tokens(ref, opts.lowercase))
        tp += sum((h & r).values())
        hyp_total += sum(h.values())
        ref_total += sum(r.values())
    p = tp / hyp_total if hyp_total else 0.0
    r = tp / ref_total if ref_total else 0.0
    return 2 * p * r / (p + r) if p + r else 0.0


def f1_sentences(hyps: list[str], refs: list[str],
                 opts: MetricOptions | None = None) -> list[float]:
    opts = opts or MetricOptions()
    _check_corpus(hyps, refs)
    out = []
    for hyp, ref in zip(hyps, refs):
        h = Counter(_tokens(hyp, opts.lowercase))
        r = Counter(_tokens(ref, opts.lowercase))
        tp = sum((h & r).values())
        p = tp / sum(h.values()) if h else 0.0
        rr = tp / sum(r.values()) if r else 0.0
        out.append(2 * p * rr / (p + rr) if p + rr else 0.0)
    return out


# ---------------------------------------------------------------------------
# Combined report


def _detailed_counts(hyps: list[str], refs: list[str], opts: MetricOptions) -> dict:
    bleu_matches = [0] * opts.max_ngram
    bleu_totals = [0] * opts.max_ngram
    edits = 0
    shifts = 0
    chrf_matches = [0] * opts.chrf_max_ngram
    for hyp, ref in zip(hyps, refs):
        h = _tokens(hyp, opts.lowercase)
        r = _tokens(ref, opts.lowercase)
        m, t = _bleu_stats(h, r, opts.max_ngram)
        for n in range(opts.max_ngram):
            bleu_matches[n] += m[n]
            bleu_totals[n] += t[n]
        seg_edits, seg_shifts = ter_stats(h, r)
        edits += seg_edits
        shifts += seg_shifts
        if opts.lowercase:
            hyp, ref = hyp.lower(), ref.lower()
        for n, (match, _ht, _rt) in enumerate(_chrf_line_stats(hyp, ref,
                                                               opts.chrf_max_ngram)):
            chrf_matches[n] += match
    return {
        "segments": len(hyps),
        "hyp_tokens": sum(len(_tokens(h, opts.lowercase)) for h in hyps),
        "ref_tokens": sum(len(_tokens(r, opts.lowercase)) for r in refs),
        "bleu_ngram_matches": bleu_matches,
        "bleu_ngram_totals": bleu_totals,
        "ter_edits": edits,
        "ter_shifts": shifts,
        "chrf_ngram_matches": chrf_matches,
    }


def evaluate_all(hyps: list[str], refs: list[str],
                 opts: MetricOptions | None = None) -> MetricReport:
    """Every metric at once, with per-sentence scores when requested."""
    opts = opts or MetricOptions()
    _check_corpus(hyps, refs)
    report = MetricReport(
        bleu=bleu(hyps, refs, opts),
        ter=ter(hyps, refs, opts),
        chrf=chrf(hyps, refs, opts),
        meteor=meteor_exact(hyps, refs, opts),
        f1=token_f1(hyps, refs, opts),
        counts=_detailed_counts(hyps, refs, opts),
    )
    if opts.sentence_level:
        report.sentence_scores = {
            "bleu": bleu_sentences(hyps, refs, opts),
            "ter": ter_sentences(hyps, refs, opts),
            "chrf": chrf_sentences(hyps, refs, opts),
            "meteor": meteor_sentences(hyps, refs, opts),
            "f1": f1_sentences(hyps, refs, opts),
        }
    return report
