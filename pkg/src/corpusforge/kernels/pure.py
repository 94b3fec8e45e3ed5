"""Pure-Python kernels: sentence-alignment DP fill and token edit distance.

These are the fallback implementations of the two inner loops that dominate
corpus-build runtime. corpusforge._speedups holds the compiled twins; both
backends must produce bit-identical results (same operations, same order),
which tests/test_kernels.py asserts.
"""

from __future__ import annotations

import math

# Bead categories in DP tie-break order: earlier wins on equal cost.
BEAD_DELTAS = ((1, 1), (1, 0), (0, 1), (2, 1), (1, 2), (2, 2))

# Two-tailed normal probability underflows in erfc beyond this point.
_MAX_DELTA = 30.0


def length_cost(src_chars: float, tgt_chars: float, prior: float, c: float, s2: float) -> float:
    """Cost of one bead: -log prior - log P(length ratio | Gaussian(c, s2)).

    The length model follows the classic two-tailed formulation:
    delta = (tgt - src*c) / sqrt(mean_len * s2), P = erfc(|delta|/sqrt(2)).
    """
    mean = (src_chars + tgt_chars / c) / 2.0
    if mean <= 0.0:
        delta = 0.0
    else:
        delta = (tgt_chars - src_chars * c) / math.sqrt(mean * s2)
    if delta < 0.0:
        delta = -delta
    if delta > _MAX_DELTA:
        delta = _MAX_DELTA
    prob = math.erfc(delta / math.sqrt(2.0))
    return -math.log(prob) - math.log(prior)


def gc_fill(src_lens, tgt_lens, priors, c: float, s2: float):
    """Fill the alignment DP table over sentence character lengths.

    Returns (total_cost, backpointers) where backpointers[i][j] is the index
    into BEAD_DELTAS of the bead ending at (i, j), or -1 at the origin.
    """
    n = len(src_lens)
    m = len(tgt_lens)
    inf = float("inf")
    dist = [[inf] * (m + 1) for _ in range(n + 1)]
    back = [[-1] * (m + 1) for _ in range(n + 1)]
    dist[0][0] = 0.0
    for i in range(n + 1):
        for j in range(m + 1):
            if i == 0 and j == 0:
                continue
            best = inf
            best_k = -1
            for k, (di, dj) in enumerate(BEAD_DELTAS):
                if i < di or j < dj:
                    continue
                prev = dist[i - di][j - dj]
                if prev == inf:
                    continue
                ls = 0.0
                for a in range(i - di, i):
                    ls += src_lens[a]
                lt = 0.0
                for b in range(j - dj, j):
                    lt += tgt_lens[b]
                cand = prev + length_cost(ls, lt, priors[k], c, s2)
                if cand < best:
                    best = cand
                    best_k = k
            dist[i][j] = best
            back[i][j] = best_k
    return dist[n][m], back


def edit_distance(a, b) -> int:
    """Levenshtein distance between two token-id sequences."""
    n = len(a)
    m = len(b)
    if n == 0:
        return m
    if m == 0:
        return n
    prev = list(range(m + 1))
    cur = [0] * (m + 1)
    for i in range(1, n + 1):
        cur[0] = i
        ai = a[i - 1]
        for j in range(1, m + 1):
            sub = prev[j - 1] + (0 if ai == b[j - 1] else 1)
            ins = cur[j - 1] + 1
            dele = prev[j] + 1
            best = sub
            if ins < best:
                best = ins
            if dele < best:
                best = dele
            cur[j] = best
        prev, cur = cur, prev
    return prev[m]
