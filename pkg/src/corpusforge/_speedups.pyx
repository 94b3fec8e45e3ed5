# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: sentence-alignment DP fill and token edit distance.

Mirrors corpusforge.kernels.pure operation-for-operation so both backends
return bit-identical results.
"""

from libc.math cimport erfc, log, sqrt

import numpy as np

DEF MAX_DELTA = 30.0


cpdef double length_cost(double src_chars, double tgt_chars, double prior,
                         double c, double s2):
    cdef double mean = (src_chars + tgt_chars / c) / 2.0
    cdef double delta
    if mean <= 0.0:
        delta = 0.0
    else:
        delta = (tgt_chars - src_chars * c) / sqrt(mean * s2)
    if delta < 0.0:
        delta = -delta
    if delta > MAX_DELTA:
        delta = MAX_DELTA
    cdef double prob = erfc(delta / sqrt(2.0))
    return -log(prob) - log(prior)


def gc_fill(src_lens, tgt_lens, priors, double c, double s2):
    cdef double[::1] sl = np.ascontiguousarray(src_lens, dtype=np.float64)
    cdef double[::1] tl = np.ascontiguousarray(tgt_lens, dtype=np.float64)
    cdef double[::1] pr = np.ascontiguousarray(priors, dtype=np.float64)
    cdef Py_ssize_t n = sl.shape[0]
    cdef Py_ssize_t m = tl.shape[0]
    cdef long[:, ::1] deltas = np.array(
        [(1, 1), (1, 0), (0, 1), (2, 1), (1, 2), (2, 2)], dtype=np.int64)

    dist_arr = np.full((n + 1, m + 1), np.inf, dtype=np.float64)
    back_arr = np.full((n + 1, m + 1), -1, dtype=np.int8)
    cdef double[:, ::1] dist = dist_arr
    cdef signed char[:, ::1] back = back_arr

    cdef Py_ssize_t i, j, k, a, b, di, dj, best_k
    cdef double best, prev, ls, lt, cand
    cdef double inf = np.inf

    dist[0][0] = 0.0
    for i in range(n + 1):
        for j in range(m + 1):
            if i == 0 and j == 0:
                continue
            best = inf
            best_k = -1
            for k in range(6):
                di = deltas[k][0]
                dj = deltas[k][1]
                if i < di or j < dj:
                    continue
                prev = dist[i - di][j - dj]
                if prev == inf:
                    continue
                ls = 0.0
                for a in range(i - di, i):
                    ls += sl[a]
                lt = 0.0
                for b in range(j - dj, j):
                    lt += tl[b]
                cand = prev + length_cost(ls, lt, pr[k], c, s2)
                if cand < best:
                    best = cand
                    best_k = k
            dist[i][j] = best
            back[i][j] = <signed char> best_k
    return dist_arr[n, m], back_arr.tolist()


def edit_distance(a, b):
    cdef long[::1] av = np.ascontiguousarray(a, dtype=np.int64)
    cdef long[::1] bv = np.ascontiguousarray(b, dtype=np.int64)
    cdef Py_ssize_t n = av.shape[0]
    cdef Py_ssize_t m = bv.shape[0]
    if n == 0:
        return m
    if m == 0:
        return n
    cdef long[::1] prev = np.arange(m + 1, dtype=np.int64)
    cdef long[::1] cur = np.zeros(m + 1, dtype=np.int64)
    cdef long[::1] tmp
    cdef Py_ssize_t i, j
    cdef long ai, sub, ins, dele, best
    for i in range(1, n + 1):
        cur[0] = i
        ai = av[i - 1]
        for j in range(1, m + 1):
            sub = prev[j - 1] + (0 if ai == bv[j - 1] else 1)
            ins = cur[j - 1] + 1
            dele = prev[j] + 1
            best = sub
            if ins < best:
                best = ins
            if dele < best:
                best = dele
            cur[j] = best
        tmp = prev
        prev = cur
        cur = tmp
    return int(prev[m])
