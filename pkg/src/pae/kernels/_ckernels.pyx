# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels (span max, skip-gram SGD step).

Must match ``pae.kernels.pure`` semantically; the kernel tests compare both.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log1p

cnp.import_array()


cdef inline double _sigmoid(double x) nogil:
    cdef double z
    if x >= 0.0:
        return 1.0 / (1.0 + exp(-x))
    z = exp(x)
    return z / (1.0 + z)


cdef inline double _softplus(double x) nogil:
    if x > 0.0:
        return x + log1p(exp(-x))
    return log1p(exp(x))


def span_max(start_logits, end_logits):
    """Best span score max_{a<=b} start[a] + end[b]; smallest a, then b on ties."""
    cdef double[::1] start = np.ascontiguousarray(start_logits, dtype=np.float64)
    cdef double[::1] end = np.ascontiguousarray(end_logits, dtype=np.float64)
    cdef Py_ssize_t n = start.shape[0]
    if n == 0 or end.shape[0] != n:
        raise ValueError("start/end logits must be equal-length non-empty 1-d arrays")
    cdef double best = start[0] + end[0]
    cdef double cur_max = start[0]
    cdef Py_ssize_t cur_a = 0, best_a = 0, best_b = 0, b
    cdef double cand
    for b in range(1, n):
        if start[b] > cur_max:
            cur_max = start[b]
            cur_a = b
        cand = cur_max + end[b]
        if cand > best:
            best = cand
            best_a = cur_a
            best_b = b
    return best, int(best_a), int(best_b)


def sgns_batch(double[:, ::1] syn0, double[:, ::1] syn1,
               int[::1] centers, int[::1] contexts, int[:, ::1] negatives,
               double[::1] lrs):
    """One SGD step per skip-gram pair; mutates syn0/syn1, returns summed loss."""
    cdef Py_ssize_t n_pairs = centers.shape[0]
    cdef Py_ssize_t n_neg = negatives.shape[1]
    cdef Py_ssize_t dim = syn0.shape[1]
    cdef double[::1] grad_v = np.zeros(dim, dtype=np.float64)
    cdef double[::1] gs = np.zeros(n_neg, dtype=np.float64)
    cdef double total = 0.0
    cdef double x, g_pos, lr, coef
    cdef Py_ssize_t i, j, d, c, ctx, r

    with nogil:
        for i in range(n_pairs):
            c = centers[i]
            ctx = contexts[i]
            lr = lrs[i]

            # dot products and gradients against pre-update parameters
            x = 0.0
            for d in range(dim):
                x += syn0[c, d] * syn1[ctx, d]
            g_pos = _sigmoid(x) - 1.0
            total += _softplus(-x)
            for d in range(dim):
                grad_v[d] = g_pos * syn1[ctx, d]

            for j in range(n_neg):
                r = negatives[i, j]
                if r == ctx:
                    gs[j] = 0.0
                    continue
                x = 0.0
                for d in range(dim):
                    x += syn0[c, d] * syn1[r, d]
                gs[j] = _sigmoid(x)
                total += _softplus(x)
                for d in range(dim):
                    grad_v[d] += gs[j] * syn1[r, d]

            # apply updates: output rows first, input row last
            coef = lr * g_pos
            for d in range(dim):
                syn1[ctx, d] -= coef * syn0[c, d]
            for j in range(n_neg):
                r = negatives[i, j]
                if r == ctx:
                    continue
                coef = lr * gs[j]
                for d in range(dim):
                    syn1[r, d] -= coef * syn0[c, d]
            for d in range(dim):
                syn0[c, d] -= lr * grad_v[d]
    return total
