"""Pure NumPy implementations of the hot kernels.

Fallback used when the compiled extension is unavailable. Semantics
(including tie-breaks, update order and skipped negatives) are identical to
``pae.kernels._ckernels``; the kernel test suite compares both backends.
"""

from __future__ import annotations

import numpy as np


def span_max(start_logits: np.ndarray, end_logits: np.ndarray) -> tuple[float, int, int]:
    """Best contiguous span score max_{a<=b} start[a] + end[b].

    Ties resolve to the smallest start index, then the smallest end index.
    Single pass over the running maximum of the start-logit prefix.
    """
    start = np.ascontiguousarray(start_logits, dtype=np.float64)
    end = np.ascontiguousarray(end_logits, dtype=np.float64)
    if start.shape != end.shape or start.ndim != 1 or start.size == 0:
        raise ValueError("start/end logits must be equal-length non-empty 1-d arrays")
    run_max = np.maximum.accumulate(start)
    candidates = run_max + end
    b = int(np.argmax(candidates))
    a = int(np.argmax(start[: b + 1] == run_max[b]))
    return float(candidates[b]), a, b


def _expit(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ez = np.exp(x[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def sgns_batch(
    syn0: np.ndarray,
    syn1: np.ndarray,
    centers: np.ndarray,
    contexts: np.ndarray,
    negatives: np.ndarray,
    lrs: np.ndarray,
) -> float:
    """Apply one SGD step per (center, context) skip-gram pair, in order.

    Per-pair loss: softplus(-v.u_ctx) + sum_j softplus(v.u_neg_j) over the
    sampled negatives; negatives equal to the context word are skipped.
    Gradients are taken against the pair's pre-update parameters, then
    applied (output rows first, input row last; duplicate negative rows
    accumulate). Mutates syn0/syn1 in place and returns the summed loss.
    """
    n_pairs = centers.shape[0]
    total = 0.0
    for i in range(n_pairs):
        c = int(centers[i])
        ctx = int(contexts[i])
        lr = float(lrs[i])
        v = syn0[c]
        rows = negatives[i]
        rows = rows[rows != ctx]

        u_pos = syn1[ctx]
        x_pos = float(v @ u_pos)
        g_pos = float(_expit(np.array([x_pos]))[0]) - 1.0
        total += float(np.logaddexp(0.0, -x_pos))

        u_neg = syn1[rows]
        xs = u_neg @ v
        gs = _expit(xs)
        total += float(np.logaddexp(0.0, xs).sum())

        grad_v = g_pos * u_pos + gs @ u_neg
        syn1[ctx] -= (lr * g_pos) * v
        np.subtract.at(syn1, rows, np.outer(lr * gs, v))
        syn0[c] = v - lr * grad_v
    return total
