"""Benchmark the compiled kernels against the pure NumPy fallback.

Usage:
    python benchmarks/bench_kernels.py [--quick]

Covers the two hot paths: the skip-gram SGD inner loop and the span-max
scoring kernel. Both backends run the same inputs; the table reports
wall-clock time and speedup.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from pae.kernels import available_backends


def bench_sgns(impl, n_words, dim, n_pairs, negatives, repeats):
    rng = np.random.default_rng(1)
    syn0 = (rng.random((n_words, dim)) - 0.5) / dim
    syn1 = np.zeros((n_words, dim))
    centers = rng.integers(0, n_words, n_pairs).astype(np.int32)
    contexts = rng.integers(0, n_words, n_pairs).astype(np.int32)
    negs = rng.integers(0, n_words, (n_pairs, negatives)).astype(np.int32)
    lrs = np.full(n_pairs, 0.025)
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        impl.sgns_batch(syn0, syn1, centers, contexts, negs, lrs)
        best = min(best, time.perf_counter() - started)
    return best


def bench_span_max(impl, n_calls, max_len, repeats):
    rng = np.random.default_rng(2)
    cases = [
        (rng.uniform(-5, 5, int(rng.integers(8, max_len))),)
        for _ in range(n_calls)
    ]
    cases = [(s[0], rng.uniform(-5, 5, len(s[0]))) for s in cases]
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        for start, end in cases:
            impl.span_max(start, end)
        best = min(best, time.perf_counter() - started)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    args = parser.parse_args()

    if args.quick:
        sgns_pairs, span_calls, repeats = 20_000, 2_000, 2
    else:
        sgns_pairs, span_calls, repeats = 100_000, 20_000, 3

    backends = available_backends()
    if "cython" not in backends:
        print("compiled backend not built; run `pip install -e .` first")

    results: dict[str, dict[str, float]] = {}
    for name, impl in backends.items():
        results[name] = {
            "sgns": bench_sgns(impl, n_words=5000, dim=100, n_pairs=sgns_pairs,
                               negatives=5, repeats=repeats),
            "span_max": bench_span_max(impl, n_calls=span_calls, max_len=80, repeats=repeats),
        }

    print(f"\n{'kernel':<12} {'workload':<24} " + " ".join(f"{n:>12}" for n in results))
    workloads = {
        "sgns": f"{sgns_pairs} pairs, dim 100",
        "span_max": f"{span_calls} calls",
    }
    for kernel, label in workloads.items():
        row = f"{kernel:<12} {label:<24} "
        row += " ".join(f"{results[n][kernel]:>11.3f}s" for n in results)
        print(row)
    if "cython" in results and "python" in results:
        print("\nspeedup (python / cython):")
        for kernel in workloads:
            ratio = results["python"][kernel] / results["cython"][kernel]
            print(f"  {kernel:<12} {ratio:6.1f}x")


if __name__ == "__main__":
    main()
