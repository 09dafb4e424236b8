"""Independent brute-force oracles shared by the unit and acceptance tests.

Everything here is deliberately naive (exhaustive enumeration, O(n^2) and
worse) and never imports the implementations it is used to check.
"""

from __future__ import annotations


def brute_force_span(start_logits, end_logits) -> tuple[float, tuple[int, int]]:
    """Enumerate every span a <= b; smallest a then smallest b on score ties."""
    n = len(start_logits)
    best_score = None
    best_span = None
    for a in range(n):
        for b in range(a, n):
            score = start_logits[a] + end_logits[b]
            if best_score is None or score > best_score:
                best_score = score
                best_span = (a, b)
    return best_score, best_span


def brute_force_precision_at_k(ranked, relevant, k) -> float:
    hits = 0
    for pos in range(k):
        if pos < len(ranked) and ranked[pos] in relevant:
            hits += 1
    return 100.0 * hits / k


def brute_force_reciprocal_rank(ranked, relevant) -> float:
    position = 1
    for idx in ranked:
        if idx in relevant:
            return 1.0 / position
        position += 1
    return 0.0


def brute_force_f_at_k(rankings, relevant_sets, k) -> float:
    if not rankings:
        return 0.0
    hit_queries = 0
    for ranked, relevant in zip(rankings, relevant_sets):
        found = False
        for pos in range(min(k, len(ranked))):
            if ranked[pos] in relevant:
                found = True
        if found:
            hit_queries += 1
    return 100.0 * hit_queries / len(rankings)
