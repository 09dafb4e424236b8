"""Retrieval metrics, the expansion-answerability report and ablation runs.

Metrics over ranked segment indices: P@k (fraction of the top k that is
relevant, averaged over queries), F@k (percentage of queries with at least
one relevant segment in the top k) and MRR. Out-of-scope queries stay in
every denominator by default, contributing zero; a flag excludes them.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from pae.corpus import PolicyDocument, QueryRecord
from pae.errors import MissingRanking
from pae.expansion import ExpansionConfig, ExpansionMethod, ParaphraseSet, Paraphrase, expand
from pae.ranking import RankConfig, rank_segments
from pae.scoring import ScorerBackend, informativeness_from_spans


def precision_at_k(ranked: Sequence[int], relevant: frozenset[int] | set[int], k: int) -> float:
    """100 * |top-k ∩ relevant| / k; k stays in the denominator even when
    fewer items were retrieved (missing slots count as irrelevant)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    hits = sum(1 for idx in ranked[:k] if idx in relevant)
    return 100.0 * hits / k


def reciprocal_rank(ranked: Sequence[int], relevant: frozenset[int] | set[int]) -> float:
    """1 / (1-based position of the first relevant item); 0 when none appears."""
    for pos, idx in enumerate(ranked, start=1):
        if idx in relevant:
            return 1.0 / pos
    return 0.0


def f_at_k(
    rankings: Sequence[Sequence[int]],
    relevant_sets: Sequence[frozenset[int] | set[int]],
    k: int,
    include_out_of_scope: bool = True,
) -> float:
    """Percentage of queries with >= 1 relevant segment in the top k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(rankings) != len(relevant_sets):
        raise ValueError("one ranking per relevant set required")
    pairs = list(zip(rankings, relevant_sets))
    if not include_out_of_scope:
        pairs = [(r, rel) for r, rel in pairs if rel]
    if not pairs:
        return 0.0
    hits = sum(1 for ranked, rel in pairs if any(idx in rel for idx in ranked[:k]))
    return 100.0 * hits / len(pairs)


@dataclass(frozen=True)
class PerQueryResult:
    query_id: str
    first_relevant_rank: int | None
    relevant_in_top_k: dict[int, int]


@dataclass(frozen=True)
class EvalReport:
    per_k: dict[int, dict[str, float]]  # k -> {"f_at_k": pct, "p_at_k": pct}
    mrr: float
    n_queries: int
    n_out_of_scope: int
    per_query: tuple[PerQueryResult, ...]
    include_out_of_scope: bool = True

    def format_table(self, name: str = "") -> str:
        """Human-readable summary; percentages to one decimal, MRR to two."""
        lines = []
        header = f"{name or 'evaluation'}: {self.n_queries} queries"
        if self.n_out_of_scope:
            mode = "included" if self.include_out_of_scope else "excluded"
            header += f" ({self.n_out_of_scope} out-of-scope, {mode})"
        lines.append(header)
        for k in sorted(self.per_k):
            row = self.per_k[k]
            lines.append(f"  F@{k} {row['f_at_k']:5.1f}   P@{k} {row['p_at_k']:5.1f}")
        lines.append(f"  MRR {self.mrr:.2f}")
        return "\n".join(lines)

    def rows(self, config_name: str = "") -> list[dict]:
        """Machine-readable rows, one per k."""
        return [
            {
                "config": config_name,
                "k": k,
                "f": self.per_k[k]["f_at_k"],
                "p": self.per_k[k]["p_at_k"],
                "mrr": self.mrr,
                "n_queries": self.n_queries,
            }
            for k in sorted(self.per_k)
        ]


def evaluate(
    queries: Sequence[QueryRecord],
    rankings: Mapping[str, Sequence[int]],
    ks: Iterable[int] = (5, 10),
    include_out_of_scope: bool = True,
) -> EvalReport:
    """Aggregate P@k, F@k and MRR over one ranking per query."""
    if not queries:
        raise MissingRanking("no queries to evaluate")
    missing = [q.id for q in queries if q.id not in rankings]
    if missing:
        raise MissingRanking(f"no ranking for queries: {missing[:5]}")
    ks = sorted(set(ks))
    if any(k < 1 for k in ks):
        raise ValueError("every k must be >= 1")

    included = [q for q in queries if include_out_of_scope or not q.out_of_scope]
    per_query: list[PerQueryResult] = []
    for q in queries:
        ranked = list(rankings[q.id])
        rr = reciprocal_rank(ranked, q.relevant_indices)
        per_query.append(
            PerQueryResult(
                query_id=q.id,
                first_relevant_rank=int(round(1.0 / rr)) if rr > 0 else None,
                relevant_in_top_k={
                    k: sum(1 for idx in ranked[:k] if idx in q.relevant_indices) for k in ks
                },
            )
        )

    per_k: dict[int, dict[str, float]] = {}
    for k in ks:
        per_k[k] = {
            "f_at_k": f_at_k(
                [list(rankings[q.id]) for q in queries],
                [q.relevant_indices for q in queries],
                k,
                include_out_of_scope=include_out_of_scope,
            ),
            "p_at_k": (
                sum(precision_at_k(rankings[q.id], q.relevant_indices, k) for q in included)
                / len(included)
                if included
                else 0.0
            ),
        }
    mrr = (
        sum(reciprocal_rank(rankings[q.id], q.relevant_indices) for q in included) / len(included)
        if included
        else 0.0
    )
    return EvalReport(
        per_k=per_k,
        mrr=mrr,
        n_queries=len(queries),
        n_out_of_scope=sum(1 for q in queries if q.out_of_scope),
        per_query=tuple(per_query),
        include_out_of_scope=include_out_of_scope,
    )


# --------------------------------------------------------------------------
# Expansion-answerability report
# --------------------------------------------------------------------------

ScorerFactory = Callable[[PolicyDocument], ScorerBackend]

_REPORT_METHODS: dict[str, frozenset[ExpansionMethod]] = {
    "rule_one": frozenset({ExpansionMethod.RULE_ONE}),
    "rule_all": frozenset({ExpansionMethod.RULE_ALL}),
    "back_translation": frozenset({ExpansionMethod.BACK_TRANSLATION}),
    "embedding": frozenset({ExpansionMethod.EMBEDDING}),
    "all": frozenset(
        {
            ExpansionMethod.RULE_ONE,
            ExpansionMethod.RULE_ALL,
            ExpansionMethod.EMBEDDING,
            ExpansionMethod.BACK_TRANSLATION,
        }
    ),
}


@dataclass(frozen=True)
class MethodStats:
    avg_paraphrases: float
    pct_recovered_pairs: float
    pct_answerable_paraphrases: float


@dataclass(frozen=True)
class ExpansionReport:
    per_method: dict[str, MethodStats]
    n_unanswerable_pairs_baseline: int
    n_pairs: int
    n_queries: int

    def format_table(self) -> str:
        lines = [
            f"expansion report: {self.n_queries} in-scope queries, {self.n_pairs} gold pairs, "
            f"{self.n_unanswerable_pairs_baseline} unanswerable with the original query"
        ]
        lines.append(f"  {'method':<18} {'avg#par':>8} {'%recovered':>11} {'%answerable':>12}")
        for name, stats in self.per_method.items():
            lines.append(
                f"  {name:<18} {stats.avg_paraphrases:>8.1f} {stats.pct_recovered_pairs:>11.1f} "
                f"{stats.pct_answerable_paraphrases:>12.1f}"
            )
        return "\n".join(lines)


def _answerable(
    scorer: ScorerBackend, question: str, segment_text: str, tau: float
) -> bool:
    spans = scorer.span_batch([(question, segment_text)])[0]
    _, _, ok = informativeness_from_spans(spans, tau)
    return ok


def expansion_report(
    policies: Sequence[PolicyDocument],
    queries: Sequence[QueryRecord],
    expansion: ExpansionConfig,
    scorer_factory: ScorerFactory,
    tau: float = 0.0,
    methods: Sequence[str] | None = None,
) -> ExpansionReport:
    """Measure how often each expansion method turns an unanswerable
    (query, gold segment) pair into an answerable one.

    Baseline pass: every (original query, gold-relevant segment) pair is
    marked answerable or not by the span scorer. Per method, reports the
    average paraphrase count per query, the share of baseline-unanswerable
    pairs recovered by at least one paraphrase, and the share of all
    (paraphrase, gold segment) evaluations that were answerable.
    Out-of-scope queries are excluded.
    """
    by_id = {p.id: p for p in policies}
    in_scope = [q for q in queries if not q.out_of_scope]
    scorers = {pid: scorer_factory(by_id[pid]) for pid in {q.policy_id for q in in_scope}}

    gold_pairs: list[tuple[QueryRecord, int]] = [
        (q, j) for q in in_scope for j in sorted(q.relevant_indices)
    ]
    baseline_unanswerable: list[tuple[QueryRecord, int]] = []
    for q, j in gold_pairs:
        seg = by_id[q.policy_id].segments[j]
        if not _answerable(scorers[q.policy_id], q.text, seg.text, tau):
            baseline_unanswerable.append((q, j))

    wanted = list(methods) if methods is not None else list(_REPORT_METHODS)
    per_method: dict[str, MethodStats] = {}
    for name in wanted:
        method_set = _REPORT_METHODS[name]
        psets: dict[str, ParaphraseSet] = {
            q.id: expand(q, expansion.with_methods(method_set)) for q in in_scope
        }
        paraphrases: dict[str, list[Paraphrase]] = {
            qid: [p for p in ps.items if p.method is not ExpansionMethod.ORIGINAL]
            for qid, ps in psets.items()
        }
        n_paraphrases = sum(len(v) for v in paraphrases.values())
        avg = n_paraphrases / len(in_scope) if in_scope else 0.0

        recovered = 0
        for q, j in baseline_unanswerable:
            seg = by_id[q.policy_id].segments[j]
            if any(
                _answerable(scorers[q.policy_id], p.text, seg.text, tau)
                for p in paraphrases[q.id]
            ):
                recovered += 1
        pct_recovered = 100.0 * recovered / len(baseline_unanswerable) if baseline_unanswerable else 0.0

        evals = 0
        answerable = 0
        for q in in_scope:
            for p in paraphrases[q.id]:
                for j in sorted(q.relevant_indices):
                    seg = by_id[q.policy_id].segments[j]
                    evals += 1
                    if _answerable(scorers[q.policy_id], p.text, seg.text, tau):
                        answerable += 1
        pct_answerable = 100.0 * answerable / evals if evals else 0.0
        per_method[name] = MethodStats(avg, pct_recovered, pct_answerable)

    return ExpansionReport(
        per_method=per_method,
        n_unanswerable_pairs_baseline=len(baseline_unanswerable),
        n_pairs=len(gold_pairs),
        n_queries=len(in_scope),
    )


# --------------------------------------------------------------------------
# Ablation runner
# --------------------------------------------------------------------------

ABLATION_CONFIGS: dict[str, dict[str, bool]] = {
    "full": {},
    "-expansion": {"ablate_expansion": True},
    "-expansion-informativeness": {
        "ablate_expansion": True,
        "ablate_informativeness": True,
    },
}


def ablation_run(
    policies: Sequence[PolicyDocument],
    queries: Sequence[QueryRecord],
    expansion: ExpansionConfig,
    scorer_factory: ScorerFactory,
    rank_config: RankConfig = RankConfig(),
    ks: Iterable[int] = (5, 10),
    configs: Sequence[str] = ("full", "-expansion", "-expansion-informativeness"),
    include_out_of_scope: bool = True,
) -> dict[str, EvalReport]:
    """One EvalReport per ablation config over identical inputs."""
    unknown = [c for c in configs if c not in ABLATION_CONFIGS]
    if unknown:
        raise ValueError(f"unknown ablation configs: {unknown}; known: {list(ABLATION_CONFIGS)}")
    by_id = {p.id: p for p in policies}
    scorers = {pid: scorer_factory(by_id[pid]) for pid in {q.policy_id for q in queries}}
    psets = {q.id: expand(q, expansion) for q in queries}

    out: dict[str, EvalReport] = {}
    for name in configs:
        cfg = dataclasses.replace(rank_config, **ABLATION_CONFIGS[name])
        rankings: dict[str, list[int]] = {}
        for q in queries:
            ranked = rank_segments(by_id[q.policy_id], psets[q.id], scorers[q.policy_id], cfg)
            rankings[q.id] = [sa.segment_index for sa in ranked]
        out[name] = evaluate(queries, rankings, ks, include_out_of_scope=include_out_of_scope)
    return out


def write_report_rows(path: str | Path, reports: Mapping[str, EvalReport]) -> None:
    """Machine-readable evaluation output: one JSON object per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for name, report in reports.items():
            for row in report.rows(name):
                fh.write(json.dumps(row) + "\n")
