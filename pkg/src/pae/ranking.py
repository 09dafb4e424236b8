"""Fuse relevance and informativeness, aggregate over paraphrases, rank.

Per (paraphrase, segment) pair the answerability is relevance +
informativeness (an optional logistic transform squashes the informativeness
term onto [0, 1] first). Per segment, the paraphrase set is reduced with MAX
(default; the winning paraphrase is kept for provenance) or MEAN. Segments
are ranked by the aggregate, ties broken by document position.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

from pae.corpus import PolicyDocument
from pae.errors import EmptyParaphraseSet, FormatError
from pae.expansion import ExpansionMethod, Paraphrase, ParaphraseSet
from pae.scoring import ScorerBackend, informativeness_from_spans


class Aggregation(str, Enum):
    MAX = "max"
    MEAN = "mean"


class Transform(str, Enum):
    IDENTITY = "identity"
    LOGISTIC = "logistic"


class Presentation(str, Enum):
    RANK = "rank"
    DOCUMENT = "document"


def answerability(relevance: float, informativeness: float, transform: Transform = Transform.IDENTITY) -> float:
    """Combine the two scores for one pair. IDENTITY is the plain sum."""
    if not 0.0 <= relevance <= 1.0:
        raise ValueError(f"relevance {relevance} outside [0, 1]")
    if not math.isfinite(informativeness):
        raise ValueError("informativeness must be finite")
    if transform is Transform.LOGISTIC:
        return relevance + 1.0 / (1.0 + math.exp(-informativeness))
    return relevance + informativeness


def _argmax(scores: Sequence[float]) -> int:
    best = 0
    for i in range(1, len(scores)):
        if scores[i] > scores[best]:
            best = i
    return best


def aggregate(
    per_paraphrase: Sequence[tuple[Paraphrase, float]], mode: Aggregation = Aggregation.MAX
) -> tuple[float, Paraphrase]:
    """Reduce per-paraphrase answerability scores to one segment score.

    MAX keeps the winning paraphrase (earliest on ties); MEAN averages, and
    the reported winner is still the max element (provenance only).
    """
    if not per_paraphrase:
        raise EmptyParaphraseSet("cannot aggregate an empty paraphrase list")
    scores = [s for _, s in per_paraphrase]
    winner = per_paraphrase[_argmax(scores)][0]
    if mode is Aggregation.MEAN:
        return sum(scores) / len(scores), winner
    return scores[_argmax(scores)], winner


@dataclass(frozen=True)
class RankConfig:
    aggregation: Aggregation = Aggregation.MAX
    transform: Transform = Transform.IDENTITY
    tau: float = 0.0
    ablate_expansion: bool = False
    ablate_informativeness: bool = False


@dataclass(frozen=True)
class SegmentAnswerability:
    """One segment's aggregated score with winning-pair provenance.

    Under MAX aggregation with the identity transform,
    score == winning_relevance + winning_informativeness.
    """

    segment_index: int
    score: float
    winning_paraphrase: Paraphrase
    winning_relevance: float
    winning_informativeness: float
    winning_span: tuple[int, int] | None = None
    winning_span_text: str = ""
    answerable: bool = False


def rank_segments(
    policy: PolicyDocument,
    pset: ParaphraseSet,
    scorer: ScorerBackend,
    config: RankConfig = RankConfig(),
) -> list[SegmentAnswerability]:
    """Score every (paraphrase, segment) pair and rank the segments.

    `ablate_expansion` restricts the set to the original query;
    `ablate_informativeness` zeroes the span term so only relevance ranks.
    Output is sorted by score descending, ties by segment index ascending.
    """
    if config.ablate_expansion:
        items = [p for p in pset.items if p.method is ExpansionMethod.ORIGINAL]
    else:
        items = list(pset.items)
    if not items:
        raise EmptyParaphraseSet(f"paraphrase set for query {pset.query.id!r} is empty")
    segments = policy.segments
    pairs = [(p.text, seg.text) for p in items for seg in segments]

    relevance = scorer.relevance_batch(pairs)
    if len(relevance) != len(pairs):
        raise ValueError("scorer returned a wrong-length relevance batch")
    if config.ablate_informativeness:
        info = [0.0] * len(pairs)
        spans: list[tuple[int, int] | None] = [None] * len(pairs)
        span_texts = [""] * len(pairs)
        answerable = [False] * len(pairs)
    else:
        span_scores = scorer.span_batch(pairs)
        if len(span_scores) != len(pairs):
            raise ValueError("scorer returned a wrong-length span batch")
        info = []
        spans = []
        span_texts = []
        answerable = []
        for s in span_scores:
            score, best, ok = informativeness_from_spans(s, config.tau)
            info.append(score)
            spans.append(best)
            span_texts.append(" ".join(s.tokens[best[0] : best[1] + 1]))
            answerable.append(ok)

    n_seg = len(segments)
    ranked: list[SegmentAnswerability] = []
    for j in range(n_seg):
        idx = [i * n_seg + j for i in range(len(items))]
        per_par = [answerability(relevance[x], info[x], config.transform) for x in idx]
        win = _argmax(per_par)
        score = sum(per_par) / len(per_par) if config.aggregation is Aggregation.MEAN else per_par[win]
        x = idx[win]
        ranked.append(
            SegmentAnswerability(
                segment_index=j,
                score=score,
                winning_paraphrase=items[win],
                winning_relevance=relevance[x],
                winning_informativeness=info[x],
                winning_span=spans[x],
                winning_span_text=span_texts[x],
                answerable=answerable[x],
            )
        )
    ranked.sort(key=lambda sa: (-sa.score, sa.segment_index))
    return ranked


@dataclass(frozen=True)
class SummaryEntry:
    rank: int  # 1-based position in the ranking, kept in both presentations
    segment_index: int
    score: float
    winning_paraphrase: Paraphrase


@dataclass(frozen=True)
class Summary:
    query_id: str
    entries: tuple[SummaryEntry, ...]
    presentation_order: Presentation = Presentation.RANK


def build_summary(
    ranked: Sequence[SegmentAnswerability],
    k: int,
    order: Presentation = Presentation.RANK,
    query_id: str = "",
) -> Summary:
    """Top-k extract of a ranking. DOCUMENT re-sorts the selected entries by
    position in the policy for readability; rank badges keep the true rank.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    take = ranked[: min(k, len(ranked))]
    entries = [
        SummaryEntry(rank=i + 1, segment_index=sa.segment_index, score=sa.score,
                     winning_paraphrase=sa.winning_paraphrase)
        for i, sa in enumerate(take)
    ]
    if order is Presentation.DOCUMENT:
        entries.sort(key=lambda e: e.segment_index)
    return Summary(query_id=query_id, entries=tuple(entries), presentation_order=order)


# --------------------------------------------------------------------------
# Golden-file format for ranking regressions
# --------------------------------------------------------------------------


def write_ranking_golden(
    path: str | Path, query_id: str, ranked: Sequence[SegmentAnswerability]
) -> None:
    """One line per entry: query_id, segment_index, rank, score (9 dp), winner method."""
    with open(path, "w", encoding="utf-8") as fh:
        for rank, sa in enumerate(ranked, start=1):
            fh.write(
                f"{query_id}\t{sa.segment_index}\t{rank}\t{sa.score:.9f}"
                f"\t{sa.winning_paraphrase.method.value}\n"
            )


def read_ranking_golden(path: str | Path) -> list[tuple[str, int, int, float, str]]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 5:
                raise FormatError("expected 5 tab-separated fields", line=lineno, path=str(path))
            qid, seg, rank, score, method = parts
            rows.append((qid, int(seg), int(rank), float(score), method))
    return rows
