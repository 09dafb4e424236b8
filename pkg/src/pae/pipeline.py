"""End-to-end glue shared by the HTTP service and the CLI.

Loads the configured resources once (lexicon, rules, embeddings,
translator, scorer backend) and runs expand -> score -> rank -> summarize
for a single question against one policy.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass
from importlib import resources as importlib_resources

from pae.config import ServiceConfig
from pae.corpus import PolicyDocument, PosLexicon, QueryRecord
from pae.embeddings import EmbeddingStore, load_word2vec_text
from pae.expansion import ExpansionConfig, ExpansionMethod, ParaphraseSet, expand, parse_rules
from pae.ranking import (
    Presentation,
    RankConfig,
    SegmentAnswerability,
    Summary,
    build_summary,
    rank_segments,
)
from pae.scoring import LexicalScorer, RemoteScorer, ScorerBackend
from pae.translate import CacheTranslator, RemoteTranslator, Translator


def packaged_rules_path() -> str:
    ref = importlib_resources.files("pae.data").joinpath("rules.txt")
    with importlib_resources.as_file(ref) as path:
        return str(path)


@dataclass
class Resources:
    """Everything the pipeline needs, resolved from a ServiceConfig."""

    config: ServiceConfig
    lexicon: PosLexicon
    expansion: ExpansionConfig
    remote_scorer: RemoteScorer | None

    @classmethod
    def from_config(cls, config: ServiceConfig) -> "Resources":
        lexicon = PosLexicon.load(config.lexicon) if config.lexicon else PosLexicon.default()
        rules = tuple(parse_rules(config.rules or packaged_rules_path()))

        store: EmbeddingStore | None = None
        methods = {ExpansionMethod.RULE_ONE, ExpansionMethod.RULE_ALL}
        if config.embeddings:
            store = load_word2vec_text(config.embeddings)
            methods.add(ExpansionMethod.EMBEDDING)

        translator: Translator | None = None
        kind, _, arg = config.translator.partition(":")
        if kind == "remote":
            translator = RemoteTranslator(arg)
        elif kind == "cache":
            translator = CacheTranslator(arg)
        if translator is not None:
            methods.add(ExpansionMethod.BACK_TRANSLATION)

        remote_scorer: RemoteScorer | None = None
        if config.scorer.startswith("remote:"):
            remote_scorer = RemoteScorer(config.scorer.split(":", 1)[1])

        return cls(
            config=config,
            lexicon=lexicon,
            expansion=ExpansionConfig(
                methods=frozenset(methods),
                rules=rules,
                store=store,
                lexicon=lexicon,
                translator=translator,
            ),
            remote_scorer=remote_scorer,
        )

    @property
    def backend_name(self) -> str:
        return self.config.scorer

    def scorer_for(self, policy: PolicyDocument) -> ScorerBackend:
        if self.remote_scorer is not None:
            return self.remote_scorer
        return LexicalScorer.for_policy(policy, self.lexicon)

    def rank_config(self, **overrides) -> RankConfig:
        base = RankConfig(
            aggregation=self.config.aggregation,
            transform=self.config.transform,
            tau=self.config.tau,
        )
        if overrides:
            base = dataclasses.replace(base, **overrides)
        return base


@dataclass(frozen=True)
class AnswerResult:
    paraphrases: ParaphraseSet
    ranked: list[SegmentAnswerability]
    summary: Summary
    elapsed_ms: float


def answer_question(
    policy: PolicyDocument,
    question: str,
    resources: Resources,
    k: int | None = None,
    order: Presentation = Presentation.RANK,
    rank_config: RankConfig | None = None,
) -> AnswerResult:
    started = time.perf_counter()
    query = QueryRecord(id="interactive", policy_id=policy.id, text=question)
    cfg = rank_config if rank_config is not None else resources.rank_config()
    pset = expand(query, resources.expansion)
    ranked = rank_segments(policy, pset, resources.scorer_for(policy), cfg)
    summary = build_summary(ranked, k or resources.config.default_k, order, query_id=query.id)
    return AnswerResult(
        paraphrases=pset,
        ranked=ranked,
        summary=summary,
        elapsed_ms=(time.perf_counter() - started) * 1000.0,
    )


def answer_payload(policy: PolicyDocument, question: str, result: AnswerResult) -> dict:
    """JSON-ready answer body shared by the service and the CLI."""
    by_index = {sa.segment_index: sa for sa in result.ranked}
    summary = []
    for entry in result.summary.entries:
        sa = by_index[entry.segment_index]
        summary.append(
            {
                "rank": entry.rank,
                "segment_index": entry.segment_index,
                "segment_text": policy.segments[entry.segment_index].text,
                "score": entry.score,
                "winning_paraphrase": sa.winning_paraphrase.text,
                "winning_method": sa.winning_paraphrase.method.value,
                "best_span": (
                    None
                    if sa.winning_span is None
                    else {
                        "start": sa.winning_span[0],
                        "end": sa.winning_span[1],
                        "text": sa.winning_span_text,
                        "answerable": sa.answerable,
                    }
                ),
            }
        )
    return {
        "query": question,
        "paraphrases": [
            {"text": p.text, "method": p.method.value, "provenance": p.provenance}
            for p in result.paraphrases.items
        ],
        "summary": summary,
        "timing_ms": result.elapsed_ms,
    }
