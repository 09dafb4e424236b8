"""Scoring of (paraphrase, segment) pairs.

Two scores per pair: a relevance probability in [0, 1] and an
informativeness score (best start+end span logit sum inside the segment).
A pair is answerable when its best span beats the no-answer score by tau.

Backends implement ``relevance_batch`` / ``span_batch`` over raw texts.
``LexicalScorer`` is the built-in deterministic baseline (tf-idf cosine for
relevance, idf-gated logits for spans) so the whole pipeline runs without
any external model service. ``RemoteScorer`` speaks the HTTP wire protocol
defined in the package README for neural backends.
"""

from __future__ import annotations

import logging
import math
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Protocol, Sequence

import numpy as np
import requests

from pae import kernels
from pae.corpus import PolicyDocument, PosLexicon, Segment, tokenize
from pae.errors import ProtocolError, ScoreOutOfRange, ScorerUnavailable

logger = logging.getLogger(__name__)

Pair = tuple[str, str]  # (paraphrase text, segment text)


@dataclass(frozen=True)
class SpanScores:
    """Per-token start/end logits for one (paraphrase, segment) pair.

    `tokens` are the backend's own tokenization of the segment, so span
    indices are always self-consistent regardless of how the corpus was
    tokenized. `null_score` is the score of the no-answer outcome.
    """

    tokens: tuple[str, ...]
    start_logits: tuple[float, ...]
    end_logits: tuple[float, ...]
    null_score: float = 0.0

    def __post_init__(self) -> None:
        n = len(self.tokens)
        if n < 1:
            raise ValueError("SpanScores needs at least one token")
        if len(self.start_logits) != n or len(self.end_logits) != n:
            raise ValueError("start/end logits must align with tokens")
        values = list(self.start_logits) + list(self.end_logits) + [self.null_score]
        if not all(math.isfinite(v) for v in values):
            raise ValueError("logits must be finite")


@dataclass(frozen=True)
class ScoredPair:
    relevance: float
    informativeness: float
    best_span: tuple[int, int]
    answerable: bool


def informativeness_from_spans(
    spans: SpanScores, tau: float = 0.0
) -> tuple[float, tuple[int, int], bool]:
    """Best span score max_{a<=b} start[a] + end[b], its argmax span and the
    answerability verdict (score > null_score + tau).

    One pass over the running maximum of the start-logit prefix; ties go to
    the smallest start, then the smallest end.
    """
    score, a, b = kernels.span_max(
        np.asarray(spans.start_logits, dtype=np.float64),
        np.asarray(spans.end_logits, dtype=np.float64),
    )
    return score, (a, b), score > spans.null_score + tau


def score_pair(relevance: float, spans: SpanScores, tau: float = 0.0) -> ScoredPair:
    if not 0.0 <= relevance <= 1.0:
        raise ScoreOutOfRange(f"relevance {relevance} outside [0, 1]")
    informativeness, best_span, answerable = informativeness_from_spans(spans, tau)
    return ScoredPair(relevance, informativeness, best_span, answerable)


class ScorerBackend(Protocol):
    def relevance_batch(self, pairs: Sequence[Pair]) -> list[float]: ...

    def span_batch(self, pairs: Sequence[Pair]) -> list[SpanScores]: ...


# --------------------------------------------------------------------------
# Deterministic lexical baseline
# --------------------------------------------------------------------------


class CorpusStats:
    """Per-policy document frequencies; idf(t) = ln(1 + N / df(t)).

    Terms never seen in the policy get df = 1 (the rarest observable value),
    so out-of-corpus query words act as rare terms instead of blowing up.
    """

    def __init__(self, n_segments: int, df: Counter):
        self.n_segments = int(n_segments)
        self.df = df

    @classmethod
    def from_policy(cls, policy: PolicyDocument) -> "CorpusStats":
        df: Counter = Counter()
        for seg in policy.segments:
            df.update({t.normalized for t in seg.tokens})
        return cls(len(policy.segments), df)

    @classmethod
    def from_segments(cls, token_lists: Iterable[Sequence[str]]) -> "CorpusStats":
        df: Counter = Counter()
        n = 0
        for tokens in token_lists:
            n += 1
            df.update(set(tokens))
        return cls(n, df)

    def idf(self, term: str) -> float:
        return math.log(1.0 + self.n_segments / max(self.df.get(term, 0), 1))


def _tfidf_vector(tokens: Sequence[str], stats: CorpusStats) -> dict[str, float]:
    counts = Counter(tokens)
    return {t: c * stats.idf(t) for t, c in counts.items()}


def lexical_relevance(paraphrase: str, segment: Segment, stats: CorpusStats) -> float:
    """Cosine similarity of tf-idf unigram vectors, clamped to [0, 1]."""
    p_vec = _tfidf_vector([t.normalized for t in tokenize(paraphrase)], stats)
    s_vec = _tfidf_vector([t.normalized for t in segment.tokens], stats)
    if not p_vec or not s_vec:
        return 0.0
    dot = sum(w * s_vec[t] for t, w in p_vec.items() if t in s_vec)
    if dot == 0.0:
        return 0.0
    norm_p = math.sqrt(sum(w * w for w in p_vec.values()))
    norm_s = math.sqrt(sum(w * w for w in s_vec.values()))
    return min(1.0, max(0.0, dot / (norm_p * norm_s)))


def lexical_span_scores(paraphrase: str, segment: Segment, stats: CorpusStats) -> SpanScores:
    """Idf-gated span logits: a segment token scores its idf at both span
    ends iff it also occurs in the paraphrase, else 0. Null score is 0.
    """
    p_terms = {t.normalized for t in tokenize(paraphrase)}
    tokens = tuple(t.normalized for t in segment.tokens)
    if not tokens:
        # an all-punctuation segment still needs a well-formed score object
        return SpanScores(tokens=("",), start_logits=(0.0,), end_logits=(0.0,), null_score=0.0)
    logits = tuple(stats.idf(t) if t in p_terms else 0.0 for t in tokens)
    return SpanScores(tokens=tokens, start_logits=logits, end_logits=logits, null_score=0.0)


class LexicalScorer:
    """Training-free baseline backend over one policy's term statistics.

    Not a substitute for a trained model: it measures lexical overlap only.
    It exists so the pipeline, the evaluation harness and every test can run
    standalone and deterministically.
    """

    name = "lexical"

    def __init__(self, stats: CorpusStats, lexicon: PosLexicon | None = None):
        self.stats = stats
        self.lexicon = lexicon

    @classmethod
    def for_policy(cls, policy: PolicyDocument, lexicon: PosLexicon | None = None):
        return cls(CorpusStats.from_policy(policy), lexicon)

    def _segment(self, text: str) -> Segment:
        return Segment(policy_id="", index=0, text=text, tokens=tuple(tokenize(text, self.lexicon)))

    def relevance_batch(self, pairs: Sequence[Pair]) -> list[float]:
        return [lexical_relevance(q, self._segment(s), self.stats) for q, s in pairs]

    def span_batch(self, pairs: Sequence[Pair]) -> list[SpanScores]:
        return [lexical_span_scores(q, self._segment(s), self.stats) for q, s in pairs]


# --------------------------------------------------------------------------
# Remote wire-protocol client
# --------------------------------------------------------------------------


class RemoteScorer:
    """Client for an external scoring service.

    POST {base}/v1/relevance  {"pairs": [{"question", "segment"}]} -> {"scores": [...]}
    POST {base}/v1/spans      {"pairs": [...]} -> {"results": [{tokens, start_logits,
                              end_logits, null_score}]}
    GET  {base}/v1/health     -> {"status": "ok", "model": ...}

    Requests are chunked at `batch_size` and retried up to 3 times with
    exponential backoff on 5xx/connection errors; 4xx responses and schema
    violations raise ProtocolError immediately. Up to `in_flight` chunks are
    posted concurrently; responses are reassembled in request order.
    """

    name = "remote"
    MAX_ATTEMPTS = 3

    def __init__(
        self,
        base_url: str,
        batch_size: int = 32,
        in_flight: int = 4,
        timeout: float = 30.0,
        backoff: float = 0.5,
    ):
        self.base_url = base_url.rstrip("/")
        self.batch_size = max(1, int(batch_size))
        self.in_flight = max(1, int(in_flight))
        self.timeout = timeout
        self.backoff = backoff

    def health(self) -> dict:
        try:
            resp = requests.get(f"{self.base_url}/v1/health", timeout=self.timeout)
            resp.raise_for_status()
            return resp.json()
        except requests.RequestException as exc:
            raise ScorerUnavailable(f"health check failed: {exc}") from exc

    def _post_chunk(self, endpoint: str, chunk: Sequence[Pair]) -> dict:
        body = {"pairs": [{"question": q, "segment": s} for q, s in chunk]}
        last: Exception | None = None
        for attempt in range(self.MAX_ATTEMPTS):
            try:
                resp = requests.post(
                    f"{self.base_url}{endpoint}", json=body, timeout=self.timeout
                )
            except requests.RequestException as exc:
                last = exc
            else:
                if resp.status_code < 300:
                    try:
                        return resp.json()
                    except ValueError as exc:
                        raise ProtocolError(f"non-JSON response from {endpoint}") from exc
                if 400 <= resp.status_code < 500:
                    raise ProtocolError(f"{endpoint} returned {resp.status_code}: {resp.text[:200]}")
                last = ScorerUnavailable(f"{endpoint} returned {resp.status_code}")
            if attempt < self.MAX_ATTEMPTS - 1:
                time.sleep(self.backoff * 2**attempt)
        raise ScorerUnavailable(
            f"{endpoint} unreachable after {self.MAX_ATTEMPTS} attempts: {last}"
        )

    def _batched(self, endpoint: str, pairs: Sequence[Pair]) -> list[dict]:
        chunks = [pairs[i : i + self.batch_size] for i in range(0, len(pairs), self.batch_size)]
        if len(chunks) <= 1:
            return [self._post_chunk(endpoint, c) for c in chunks]
        with ThreadPoolExecutor(max_workers=self.in_flight) as pool:
            return list(pool.map(lambda c: self._post_chunk(endpoint, c), chunks))

    def relevance_batch(self, pairs: Sequence[Pair]) -> list[float]:
        if not pairs:
            return []
        scores: list[float] = []
        for chunk, payload in zip(self._chunks(pairs), self._batched("/v1/relevance", pairs)):
            got = payload.get("scores")
            if not isinstance(got, list) or len(got) != len(chunk):
                raise ProtocolError("relevance response must carry one score per pair")
            for value in got:
                if not isinstance(value, (int, float)) or not math.isfinite(value):
                    raise ProtocolError(f"relevance score {value!r} is not a finite number")
                if not 0.0 <= value <= 1.0:
                    raise ScoreOutOfRange(f"relevance score {value} outside [0, 1]")
                scores.append(float(value))
        return scores

    def span_batch(self, pairs: Sequence[Pair]) -> list[SpanScores]:
        if not pairs:
            return []
        out: list[SpanScores] = []
        for chunk, payload in zip(self._chunks(pairs), self._batched("/v1/spans", pairs)):
            got = payload.get("results")
            if not isinstance(got, list) or len(got) != len(chunk):
                raise ProtocolError("spans response must carry one result per pair")
            for item in got:
                out.append(_parse_span_result(item))
        return out

    def _chunks(self, pairs: Sequence[Pair]) -> list[Sequence[Pair]]:
        return [pairs[i : i + self.batch_size] for i in range(0, len(pairs), self.batch_size)]


def _parse_span_result(item: object) -> SpanScores:
    if not isinstance(item, dict):
        raise ProtocolError("span result must be an object")
    try:
        tokens = tuple(str(t) for t in item["tokens"])
        start = tuple(float(x) for x in item["start_logits"])
        end = tuple(float(x) for x in item["end_logits"])
        null_score = float(item.get("null_score", 0.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise ProtocolError(f"malformed span result: {exc}") from exc
    try:
        return SpanScores(tokens=tokens, start_logits=start, end_logits=end, null_score=null_score)
    except ValueError as exc:
        raise ProtocolError(str(exc)) from exc
