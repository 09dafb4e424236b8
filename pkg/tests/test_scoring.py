from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pae.corpus import ingest_policy
from pae.errors import ProtocolError, ScoreOutOfRange, ScorerUnavailable
from pae.scoring import (
    CorpusStats,
    LexicalScorer,
    RemoteScorer,
    SpanScores,
    informativeness_from_spans,
    lexical_relevance,
    lexical_span_scores,
    score_pair,
)


def spans(start, end, null=0.0, tokens=None):
    tokens = tokens or [f"t{i}" for i in range(len(start))]
    return SpanScores(
        tokens=tuple(tokens),
        start_logits=tuple(start),
        end_logits=tuple(end),
        null_score=null,
    )


class TestSpanScores:
    def test_alignment_enforced(self):
        with pytest.raises(ValueError):
            SpanScores(tokens=("a",), start_logits=(0.0, 1.0), end_logits=(0.0,))

    def test_finite_enforced(self):
        with pytest.raises(ValueError):
            spans([float("nan")], [0.0])

    def test_needs_a_token(self):
        with pytest.raises(ValueError):
            SpanScores(tokens=(), start_logits=(), end_logits=())


class TestInformativeness:
    def test_worked_example(self):
        # exhaustive enumeration of a<=b gives 4.0 at span (0, 1)
        score, best, _ = informativeness_from_spans(spans([1, 0, 2], [1, 3, 0]))
        assert score == 4.0 and best == (0, 1)

    def test_single_token(self):
        score, best, _ = informativeness_from_spans(spans([0.5], [0.7]))
        assert score == pytest.approx(1.2) and best == (0, 0)

    def test_null_score_gates_answerability(self):
        _, _, answerable = informativeness_from_spans(spans([1, 0, 2], [1, 3, 0], null=5.0))
        assert answerable is False
        _, _, answerable = informativeness_from_spans(spans([1, 0, 2], [1, 3, 0], null=3.0))
        assert answerable is True

    def test_tau_shifts_the_gate(self):
        s = spans([1.0], [1.0], null=1.5)
        assert informativeness_from_spans(s, tau=0.0)[2] is True
        assert informativeness_from_spans(s, tau=1.0)[2] is False

    @given(
        st.lists(st.floats(-5, 5), min_size=1, max_size=20),
        st.integers(0, 19),
        st.floats(0.01, 2.0),
    )
    def test_monotone_in_single_logit(self, start, pos, bump):
        end = list(reversed(start))
        pos = pos % len(start)
        base, _, _ = informativeness_from_spans(spans(start, end))
        bumped_start = list(start)
        bumped_start[pos] += bump
        up, _, _ = informativeness_from_spans(spans(bumped_start, end))
        assert up >= base
        bumped_end = list(end)
        bumped_end[pos] += bump
        up, _, _ = informativeness_from_spans(spans(start, bumped_end))
        assert up >= base


def make_policy(segment_texts):
    return ingest_policy("pol", segment_texts)


class TestLexicalRelevance:
    def test_identical_texts(self):
        policy = make_policy(["we collected data daily", "nothing here"])
        stats = CorpusStats.from_policy(policy)
        value = lexical_relevance("we collected data daily", policy.segments[0], stats)
        assert value == pytest.approx(1.0, abs=1e-9)

    def test_disjoint_vocabulary(self):
        policy = make_policy(["we collected data daily", "nothing here"])
        stats = CorpusStats.from_policy(policy)
        assert lexical_relevance("cookie trackers", policy.segments[0], stats) == 0.0

    def test_hand_computed_tfidf(self):
        # 2-segment corpus, all df = 1 so idf = ln(3) everywhere.
        # paraphrase {data, collected}, segment {we, collected, data, daily}:
        # dot = 2 ln3^2; |p| = ln3 sqrt(2); |s| = 2 ln3  ->  cos = 1/sqrt(2)
        policy = make_policy(["we collected data daily", "nothing here"])
        stats = CorpusStats.from_policy(policy)
        value = lexical_relevance("data collected", policy.segments[0], stats)
        assert value == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-9)

    def test_word_order_invariance(self):
        policy = make_policy(["we collected data daily", "nothing here"])
        shuffled = make_policy(["daily data collected we", "nothing here"])
        s1 = CorpusStats.from_policy(policy)
        s2 = CorpusStats.from_policy(shuffled)
        assert lexical_relevance("data collected", policy.segments[0], s1) == pytest.approx(
            lexical_relevance("data collected", shuffled.segments[0], s2), abs=1e-12
        )

    def test_repeated_terms_use_tf(self):
        # hand oracle with tf: segment "data data daily", paraphrase "data".
        # idf(ln(1+2/1)) = ln3 for every term; p = {data: ln3};
        # s = {data: 2 ln3, daily: ln3}; cos = 2/sqrt(5)
        policy = make_policy(["data data daily", "other words"])
        stats = CorpusStats.from_policy(policy)
        value = lexical_relevance("data", policy.segments[0], stats)
        assert value == pytest.approx(2.0 / math.sqrt(5.0), abs=1e-9)


class TestLexicalSpanScores:
    def test_no_overlap_unanswerable(self):
        policy = make_policy(["we collected data daily", "nothing here"])
        stats = CorpusStats.from_policy(policy)
        s = lexical_span_scores("cookie trackers", policy.segments[0], stats)
        score, _, answerable = informativeness_from_spans(s)
        assert set(s.start_logits) == {0.0}
        assert score == 0.0 and answerable is False

    def test_single_shared_term_doubles_idf(self):
        policy = make_policy(["alpha beta", "gamma delta"])
        stats = CorpusStats.from_policy(policy)
        s = lexical_span_scores("alpha", policy.segments[0], stats)
        idf = stats.idf("alpha")
        score, best, answerable = informativeness_from_spans(s)
        assert score == pytest.approx(2 * idf) and best == (0, 0) and answerable

    def test_tie_break_on_equal_idf(self):
        # shared terms at positions 1 and 3; spans (1,1), (1,3), (3,3) tie,
        # exhaustive enumeration picks (1,1)
        policy = make_policy(["pad alpha pad2 beta", "alpha beta elsewhere"])
        stats = CorpusStats.from_policy(policy)
        s = lexical_span_scores("alpha beta", policy.segments[0], stats)
        assert stats.idf("alpha") == stats.idf("beta")
        score, best, _ = informativeness_from_spans(s)
        assert score == pytest.approx(2 * stats.idf("alpha"))
        assert best == (1, 1)

    def test_backend_owns_its_tokens(self):
        policy = make_policy(["We collected DATA!", "other"])
        stats = CorpusStats.from_policy(policy)
        s = lexical_span_scores("data", policy.segments[0], stats)
        assert s.tokens == ("we", "collected", "data")


class TestScorePair:
    def test_relevance_range_enforced(self):
        with pytest.raises(ScoreOutOfRange):
            score_pair(1.3, spans([0.0], [0.0]))

    def test_bundles_span_fields(self):
        pair = score_pair(0.5, spans([1, 0], [0, 1]), tau=0.0)
        assert pair.relevance == 0.5
        assert pair.informativeness == 2.0
        assert pair.best_span == (0, 1)
        assert pair.answerable is True


class TestLexicalScorerBackend:
    def test_batches_preserve_order(self, small_policy, lexicon):
        scorer = LexicalScorer.for_policy(small_policy, lexicon)
        pairs = [
            ("is my email collected?", small_policy.segments[0].text),
            ("is my email collected?", small_policy.segments[2].text),
        ]
        rel = scorer.relevance_batch(pairs)
        assert len(rel) == 2 and all(0.0 <= r <= 1.0 for r in rel)
        sp = scorer.span_batch(pairs)
        assert len(sp) == 2
        assert sp[0].tokens == tuple(t.normalized for t in small_policy.segments[0].tokens)


class TestRemoteScorer:
    def _client(self, server, **kw):
        kw.setdefault("backoff", 0.01)
        return RemoteScorer(server.url, **kw)

    def test_relevance_round_trip(self, scorer_server):
        scorer_server.relevance_fn = lambda pairs: {"scores": [0.7] * len(pairs)}
        client = self._client(scorer_server)
        assert client.relevance_batch([("q1", "s1"), ("q2", "s2")]) == [0.7, 0.7]

    def test_order_preserved_across_chunks(self, scorer_server):
        scorer_server.relevance_fn = lambda pairs: {
            "scores": [float(len(p[0])) / 100.0 for p in pairs]
        }
        client = self._client(scorer_server, batch_size=2)
        pairs = [(("q" * (i + 1)), "s") for i in range(7)]
        got = client.relevance_batch(pairs)
        assert got == [pytest.approx((i + 1) / 100.0) for i in range(7)]
        assert len(scorer_server.requests) == 4  # ceil(7 / 2) chunks

    def test_score_out_of_range(self, scorer_server):
        scorer_server.relevance_fn = lambda pairs: {"scores": [1.3] * len(pairs)}
        with pytest.raises(ScoreOutOfRange):
            self._client(scorer_server).relevance_batch([("q", "s")])

    def test_service_down_after_retries(self):
        client = RemoteScorer("http://127.0.0.1:9", backoff=0.01, timeout=0.2)
        with pytest.raises(ScorerUnavailable):
            client.relevance_batch([("q", "s")])

    def test_5xx_retries_then_succeeds(self, scorer_server):
        scorer_server.fail_next = 2
        scorer_server.relevance_fn = lambda pairs: {"scores": [0.2] * len(pairs)}
        got = self._client(scorer_server).relevance_batch([("q", "s")])
        assert got == [0.2]
        assert len(scorer_server.requests) == 3

    def test_persistent_5xx_exhausts_retries(self, scorer_server):
        scorer_server.force_status = 500
        with pytest.raises(ScorerUnavailable):
            self._client(scorer_server).relevance_batch([("q", "s")])
        assert len(scorer_server.requests) == 3

    def test_4xx_is_protocol_error_without_retry(self, scorer_server):
        scorer_server.force_status = 422
        with pytest.raises(ProtocolError):
            self._client(scorer_server).relevance_batch([("q", "s")])
        assert len(scorer_server.requests) == 1

    def test_span_round_trip(self, scorer_server):
        scorer_server.spans_fn = lambda pairs: {
            "results": [
                {
                    "tokens": ["a", "b", "c", "d"],
                    "start_logits": [0.1, 0.2, 0.3, 0.4],
                    "end_logits": [0.4, 0.3, 0.2, 0.1],
                    "null_score": 0.05,
                }
                for _ in pairs
            ]
        }
        got = self._client(scorer_server).span_batch([("q", "s")])
        assert len(got) == 1 and got[0].tokens == ("a", "b", "c", "d")
        assert got[0].null_score == 0.05

    def test_mismatched_logit_lengths(self, scorer_server):
        scorer_server.spans_fn = lambda pairs: {
            "results": [
                {"tokens": ["a", "b"], "start_logits": [0.1], "end_logits": [0.1, 0.2]}
                for _ in pairs
            ]
        }
        with pytest.raises(ProtocolError):
            self._client(scorer_server).span_batch([("q", "s")])

    def test_nan_logit(self, scorer_server):
        scorer_server.raw_body = (
            '{"results": [{"tokens": ["a"], "start_logits": [NaN], '
            '"end_logits": [0.0], "null_score": 0.0}]}'
        )
        with pytest.raises(ProtocolError):
            self._client(scorer_server).span_batch([("q", "s")])

    def test_wrong_count_is_protocol_error(self, scorer_server):
        scorer_server.relevance_fn = lambda pairs: {"scores": [0.5]}
        with pytest.raises(ProtocolError):
            self._client(scorer_server).relevance_batch([("q", "s"), ("q2", "s2")])

    def test_health(self, scorer_server):
        assert self._client(scorer_server).health()["status"] == "ok"


class TestSpanMaxOracleProperty:
    def test_one_pass_equals_brute_force(self):
        from tests_oracles import brute_force_span  # local oracle helper

        rng = np.random.default_rng(123)
        for _ in range(250):
            n = int(rng.integers(1, 51))
            s = spans(rng.uniform(-5, 5, n).tolist(), rng.uniform(-5, 5, n).tolist())
            fast_score, fast_span, _ = informativeness_from_spans(s)
            slow_score, slow_span = brute_force_span(s.start_logits, s.end_logits)
            assert fast_score == slow_score
            assert fast_span == slow_span
