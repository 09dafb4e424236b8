"""policy-answer-engine: query-guided extractive summarization for privacy policies.

Given a policy document and a user question, the pipeline expands the
question into policy-register paraphrases, scores every segment for
relevance and span-level informativeness, and returns the top-k segments
as an answer summary.
"""

__version__ = "0.1.0"

from pae.corpus import PolicyDocument, PosLexicon, QueryRecord, Segment, Token, ingest_policy
from pae.expansion import ExpansionConfig, ExpansionMethod, Paraphrase, ParaphraseSet, expand
from pae.ranking import Aggregation, Presentation, RankConfig, Summary, build_summary, rank_segments
from pae.scoring import LexicalScorer, RemoteScorer, SpanScores, informativeness_from_spans

__all__ = [
    "__version__",
    "PolicyDocument",
    "PosLexicon",
    "QueryRecord",
    "Segment",
    "Token",
    "ingest_policy",
    "ExpansionConfig",
    "ExpansionMethod",
    "Paraphrase",
    "ParaphraseSet",
    "expand",
    "Aggregation",
    "Presentation",
    "RankConfig",
    "Summary",
    "build_summary",
    "rank_segments",
    "LexicalScorer",
    "RemoteScorer",
    "SpanScores",
    "informativeness_from_spans",
]
