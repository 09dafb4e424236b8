"""Exception types shared across the package."""

from __future__ import annotations


class PaeError(Exception):
    """Base class for all package-specific errors."""


class FormatError(PaeError):
    """A file does not conform to its declared format."""

    def __init__(self, message: str, *, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)


class EmptyPolicy(PaeError):
    """Policy ingestion produced no non-empty segments."""


class UnknownPolicy(PaeError):
    """A record references a policy id that has no segments."""


class SpanMismatch(PaeError):
    """An answer span's character offsets do not reproduce the answer text."""


class DimensionMismatch(PaeError):
    """Vector lengths disagree."""


class OutOfVocabulary(PaeError):
    """A word is not present in the embedding store."""


class EmptyVocabulary(PaeError):
    """No word survived the minimum-count cutoff."""


class DuplicateRule(PaeError):
    """Two substitution rules share the same left-hand side."""


class TranslatorUnavailable(PaeError):
    """The translation backend cannot serve the request."""


class ScorerUnavailable(PaeError):
    """The scoring backend cannot be reached after retries."""


class ProtocolError(PaeError):
    """A scoring backend returned a malformed response."""


class ScoreOutOfRange(PaeError):
    """A relevance score fell outside [0, 1]."""


class EmptyParaphraseSet(PaeError):
    """Aggregation was asked to reduce an empty paraphrase list."""


class MissingRanking(PaeError):
    """Evaluation input lacks a ranking for some query."""


class ZeroVectorWarning(UserWarning):
    """Cosine similarity was asked to compare against an all-zero vector."""
