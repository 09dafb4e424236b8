"""Domain types for policies, segments and queries, plus dataset adapters.

A policy is an ordered list of paragraph-level segments; a query carries the
set of segment indices annotated as relevant (empty set = out-of-scope).
Tokenization is deterministic and lexicon-driven: part-of-speech tags come
from a plain-text word list, unknown words are tagged OTHER.
"""

from __future__ import annotations

import csv
import json
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from pae.errors import EmptyPolicy, FormatError, SpanMismatch, UnknownPolicy

logger = logging.getLogger(__name__)

# A token is a run of word characters, optionally joined by internal
# apostrophes or hyphens ("user's", "opt-out"). Leading/trailing punctuation
# never makes it into a token.
_TOKEN_RE = re.compile(r"\w+(?:['’-]\w+)*")


class Pos(str, Enum):
    NOUN = "NOUN"
    VERB = "VERB"
    ADJ = "ADJ"
    OTHER = "OTHER"


@dataclass(frozen=True)
class Token:
    """A single token with its surface form, normalized form and POS tag.

    `start`/`end` are character offsets into the source text, kept so that
    downstream paraphrasers can replace one occurrence in place.
    """

    surface: str
    normalized: str
    pos: Pos
    start: int
    end: int


class PosLexicon:
    """Word -> POS mapping loaded from a "word<TAB>TAG" file."""

    def __init__(self, entries: Mapping[str, Pos] | None = None):
        self._entries: dict[str, Pos] = dict(entries or {})

    def tag(self, word: str) -> Pos:
        return self._entries.get(word.lower(), Pos.OTHER)

    def words_with_tag(self, pos: Pos) -> set[str]:
        return {w for w, t in self._entries.items() if t is pos}

    def __len__(self) -> int:
        return len(self._entries)

    @classmethod
    def load(cls, path: str | Path) -> "PosLexicon":
        entries: dict[str, Pos] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t") if "\t" in line else line.split()
                if len(parts) != 2:
                    raise FormatError("expected 'word<TAB>TAG'", line=lineno, path=str(path))
                word, tag = parts
                try:
                    entries[word.lower()] = Pos(tag.strip().upper())
                except ValueError:
                    raise FormatError(
                        f"unknown tag {tag!r} (expected NOUN/VERB/ADJ/OTHER)",
                        line=lineno,
                        path=str(path),
                    ) from None
        return cls(entries)

    @classmethod
    def default(cls) -> "PosLexicon":
        """The privacy-domain lexicon shipped with the package."""
        ref = resources.files("pae.data").joinpath("pos_lexicon.tsv")
        with resources.as_file(ref) as path:
            return cls.load(path)

    @classmethod
    def empty(cls) -> "PosLexicon":
        return cls({})


def tokenize(text: str, lexicon: PosLexicon | None = None) -> list[Token]:
    """Split `text` into tokens at whitespace/punctuation boundaries.

    Word-internal apostrophes and hyphens are kept; tokens that normalize to
    the empty string are dropped. Deterministic for a fixed lexicon.
    """
    lexicon = lexicon or PosLexicon.empty()
    out: list[Token] = []
    for m in _TOKEN_RE.finditer(text):
        normalized = m.group().lower()
        out.append(
            Token(
                surface=m.group(),
                normalized=normalized,
                pos=lexicon.tag(normalized),
                start=m.start(),
                end=m.end(),
            )
        )
    return out


def normalized_text(text: str) -> str:
    """Canonical form used for duplicate detection: normalized tokens joined."""
    return " ".join(m.group().lower() for m in _TOKEN_RE.finditer(text))


@dataclass(frozen=True)
class Segment:
    policy_id: str
    index: int
    text: str
    tokens: tuple[Token, ...]


@dataclass(frozen=True)
class PolicyDocument:
    id: str
    title: str
    segments: tuple[Segment, ...]

    def __post_init__(self) -> None:
        for i, seg in enumerate(self.segments):
            if seg.index != i:
                raise ValueError(f"segment indices must be contiguous, got {seg.index} at {i}")
            if not seg.text.strip():
                raise ValueError(f"segment {i} of policy {self.id!r} is empty")

    def __len__(self) -> int:
        return len(self.segments)


@dataclass(frozen=True)
class QueryRecord:
    """A user question against one policy.

    An empty `relevant_indices` marks the query as out-of-scope: no segment
    of the policy answers it.
    """

    id: str
    policy_id: str
    text: str
    relevant_indices: frozenset[int] = field(default_factory=frozenset)

    @property
    def out_of_scope(self) -> bool:
        return not self.relevant_indices


def ingest_policy(
    policy_id: str,
    raw: str | Sequence[str],
    *,
    title: str = "",
    lexicon: PosLexicon | None = None,
) -> PolicyDocument:
    """Build a PolicyDocument from raw text (split on blank lines) or a
    pre-split list of segment texts. Empty segments are dropped.
    """
    if isinstance(raw, str):
        pieces = re.split(r"\n\s*\n", raw)
    else:
        pieces = list(raw)
    texts = [p.strip() for p in pieces if p and p.strip()]
    if not texts:
        raise EmptyPolicy(f"policy {policy_id!r} has no non-empty segments")
    segments = tuple(
        Segment(policy_id=policy_id, index=i, text=t, tokens=tuple(tokenize(t, lexicon)))
        for i, t in enumerate(texts)
    )
    return PolicyDocument(id=policy_id, title=title, segments=segments)


_RELEVANT = "relevant"
_IRRELEVANT = "irrelevant"


def load_privacyqa(
    path: str | Path, *, lexicon: PosLexicon | None = None
) -> tuple[list[PolicyDocument], list[QueryRecord]]:
    """Load a relevance-annotated dataset in the tab-separated adapter format.

    Columns: DocID, QueryID, Query, SegmentID, Segment, Ann1..AnnN (N >= 1),
    each annotation either "Relevant" or "Irrelevant". A segment counts as
    relevant to a query as soon as one annotator marked it relevant.

    Returns one PolicyDocument per DocID (segments ordered by SegmentID and
    reindexed contiguously) and one QueryRecord per distinct (DocID, QueryID);
    query ids are namespaced as "DocID:QueryID".
    """
    path = Path(path)
    seg_texts: dict[str, dict[int, str]] = {}
    queries: dict[tuple[str, str], str] = {}
    votes: dict[tuple[str, str], set[int]] = {}
    order: list[tuple[str, str]] = []

    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError("empty file", path=str(path)) from None
        if len(header) < 6:
            raise FormatError(
                f"header has {len(header)} columns, need at least 6", line=1, path=str(path)
            )
        width = len(header)

        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != width:
                raise FormatError(
                    f"expected {width} columns, got {len(row)}", line=lineno, path=str(path)
                )
            doc_id, query_id, query, seg_id_raw, seg_text = (c.strip() for c in row[:5])
            annotations = [c.strip() for c in row[5:]]
            if not doc_id or not query_id or not query:
                raise FormatError("missing DocID/QueryID/Query", line=lineno, path=str(path))
            try:
                seg_id = int(seg_id_raw)
            except ValueError:
                raise FormatError(
                    f"SegmentID must be an integer, got {seg_id_raw!r}",
                    line=lineno,
                    path=str(path),
                ) from None
            if seg_id < 0:
                raise FormatError("SegmentID must be non-negative", line=lineno, path=str(path))
            relevant = False
            for ann in annotations:
                low = ann.lower()
                if low == _RELEVANT:
                    relevant = True
                elif low != _IRRELEVANT:
                    raise FormatError(
                        f"annotation must be Relevant/Irrelevant, got {ann!r}",
                        line=lineno,
                        path=str(path),
                    )

            if not seg_text:
                logger.warning("%s:%d: empty segment text, row skipped", path, lineno)
            else:
                known = seg_texts.setdefault(doc_id, {})
                if seg_id in known and known[seg_id] != seg_text:
                    raise FormatError(
                        f"conflicting text for segment {seg_id} of policy {doc_id!r}",
                        line=lineno,
                        path=str(path),
                    )
                known[seg_id] = seg_text

            key = (doc_id, query_id)
            if key not in queries:
                queries[key] = query
                votes[key] = set()
                order.append(key)
            elif queries[key] != query:
                raise FormatError(
                    f"conflicting text for query {query_id!r} of policy {doc_id!r}",
                    line=lineno,
                    path=str(path),
                )
            if relevant and seg_text:
                votes[key].add(seg_id)

    policies: list[PolicyDocument] = []
    remap: dict[str, dict[int, int]] = {}
    for doc_id in sorted(seg_texts):
        ordered_ids = sorted(seg_texts[doc_id])
        remap[doc_id] = {sid: i for i, sid in enumerate(ordered_ids)}
        policies.append(
            ingest_policy(
                doc_id,
                [seg_texts[doc_id][sid] for sid in ordered_ids],
                title=doc_id,
                lexicon=lexicon,
            )
        )

    records: list[QueryRecord] = []
    for doc_id, query_id in order:
        if doc_id not in remap:
            raise UnknownPolicy(f"query {query_id!r} references policy {doc_id!r} with no segments")
        mapping = remap[doc_id]
        indices = frozenset(mapping[sid] for sid in votes[(doc_id, query_id)])
        n_segments = len(mapping)
        assert all(i < n_segments for i in indices)
        records.append(
            QueryRecord(
                id=f"{doc_id}:{query_id}",
                policy_id=doc_id,
                text=queries[(doc_id, query_id)],
                relevant_indices=indices,
            )
        )
    return policies, records


@dataclass(frozen=True)
class PolicyQARecord:
    question: str
    passage: str
    answer_start: int
    answer_text: str


def load_policyqa(path: str | Path) -> list[PolicyQARecord]:
    """Load reading-comprehension records (question/context/answer offsets).

    Accepts either a flat JSON array of {question, context, answers} objects
    or the nested {"data": [{"paragraphs": [{"context", "qas": ...}]}]}
    layout commonly used to distribute such datasets. Every answer offset is
    verified against its context; used to build scorer conformance fixtures.
    """
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"not valid JSON: {exc}", path=str(path)) from None

    flat: list[tuple[str, str, list[dict]]] = []
    if isinstance(payload, list):
        for item in payload:
            flat.append((item.get("question", ""), item.get("context", ""), item.get("answers", [])))
    elif isinstance(payload, dict) and "data" in payload:
        for article in payload["data"]:
            for para in article.get("paragraphs", []):
                context = para.get("context", "")
                for qa in para.get("qas", []):
                    flat.append((qa.get("question", ""), context, qa.get("answers", [])))
    else:
        raise FormatError("expected a record array or a {'data': ...} layout", path=str(path))

    records: list[PolicyQARecord] = []
    for question, context, answers in flat:
        if not question or not context:
            raise FormatError("record missing question or context", path=str(path))
        for ans in answers:
            text = ans.get("text", "")
            start = int(ans.get("answer_start", -1))
            if context[start : start + len(text)] != text:
                raise SpanMismatch(
                    f"answer {text!r} not found at offset {start} for question {question!r}"
                )
            records.append(
                PolicyQARecord(
                    question=question, passage=context, answer_start=start, answer_text=text
                )
            )
    return records


def iter_sentences(policies: Iterable[PolicyDocument]) -> Iterable[list[str]]:
    """Yield each segment as a list of normalized tokens (embedding training input)."""
    for policy in policies:
        for seg in policy.segments:
            tokens = [t.normalized for t in seg.tokens]
            if tokens:
                yield tokens
