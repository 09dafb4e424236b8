"""Query expansion: restate a user question in privacy-policy register.

Three generators, each tagging its output with a method and provenance:

* substitution rules ("my => user's"), applied one-at-a-time or all-at-once;
* embedding substitution: swap a noun/verb for its nearest same-POS
  neighbours in the vector space;
* back-translation through a pivot language.

``expand`` unions the enabled generators with the original query and
deduplicates on normalized text.
"""

from __future__ import annotations

import dataclasses
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

from pae.corpus import Pos, PosLexicon, QueryRecord, normalized_text, tokenize
from pae.embeddings import EmbeddingStore
from pae.errors import DuplicateRule, FormatError, TranslatorUnavailable
from pae.translate import Translator

logger = logging.getLogger(__name__)


class ExpansionMethod(str, Enum):
    ORIGINAL = "ORIGINAL"
    RULE_ONE = "RULE_ONE"
    RULE_ALL = "RULE_ALL"
    EMBEDDING = "EMBEDDING"
    BACK_TRANSLATION = "BACK_TRANSLATION"


# Dedup/provenance priority when two methods coin the same text.
METHOD_ORDER = (
    ExpansionMethod.ORIGINAL,
    ExpansionMethod.RULE_ONE,
    ExpansionMethod.RULE_ALL,
    ExpansionMethod.EMBEDDING,
    ExpansionMethod.BACK_TRANSLATION,
)


@dataclass(frozen=True)
class SubstitutionRule:
    """lhs (normalized token sequence) -> rhs replacement text."""

    lhs: tuple[str, ...]
    rhs: str

    def __post_init__(self) -> None:
        if not self.lhs:
            raise ValueError("rule lhs must be non-empty")
        if any(t != t.lower() for t in self.lhs):
            raise ValueError("rule lhs must be normalized (lowercase)")
        if " ".join(self.lhs) == normalized_text(self.rhs):
            raise ValueError("rule lhs and rhs are identical after normalization")

    @property
    def pattern(self) -> re.Pattern:
        return _rule_pattern(self.lhs)

    def __str__(self) -> str:
        return f"{' '.join(self.lhs)} => {self.rhs}"


def _rule_pattern(lhs: tuple[str, ...]) -> re.Pattern:
    body = r"\s+".join(re.escape(tok) for tok in lhs)
    return re.compile(rf"\b{body}\b", re.IGNORECASE)


def parse_rules(path: str | Path) -> list[SubstitutionRule]:
    """Read "lhs => rhs" rules, one per line; '#' comments; rhs may be empty."""
    path = Path(path)
    rules: list[SubstitutionRule] = []
    seen: dict[tuple[str, ...], int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=>" not in line:
                raise FormatError("expected 'lhs => rhs'", line=lineno, path=str(path))
            lhs_raw, rhs_raw = line.split("=>", 1)
            lhs = tuple(t.normalized for t in tokenize(lhs_raw))
            rhs = rhs_raw.strip()
            if not lhs:
                raise FormatError("rule lhs is empty", line=lineno, path=str(path))
            if lhs in seen:
                raise DuplicateRule(
                    f"{path}:{lineno}: lhs {' '.join(lhs)!r} already defined on line {seen[lhs]}"
                )
            seen[lhs] = lineno
            try:
                rules.append(SubstitutionRule(lhs=lhs, rhs=rhs))
            except ValueError as exc:
                raise FormatError(str(exc), line=lineno, path=str(path)) from None
    return rules


@dataclass(frozen=True)
class Paraphrase:
    text: str
    method: ExpansionMethod
    provenance: str = ""

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("paraphrase text must be non-empty")


@dataclass(frozen=True)
class ParaphraseSet:
    query: QueryRecord
    items: tuple[Paraphrase, ...]

    def __post_init__(self) -> None:
        originals = [p for p in self.items if p.method is ExpansionMethod.ORIGINAL]
        if len(originals) != 1:
            raise ValueError("paraphrase set must contain exactly one ORIGINAL item")
        norms = [normalized_text(p.text) for p in self.items]
        if len(set(norms)) != len(norms):
            raise ValueError("paraphrase set contains duplicate normalized texts")

    def __len__(self) -> int:
        return len(self.items)


def _restore_capitalization(source: str, result: str) -> str:
    # naive: only the leading character's case is carried over
    if source and result and source[0].isupper() and result[0].islower():
        return result[0].upper() + result[1:]
    return result


def _cleanup(source: str, result: str) -> str:
    collapsed = re.sub(r"\s+", " ", result).strip()
    return _restore_capitalization(source, collapsed)


def apply_rules_single(query: str, rules: Sequence[SubstitutionRule]) -> list[Paraphrase]:
    """One paraphrase per matching rule, that rule applied at every occurrence."""
    out: list[Paraphrase] = []
    for rule in rules:
        if not rule.pattern.search(query):
            continue
        text = _cleanup(query, rule.pattern.sub(rule.rhs, query))
        if not text or normalized_text(text) == normalized_text(query):
            continue
        out.append(Paraphrase(text=text, method=ExpansionMethod.RULE_ONE, provenance=str(rule)))
    return out


def apply_rules_all(query: str, rules: Sequence[SubstitutionRule]) -> list[Paraphrase]:
    """All matching rules applied simultaneously (single pass, no cascading);
    emitted only when at least two distinct rules fired, since a single-rule
    result duplicates the corresponding one-rule paraphrase.
    """
    if not rules:
        return []
    # longest lhs first so overlapping rules resolve leftmost-longest
    order = sorted(range(len(rules)), key=lambda i: (-len(rules[i].lhs), i))
    combined = re.compile(
        "|".join(f"(?P<r{i}>{_rule_pattern(rules[i].lhs).pattern})" for i in order),
        re.IGNORECASE,
    )
    fired: set[int] = set()

    def _sub(m: re.Match) -> str:
        i = int(m.lastgroup[1:])
        fired.add(i)
        return rules[i].rhs

    replaced = combined.sub(_sub, query)
    if len(fired) < 2:
        return []
    text = _cleanup(query, replaced)
    if not text or normalized_text(text) == normalized_text(query):
        return []
    provenance = "; ".join(str(rules[i]) for i in sorted(fired))
    return [Paraphrase(text=text, method=ExpansionMethod.RULE_ALL, provenance=provenance)]


def substitute_embeddings(
    query: str,
    store: EmbeddingStore,
    lexicon: PosLexicon,
    k: int = 5,
    min_sim: float = 0.5,
    cap: int = 10,
) -> list[Paraphrase]:
    """Swap each in-vocabulary noun/verb for its nearest same-POS neighbours.

    One paraphrase per (token position, neighbour), replacing only that
    occurrence; ordered by token position, then similarity descending, and
    truncated at `cap`.
    """
    out: list[Paraphrase] = []
    for tok in tokenize(query, lexicon):
        if tok.pos not in (Pos.NOUN, Pos.VERB) or tok.normalized not in store:
            continue
        for word, sim in store.nearest(tok.normalized, k, pos_filter=tok.pos, lexicon=lexicon):
            if sim < min_sim:
                continue
            text = _cleanup(query, query[: tok.start] + word + query[tok.end :])
            if not text or normalized_text(text) == normalized_text(query):
                continue
            out.append(
                Paraphrase(
                    text=text,
                    method=ExpansionMethod.EMBEDDING,
                    provenance=f"{tok.normalized} -> {word} ({sim:.3f})",
                )
            )
            if len(out) >= cap:
                return out
    return out


def back_translate(
    query: str, translator: Translator, pivot: str = "de"
) -> list[Paraphrase]:
    """Round-trip the query through the pivot language; identity results are
    discarded (the round trip does not always produce novel text).
    """
    forward = translator.translate(query, "en", pivot)
    back = translator.translate(forward, pivot, "en").strip()
    if not back or normalized_text(back) == normalized_text(query):
        return []
    return [
        Paraphrase(
            text=_restore_capitalization(query, back),
            method=ExpansionMethod.BACK_TRANSLATION,
            provenance=f"pivot={pivot}",
        )
    ]


@dataclass(frozen=True)
class ExpansionConfig:
    """Which generators run and with what resources."""

    methods: frozenset[ExpansionMethod] = frozenset(
        {ExpansionMethod.RULE_ONE, ExpansionMethod.RULE_ALL}
    )
    rules: tuple[SubstitutionRule, ...] = ()
    store: EmbeddingStore | None = None
    lexicon: PosLexicon = field(default_factory=PosLexicon.empty)
    translator: Translator | None = None
    pivot: str = "de"
    neighbors: int = 5
    min_similarity: float = 0.5
    cap: int = 10
    strict: bool = False

    def with_methods(self, methods: frozenset[ExpansionMethod]) -> "ExpansionConfig":
        return dataclasses.replace(self, methods=methods)


def expand(query: QueryRecord, config: ExpansionConfig) -> ParaphraseSet:
    """Union of the enabled generators plus the original query, deduplicated
    on normalized text (earliest method wins provenance).
    """
    generated: list[Paraphrase] = [
        Paraphrase(text=query.text, method=ExpansionMethod.ORIGINAL, provenance="input query")
    ]
    if ExpansionMethod.RULE_ONE in config.methods:
        generated.extend(apply_rules_single(query.text, config.rules))
    if ExpansionMethod.RULE_ALL in config.methods:
        generated.extend(apply_rules_all(query.text, config.rules))
    if ExpansionMethod.EMBEDDING in config.methods and config.store is not None:
        generated.extend(
            substitute_embeddings(
                query.text,
                config.store,
                config.lexicon,
                k=config.neighbors,
                min_sim=config.min_similarity,
                cap=config.cap,
            )
        )
    if ExpansionMethod.BACK_TRANSLATION in config.methods and config.translator is not None:
        try:
            generated.extend(back_translate(query.text, config.translator, config.pivot))
        except TranslatorUnavailable:
            if config.strict:
                raise
            logger.warning("back-translation unavailable for query %s; continuing", query.id)

    generated.sort(key=lambda p: METHOD_ORDER.index(p.method))
    items: list[Paraphrase] = []
    seen: set[str] = set()
    for p in generated:
        norm = normalized_text(p.text)
        if norm in seen:
            continue
        seen.add(norm)
        items.append(p)
    return ParaphraseSet(query=query, items=tuple(items))
