"""Word-vector storage, similarity queries and a small skip-gram trainer.

The store keeps a dense (vocab, dim) matrix; similarity queries are
brute-force cosine over the whole vocabulary. Training is classic skip-gram
with negative sampling: the Python driver builds the vocabulary, draws all
randomness up front (so runs are reproducible bit for bit for a fixed seed)
and hands the SGD inner loop to ``pae.kernels``.
"""

from __future__ import annotations

import logging
import warnings
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from pae import kernels
from pae.corpus import Pos, PosLexicon
from pae.errors import (
    DimensionMismatch,
    EmptyVocabulary,
    FormatError,
    OutOfVocabulary,
    ZeroVectorWarning,
)

logger = logging.getLogger(__name__)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity in [-1, 1]; 0 (with a ZeroVectorWarning) for zero vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"vector lengths differ: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        warnings.warn("cosine of an all-zero vector is undefined, returning 0.0", ZeroVectorWarning)
        return 0.0
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


class EmbeddingStore:
    """Immutable word -> vector map with brute-force nearest-neighbour search."""

    def __init__(
        self,
        words: Sequence[str],
        matrix: np.ndarray,
        frequency: dict[str, int] | None = None,
    ):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != len(words):
            raise DimensionMismatch("matrix shape does not match vocabulary size")
        if len(words) == 0:
            raise EmptyVocabulary("embedding store has no vocabulary")
        if len(set(words)) != len(words):
            raise ValueError("duplicate words in vocabulary")
        self.words: tuple[str, ...] = tuple(words)
        self.matrix = matrix
        self.matrix.setflags(write=False)
        self.dim: int = int(matrix.shape[1])
        self.frequency = dict(frequency) if frequency else None
        self._index = {w: i for i, w in enumerate(self.words)}
        self._norms = np.linalg.norm(self.matrix, axis=1)

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def __len__(self) -> int:
        return len(self.words)

    def vector(self, word: str) -> np.ndarray:
        try:
            return self.matrix[self._index[word]]
        except KeyError:
            raise OutOfVocabulary(word) from None

    def similarity(self, w1: str, w2: str) -> float:
        return cosine(self.vector(w1), self.vector(w2))

    def nearest(
        self,
        word: str,
        k: int,
        pos_filter: Pos | None = None,
        lexicon: PosLexicon | None = None,
    ) -> list[tuple[str, float]]:
        """Top-k vocabulary words by cosine similarity, excluding `word` itself.

        With `pos_filter`, only candidates whose lexicon tag equals the filter
        are kept. Ties break lexicographically on the word.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        if word not in self._index:
            raise OutOfVocabulary(word)
        if pos_filter is not None and lexicon is None:
            raise ValueError("pos_filter requires a lexicon")
        q = self.matrix[self._index[word]]
        nq = float(np.linalg.norm(q))
        if nq == 0.0:
            warnings.warn(f"query vector for {word!r} is all-zero", ZeroVectorWarning)
            sims = np.zeros(len(self.words))
        else:
            denom = self._norms * nq
            with np.errstate(invalid="ignore", divide="ignore"):
                sims = np.where(denom > 0.0, self.matrix @ q / denom, 0.0)
            sims = np.clip(sims, -1.0, 1.0)
        candidates = [
            (w, float(sims[i]))
            for i, w in enumerate(self.words)
            if w != word and (pos_filter is None or lexicon.tag(w) is pos_filter)
        ]
        candidates.sort(key=lambda p: (-p[1], p[0]))
        return candidates[:k]


def load_word2vec_text(path: str | Path) -> EmbeddingStore:
    """Load the classic text format: header "vocab_size dim", one word per row."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise FormatError("header must be 'vocab_size dim'", line=1, path=str(path))
        try:
            vocab_size, dim = int(header[0]), int(header[1])
        except ValueError:
            raise FormatError("header must be two integers", line=1, path=str(path)) from None
        if vocab_size < 1 or dim < 1:
            raise FormatError("vocab_size and dim must be positive", line=1, path=str(path))

        words: list[str] = []
        rows: list[np.ndarray] = []
        index: dict[str, int] = {}
        n_rows = 0
        for lineno, raw in enumerate(fh, start=2):
            if not raw.strip():
                continue
            parts = raw.rstrip("\n").split(" ")
            word = parts[0]
            values = [p for p in parts[1:] if p]
            if len(values) != dim:
                raise DimensionMismatch(
                    f"{path}:{lineno}: expected {dim} components for {word!r}, got {len(values)}"
                )
            try:
                vec = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError:
                raise FormatError(
                    f"non-numeric component for {word!r}", line=lineno, path=str(path)
                ) from None
            n_rows += 1
            if word in index:
                logger.warning("%s:%d: duplicate word %r, last occurrence wins", path, lineno, word)
                rows[index[word]] = vec
            else:
                index[word] = len(words)
                words.append(word)
                rows.append(vec)
        if n_rows != vocab_size:
            raise FormatError(
                f"header promised {vocab_size} rows, found {n_rows}", path=str(path)
            )
    return EmbeddingStore(words, np.vstack(rows))


def save_word2vec_text(store: EmbeddingStore, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(store)} {store.dim}\n")
        for i, word in enumerate(store.words):
            comps = " ".join(repr(float(x)) for x in store.matrix[i])
            fh.write(f"{word} {comps}\n")


@dataclass(frozen=True)
class SgnsConfig:
    """Skip-gram-with-negative-sampling hyperparameters."""

    dim: int = 100
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    min_count: int = 5
    initial_lr: float = 0.025
    min_lr: float = 0.0001
    subsample: float = 0.0  # 0 disables; typical value 1e-3
    seed: int = 1


def pair_loss_and_grad(
    v: np.ndarray, u_pos: np.ndarray, u_negs: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Loss and analytic gradients for one skip-gram pair.

    loss = softplus(-v.u_pos) + sum_j softplus(v.u_neg_j); returns
    (loss, d/dv, d/du_pos, d/du_negs). This is the function the SGD kernel
    steps along; the tests check it against central finite differences.
    """
    v = np.asarray(v, dtype=np.float64)
    u_pos = np.asarray(u_pos, dtype=np.float64)
    u_negs = np.asarray(u_negs, dtype=np.float64)
    x_pos = float(v @ u_pos)
    xs = u_negs @ v if u_negs.size else np.zeros(0)
    loss = float(np.logaddexp(0.0, -x_pos) + np.logaddexp(0.0, xs).sum())
    g_pos = 1.0 / (1.0 + np.exp(-x_pos)) - 1.0
    gs = 1.0 / (1.0 + np.exp(-xs))
    grad_v = g_pos * u_pos + (gs @ u_negs if u_negs.size else 0.0)
    grad_u_pos = g_pos * v
    grad_u_negs = np.outer(gs, v) if u_negs.size else np.zeros_like(u_negs)
    return loss, grad_v, grad_u_pos, grad_u_negs


def _build_vocab(
    sentences: Sequence[Sequence[str]], min_count: int
) -> tuple[list[str], dict[str, int], Counter]:
    counts: Counter = Counter()
    for sent in sentences:
        counts.update(sent)
    kept = [w for w, c in counts.items() if c >= min_count]
    if not kept:
        raise EmptyVocabulary(f"no word reaches min_count={min_count}")
    # frequent first; lexicographic among equals, so ordering is reproducible
    kept.sort(key=lambda w: (-counts[w], w))
    return kept, {w: i for i, w in enumerate(kept)}, counts


def train_sgns(
    corpus: Iterable[Sequence[str]], config: SgnsConfig = SgnsConfig()
) -> EmbeddingStore:
    """Train word vectors on an iterable of tokenized sentences.

    Deterministic for a fixed seed (single-threaded): two runs produce
    bitwise-identical vocabularies and vectors.
    """
    sentences = [list(s) for s in corpus]
    words, index, counts = _build_vocab(sentences, config.min_count)
    n = len(words)
    rng = np.random.default_rng(config.seed)

    syn0 = (rng.random((n, config.dim), dtype=np.float64) - 0.5) / config.dim
    syn1 = np.zeros((n, config.dim), dtype=np.float64)

    freqs = np.array([counts[w] for w in words], dtype=np.float64)
    noise = freqs**0.75
    noise_cdf = np.cumsum(noise / noise.sum())
    noise_cdf[-1] = 1.0

    keep_prob = np.ones(n)
    if config.subsample > 0.0:
        ratio = freqs / freqs.sum()
        keep_prob = np.minimum(1.0, np.sqrt(config.subsample / ratio) + config.subsample / ratio)

    encoded = [
        np.array([index[w] for w in sent if w in index], dtype=np.int64) for sent in sentences
    ]
    encoded = [e for e in encoded if e.size >= 2]

    # Draw every epoch's training pairs up front: the total count fixes the
    # linear learning-rate schedule, and keeping all randomness in one
    # generator stream is what makes runs reproducible.
    epoch_pairs: list[tuple[np.ndarray, np.ndarray]] = []
    for _ in range(config.epochs):
        centers: list[int] = []
        contexts: list[int] = []
        for sent in encoded:
            ids = sent
            if config.subsample > 0.0:
                ids = ids[rng.random(ids.size) < keep_prob[ids]]
            m = ids.size
            if m < 2:
                continue
            shrink = rng.integers(0, config.window, size=m)
            for pos in range(m):
                span = config.window - int(shrink[pos])
                lo = max(0, pos - span)
                hi = min(m, pos + span + 1)
                for other in range(lo, hi):
                    if other != pos:
                        centers.append(int(ids[pos]))
                        contexts.append(int(ids[other]))
        epoch_pairs.append(
            (np.array(centers, dtype=np.int32), np.array(contexts, dtype=np.int32))
        )

    total_pairs = sum(c.size for c, _ in epoch_pairs)
    if total_pairs == 0:
        logger.warning("corpus produced no training pairs; returning the initialized vectors")
        return EmbeddingStore(words, syn0, frequency={w: int(counts[w]) for w in words})

    done = 0
    for centers, contexts in epoch_pairs:
        n_pairs = centers.size
        if n_pairs == 0:
            continue
        draws = rng.random((n_pairs, config.negatives))
        negatives = np.searchsorted(noise_cdf, draws).astype(np.int32)
        progress = (done + np.arange(n_pairs, dtype=np.float64)) / total_pairs
        lrs = np.maximum(config.min_lr, config.initial_lr * (1.0 - progress))
        loss = kernels.sgns_batch(syn0, syn1, centers, contexts, negatives, lrs)
        done += n_pairs
        logger.debug("epoch chunk done: %d/%d pairs, loss %.4f", done, total_pairs, loss)

    if not np.isfinite(syn0).all() or not np.isfinite(syn1).all():
        raise ArithmeticError("training produced non-finite vectors")
    return EmbeddingStore(words, syn0, frequency={w: int(counts[w]) for w in words})
