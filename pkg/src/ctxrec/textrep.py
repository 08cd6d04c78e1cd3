"""Text-based document representations and the baseline similarity.

Covers tokenization, TF-IDF sparse vectors, smooth-inverse-frequency
weighted dense embeddings, hybrid text+link concatenation, cosine
similarity, and exact top-k neighbor search. Everything built here is
immutable; similarity queries are pure functions.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Union

import numpy as np

from .corpus import Corpus, Document

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric character (Unicode-aware).

    Empty tokens are dropped; order is preserved.
    """
    return _TOKEN_RE.findall(text.lower())


def document_tokens(doc: Document) -> list[str]:
    """Token stream of a document: title followed by every sentence."""
    tokens = tokenize(doc.title)
    for sentence in doc.iter_sentences():
        tokens.extend(tokenize(sentence))
    return tokens


@dataclass(frozen=True)
class SparseVector:
    """Sorted (term-id, weight) pairs; no explicit zeros."""

    indices: tuple[int, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise ValueError("indices and values length mismatch")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError("term ids must be strictly increasing")
        if any(not math.isfinite(v) or v == 0.0 for v in self.values):
            raise ValueError("weights must be finite and nonzero")

    @classmethod
    def from_weights(cls, weights: Mapping[int, float]) -> "SparseVector":
        items = sorted((i, w) for i, w in weights.items() if w != 0.0)
        return cls(tuple(i for i, _ in items), tuple(w for _, w in items))

    def norm(self) -> float:
        return math.sqrt(sum(v * v for v in self.values))

    def dot(self, other: "SparseVector") -> float:
        total = 0.0
        i, j = 0, 0
        while i < len(self.indices) and j < len(other.indices):
            a, b = self.indices[i], other.indices[j]
            if a == b:
                total += self.values[i] * other.values[j]
                i += 1
                j += 1
            elif a < b:
                i += 1
            else:
                j += 1
        return total


Vector = Union[SparseVector, np.ndarray]


@dataclass
class Vocabulary:
    """Term <-> id bijection with document frequencies and corpus term
    probabilities (unigram frequency / total tokens)."""

    terms: list[str]
    doc_freq: list[int]
    term_prob: list[float]
    total_docs: int
    _ids: dict[str, int] = field(repr=False, default_factory=dict)

    def __post_init__(self):
        if not self._ids:
            self._ids = {t: i for i, t in enumerate(self.terms)}

    def __len__(self) -> int:
        return len(self.terms)

    def term_id(self, term: str) -> int | None:
        return self._ids.get(term)

    def idf(self, term: str) -> float:
        tid = self._ids.get(term)
        if tid is None:
            return 0.0
        return math.log(self.total_docs / self.doc_freq[tid])

    def prob(self, term: str) -> float:
        tid = self._ids.get(term)
        return self.term_prob[tid] if tid is not None else 0.0


def build_tfidf(corpus: Corpus) -> tuple[Vocabulary, dict[str, SparseVector]]:
    """TF-IDF vectors for every document: weight = count * ln(N / df).

    Document text is the title plus all sentences. Terms occurring in every
    document have idf 0 and are omitted from the vectors.
    """
    if len(corpus) == 0:
        raise ValueError("cannot build TF-IDF over an empty corpus")

    doc_counts: dict[str, dict[str, int]] = {}
    df: dict[str, int] = {}
    total_tokens = 0
    token_freq: dict[str, int] = {}
    for doc in corpus:
        counts: dict[str, int] = {}
        for token in document_tokens(doc):
            counts[token] = counts.get(token, 0) + 1
            token_freq[token] = token_freq.get(token, 0) + 1
            total_tokens += 1
        doc_counts[doc.id] = counts
        for term in counts:
            df[term] = df.get(term, 0) + 1

    terms = sorted(df)
    n_docs = len(corpus)
    vocab = Vocabulary(
        terms=terms,
        doc_freq=[df[t] for t in terms],
        term_prob=[token_freq[t] / total_tokens for t in terms] if total_tokens else [],
        total_docs=n_docs,
    )

    vectors: dict[str, SparseVector] = {}
    for doc_id, counts in doc_counts.items():
        weights: dict[int, float] = {}
        for term, count in counts.items():
            if df[term] == n_docs:
                continue
            tid = vocab.term_id(term)
            weights[tid] = count * math.log(n_docs / df[term])
        vectors[doc_id] = SparseVector.from_weights(weights)
    return vocab, vectors


def tfidf_vector(tokens: Iterable[str], vocab: Vocabulary) -> SparseVector:
    """TF-IDF vector for an arbitrary token stream under an existing
    vocabulary (used for segment-level similarity). Unknown terms and
    terms present in every document are omitted."""
    counts: dict[str, int] = {}
    for token in tokens:
        counts[token] = counts.get(token, 0) + 1
    weights: dict[int, float] = {}
    for term, count in counts.items():
        tid = vocab.term_id(term)
        if tid is None or vocab.doc_freq[tid] == vocab.total_docs:
            continue
        weights[tid] = count * math.log(vocab.total_docs / vocab.doc_freq[tid])
    return SparseVector.from_weights(weights)


def cosine(a: Vector, b: Vector) -> float:
    """Cosine similarity for sparse or dense vectors.

    Returns 0.0 when either norm is zero. Dense inputs must share a
    dimension.
    """
    if isinstance(a, SparseVector) and isinstance(b, SparseVector):
        na, nb = a.norm(), b.norm()
        if na == 0.0 or nb == 0.0:
            return 0.0
        return a.dot(b) / (na * nb)
    if isinstance(a, SparseVector) or isinstance(b, SparseVector):
        raise TypeError("cannot mix sparse and dense vectors")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


@dataclass
class EmbeddingTable:
    """Term -> dense vector map with a shared dimension and the smoothing
    constant used for inverse-frequency weighting."""

    vectors: dict[str, np.ndarray]
    dim: int
    smoothing: float = 1e-3

    def __contains__(self, term: str) -> bool:
        return term in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)

    @classmethod
    def load(cls, path: str | Path, smoothing: float = 1e-3) -> "EmbeddingTable":
        """Parse the text embedding format: one `term v1 v2 ... vd` line per
        term, with an optional `count dim` header (detected by token arity).
        """
        vectors: dict[str, np.ndarray] = {}
        dim: int | None = None
        with Path(path).open("r", encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                parts = line.split()
                if not parts:
                    continue
                if line_no == 1 and len(parts) == 2:
                    try:
                        int(parts[0]), int(parts[1])
                        continue  # header line
                    except ValueError:
                        pass
                term, values = parts[0], parts[1:]
                if not values:
                    raise ValueError(f"line {line_no}: no vector components")
                vec = np.array([float(v) for v in values], dtype=float)
                if dim is None:
                    dim = vec.shape[0]
                elif vec.shape[0] != dim:
                    raise ValueError(
                        f"line {line_no}: dimension {vec.shape[0]} != {dim}"
                    )
                vectors[term] = vec
        if dim is None:
            raise ValueError(f"{path}: empty embedding file")
        return cls(vectors=vectors, dim=dim, smoothing=smoothing)

    def save(self, path: str | Path, header: bool = False) -> None:
        with Path(path).open("w", encoding="utf-8") as handle:
            if header:
                handle.write(f"{len(self.vectors)} {self.dim}\n")
            for term in sorted(self.vectors):
                if any(ch.isspace() for ch in term):
                    raise ValueError(f"term {term!r} contains whitespace")
                values = " ".join(repr(float(v)) for v in self.vectors[term])
                handle.write(f"{term} {values}\n")


def sif_embed(doc: Document, vocab: Vocabulary, table: EmbeddingTable) -> np.ndarray:
    """Smooth-inverse-frequency weighted average of word vectors.

    v = (1/|T|) * sum over in-table tokens t of [a / (a + p(t))] * vec(t),
    where p(t) is the corpus unigram probability. Out-of-table tokens are
    skipped; a document with no in-table token maps to the zero vector.
    """
    if len(table) == 0:
        raise ValueError("embedding table is empty")
    a = table.smoothing
    total = np.zeros(table.dim, dtype=float)
    n_hits = 0
    for token in document_tokens(doc):
        vec = table.vectors.get(token)
        if vec is None:
            continue
        total += (a / (a + vocab.prob(token))) * vec
        n_hits += 1
    if n_hits == 0:
        return total
    return total / n_hits


def sif_embed_all(
    corpus: Corpus,
    vocab: Vocabulary,
    table: EmbeddingTable,
    remove_common_component: bool = False,
) -> dict[str, np.ndarray]:
    """SIF vectors for every document, optionally removing the common
    component (projection onto the first singular vector of the stacked
    vectors). Removal is off by default."""
    vectors = {doc.id: sif_embed(doc, vocab, table) for doc in corpus}
    if remove_common_component and len(vectors) >= 2:
        ids = sorted(vectors)
        stacked = np.stack([vectors[i] for i in ids])
        if np.any(stacked):
            _, _, vt = np.linalg.svd(stacked, full_matrices=False)
            u = vt[0]
            for doc_id in ids:
                v = vectors[doc_id]
                vectors[doc_id] = v - np.dot(v, u) * u
    return vectors


def hybrid_concat(
    text_vec: np.ndarray, link_vec: np.ndarray, alpha: float = 0.5
) -> np.ndarray:
    """Concatenate L2-normalized text and link vectors, the link part scaled
    by alpha and the text part by (1 - alpha). Zero vectors stay zero."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")

    def unit(v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        norm = np.linalg.norm(v)
        return v / norm if norm > 0.0 else v

    return np.concatenate([(1.0 - alpha) * unit(text_vec), alpha * unit(link_vec)])


def top_k_neighbors(
    doc_id: str, vectors: Mapping[str, Vector], k: int
) -> list[tuple[str, float]]:
    """The k documents most cosine-similar to ``doc_id`` (seed excluded),
    ranked by descending score with ties broken by ascending id."""
    if doc_id not in vectors:
        raise KeyError(f"unknown document {doc_id!r}")
    if k < 1:
        raise ValueError("k must be >= 1")
    seed = vectors[doc_id]
    scored = [
        (other, cosine(seed, vec)) for other, vec in vectors.items() if other != doc_id
    ]
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored[:k]
