"""The contextual similarity relation.

Similarity is a scored triple (source doc, target doc, context label) in
[0, 1] over a finite, configured set of context labels. Edges come from
four sources — curated annotations, heading-mapped segment similarity,
citation-sentence keyword rules, and the pair classifier — and are merged
into one immutable ContextGraph with per-edge provenance.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .corpus import Corpus
from .linkrep import CitationGraph
from .pairclass import NONE_LABEL, SoftmaxModel, predict
from .textrep import SparseVector, Vocabulary, cosine, tfidf_vector, tokenize, top_k_neighbors

PROV_ANNOTATION = "annotation"
PROV_SEGMENT = "segment"
PROV_CITATION = "citation-context"
PROV_CLASSIFIER = "classifier"

DEFAULT_SEGMENT_TAU = 0.3
DEFAULT_CLASSIFIER_TAU = 0.5
DEFAULT_CANDIDATE_NEIGHBORS = 10


class UnknownContext(ValueError):
    """A context label outside the configured context set."""


@dataclass(frozen=True)
class ContextSet:
    """Ordered distinct context labels; the reserved "none" is excluded."""

    labels: tuple[str, ...]

    def __post_init__(self):
        if not self.labels:
            raise ValueError("context set must be non-empty")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("context labels must be distinct")
        if NONE_LABEL in self.labels:
            raise ValueError(f"{NONE_LABEL!r} is reserved and cannot be a context")

    @classmethod
    def of(cls, *labels: str) -> "ContextSet":
        return cls(tuple(labels))

    def __contains__(self, label: object) -> bool:
        return label in self.labels

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def check(self, label: str) -> str:
        if label not in self.labels:
            raise UnknownContext(
                f"unknown context {label!r}; configured contexts: {list(self.labels)}"
            )
        return label


def scholarly_context_set() -> ContextSet:
    """A reasonable default for research-paper corpora."""
    return ContextSet.of("background", "method", "resource", "findings")


@dataclass(frozen=True)
class ContextEdge:
    """A scored contextual relation between two documents."""

    source: str
    target: str
    context: str
    score: float
    provenance: tuple[str, ...]

    def __post_init__(self):
        if self.source == self.target:
            raise ValueError(f"self-edge on {self.source!r}")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must be in [0, 1], got {self.score}")


class ContextGraph:
    """Immutable store of context edges, indexed by source, target, and
    context. Duplicate (source, target, context) entries merge to the
    maximum score with provenances unioned. Lookup is symmetric: sim takes
    the best of both stored directions."""

    def __init__(
        self,
        contexts: ContextSet,
        doc_ids: Iterable[str] = (),
        edges: Iterable[ContextEdge] = (),
    ):
        self.contexts = contexts
        self._edges: dict[tuple[str, str, str], tuple[float, frozenset[str]]] = {}
        self._by_source: dict[str, set[tuple[str, str, str]]] = {}
        self._by_target: dict[str, set[tuple[str, str, str]]] = {}
        self._by_context: dict[str, set[tuple[str, str, str]]] = {}
        universe = set(doc_ids)
        for edge in edges:
            contexts.check(edge.context)
            key = (edge.source, edge.target, edge.context)
            score, provs = self._edges.get(key, (0.0, frozenset()))
            self._edges[key] = (max(score, edge.score), provs | set(edge.provenance))
            self._by_source.setdefault(edge.source, set()).add(key)
            self._by_target.setdefault(edge.target, set()).add(key)
            self._by_context.setdefault(edge.context, set()).add(key)
            universe.add(edge.source)
            universe.add(edge.target)
        self.doc_ids = frozenset(universe)

    def __len__(self) -> int:
        return len(self._edges)

    def edges(self) -> list[ContextEdge]:
        return [self._edge(key) for key in sorted(self._edges)]

    def _edge(self, key: tuple[str, str, str]) -> ContextEdge:
        score, provs = self._edges[key]
        return ContextEdge(
            source=key[0],
            target=key[1],
            context=key[2],
            score=score,
            provenance=tuple(sorted(provs)),
        )

    def edges_from(self, source: str) -> list[ContextEdge]:
        return [self._edge(k) for k in sorted(self._by_source.get(source, ()))]

    def edges_to(self, target: str) -> list[ContextEdge]:
        return [self._edge(k) for k in sorted(self._by_target.get(target, ()))]

    def edges_with_context(self, context: str) -> list[ContextEdge]:
        self.contexts.check(context)
        return [self._edge(k) for k in sorted(self._by_context.get(context, ()))]

    def sim(self, ds: str, dt: str, context: str) -> float:
        """Contextual similarity in [0, 1]; 0.0 means no known similarity
        in this context. Symmetric in the document arguments."""
        self.contexts.check(context)
        best = 0.0
        for key in ((ds, dt, context), (dt, ds, context)):
            stored = self._edges.get(key)
            if stored is not None and stored[0] > best:
                best = stored[0]
        return best

    def provenance(self, ds: str, dt: str, context: str) -> tuple[str, ...]:
        """Union of provenances over both stored directions."""
        provs: set[str] = set()
        for key in ((ds, dt, context), (dt, ds, context)):
            stored = self._edges.get(key)
            if stored is not None:
                provs |= stored[1]
        return tuple(sorted(provs))

    def contexts_between(self, ds: str, dt: str) -> list[tuple[str, float]]:
        """All contexts with nonzero similarity for the pair, sorted by
        descending score then label."""
        found = []
        for context in self.contexts:
            score = self.sim(ds, dt, context)
            if score > 0.0:
                found.append((context, score))
        found.sort(key=lambda item: (-item[1], item[0]))
        return found

    def neighbors(self, doc_id: str, context: str) -> dict[str, float]:
        """Documents related to ``doc_id`` in one context (either stored
        direction), mapped to their best score."""
        self.contexts.check(context)
        out: dict[str, float] = {}
        for key in self._by_source.get(doc_id, ()):
            if key[2] == context:
                score = self._edges[key][0]
                out[key[1]] = max(out.get(key[1], 0.0), score)
        for key in self._by_target.get(doc_id, ()):
            if key[2] == context:
                score = self._edges[key][0]
                out[key[0]] = max(out.get(key[0], 0.0), score)
        return out

    def save(self, path: str | Path, doc_ids_path: str | Path | None = None) -> None:
        """JSONL export: one `{"s","t","c","score","prov"}` object per edge."""
        with Path(path).open("w", encoding="utf-8") as handle:
            for edge in self.edges():
                handle.write(
                    json.dumps(
                        {
                            "s": edge.source,
                            "t": edge.target,
                            "c": edge.context,
                            "score": edge.score,
                            "prov": list(edge.provenance),
                        },
                        ensure_ascii=False,
                    )
                    + "\n"
                )
        if doc_ids_path is not None:
            Path(doc_ids_path).write_text(
                json.dumps(sorted(self.doc_ids)) + "\n", encoding="utf-8"
            )

    @classmethod
    def load(
        cls,
        path: str | Path,
        contexts: ContextSet,
        doc_ids: Iterable[str] = (),
    ) -> "ContextGraph":
        edges = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            obj = json.loads(line)
            edges.append(
                ContextEdge(
                    source=obj["s"],
                    target=obj["t"],
                    context=obj["c"],
                    score=float(obj["score"]),
                    provenance=tuple(obj.get("prov", ())),
                )
            )
        return cls(contexts, doc_ids, edges)


@dataclass
class HeadingMap:
    """Ordered (pattern, context) rules mapping section headings to
    contexts. Patterns are case-insensitive regexes; a plain word acts as
    a substring match."""

    rules: list[tuple[str, str]]

    @classmethod
    def from_mapping(
        cls, mapping: Mapping[str, Sequence[str]], contexts: ContextSet
    ) -> "HeadingMap":
        rules = []
        for context, patterns in mapping.items():
            contexts.check(context)
            for pattern in patterns:
                rules.append((pattern, context))
        return cls(rules)

    def contexts_for(self, heading: str) -> set[str]:
        matched = set()
        for pattern, context in self.rules:
            if re.search(pattern, heading, re.IGNORECASE):
                matched.add(context)
        return matched


def from_annotations(corpus: Corpus, contexts: ContextSet) -> ContextGraph:
    """One edge per document annotation, score 1.0 (annotations are
    assertions, not estimates). Unknown context labels are errors."""
    edges = []
    for doc in corpus:
        for ann in doc.annotations:
            contexts.check(ann.context)
            if ann.target == doc.id:
                raise ValueError(
                    f"document {doc.id!r} has a self-referential annotation"
                )
            edges.append(
                ContextEdge(
                    source=doc.id,
                    target=ann.target,
                    context=ann.context,
                    score=1.0,
                    provenance=(PROV_ANNOTATION,),
                )
            )
    return ContextGraph(contexts, corpus.ids(), edges)


def segment_vectors(
    corpus: Corpus, heading_map: HeadingMap, vocab: Vocabulary, context: str
) -> dict[str, SparseVector]:
    """TF-IDF vector of each document's segment for one context: the
    concatenated body text of sections whose heading maps to the context.
    Documents without a matching non-empty segment are omitted."""
    vectors: dict[str, SparseVector] = {}
    for doc in corpus:
        tokens: list[str] = []
        for sec in doc.sections:
            if context in heading_map.contexts_for(sec.heading):
                for sentence in sec.sentences():
                    tokens.extend(tokenize(sentence))
        if tokens:
            vectors[doc.id] = tfidf_vector(tokens, vocab)
    return vectors


def from_segments(
    corpus: Corpus,
    heading_map: HeadingMap,
    vocab: Vocabulary,
    contexts: ContextSet,
    tau: float = DEFAULT_SEGMENT_TAU,
    pairs: Iterable[tuple[str, str]] | None = None,
) -> ContextGraph:
    """Segment-level similarity edges: for each context, the cosine of the
    two documents' segment TF-IDF vectors, kept when >= tau.

    ``pairs`` restricts enumeration to candidate pairs; None examines all
    pairs of documents that have a segment for the context.
    """
    edges = []
    pair_list = None if pairs is None else sorted({tuple(sorted(p)) for p in pairs})
    for context in contexts:
        vectors = segment_vectors(corpus, heading_map, vocab, context)
        if pair_list is None:
            ids = sorted(vectors)
            candidates = [
                (ids[i], ids[j])
                for i in range(len(ids))
                for j in range(i + 1, len(ids))
            ]
        else:
            candidates = [p for p in pair_list if p[0] in vectors and p[1] in vectors]
        for a, b in candidates:
            score = cosine(vectors[a], vectors[b])
            if score >= tau:
                edges.append(
                    ContextEdge(
                        source=a,
                        target=b,
                        context=context,
                        score=min(score, 1.0),
                        provenance=(PROV_SEGMENT,),
                    )
                )
    return ContextGraph(contexts, corpus.ids(), edges)


def from_citation_contexts(
    corpus: Corpus,
    graph: CitationGraph,
    keyword_rules: Mapping[str, Sequence[str]],
    contexts: ContextSet,
) -> ContextGraph:
    """Keyword rules over citing sentences.

    For every citation marker, the sentence containing it is tokenized; if
    the keywords of exactly one context occur, an edge (citing, cited) with
    score 1.0 is emitted. Sentences matching two or more contexts are
    ambiguous and emit nothing. Repeat markers are idempotent.
    """
    keywords = {}
    for context, words in keyword_rules.items():
        contexts.check(context)
        keywords[context] = {w.lower() for w in words}

    edges = []
    for doc in corpus:
        for marker in doc.citations:
            if marker.target == doc.id:
                continue  # self-citation
            sentence = doc.sentence_at(marker.section, marker.paragraph, marker.sentence)
            tokens = set(tokenize(sentence))
            matched = [c for c, words in keywords.items() if tokens & words]
            if len(matched) == 1:
                edges.append(
                    ContextEdge(
                        source=doc.id,
                        target=marker.target,
                        context=matched[0],
                        score=1.0,
                        provenance=(PROV_CITATION,),
                    )
                )
    return ContextGraph(contexts, corpus.ids(), edges)


def from_classifier(
    model: SoftmaxModel,
    doc_vectors: Mapping[str, np.ndarray],
    candidate_pairs: Iterable[tuple[str, str]],
    contexts: ContextSet,
    tau: float = DEFAULT_CLASSIFIER_TAU,
) -> ContextGraph:
    """Classifier-predicted edges: for each candidate pair, every context
    whose predicted probability reaches tau becomes an edge scored by that
    probability (never re-scaled). The reserved "none" class never emits."""
    expected = set(contexts.labels) | {NONE_LABEL}
    if set(model.classes) != expected:
        raise ValueError(
            f"model classes {sorted(model.classes)} do not match contexts "
            f"{sorted(expected)}"
        )
    edges = []
    for a, b in candidate_pairs:
        probs = predict(model, doc_vectors[a], doc_vectors[b])
        for context in contexts:
            p = probs[context]
            if p >= tau:
                edges.append(
                    ContextEdge(
                        source=a,
                        target=b,
                        context=context,
                        score=p,
                        provenance=(PROV_CLASSIFIER,),
                    )
                )
    return ContextGraph(contexts, doc_vectors.keys(), edges)


def merge(graphs: Sequence[ContextGraph]) -> ContextGraph:
    """Union of edge sets over the same context set. The same
    (source, target, context) triple keeps the maximum score and all
    provenances. Order-independent and idempotent."""
    if not graphs:
        raise ValueError("nothing to merge")
    contexts = graphs[0].contexts
    for graph in graphs[1:]:
        if graph.contexts.labels != contexts.labels:
            raise ValueError(
                f"context-set mismatch: {graph.contexts.labels} vs {contexts.labels}"
            )
    universe: set[str] = set()
    edges: list[ContextEdge] = []
    for graph in graphs:
        universe |= graph.doc_ids
        edges.extend(graph.edges())
    return ContextGraph(contexts, universe, edges)


def default_candidate_pairs(
    corpus: Corpus,
    citation_graph: CitationGraph,
    doc_vectors: Mapping[str, SparseVector],
    per_doc: int = DEFAULT_CANDIDATE_NEIGHBORS,
) -> set[tuple[str, str]]:
    """Candidate pairs for the pairwise edge sources: citation-linked pairs
    plus each document's top TF-IDF neighbors. Avoids the full O(n^2)
    enumeration while covering linked and textually close pairs."""
    pairs = set(citation_graph.linked_pairs())
    if len(doc_vectors) >= 2:
        for doc_id in corpus.ids():
            for other, score in top_k_neighbors(doc_id, doc_vectors, per_doc):
                if score > 0.0:
                    pairs.add(tuple(sorted((doc_id, other))))
    return pairs


@dataclass
class ContextConfig:
    """Engine configuration: the context set, heading rules, citation
    keyword rules, and thresholds. Loaded from a single JSON file."""

    contexts: ContextSet
    headings: dict[str, list[str]]
    citation_keywords: dict[str, list[str]]
    segment_tau: float = DEFAULT_SEGMENT_TAU
    classifier_tau: float = DEFAULT_CLASSIFIER_TAU
    candidate_neighbors: int = DEFAULT_CANDIDATE_NEIGHBORS

    @classmethod
    def from_dict(cls, obj: Mapping) -> "ContextConfig":
        contexts = ContextSet(tuple(obj["contexts"]))
        headings = {k: list(v) for k, v in obj.get("headings", {}).items()}
        citation_keywords = {
            k: list(v) for k, v in obj.get("citation_keywords", {}).items()
        }
        for label in list(headings) + list(citation_keywords):
            contexts.check(label)
        thresholds = obj.get("thresholds", {})
        return cls(
            contexts=contexts,
            headings=headings,
            citation_keywords=citation_keywords,
            segment_tau=float(thresholds.get("segment_tau", DEFAULT_SEGMENT_TAU)),
            classifier_tau=float(
                thresholds.get("classifier_tau", DEFAULT_CLASSIFIER_TAU)
            ),
            candidate_neighbors=int(
                thresholds.get("candidate_neighbors", DEFAULT_CANDIDATE_NEIGHBORS)
            ),
        )

    @classmethod
    def load(cls, path: str | Path) -> "ContextConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict:
        return {
            "contexts": list(self.contexts.labels),
            "headings": self.headings,
            "citation_keywords": self.citation_keywords,
            "thresholds": {
                "segment_tau": self.segment_tau,
                "classifier_tau": self.classifier_tau,
                "candidate_neighbors": self.candidate_neighbors,
            },
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8"
        )

    def heading_map(self) -> HeadingMap:
        return HeadingMap.from_mapping(self.headings, self.contexts)


def default_config() -> ContextConfig:
    """Scholarly default configuration written when none is supplied."""
    return ContextConfig(
        contexts=scholarly_context_set(),
        headings={
            "background": ["background", "introduction", "related work"],
            "method": ["method", "approach", "model"],
            "resource": ["data", "resource", "corpus"],
            "findings": ["result", "finding", "evaluation", "discussion", "conclusion"],
        },
        citation_keywords={
            "background": ["background", "introduced", "originally"],
            "method": ["method", "approach", "algorithm", "technique"],
            "resource": ["dataset", "corpus", "resource", "data"],
            "findings": ["result", "found", "showed", "reported"],
        },
    )
