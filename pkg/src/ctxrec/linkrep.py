"""Citation-graph construction and link-based similarity.

Implements bibliographic coupling (shared references), co-citation
(shared citers), and a citation proximity index that weights co-citations
by how structurally close the two markers sit inside each citing document
(same sentence > paragraph > section > document). The proximity-weighted
pair graph feeds walk-based node embeddings trained with an in-package
skip-gram negative-sampling trainer so that runs are deterministic.

Self-citations are kept in the graph but ignored by every measure.
Dangling citation targets participate as pseudo-nodes: they count for
bibliographic coupling overlap and are valid co-citation endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import Corpus, DocumentNotFound


class ProximityLevel(Enum):
    """Closest shared container of two citation markers in one document."""

    SAME_SENTENCE = 1.0
    SAME_PARAGRAPH = 0.5
    SAME_SECTION = 0.25
    SAME_DOCUMENT = 0.125

    @property
    def weight(self) -> float:
        return self.value

    @staticmethod
    def of(a: "Marker", b: "Marker") -> "ProximityLevel":
        if a.section != b.section:
            return ProximityLevel.SAME_DOCUMENT
        if a.paragraph != b.paragraph:
            return ProximityLevel.SAME_SECTION
        if a.sentence != b.sentence:
            return ProximityLevel.SAME_PARAGRAPH
        return ProximityLevel.SAME_SENTENCE


@dataclass(frozen=True)
class Marker:
    """One citation occurrence: target plus position in the citing doc."""

    target: str
    section: int
    paragraph: int
    sentence: int


class CitationGraph:
    """Directed doc->doc citation edges with marker positions, indexed both
    ways. Duplicate markers to the same target are kept (they matter for
    proximity). Immutable after construction."""

    def __init__(self, doc_ids: Iterable[str], markers: dict[str, list[Marker]]):
        self.doc_ids = frozenset(doc_ids)
        self._out: dict[str, list[Marker]] = {d: [] for d in self.doc_ids}
        self._citing: dict[str, set[str]] = {}
        for source, marks in markers.items():
            if source not in self.doc_ids:
                raise ValueError(f"marker source {source!r} is not a corpus document")
            self._out[source] = list(marks)
            for marker in marks:
                self._citing.setdefault(marker.target, set()).add(source)
        self._known = self.doc_ids | set(self._citing)

    def out_markers(self, doc_id: str) -> list[Marker]:
        self._check(doc_id)
        return self._out.get(doc_id, [])

    def references(self, doc_id: str) -> set[str]:
        """Distinct cited ids, self-citations excluded."""
        self._check(doc_id)
        return {m.target for m in self._out.get(doc_id, []) if m.target != doc_id}

    def citing_docs(self, doc_id: str) -> set[str]:
        """Distinct citing ids, self-citations excluded."""
        self._check(doc_id)
        return {s for s in self._citing.get(doc_id, set()) if s != doc_id}

    def nodes(self) -> frozenset[str]:
        return self._known

    def linked_pairs(self) -> set[tuple[str, str]]:
        """Unordered in-corpus (citing, cited) pairs, self-citations excluded."""
        pairs = set()
        for source, marks in self._out.items():
            for marker in marks:
                if marker.target != source and marker.target in self.doc_ids:
                    pairs.add(tuple(sorted((source, marker.target))))
        return pairs

    def _check(self, doc_id: str) -> None:
        if doc_id not in self._known:
            raise DocumentNotFound(f"document {doc_id!r} not in citation graph")


def build_graph(corpus: Corpus) -> CitationGraph:
    """Index every citation marker (dangling targets included) both ways."""
    markers = {
        doc.id: [
            Marker(m.target, m.section, m.paragraph, m.sentence)
            for m in doc.citations
        ]
        for doc in corpus
    }
    return CitationGraph(corpus.ids(), markers)


def bibliographic_coupling(
    graph: CitationGraph, a: str, b: str
) -> tuple[int, float]:
    """Overlap of the two documents' reference lists.

    Returns (count, normalized) where count is the number of distinct
    shared references (dangling targets count) and normalized divides by
    sqrt(|refs(a)| * |refs(b)|); 0.0 when either list is empty.
    """
    if a == b:
        raise ValueError("bibliographic coupling needs two distinct documents")
    refs_a = graph.references(a)
    refs_b = graph.references(b)
    count = len(refs_a & refs_b)
    if not refs_a or not refs_b:
        return count, 0.0
    return count, count / math.sqrt(len(refs_a) * len(refs_b))


def cocitation(graph: CitationGraph, a: str, b: str) -> tuple[int, float]:
    """How many distinct documents cite both a and b.

    Normalized by sqrt of the two in-degrees (distinct citing docs);
    0.0 when either in-degree is zero.
    """
    if a == b:
        raise ValueError("co-citation needs two distinct documents")
    citing_a = graph.citing_docs(a)
    citing_b = graph.citing_docs(b)
    count = len(citing_a & citing_b)
    if not citing_a or not citing_b:
        return count, 0.0
    return count, count / math.sqrt(len(citing_a) * len(citing_b))


def _pair_proximity(markers: Sequence[Marker], a: str, b: str) -> float:
    """Best proximity weight over all (marker-to-a, marker-to-b) pairs
    within one citing document; 0.0 if either side is missing."""
    to_a = [m for m in markers if m.target == a]
    to_b = [m for m in markers if m.target == b]
    best = 0.0
    for ma in to_a:
        for mb in to_b:
            weight = ProximityLevel.of(ma, mb).weight
            if weight > best:
                best = weight
            if best == ProximityLevel.SAME_SENTENCE.weight:
                return best
    return best


def cpi(graph: CitationGraph, a: str, b: str) -> tuple[float, float]:
    """Citation proximity index of a pair.

    Each co-citing document contributes the maximum proximity weight over
    its marker pairs (so one document contributes at most 1.0). raw is the
    sum of contributions; normalized is the mean, 0.0 with no co-citers.
    """
    if a == b:
        raise ValueError("proximity index needs two distinct documents")
    co_citing = graph.citing_docs(a) & graph.citing_docs(b)
    if not co_citing:
        return 0.0, 0.0
    raw = 0.0
    for citing in co_citing:
        raw += _pair_proximity(graph.out_markers(citing), a, b)
    return raw, raw / len(co_citing)


class WeightedGraph:
    """Undirected positively-weighted graph over co-cited documents."""

    def __init__(self, edges: Iterable[tuple[str, str, float]] = ()):
        self.adj: dict[str, dict[str, float]] = {}
        for a, b, weight in edges:
            self.add_edge(a, b, weight)

    def add_edge(self, a: str, b: str, weight: float) -> None:
        if a == b:
            raise ValueError(f"self-loop on {a!r}")
        if not weight > 0.0:
            raise ValueError(f"edge weight must be positive, got {weight}")
        self.adj.setdefault(a, {})[b] = weight
        self.adj.setdefault(b, {})[a] = weight

    def nodes(self) -> list[str]:
        return sorted(self.adj)

    def weight(self, a: str, b: str) -> float:
        return self.adj.get(a, {}).get(b, 0.0)

    def edge_list(self) -> list[tuple[str, str, float]]:
        seen = []
        for a in sorted(self.adj):
            for b in sorted(self.adj[a]):
                if a < b:
                    seen.append((a, b, self.adj[a][b]))
        return seen

    def __len__(self) -> int:
        return sum(len(nbrs) for nbrs in self.adj.values()) // 2

    def export_text(self) -> str:
        """`id_a id_b weight` per line, lexicographically sorted, weights
        printed with 6 decimals (stable for golden-file comparison)."""
        return "".join(f"{a} {b} {w:.6f}\n" for a, b, w in self.edge_list())

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.export_text(), encoding="utf-8")

    @classmethod
    def read(cls, path: str | Path) -> "WeightedGraph":
        graph = cls()
        for line_no, line in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), start=1
        ):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"line {line_no}: expected `id_a id_b weight`")
            graph.add_edge(parts[0], parts[1], float(parts[2]))
        return graph


def build_weighted_graph(graph: CitationGraph) -> WeightedGraph:
    """Proximity-weighted co-citation graph: one undirected edge per pair
    of documents ever co-cited, weighted by raw CPI.

    Enumeration is per citing document over its own marker pairs, never
    all-pairs over the corpus.
    """
    accum: dict[tuple[str, str], float] = {}
    for citing in sorted(graph.nodes()):
        if citing not in graph.doc_ids:
            continue  # pseudo-nodes have no out-markers
        markers = graph.out_markers(citing)
        targets = sorted({m.target for m in markers if m.target != citing})
        for i, a in enumerate(targets):
            for b in targets[i + 1 :]:
                contribution = _pair_proximity(markers, a, b)
                if contribution > 0.0:
                    accum[(a, b)] = accum.get((a, b), 0.0) + contribution
    weighted = WeightedGraph()
    for (a, b), weight in accum.items():
        weighted.add_edge(a, b, weight)
    return weighted


@dataclass
class EmbeddingConfig:
    """Training configuration for walk-based node embeddings."""

    dims: int = 64
    walks_per_node: int = 10
    walk_length: int = 40
    window: int = 5
    negatives: int = 5
    epochs: int = 3
    learning_rate: float = 0.025
    seed: int = 1

    def validate(self) -> None:
        if self.dims < 2:
            raise ValueError("dims must be >= 2")
        if self.walks_per_node < 1 or self.walk_length < 1:
            raise ValueError("walks_per_node and walk_length must be >= 1")
        if self.window < 1 or self.negatives < 0 or self.epochs < 1:
            raise ValueError("invalid window/negatives/epochs")
        if not self.learning_rate > 0.0:
            raise ValueError("learning rate must be positive")


@dataclass
class GraphEmbedding:
    """Node -> dense vector map produced by a single deterministic run."""

    vectors: dict[str, np.ndarray]
    dim: int
    config: EmbeddingConfig = field(default_factory=EmbeddingConfig)

    def save(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8") as handle:
            for node in sorted(self.vectors):
                if any(ch.isspace() for ch in node):
                    raise ValueError(f"node id {node!r} contains whitespace")
                values = " ".join(repr(float(v)) for v in self.vectors[node])
                handle.write(f"{node} {values}\n")

    @classmethod
    def load(cls, path: str | Path) -> "GraphEmbedding":
        vectors: dict[str, np.ndarray] = {}
        dim = 0
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            parts = line.split()
            if not parts:
                continue
            vec = np.array([float(v) for v in parts[1:]], dtype=float)
            vectors[parts[0]] = vec
            dim = vec.shape[0]
        return cls(vectors=vectors, dim=dim)


def generate_walks(
    graph: WeightedGraph,
    walks_per_node: int,
    walk_length: int,
    rng: np.random.Generator,
) -> list[list[str]]:
    """Weighted random walks: from every node, ``walks_per_node`` walks of
    ``walk_length`` transitions, the next node sampled proportionally to
    edge weight. Deterministic given the generator state."""
    nodes = graph.nodes()
    neighbors: dict[str, tuple[list[str], np.ndarray]] = {}
    for node in nodes:
        nbrs = sorted(graph.adj[node])
        weights = np.array([graph.adj[node][n] for n in nbrs], dtype=float)
        neighbors[node] = (nbrs, np.cumsum(weights))
    walks = []
    for _ in range(walks_per_node):
        for start in nodes:
            walk = [start]
            current = start
            for _ in range(walk_length):
                nbrs, cumulative = neighbors[current]
                draw = rng.random() * cumulative[-1]
                current = nbrs[int(np.searchsorted(cumulative, draw, side="right"))]
                walk.append(current)
            walks.append(walk)
    return walks


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def train_graph_embedding(
    graph: WeightedGraph, config: EmbeddingConfig | None = None
) -> GraphEmbedding:
    """Skip-gram-with-negative-sampling embeddings over weighted walks.

    Pipeline: (1) generate weight-proportional random walks; (2) collect
    (center, context) pairs within the window; (3) SGD over all pairs for
    the configured epochs, negatives drawn from the unigram^0.75 walk
    frequency distribution. Single-threaded and bitwise reproducible for a
    fixed seed.
    """
    config = config or EmbeddingConfig()
    config.validate()
    if len(graph) == 0:
        raise ValueError("cannot embed an empty graph")

    rng = np.random.default_rng(config.seed)
    walks = generate_walks(graph, config.walks_per_node, config.walk_length, rng)

    nodes = graph.nodes()
    index = {node: i for i, node in enumerate(nodes)}
    n_nodes = len(nodes)

    freq = np.zeros(n_nodes, dtype=float)
    centers: list[int] = []
    contexts: list[int] = []
    for walk in walks:
        ids = [index[n] for n in walk]
        for node_id in ids:
            freq[node_id] += 1.0
        for i, center in enumerate(ids):
            lo = max(0, i - config.window)
            hi = min(len(ids), i + config.window + 1)
            for j in range(lo, hi):
                if j != i:
                    centers.append(center)
                    contexts.append(ids[j])
    centers_arr = np.array(centers, dtype=np.int64)
    contexts_arr = np.array(contexts, dtype=np.int64)
    n_pairs = centers_arr.shape[0]

    noise = freq**0.75
    noise_cdf = np.cumsum(noise / noise.sum())

    w_in = (rng.random((n_nodes, config.dims)) - 0.5) / config.dims
    w_out = np.zeros((n_nodes, config.dims))
    lr = config.learning_rate

    for _ in range(config.epochs):
        order = rng.permutation(n_pairs)
        draws = rng.random((n_pairs, config.negatives))
        negatives = np.searchsorted(noise_cdf, draws, side="right")
        for row, pair_idx in enumerate(order):
            center = centers_arr[pair_idx]
            context = contexts_arr[pair_idx]
            v = w_in[center]
            grad_v = np.zeros(config.dims)
            targets = [(context, 1.0)]
            targets += [
                (int(neg), 0.0) for neg in negatives[row] if int(neg) != context
            ]
            for target, label in targets:
                u = w_out[target]
                g = lr * (label - _sigmoid(float(np.dot(v, u))))
                grad_v += g * u
                w_out[target] = u + g * v
            w_in[center] = v + grad_v

    vectors = {node: w_in[index[node]].copy() for node in nodes}
    return GraphEmbedding(vectors=vectors, dim=config.dims, config=config)
