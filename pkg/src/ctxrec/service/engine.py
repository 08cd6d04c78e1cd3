"""Engine directory: every artifact of one corpus lives under one root.

Layout:

    <dir>/engine.json          format marker
    <dir>/corpus/              persisted corpus (manifest + documents)
    <dir>/context.json         context set, heading/keyword rules, thresholds
    <dir>/tfidf.json           vocabulary + per-document sparse vectors
    <dir>/weighted_graph.txt   proximity-weighted co-citation graph
    <dir>/graph_vectors.txt    trained node embeddings (optional)
    <dir>/word_vectors.txt     copied word-embedding file (optional)
    <dir>/model.txt            pair classifier (optional)
    <dir>/context_graph.jsonl  merged contextual-similarity edges

Stages build on each other (ingest -> index -> embed-graph/train ->
build-context -> query/serve); a missing prerequisite is a user error
naming the stage to run. The citation graph is rebuilt from the corpus on
demand rather than persisted.
"""

from __future__ import annotations

import json
import math
import shutil
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import corpus as corpus_mod
from .. import ctxsim, linkrep, pairclass, queryeng, textrep

ENGINE_FORMAT = "ctxrec-engine"
ENGINE_VERSION = 1


class EngineError(Exception):
    """User-actionable problem with the engine directory or stage order."""


@dataclass
class EngineConfig:
    """Startup wiring for `serve`: where the engine lives and how to bind."""

    directory: Path
    host: str = "127.0.0.1"
    port: int = 8000
    cors: bool = True

    def validate(self) -> None:
        if not 1 <= self.port <= 65535:
            raise EngineError(f"port must be in [1, 65535], got {self.port}")
        directory = Path(self.directory)
        if not directory.is_dir():
            raise EngineError(f"engine directory {directory} does not exist")
        for required in ("corpus", "context.json", "context_graph.jsonl"):
            if not (directory / required).exists():
                raise EngineError(
                    f"{directory} is missing {required}; run the build pipeline first"
                )


class Engine:
    """Loads, builds, and serves the artifacts of one engine directory."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self._corpus: corpus_mod.Corpus | None = None
        self._config: ctxsim.ContextConfig | None = None
        self._tfidf: tuple[textrep.Vocabulary, dict[str, textrep.SparseVector]] | None = None
        self._citation_graph: linkrep.CitationGraph | None = None
        self._context_graph: ctxsim.ContextGraph | None = None

    # -- paths ---------------------------------------------------------

    @property
    def corpus_dir(self) -> Path:
        return self.directory / "corpus"

    @property
    def config_path(self) -> Path:
        return self.directory / "context.json"

    @property
    def tfidf_path(self) -> Path:
        return self.directory / "tfidf.json"

    @property
    def weighted_graph_path(self) -> Path:
        return self.directory / "weighted_graph.txt"

    @property
    def graph_vectors_path(self) -> Path:
        return self.directory / "graph_vectors.txt"

    @property
    def word_vectors_path(self) -> Path:
        return self.directory / "word_vectors.txt"

    @property
    def model_path(self) -> Path:
        return self.directory / "model.txt"

    @property
    def context_graph_path(self) -> Path:
        return self.directory / "context_graph.jsonl"

    # -- stages ---------------------------------------------------------

    @classmethod
    def initialize(
        cls,
        jsonl_path: str | Path,
        directory: str | Path,
        config_path: str | Path | None = None,
    ) -> tuple["Engine", corpus_mod.IngestReport]:
        """Ingest a JSONL file into a fresh engine directory."""
        engine = cls(directory)
        loaded, report = corpus_mod.ingest_jsonl(jsonl_path)
        engine.directory.mkdir(parents=True, exist_ok=True)
        corpus_mod.save(loaded, engine.corpus_dir)
        if config_path is not None:
            config = ctxsim.ContextConfig.load(config_path)
        else:
            config = ctxsim.default_config()
        config.save(engine.config_path)
        (engine.directory / "engine.json").write_text(
            json.dumps({"format": ENGINE_FORMAT, "version": ENGINE_VERSION}) + "\n",
            encoding="utf-8",
        )
        engine._corpus = loaded
        engine._config = config
        return engine, report

    def corpus(self) -> corpus_mod.Corpus:
        if self._corpus is None:
            if not self.corpus_dir.exists():
                raise EngineError(
                    f"{self.directory} has no corpus; run `ingest` first"
                )
            self._corpus = corpus_mod.load(self.corpus_dir)
        return self._corpus

    def config(self) -> ctxsim.ContextConfig:
        if self._config is None:
            if not self.config_path.exists():
                raise EngineError(
                    f"{self.directory} has no context.json; run `ingest` first"
                )
            self._config = ctxsim.ContextConfig.load(self.config_path)
        return self._config

    def build_index(self) -> dict:
        """TF-IDF vectors plus the citation and weighted graphs; persists
        tfidf.json and weighted_graph.txt."""
        loaded = self.corpus()
        vocab, vectors = textrep.build_tfidf(loaded)
        payload = {
            "terms": vocab.terms,
            "doc_freq": vocab.doc_freq,
            "term_prob": vocab.term_prob,
            "total_docs": vocab.total_docs,
            "vectors": {
                doc_id: [[int(i), float(v)] for i, v in zip(vec.indices, vec.values)]
                for doc_id, vec in vectors.items()
            },
        }
        self.tfidf_path.write_text(
            json.dumps(payload, ensure_ascii=False), encoding="utf-8"
        )
        self._tfidf = (vocab, vectors)
        weighted = linkrep.build_weighted_graph(self.citation_graph())
        weighted.write(self.weighted_graph_path)
        return {
            "documents": len(loaded),
            "terms": len(vocab),
            "weighted_edges": len(weighted),
        }

    def tfidf(self) -> tuple[textrep.Vocabulary, dict[str, textrep.SparseVector]]:
        if self._tfidf is None:
            if not self.tfidf_path.exists():
                raise EngineError(
                    f"{self.directory} has no tfidf.json; run `index` first"
                )
            payload = json.loads(self.tfidf_path.read_text(encoding="utf-8"))
            vocab = textrep.Vocabulary(
                terms=payload["terms"],
                doc_freq=payload["doc_freq"],
                term_prob=payload["term_prob"],
                total_docs=payload["total_docs"],
            )
            vectors = {
                doc_id: textrep.SparseVector(
                    tuple(int(i) for i, _ in entries),
                    tuple(float(v) for _, v in entries),
                )
                for doc_id, entries in payload["vectors"].items()
            }
            self._tfidf = (vocab, vectors)
        return self._tfidf

    def citation_graph(self) -> linkrep.CitationGraph:
        if self._citation_graph is None:
            self._citation_graph = linkrep.build_graph(self.corpus())
        return self._citation_graph

    def weighted_graph(self) -> linkrep.WeightedGraph:
        if not self.weighted_graph_path.exists():
            raise EngineError(
                f"{self.directory} has no weighted_graph.txt; run `index` first"
            )
        return linkrep.WeightedGraph.read(self.weighted_graph_path)

    def embed_graph(self, config: linkrep.EmbeddingConfig | None = None) -> dict:
        """Train node embeddings over the weighted graph; persists
        graph_vectors.txt."""
        weighted = self.weighted_graph()
        if len(weighted) == 0:
            raise EngineError(
                "weighted graph has no edges (no co-citations); nothing to embed"
            )
        embedding = linkrep.train_graph_embedding(weighted, config)
        embedding.save(self.graph_vectors_path)
        return {"nodes": len(embedding.vectors), "dims": embedding.dim}

    def graph_embedding(self) -> linkrep.GraphEmbedding | None:
        if not self.graph_vectors_path.exists():
            return None
        return linkrep.GraphEmbedding.load(self.graph_vectors_path)

    def set_word_vectors(self, path: str | Path) -> None:
        """Copy an external word-embedding file into the engine directory."""
        shutil.copyfile(path, self.word_vectors_path)

    def word_table(self) -> textrep.EmbeddingTable | None:
        if not self.word_vectors_path.exists():
            return None
        return textrep.EmbeddingTable.load(self.word_vectors_path)

    def doc_vectors(self, alpha: float = 0.5) -> dict[str, np.ndarray]:
        """Dense vectors for every document.

        Hybrid of the SIF text vector and the graph embedding when both
        exist; a document missing a graph embedding gets a zero link block
        (keeps the dimension uniform). Falls back to whichever single
        source is available; neither available is an error.
        """
        loaded = self.corpus()
        vocab, _ = self.tfidf()
        table = self.word_table()
        graph_emb = self.graph_embedding()
        if table is None and graph_emb is None:
            raise EngineError(
                "no document vectors available; run `embed-graph` or supply "
                "a word-embedding file via `train --embeddings`"
            )
        text_vecs = (
            textrep.sif_embed_all(loaded, vocab, table) if table is not None else None
        )
        if graph_emb is None:
            return text_vecs
        if text_vecs is None:
            dim = graph_emb.dim
            return {
                doc.id: graph_emb.vectors.get(doc.id, np.zeros(dim)) for doc in loaded
            }
        zero_link = np.zeros(graph_emb.dim)
        return {
            doc.id: textrep.hybrid_concat(
                text_vecs[doc.id],
                graph_emb.vectors.get(doc.id, zero_link),
                alpha=alpha,
            )
            for doc in loaded
        }

    def train_classifier(
        self,
        pairs_path: str | Path,
        config: pairclass.TrainConfig | None = None,
        embeddings_path: str | Path | None = None,
        alpha: float = 0.5,
    ) -> dict:
        """Train the pair classifier on a JSONL pairs file; persists model.txt."""
        if embeddings_path is not None:
            self.set_word_vectors(embeddings_path)
        pairs = pairclass.load_pairs_jsonl(pairs_path)
        vectors = self.doc_vectors(alpha=alpha)
        model, loss = pairclass.train(pairs, vectors, config)
        model.save(self.model_path)
        return {
            "pairs": len(pairs),
            "classes": model.classes,
            "final_loss": loss,
        }

    def model(self) -> pairclass.SoftmaxModel | None:
        if not self.model_path.exists():
            return None
        return pairclass.SoftmaxModel.load(self.model_path)

    def build_context_graph(self) -> dict:
        """Run every configured edge source and merge the results.

        Annotations always run; segment and citation-keyword sources run
        when the config carries rules for them; the classifier source runs
        when a trained model is present.
        """
        loaded = self.corpus()
        config = self.config()
        contexts = config.contexts
        vocab, tfidf_vectors = self.tfidf()
        citation_graph = self.citation_graph()
        candidates = ctxsim.default_candidate_pairs(
            loaded, citation_graph, tfidf_vectors, config.candidate_neighbors
        )

        graphs = [ctxsim.from_annotations(loaded, contexts)]
        if config.headings:
            graphs.append(
                ctxsim.from_segments(
                    loaded,
                    config.heading_map(),
                    vocab,
                    contexts,
                    tau=config.segment_tau,
                    pairs=candidates,
                )
            )
        if config.citation_keywords:
            graphs.append(
                ctxsim.from_citation_contexts(
                    loaded, citation_graph, config.citation_keywords, contexts
                )
            )
        model = self.model()
        if model is not None:
            vectors = self.doc_vectors()
            usable = [
                (a, b) for a, b in candidates if a in vectors and b in vectors
            ]
            graphs.append(
                ctxsim.from_classifier(
                    model, vectors, sorted(usable), contexts, tau=config.classifier_tau
                )
            )

        merged = ctxsim.merge(graphs)
        merged.save(self.context_graph_path)
        self._context_graph = merged
        by_source: dict[str, int] = {}
        for edge in merged.edges():
            for prov in edge.provenance:
                by_source[prov] = by_source.get(prov, 0) + 1
        return {"edges": len(merged), "by_provenance": by_source}

    def context_graph(self) -> ctxsim.ContextGraph:
        if self._context_graph is None:
            if not self.context_graph_path.exists():
                raise EngineError(
                    f"{self.directory} has no context graph; run `build-context` first"
                )
            self._context_graph = ctxsim.ContextGraph.load(
                self.context_graph_path,
                self.config().contexts,
                self.corpus().ids(),
            )
        return self._context_graph

    # -- queries ---------------------------------------------------------

    def query(self, text: str) -> list[queryeng.RecommendationItem]:
        parsed = queryeng.parse_query(text, self.config().contexts)
        return queryeng.answer(self.context_graph(), parsed)

    def recommend(
        self,
        seed: str,
        mode: str = "diverse",
        context: str | None = None,
        k: int = queryeng.DEFAULT_K,
    ) -> list[queryeng.RecommendationItem]:
        graph = self.context_graph()
        if mode == "diverse":
            return queryeng.recommend_diverse(graph, seed, k)
        if mode == "focused":
            if context is None:
                raise EngineError("focused mode needs a context")
            return queryeng.recommend_focused(graph, seed, context, k)
        raise EngineError(f"unknown recommendation mode {mode!r}")

    def title_of(self, doc_id: str) -> str | None:
        loaded = self.corpus()
        if doc_id in loaded:
            return loaded.get(doc_id).title
        return None


def item_to_dict(item: queryeng.RecommendationItem, engine: Engine) -> dict:
    """Wire shape of one recommendation item (shared by CLI and HTTP)."""
    return {
        "id": item.doc_id,
        "title": engine.title_of(item.doc_id),
        "score": _round_score(item.score),
        "matched": [
            {"context": context, "sim": _round_score(sim)}
            for context, sim in item.matched
        ],
        "provenance": list(item.provenance),
    }


def items_to_list(items, engine: Engine) -> list[dict]:
    return [item_to_dict(item, engine) for item in items]


def _round_score(value: float) -> float:
    # trims float noise from mean/product arithmetic without losing rank info
    return float(round(value, 12)) if math.isfinite(value) else value
