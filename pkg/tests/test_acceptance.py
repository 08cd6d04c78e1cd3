"""Acceptance gate: one test per criterion, each at its stated tolerance.

A summary section with one PASS/FAIL line per criterion is printed at the
end of the pytest run (see conftest.pytest_terminal_summary).
"""

from __future__ import annotations

import contextlib
import io
import json
import math
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from ctxrec import corpus as corpus_mod
from ctxrec import ctxsim, linkrep, pairclass, queryeng, textrep
from ctxrec.service.api import create_app
from ctxrec.service.cli import run_cli
from ctxrec.service.engine import Engine, items_to_list
from conftest import MICRO_CONFIG, MICRO_JSONL
from oracles import answer_oracle, focused_oracle, top_k_full_sort
from synth import cpi_mutation_trial, random_context_graph, random_corpus
from test_pairclass import separable_pairs
from test_queryeng import random_query

MR = ctxsim.ContextSet.of("method", "resource")


def run_command(argv: list[str]) -> tuple[int, str]:
    out = io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(io.StringIO()):
        code = run_cli(argv)
    return code, out.getvalue()


# -- criterion 1: micro-fixture reproduction ---------------------------------


def test_c1_micro_fixture_reproduction():
    started = time.monotonic()
    corpus, _ = corpus_mod.ingest_jsonl(MICRO_JSONL)
    graph = ctxsim.from_annotations(corpus, MR)

    assert graph.sim("zhao2013", "cortes1995", "method") == 1.0
    assert graph.sim("zhao2013", "farber2019", "resource") == 1.0
    assert graph.sim("zhao2013", "cortes1995", "resource") == 0.0
    assert graph.sim("zhao2013", "farber2019", "method") == 0.0

    by_method = queryeng.answer(graph, queryeng.parse_query("seed=zhao2013 +method", MR))
    assert [item.doc_id for item in by_method] == ["cortes1995"]

    analogical = queryeng.answer(
        graph, queryeng.parse_query("seed=zhao2013 +resource -method", MR)
    )
    assert [item.doc_id for item in analogical] == ["farber2019"]

    diverse = queryeng.recommend_diverse(graph, "zhao2013", k=2)
    assert {item.matched[0][0] for item in diverse} == {"method", "resource"}
    assert {item.doc_id for item in diverse} == {"cortes1995", "farber2019"}

    assert time.monotonic() - started < 1.0


# -- criterion 2: link measures equal brute-force oracles --------------------


def raw_link_tables(corpus):
    """refs / citers / marker positions straight from the documents."""
    refs: dict[str, set[str]] = {}
    markers: dict[str, list[tuple[str, tuple[int, int, int]]]] = {}
    for doc in corpus:
        refs[doc.id] = {m.target for m in doc.citations if m.target != doc.id}
        markers[doc.id] = [
            (m.target, (m.section, m.paragraph, m.sentence)) for m in doc.citations
        ]
    citers: dict[str, set[str]] = {}
    for doc_id, targets in refs.items():
        for target in targets:
            citers.setdefault(target, set()).add(doc_id)
    return refs, citers, markers


def proximity(pa, pb) -> float:
    if pa == pb:
        return 1.0
    if pa[:2] == pb[:2]:
        return 0.5
    if pa[0] == pb[0]:
        return 0.25
    return 0.125


def test_c2_link_measures_match_oracles_on_100_corpora():
    started = time.monotonic()
    rng = np.random.default_rng(101)
    for _ in range(100):
        corpus = random_corpus(rng, int(rng.integers(2, 51)), max_citations=10)
        graph = linkrep.build_graph(corpus)
        refs, citers, markers = raw_link_tables(corpus)
        ids = corpus.ids()
        for i, a in enumerate(ids):
            for b in ids[i + 1 :]:
                # bibliographic coupling
                count = len(refs[a] & refs[b])
                if refs[a] and refs[b]:
                    expected_bc = (count, count / math.sqrt(len(refs[a]) * len(refs[b])))
                else:
                    expected_bc = (count, 0.0)
                assert linkrep.bibliographic_coupling(graph, a, b) == expected_bc
                assert linkrep.bibliographic_coupling(graph, b, a) == expected_bc

                # co-citation
                citers_a = citers.get(a, set()) - {a}
                citers_b = citers.get(b, set()) - {b}
                co = len(citers_a & citers_b)
                if citers_a and citers_b:
                    expected_cc = (co, co / math.sqrt(len(citers_a) * len(citers_b)))
                else:
                    expected_cc = (co, 0.0)
                assert linkrep.cocitation(graph, a, b) == expected_cc
                assert linkrep.cocitation(graph, b, a) == expected_cc

                # proximity index
                raw = 0.0
                co_citing = 0
                for z in citers_a & citers_b:
                    to_a = [p for t, p in markers[z] if t == a]
                    to_b = [p for t, p in markers[z] if t == b]
                    co_citing += 1
                    raw += max(proximity(pa, pb) for pa in to_a for pb in to_b)
                expected_cpi = (raw, raw / co_citing) if co_citing else (0.0, 0.0)
                assert linkrep.cpi(graph, a, b) == expected_cpi
                assert linkrep.cpi(graph, b, a) == expected_cpi

                for normalized in (expected_bc[1], expected_cc[1], expected_cpi[1]):
                    assert 0.0 <= normalized <= 1.0
    assert time.monotonic() - started < 30.0


# -- criterion 3: CPI proximity monotonicity ---------------------------------


def test_c3_cpi_monotone_under_1000_marker_mutations():
    rng = np.random.default_rng(103)
    pool = [
        random_corpus(rng, int(rng.integers(4, 9)), max_citations=6, structure=(3, 3, 3))
        for _ in range(40)
    ]
    performed = 0
    while performed < 1000:
        if cpi_mutation_trial(rng, pool):  # asserts raw CPI never decreases
            performed += 1


# -- criterion 4: TF-IDF and neighbor oracles --------------------------------


def test_c4_tfidf_hand_weights_and_topk_oracle():
    def doc_of(doc_id, text):
        return corpus_mod.Document(
            id=doc_id,
            title="",
            sections=[corpus_mod.Section(heading="", paragraphs=[[text]])],
        )

    hand = corpus_mod.Corpus(
        [doc_of("d1", "apple banana"), doc_of("d2", "apple"), doc_of("d3", "cherry")]
    )
    vocab, vectors = textrep.build_tfidf(hand)
    weights = dict(zip(vectors["d1"].indices, vectors["d1"].values))
    assert weights[vocab.term_id("apple")] == pytest.approx(math.log(3 / 2), abs=1e-9)
    assert abs(math.log(3 / 2) - 0.4055) < 1e-4
    assert weights[vocab.term_id("banana")] == pytest.approx(math.log(3), abs=1e-9)
    assert vocab.term_id("banana") not in vectors["d2"].indices

    rng = np.random.default_rng(104)
    for _ in range(5):
        corpus = random_corpus(rng, 50, max_citations=0)
        _, tfidf_vectors = textrep.build_tfidf(corpus)
        seed = corpus.ids()[int(rng.integers(0, 50))]
        expected = top_k_full_sort(tfidf_vectors, seed, 10, textrep.cosine)
        assert textrep.top_k_neighbors(seed, tfidf_vectors, k=10) == expected


# -- criterion 5: classifier correctness --------------------------------------


def test_c5_classifier_gradients_accuracy_determinism():
    started = time.monotonic()
    rng = np.random.default_rng(105)

    # analytic vs central finite differences
    step = 1e-5
    for _ in range(10):
        n_classes = int(rng.integers(2, 5))
        dim = int(rng.integers(3, 8))
        batch = int(rng.integers(2, 10))
        weights = rng.normal(size=(n_classes, dim))
        bias = rng.normal(size=n_classes)
        features = rng.normal(size=(batch, dim))
        labels = rng.integers(0, n_classes, size=batch)
        l2 = float(rng.choice([0.0, 1e-3]))
        _, grad_w, grad_b = pairclass.loss_and_grad(weights, bias, features, labels, l2)
        for param, analytic in ((weights, grad_w), (bias, grad_b)):
            flat = param.ravel()
            numeric = np.zeros_like(flat)
            for i in range(flat.size):
                original = flat[i]
                flat[i] = original + step
                up, _, _ = pairclass.loss_and_grad(weights, bias, features, labels, l2)
                flat[i] = original - step
                down, _, _ = pairclass.loss_and_grad(weights, bias, features, labels, l2)
                flat[i] = original
                numeric[i] = (up - down) / (2 * step)
            denom = np.maximum(1.0, np.maximum(np.abs(analytic.ravel()), np.abs(numeric)))
            assert (np.abs(analytic.ravel() - numeric) / denom).max() < 1e-4

    # separable synthetic set: two Gaussian clusters in feature space
    train_pairs, train_vectors = separable_pairs(rng, 200)
    model, _ = pairclass.train(train_pairs, train_vectors, pairclass.TrainConfig(seed=7))
    assert pairclass.evaluate(model, train_pairs, train_vectors).accuracy >= 0.95
    held_pairs, held_vectors = separable_pairs(rng, 100, start=5000)
    assert pairclass.evaluate(model, held_pairs, held_vectors).accuracy >= 0.90

    # softmax outputs are distributions
    for _ in range(100):
        probs = pairclass.predict(model, rng.normal(size=3), rng.normal(size=3))
        assert sum(probs.values()) == pytest.approx(1.0, abs=1e-9)
        assert all(0.0 <= p <= 1.0 for p in probs.values())

    # determinism under a fixed seed
    again, _ = pairclass.train(train_pairs, train_vectors, pairclass.TrainConfig(seed=7))
    assert np.array_equal(model.weights, again.weights)
    assert np.array_equal(model.bias, again.bias)

    assert time.monotonic() - started < 60.0


# -- criterion 6: graph embedding sanity ---------------------------------------


def test_c6_embedding_reproducible_separating_and_weight_following():
    config = linkrep.EmbeddingConfig(
        dims=16, walks_per_node=10, walk_length=20, window=4, negatives=5,
        epochs=2, learning_rate=0.05, seed=606,
    )

    graph = linkrep.WeightedGraph()
    left = [f"a{i}" for i in range(6)]
    right = [f"b{i}" for i in range(6)]
    for clique in (left, right):
        for i, u in enumerate(clique):
            for v in clique[i + 1 :]:
                graph.add_edge(u, v, 1.0)
    graph.add_edge("a0", "b0", 0.1)

    first = linkrep.train_graph_embedding(graph, config)
    second = linkrep.train_graph_embedding(graph, config)
    for node in first.vectors:
        assert np.array_equal(first.vectors[node], second.vectors[node])
        assert first.vectors[node].shape == (config.dims,)

    def mean_cosine(pairs):
        values = [textrep.cosine(first.vectors[u], first.vectors[v]) for u, v in pairs]
        return sum(values) / len(values)

    intra = [(u, v) for grp in (left, right) for i, u in enumerate(grp) for v in grp[i + 1 :]]
    inter = [(u, v) for u in left for v in right]
    assert mean_cosine(intra) > mean_cosine(inter)

    star = linkrep.WeightedGraph([("hub", "big", 0.9), ("hub", "small", 0.1)])
    walks = linkrep.generate_walks(star, 200, 150, np.random.default_rng(606))
    big = small = 0
    for walk in walks:
        for cur, nxt in zip(walk, walk[1:]):
            if cur == "hub":
                big, small = big + (nxt == "big"), small + (nxt == "small")
    assert big + small >= 10_000
    assert 8.1 <= big / small <= 9.9


# -- criterion 7: query engine soundness/completeness ---------------------------


def test_c7_query_engine_matches_exhaustive_oracles():
    started = time.monotonic()
    rng = np.random.default_rng(107)
    for _ in range(200):
        graph = random_context_graph(rng, int(rng.integers(2, 31)))
        query = random_query(rng, graph)
        items = queryeng.answer(graph, query)
        assert [(i.doc_id, i.score) for i in items] == pytest.approx(
            answer_oracle(graph, query)
        )

    for _ in range(60):
        graph = random_context_graph(rng, int(rng.integers(2, 16)))
        ids = sorted(graph.doc_ids)
        seed = ids[int(rng.integers(0, len(ids)))]
        context = str(rng.choice(list(graph.contexts)))
        k = int(rng.integers(1, 8))
        items = queryeng.recommend_focused(graph, seed, context, k)
        assert [(i.doc_id, i.score) for i in items] == pytest.approx(
            focused_oracle(graph, seed, context, k)
        )

    for _ in range(40):
        graph = random_context_graph(rng, int(rng.integers(3, 20)))
        query = random_query(rng, graph)
        if not query.require:
            query.require = [c for c in graph.contexts if c not in query.exclude][:1]
        query.k = len(graph.doc_ids) + 1
        low = {i.doc_id for i in queryeng.answer(graph, query)}
        query.tau_sim = min(1.0, query.tau_sim + float(rng.uniform(0.05, 0.3)))
        high = {i.doc_id for i in queryeng.answer(graph, query)}
        assert high <= low
    assert time.monotonic() - started < 30.0


# -- criterion 8: end-to-end pipeline --------------------------------------------


def test_c8_cli_http_and_persistence_agree(tmp_path):
    directory = str(tmp_path / "engine")
    assert run_command(["ingest", str(MICRO_JSONL), directory, "--config", str(MICRO_CONFIG)])[0] == 0
    assert run_command(["index", directory])[0] == 0
    assert run_command(["build-context", directory])[0] == 0
    code, out = run_command(["query", directory, "seed=zhao2013 +method", "--json"])
    assert code == 0
    cli_payload = json.loads(out)
    assert [item["id"] for item in cli_payload] == ["cortes1995"]

    # the same pipeline assembled from library calls
    corpus, _ = corpus_mod.ingest_jsonl(MICRO_JSONL)
    config = ctxsim.ContextConfig.load(MICRO_CONFIG)
    vocab, vectors = textrep.build_tfidf(corpus)
    citation_graph = linkrep.build_graph(corpus)
    candidates = ctxsim.default_candidate_pairs(
        corpus, citation_graph, vectors, config.candidate_neighbors
    )
    merged = ctxsim.merge(
        [
            ctxsim.from_annotations(corpus, config.contexts),
            ctxsim.from_segments(
                corpus, config.heading_map(), vocab, config.contexts,
                tau=config.segment_tau, pairs=candidates,
            ),
            ctxsim.from_citation_contexts(
                corpus, citation_graph, config.citation_keywords, config.contexts
            ),
        ]
    )
    engine = Engine(directory)
    in_process = items_to_list(
        queryeng.answer(merged, queryeng.parse_query("seed=zhao2013 +method", MR)),
        engine,
    )
    assert cli_payload == in_process

    # HTTP equals the library call for 50 random queries
    client = TestClient(create_app(engine))
    graph = engine.context_graph()
    contexts = list(engine.config().contexts)
    ids = sorted(engine.corpus().ids())
    rng = np.random.default_rng(108)
    for _ in range(50):
        require = [c for c in contexts if rng.random() < 0.5]
        exclude = [c for c in contexts if c not in require and rng.random() < 0.4]
        if not require and not exclude:
            require = [contexts[0]]
        body = {
            "seed": ids[int(rng.integers(0, len(ids)))],
            "require": require,
            "exclude": exclude,
            "k": int(rng.integers(1, 6)),
            "tau_sim": float(rng.uniform(0.1, 0.9)),
            "tau_dis": float(rng.uniform(0.05, 0.5)),
        }
        response = client.post("/query", json=body)
        assert response.status_code == 200
        expected = items_to_list(
            queryeng.answer(
                graph,
                queryeng.AnalogicalQuery(
                    seed=body["seed"], require=body["require"], exclude=body["exclude"],
                    k=body["k"], tau_sim=body["tau_sim"], tau_dis=body["tau_dis"],
                ),
            ),
            engine,
        )
        assert response.json()["items"] == expected

    # save/load round-trips are deep-equal
    corpus_mod.save(corpus, tmp_path / "roundtrip")
    assert corpus_mod.load(tmp_path / "roundtrip") == corpus
    random_c = random_corpus(np.random.default_rng(109), 20)
    corpus_mod.save(random_c, tmp_path / "roundtrip2")
    assert corpus_mod.load(tmp_path / "roundtrip2") == random_c
