"""Analogical queries and recommendation strategies over the context graph.

Three read-only strategies:

* answer()            -- "similar in these contexts AND dissimilar in those"
* recommend_diverse() -- one round-robin pick per context, so the first
                         few items cover different facets of the seed
* recommend_focused() -- one context only, following edges up to two hops

All results are deterministic: scores sort descending with ties broken by
ascending document id.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .corpus import DocumentNotFound
from .ctxsim import ContextGraph, ContextSet

DEFAULT_K = 10
DEFAULT_TAU_SIM = 0.5
DEFAULT_TAU_DIS = 0.2


class QueryParseError(ValueError):
    """Raised when a query string does not follow the query grammar."""


@dataclass
class AnalogicalQuery:
    """Seed document plus required-similar and required-dissimilar contexts.

    A candidate qualifies when sim >= tau_sim for every required context
    and sim < tau_dis for every excluded context.
    """

    seed: str
    require: list[str] = field(default_factory=list)
    exclude: list[str] = field(default_factory=list)
    k: int = DEFAULT_K
    tau_sim: float = DEFAULT_TAU_SIM
    tau_dis: float = DEFAULT_TAU_DIS

    def validate(self, contexts: ContextSet) -> None:
        if not self.seed:
            raise QueryParseError("missing seed document")
        for label in self.require + self.exclude:
            contexts.check(label)
        overlap = set(self.require) & set(self.exclude)
        if overlap:
            raise QueryParseError(
                f"contexts cannot be both required and excluded: {sorted(overlap)}"
            )
        if not self.require and not self.exclude:
            raise QueryParseError("query needs at least one +context or -context")
        if self.k < 1:
            raise QueryParseError(f"k must be >= 1, got {self.k}")


@dataclass
class RecommendationItem:
    """One ranked result: the document, its score, the (context, sim)
    pairs that satisfied the query, and the provenance of those edges."""

    doc_id: str
    score: float
    matched: list[tuple[str, float]]
    provenance: tuple[str, ...] = ()


def parse_query(text: str, contexts: ContextSet) -> AnalogicalQuery:
    """Parse the query surface syntax.

    Grammar: `seed=<id> (+<ctx>|-<ctx>)+ [k=<int>] [tau_sim=<f>] [tau_dis=<f>]`,
    whitespace-separated; everything after the seed is order-free.
    """
    tokens = text.split()
    if not tokens or not tokens[0].startswith("seed="):
        raise QueryParseError("query must start with seed=<id>")
    seed = tokens[0][len("seed=") :]
    query = AnalogicalQuery(seed=seed, require=[], exclude=[])
    for token in tokens[1:]:
        if token.startswith("+"):
            label = contexts.check(token[1:])
            if label not in query.require:
                query.require.append(label)
        elif token.startswith("-"):
            label = contexts.check(token[1:])
            if label not in query.exclude:
                query.exclude.append(label)
        elif token.startswith("k="):
            try:
                query.k = int(token[2:])
            except ValueError:
                raise QueryParseError(f"bad k value: {token!r}") from None
        elif token.startswith("tau_sim="):
            try:
                query.tau_sim = float(token[len("tau_sim=") :])
            except ValueError:
                raise QueryParseError(f"bad tau_sim value: {token!r}") from None
        elif token.startswith("tau_dis="):
            try:
                query.tau_dis = float(token[len("tau_dis=") :])
            except ValueError:
                raise QueryParseError(f"bad tau_dis value: {token!r}") from None
        else:
            raise QueryParseError(f"unrecognized query token: {token!r}")
    query.validate(contexts)
    return query


def _check_seed(graph: ContextGraph, seed: str) -> None:
    if seed not in graph.doc_ids:
        raise DocumentNotFound(f"unknown seed document {seed!r}")


def answer(graph: ContextGraph, query: AnalogicalQuery) -> list[RecommendationItem]:
    """Rank every document that satisfies the query's context thresholds.

    Score is the mean similarity over required contexts, or, for
    exclude-only queries, 1 - max similarity over excluded contexts.
    An absent edge (sim 0) always passes exclusion.
    """
    query.validate(graph.contexts)
    _check_seed(graph, query.seed)
    items = []
    for doc_id in graph.doc_ids:
        if doc_id == query.seed:
            continue
        matched = [(c, graph.sim(query.seed, doc_id, c)) for c in query.require]
        if any(sim < query.tau_sim for _, sim in matched):
            continue
        excluded = [graph.sim(query.seed, doc_id, c) for c in query.exclude]
        if any(sim >= query.tau_dis for sim in excluded):
            continue
        if matched:
            score = sum(sim for _, sim in matched) / len(matched)
        else:
            score = 1.0 - max(excluded)
        provs: set[str] = set()
        for context, _ in matched:
            provs |= set(graph.provenance(query.seed, doc_id, context))
        items.append(
            RecommendationItem(
                doc_id=doc_id,
                score=score,
                matched=matched,
                provenance=tuple(sorted(provs)),
            )
        )
    items.sort(key=lambda item: (-item.score, item.doc_id))
    return items[: query.k]


def recommend_diverse(
    graph: ContextGraph, seed: str, k: int = DEFAULT_K
) -> list[RecommendationItem]:
    """Cover different contexts: pick round-robin over contexts, each turn
    taking the context's best not-yet-returned neighbor, contexts ordered
    within a round by their best remaining candidate score (ties by
    label). Each document appears once; its first context wins."""
    _check_seed(graph, seed)
    if k < 1:
        raise ValueError("k must be >= 1")
    remaining: dict[str, list[tuple[str, float]]] = {}
    for context in graph.contexts:
        ranked = sorted(
            graph.neighbors(seed, context).items(), key=lambda it: (-it[1], it[0])
        )
        if ranked:
            remaining[context] = ranked

    items: list[RecommendationItem] = []
    taken: set[str] = set()
    served_this_round: set[str] = set()
    while len(items) < k:
        candidates = []
        for context, ranked in remaining.items():
            if context in served_this_round:
                continue
            while ranked and ranked[0][0] in taken:
                ranked.pop(0)
            if ranked:
                doc_id, score = ranked[0]
                candidates.append((-score, context, doc_id))
        if not candidates:
            if not served_this_round:
                break  # everything exhausted
            served_this_round = set()
            continue
        neg_score, context, doc_id = min(candidates)
        remaining[context].pop(0)
        served_this_round.add(context)
        taken.add(doc_id)
        score = -neg_score
        items.append(
            RecommendationItem(
                doc_id=doc_id,
                score=score,
                matched=[(context, score)],
                provenance=graph.provenance(seed, doc_id, context),
            )
        )
    return items


def recommend_focused(
    graph: ContextGraph, seed: str, context: str, k: int = DEFAULT_K
) -> list[RecommendationItem]:
    """Follow one context only, up to two hops.

    Direct neighbors score sim(seed, d); two-hop documents score
    sim(seed, m) * sim(m, d) maximized over intermediates m (same context
    on both hops). A document reachable both ways takes its best score.
    """
    _check_seed(graph, seed)
    graph.contexts.check(context)
    if k < 1:
        raise ValueError("k must be >= 1")

    best: dict[str, tuple[float, tuple[str, ...]]] = {}
    direct = graph.neighbors(seed, context)
    for doc_id, score in direct.items():
        best[doc_id] = (score, graph.provenance(seed, doc_id, context))
    for mid in sorted(direct):
        hop1 = direct[mid]
        for doc_id, hop2 in graph.neighbors(mid, context).items():
            if doc_id == seed or doc_id == mid:
                continue
            score = hop1 * hop2
            if doc_id not in best or score > best[doc_id][0]:
                provs = set(graph.provenance(seed, mid, context))
                provs |= set(graph.provenance(mid, doc_id, context))
                best[doc_id] = (score, tuple(sorted(provs)))

    items = [
        RecommendationItem(
            doc_id=doc_id,
            score=score,
            matched=[(context, score)],
            provenance=provs,
        )
        for doc_id, (score, provs) in best.items()
    ]
    items.sort(key=lambda item: (-item.score, item.doc_id))
    return items[:k]
