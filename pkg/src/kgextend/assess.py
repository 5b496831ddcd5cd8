"""Categorization-quality metrics and query-driven graph ranking.

The cue family measures how sharply properties pin down entity types:
a property carried by a single type identifies it perfectly, one shared
by many types barely discriminates.  Focus scores combine the raw cue
mass with its ratio form after per-corpus normalization, so they are
only comparable within the corpus they were ranked against.

Query metrics (cmm, dem, tfidf, bm25) score graphs against a list of
search terms; lotus statistics break property overlap between up to
five sets into Venn cells.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import AbstractSet, Iterable, Sequence

from .errors import EmptyGraphError, EmptyPropertySetError, IoError, TooManySetsError
from .model import EntityTypeId, KnowledgeGraph, PropertyId
from .text import normalize_label


@dataclass(frozen=True, slots=True)
class CueRecord:
    """Per-type cue scores plus the corpus-normalized focus."""

    etype: EntityTypeId
    cue_e: float
    cue_er: float
    focus_e: float


@dataclass(frozen=True, slots=True)
class GraphScore:
    graph: str
    cue_k: float
    cue_kr: float
    focus_k: float
    balance: float


@dataclass(frozen=True, slots=True)
class Query:
    """Search terms, each already normalized to a token tuple."""

    terms: tuple[tuple[str, ...], ...]

    def __len__(self) -> int:
        return len(self.terms)


def parse_query(text: str, stopwords: frozenset[str] = frozenset()) -> Query:
    """Split a comma-separated query string into normalized terms."""
    terms = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if chunk:
            terms.append(tuple(normalize_label(chunk, stopwords)))
    return Query(tuple(terms))


# -- cue family ---------------------------------------------------------


def cue_p(g: KnowledgeGraph, pid: PropertyId, etype_id: EntityTypeId) -> float:
    """How strongly ``pid`` identifies ``etype_id``: 1/|holders|, or 0."""
    holders = g.types_with_property(pid)
    g.prop(etype_id)
    if etype_id not in holders:
        return 0.0
    return 1.0 / len(holders)


def cue_e(g: KnowledgeGraph, etype_id: EntityTypeId) -> float:
    """Summed cue validity over the type's cumulative properties."""
    return sum(cue_p(g, pid, etype_id) for pid in g.prop(etype_id))


def cue_er(g: KnowledgeGraph, etype_id: EntityTypeId) -> float:
    """Cue mass per property, in [0, 1]."""
    props = g.prop(etype_id)
    if not props:
        raise EmptyPropertySetError(f"type {etype_id!r} has no properties")
    return cue_e(g, etype_id) / len(props)


def _minmax(values: Sequence[float]) -> list[float]:
    # Constant or singleton input carries no spread; everything maps to 0.5.
    if not values:
        return []
    lo, hi = min(values), max(values)
    if len(values) < 2 or hi == lo:
        return [0.5] * len(values)
    return [(v - lo) / (hi - lo) for v in values]


def focus_e(
    corpus: Sequence[tuple[KnowledgeGraph, EntityTypeId]],
    eta: float = 1.0,
) -> list[CueRecord]:
    """Rank entity types by log-damped cue mass plus weighted cue ratio.

    Both addends are min-max normalized over the corpus being ranked, so
    scores from different corpora are not comparable.  The result is
    sorted best first; ties fall back to the type id.
    """
    cues = [cue_e(g, e) for g, e in corpus]
    ratios = [cue_er(g, e) for g, e in corpus]
    damped = _minmax([math.log1p(c) for c in cues])
    scaled = _minmax(ratios)
    records = [
        CueRecord(e, cues[i], ratios[i], damped[i] + eta * scaled[i])
        for i, (_, e) in enumerate(corpus)
    ]
    records.sort(key=lambda r: (-r.focus_e, r.etype))
    return records


def _typed_property_total(g: KnowledgeGraph) -> int:
    total = sum(len(g.prop(e)) for e in g.etypes)
    if total == 0:
        raise EmptyGraphError(f"graph {g.name!r} has no entity type with properties")
    return total


def cue_k(g: KnowledgeGraph) -> float:
    """Summed cue mass over every entity type in the graph."""
    _typed_property_total(g)
    return sum(cue_e(g, e) for e in g.etypes)


def cue_kr(g: KnowledgeGraph) -> float:
    """Graph cue mass per property slot, in [0, 1]."""
    return cue_k(g) / _typed_property_total(g)


def balance(g: KnowledgeGraph) -> float:
    """How evenly properties spread over types, in (0, 1]."""
    if not g.etypes:
        raise EmptyGraphError(f"graph {g.name!r} has no entity types")
    sizes = [len(g.prop(e)) for e in g.etypes]
    widest = max(sizes)
    if widest == 0:
        raise EmptyGraphError(f"graph {g.name!r} has no entity type with properties")
    union: set[PropertyId] = set()
    for e in g.etypes:
        union |= g.prop(e)
    return len(union) / (widest * len(g.etypes))


def graph_scores(corpus: Sequence[KnowledgeGraph], mu: float = 1.0) -> list[GraphScore]:
    """Rank whole graphs the way ``focus_e`` ranks types."""
    cues = [cue_k(g) for g in corpus]
    ratios = [cue_kr(g) for g in corpus]
    damped = _minmax([math.log1p(c) for c in cues])
    scaled = _minmax(ratios)
    scores = [
        GraphScore(g.name, cues[i], ratios[i], damped[i] + mu * scaled[i], balance(g))
        for i, g in enumerate(corpus)
    ]
    scores.sort(key=lambda s: (-s.focus_k, s.graph))
    return scores


# -- query metrics ------------------------------------------------------


def _etype_labels(g: KnowledgeGraph) -> list[tuple[str, ...]]:
    return [g.etype_tokens(t) for t in g.etypes]


def _matches(term: tuple[str, ...], label: tuple[str, ...]) -> str | None:
    if term == label:
        return "exact"
    if set(term) <= set(label):
        return "partial"
    return None


def cmm(g: KnowledgeGraph, query: Query, alpha: float = 0.6, beta: float = 0.4) -> float:
    """Coverage of query terms by type labels, exact matches weighted higher.

    A term matches exactly when its tokens equal a normalized type label,
    partially when they are a subset of one.  The score is averaged over
    the query so it stays in [0, max(alpha, beta)].
    """
    if not query.terms:
        return 0.0
    labels = _etype_labels(g)
    exact = partial = 0
    for term in query.terms:
        kinds = {_matches(term, label) for label in labels}
        if "exact" in kinds:
            exact += 1
        elif "partial" in kinds:
            partial += 1
    return (alpha * exact + beta * partial) / len(query.terms)


def dem(g: KnowledgeGraph, query: Query, w: float = 1.0) -> float:
    """Mean neighborhood size of the types a query matches.

    A matched type contributes its property count plus its direct
    superclass, direct subclass, and sibling counts; no match scores 0.
    """
    matched = [
        t
        for t in g.etypes
        if any(_matches(term, g.etype_tokens(t)) for term in query.terms)
    ]
    if not matched:
        return 0.0
    total = 0.0
    for t in matched:
        aspects = (
            len(g.prop(t)),
            len(g.etypes[t].superclasses),
            len(g.subclasses(t)),
            len(g.siblings(t)),
        )
        total += w * sum(aspects)
    return total / len(matched)


def _label_bag(g: KnowledgeGraph) -> list[tuple[str, ...]]:
    """Every normalized label in the graph: types, properties, entities."""
    bag = [g.etype_tokens(t) for t in g.etypes]
    bag.extend(g.properties[p].tokens for p in g.properties)
    bag.extend(g.entity_tokens(i) for i in g.entities)
    return bag


def _term_frequency(term: tuple[str, ...], bag: Iterable[tuple[str, ...]]) -> int:
    width = len(term)
    count = 0
    for tokens in bag:
        for i in range(len(tokens) - width + 1):
            if tokens[i : i + width] == term:
                count += 1
    return count


def tfidf(corpus: Sequence[KnowledgeGraph], query: Query) -> list[float]:
    """Per-graph tf-idf relevance; terms absent everywhere contribute 0."""
    bags = [_label_bag(g) for g in corpus]
    n = len(corpus)
    scores = [0.0] * n
    for term in query.terms:
        tfs = [_term_frequency(term, bag) for bag in bags]
        df = sum(1 for tf in tfs if tf > 0)
        if df == 0:
            continue
        idf = math.log(n / df)
        for i, tf in enumerate(tfs):
            scores[i] += tf * idf
    return scores


def bm25(
    corpus: Sequence[KnowledgeGraph],
    query: Query,
    m: float = 1.2,
    b: float = 0.75,
) -> list[float]:
    """Per-graph bm25 relevance with saturation ``m`` and length weight ``b``."""
    bags = [_label_bag(g) for g in corpus]
    lengths = [sum(len(tokens) for tokens in bag) for bag in bags]
    avg = sum(lengths) / len(lengths) if lengths else 0.0
    n = len(corpus)
    scores = [0.0] * n
    if avg == 0.0:
        return scores
    for term in query.terms:
        tfs = [_term_frequency(term, bag) for bag in bags]
        df = sum(1 for tf in tfs if tf > 0)
        if df == 0:
            continue
        idf = math.log(n / df)
        for i, tf in enumerate(tfs):
            denom = tf + m * (1.0 - b + b * lengths[i] / avg)
            scores[i] += idf * tf * (m + 1.0) / denom
    return scores


# -- lotus statistics ---------------------------------------------------


def graph_property_set(g: KnowledgeGraph) -> tuple[str, frozenset[PropertyId]]:
    """The graph's name with the union of its types' property sets."""
    union: set[PropertyId] = set()
    for e in g.etypes:
        union |= g.prop(e)
    return g.name, frozenset(union)


def etype_property_set(
    g: KnowledgeGraph, etype_id: EntityTypeId
) -> tuple[str, frozenset[PropertyId]]:
    return etype_id, g.prop(etype_id)


def lotus_stats(
    named_sets: Sequence[tuple[str, AbstractSet[str]]],
) -> dict[tuple[str, ...], int]:
    """Venn cell counts: members shared by exactly each subset of inputs.

    Keys are name tuples in input order, smallest subsets first; every
    non-empty subset gets a cell, zero counts included.  The cell values
    sum to the size of the union.
    """
    if len(named_sets) < 2:
        raise ValueError("lotus statistics need at least 2 sets")
    if len(named_sets) > 5:
        raise TooManySetsError(f"lotus statistics cap at 5 sets, got {len(named_sets)}")
    names = [name for name, _ in named_sets]
    if len(set(names)) != len(names):
        raise ValueError("set names must be unique")
    membership: dict[str, set[str]] = {}
    for name, members in named_sets:
        for member in members:
            membership.setdefault(member, set()).add(name)
    cells = {
        combo: 0
        for size in range(1, len(names) + 1)
        for combo in itertools.combinations(names, size)
    }
    for owners in membership.values():
        key = tuple(name for name in names if name in owners)
        cells[key] += 1
    return cells


# -- report -------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class GraphAssessment:
    """One graph's ranking scores plus its query relevance."""

    score: GraphScore
    cmm: float
    dem: float
    tfidf: float
    bm25: float


@dataclass(frozen=True, slots=True)
class AssessmentReport:
    graphs: tuple[GraphAssessment, ...]
    etypes: tuple[tuple[str, CueRecord], ...]


def build_report(
    corpus: Sequence[KnowledgeGraph],
    query: Query | None = None,
    *,
    eta: float = 1.0,
    mu: float = 1.0,
    alpha: float = 0.6,
    beta: float = 0.4,
) -> AssessmentReport:
    """Assess a corpus: per-graph scores plus per-type cue rankings.

    Type rankings are computed within each graph.  Query columns are 0
    when no query is given; types without properties are left out of the
    cue rankings since they carry no categorization signal.
    """
    q = query if query is not None else Query(())
    scores = graph_scores(corpus, mu)
    by_name = {g.name: g for g in corpus}
    tfidf_by_name = dict(zip((g.name for g in corpus), tfidf(corpus, q)))
    bm25_by_name = dict(zip((g.name for g in corpus), bm25(corpus, q)))
    graphs = tuple(
        GraphAssessment(
            score=score,
            cmm=cmm(by_name[score.graph], q, alpha, beta),
            dem=dem(by_name[score.graph], q),
            tfidf=tfidf_by_name[score.graph],
            bm25=bm25_by_name[score.graph],
        )
        for score in scores
    )
    etype_rows: list[tuple[str, CueRecord]] = []
    for score in scores:
        g = by_name[score.graph]
        pairs = [(g, e) for e in g.etypes if g.prop(e)]
        for record in focus_e(pairs, eta):
            etype_rows.append((g.name, record))
    return AssessmentReport(graphs, tuple(etype_rows))


_READINGS = (
    "dem sums aspect sizes (properties, direct supers, direct subs, siblings)"
    " over matched types; cmm is normalized by query term count"
)

_REPORT_COLUMNS = (
    "kind,graph,etype,cue_e,cue_er,focus_e,cue_k,cue_kr,focus_k,balance,"
    "cmm,dem,tfidf,bm25"
)


def dump_report_csv(report: AssessmentReport) -> str:
    lines = [f"# assessment readings: {_READINGS}", _REPORT_COLUMNS]
    for ga in report.graphs:
        s = ga.score
        lines.append(
            f"graph,{s.graph},,,,,{s.cue_k!r},{s.cue_kr!r},{s.focus_k!r},"
            f"{s.balance!r},{ga.cmm!r},{ga.dem!r},{ga.tfidf!r},{ga.bm25!r}"
        )
    for graph_name, rec in report.etypes:
        lines.append(
            f"etype,{graph_name},{rec.etype},{rec.cue_e!r},{rec.cue_er!r},"
            f"{rec.focus_e!r},,,,,,,,"
        )
    return "\n".join(lines) + "\n"


def dump_report_json(report: AssessmentReport) -> str:
    obj = {
        "readings": _READINGS,
        "graphs": [
            {
                "graph": ga.score.graph,
                "cue_k": ga.score.cue_k,
                "cue_kr": ga.score.cue_kr,
                "focus_k": ga.score.focus_k,
                "balance": ga.score.balance,
                "cmm": ga.cmm,
                "dem": ga.dem,
                "tfidf": ga.tfidf,
                "bm25": ga.bm25,
            }
            for ga in report.graphs
        ],
        "etypes": [
            {
                "graph": graph_name,
                "etype": rec.etype,
                "cue_e": rec.cue_e,
                "cue_er": rec.cue_er,
                "focus_e": rec.focus_e,
            }
            for graph_name, rec in report.etypes
        ],
    }
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def save_report_csv(report: AssessmentReport, path: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(dump_report_csv(report))
    except OSError as exc:
        raise IoError(f"cannot write {path!r}: {exc}") from exc


def save_report_json(report: AssessmentReport, path: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(dump_report_json(report))
    except OSError as exc:
        raise IoError(f"cannot write {path!r}: {exc}") from exc
