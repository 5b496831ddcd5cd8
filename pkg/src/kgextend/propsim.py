"""Property-overlap similarity between concepts of two graphs.

Three per-property specificity weights drive the scores:

* horizontal (``hs``): rarer properties weigh more, ``e**(lam*(1-|K_v|))``
  where ``K_v`` is the set of entity types holding the property;
* vertical (``vs``): properties introduced deeper in the hierarchy weigh
  more, ``theta * min layer over K_v``;
* informational (``is_``): the entropy gain of splitting the type set by
  the property, in the decision-tree sense.

A pair's similarity averages the weights of its aligned shared
properties from both sides, scaled by each side's property count.  Raw
scores are normalized per batch before they feed the classifiers.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .alignments import Alignment
from .errors import IoError, NonFiniteError, ParseError
from .fca import OWNED, ConceptRef, FormalContext
from .model import KnowledgeGraph, PropertyId

KINDS = ("H", "V", "I")


def hs(g: KnowledgeGraph, p: PropertyId, lam: float = 0.5) -> float:
    """Horizontal specificity magnitude of a property.

    A property held by a single entity type scores 1; each additional
    holder decays the score by ``e**-lam``.  A property no type holds is
    treated as unique (score 1).
    """
    holders = len(g.types_with_property(p))
    if holders < 1:
        holders = 1
    return math.exp(lam * (1 - holders))


def vs(g: KnowledgeGraph, p: PropertyId, theta: float | None = None) -> float:
    """Vertical specificity magnitude: theta times the shallowest layer
    holding the property.

    ``theta`` defaults to ``1/max_depth`` so the result stays in (0, 1].
    A property no type holds counts as introduced at the deepest layer.
    """
    depth = g.max_depth
    if depth < 1:
        depth = 1
    if theta is None:
        theta = 1.0 / depth
    holders = g.types_with_property(p)
    min_layer = min((g.etypes[t].layer for t in holders), default=depth)
    return theta * min_layer


def _block_entropy(weights: Sequence[float]) -> float:
    """H of a block: (-sum F*ln(F/|S|)) / |S|, zero-count terms skipped."""
    size = len(weights)
    if size == 0:
        return 0.0
    total = 0.0
    for f in weights:
        if f > 0:
            total += f * math.log(f / size)
    return -total / size


def _type_weights(g: KnowledgeGraph, type_ids: Iterable[str], counts: str) -> list[float]:
    if counts == "schema":
        return [1.0 for _ in type_ids]
    if counts == "instance":
        return [float(g.entity_count(t)) for t in type_ids]
    raise ValueError(f"counts must be schema or instance, not {counts!r}")


def entropy(g: KnowledgeGraph, counts: str = "schema") -> float:
    """Entropy of the whole entity type set.

    Schema mode weights every type equally (collapsing to ``ln |K|``);
    instance mode weights each type by its direct entity count.
    """
    return _block_entropy(_type_weights(g, sorted(g.etypes), counts))


def is_(g: KnowledgeGraph, p: PropertyId, counts: str = "schema") -> float:
    """Information gain of partitioning the type set by property ``p``.

    Zero when the property covers none or all of the types.
    """
    all_types = sorted(g.etypes)
    n = len(all_types)
    if n == 0:
        return 0.0
    holders = g.types_with_property(p)
    k_v = [t for t in all_types if t in holders]
    k_rest = [t for t in all_types if t not in holders]
    total = _block_entropy(_type_weights(g, all_types, counts))
    split = 0.0
    if k_v:
        split += (len(k_v) / n) * _block_entropy(_type_weights(g, k_v, counts))
    if k_rest:
        split += (len(k_rest) / n) * _block_entropy(_type_weights(g, k_rest, counts))
    return total - split


@dataclass(frozen=True, slots=True)
class SpecificityTable:
    """Per-property specificity magnitudes for one graph.

    Stores the positive-association magnitude; the three-valued context
    supplies the sign at use sites (a 0 or -1 cell contributes nothing).
    """

    graph: str
    counts: str
    lam: float
    theta: float
    max_depth: int
    graph_entropy: float
    hs: dict[PropertyId, float]
    vs: dict[PropertyId, float]
    is_: dict[PropertyId, float]

    def by_kind(self, kind: str) -> dict[PropertyId, float]:
        if kind == "H":
            return self.hs
        if kind == "V":
            return self.vs
        if kind == "I":
            return self.is_
        raise ValueError(f"kind must be one of {KINDS}, not {kind!r}")


def build_specificity(
    g: KnowledgeGraph,
    counts: str = "schema",
    lam: float = 0.5,
    theta: float | None = None,
) -> SpecificityTable:
    depth = max(g.max_depth, 1)
    resolved_theta = 1.0 / depth if theta is None else theta
    table_hs: dict[PropertyId, float] = {}
    table_vs: dict[PropertyId, float] = {}
    table_is: dict[PropertyId, float] = {}
    for pid in sorted(g.properties):
        table_hs[pid] = hs(g, pid, lam)
        table_vs[pid] = vs(g, pid, resolved_theta)
        table_is[pid] = is_(g, pid, counts)
    return SpecificityTable(
        g.name,
        counts,
        lam,
        resolved_theta,
        depth,
        entropy(g, counts),
        table_hs,
        table_vs,
        table_is,
    )


@dataclass(frozen=True, slots=True)
class RawSimTriple:
    left: ConceptRef
    right: ConceptRef
    sim_h: float
    sim_v: float
    sim_i: float


@dataclass(frozen=True, slots=True)
class NormalizedSimTriple:
    left: ConceptRef
    right: ConceptRef
    sim_h: float
    sim_v: float
    sim_i: float


def _pair_score(
    fa: FormalContext,
    fb: FormalContext,
    weights_a: dict[PropertyId, float],
    weights_b: dict[PropertyId, float],
    pm: Sequence[Alignment],
    left: ConceptRef,
    right: ConceptRef,
) -> float:
    owned_a = set(fa.owned_properties(left))
    owned_b = set(fb.owned_properties(right))
    if not owned_a or not owned_b:
        return 0.0
    total = 0.0
    for pair in pm:
        if pair.left in owned_a and pair.right in owned_b:
            total += weights_a[pair.left] / len(owned_a) + weights_b[pair.right] / len(owned_b)
    return 0.5 * total


def sim_raw(
    fa: FormalContext,
    fb: FormalContext,
    pm: Sequence[Alignment],
    pairs: Sequence[tuple[ConceptRef, ConceptRef]],
    kind: str,
    table_a: SpecificityTable,
    table_b: SpecificityTable,
) -> list[float]:
    """One similarity component (kind H, V, or I) for each concept pair.

    A property counts only while both sides hold it (+1 cells) and the
    pair appears in the property alignment ``pm``.
    """
    weights_a = table_a.by_kind(kind)
    weights_b = table_b.by_kind(kind)
    return [
        _pair_score(fa, fb, weights_a, weights_b, pm, left, right) for left, right in pairs
    ]


def sim_table(
    fa: FormalContext,
    fb: FormalContext,
    pm: Sequence[Alignment],
    pairs: Sequence[tuple[ConceptRef, ConceptRef]],
    table_a: SpecificityTable,
    table_b: SpecificityTable,
    threads: int = 1,
) -> list[RawSimTriple]:
    """All three components per pair; parallel over pair chunks."""

    def score_chunk(chunk: Sequence[tuple[ConceptRef, ConceptRef]]) -> list[RawSimTriple]:
        out = []
        for left, right in chunk:
            out.append(
                RawSimTriple(
                    left,
                    right,
                    _pair_score(fa, fb, table_a.hs, table_b.hs, pm, left, right),
                    _pair_score(fa, fb, table_a.vs, table_b.vs, pm, left, right),
                    _pair_score(fa, fb, table_a.is_, table_b.is_, pm, left, right),
                )
            )
        return out

    pairs = list(pairs)
    if threads <= 1 or len(pairs) < 2:
        return score_chunk(pairs)
    size = (len(pairs) + threads - 1) // threads
    chunks = [pairs[i : i + size] for i in range(0, len(pairs), size)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(score_chunk, chunks))
    return [triple for part in parts for triple in part]


def _minmax_after_zscore(values: np.ndarray) -> np.ndarray:
    std = values.std()
    if values.size < 2 or std == 0.0:
        return np.full(values.shape, 0.5)
    z = (values - values.mean()) / std
    lo, hi = z.min(), z.max()
    return (z - lo) / (hi - lo)


def normalize_batch(raw: Sequence[RawSimTriple]) -> list[NormalizedSimTriple]:
    """Z-score then min-max each metric over the batch.

    Values from a constant or singleton batch map to 0.5.  The order and
    the pair keys are preserved.
    """
    if not raw:
        return []
    matrix = np.array([[t.sim_h, t.sim_v, t.sim_i] for t in raw], dtype=np.float64)
    if not np.isfinite(matrix).all():
        raise NonFiniteError("similarity batch contains non-finite values")
    cols = [_minmax_after_zscore(matrix[:, j]) for j in range(3)]
    return [
        NormalizedSimTriple(t.left, t.right, float(cols[0][i]), float(cols[1][i]), float(cols[2][i]))
        for i, t in enumerate(raw)
    ]


# ---------------------------------------------------------------------------
# CSV export of similarity tables


def dump_sim_csv(triples: Sequence[RawSimTriple] | Sequence[NormalizedSimTriple], variant: str) -> str:
    """``left_id,right_id,sim_h,sim_v,sim_i`` rows, variant-flagged."""
    if variant not in ("raw", "normalized"):
        raise ValueError("variant must be raw or normalized")
    buf = io.StringIO()
    buf.write(f"# simtable: {variant}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["left_id", "right_id", "sim_h", "sim_v", "sim_i"])
    for t in triples:
        writer.writerow([t.left.id, t.right.id, repr(t.sim_h), repr(t.sim_v), repr(t.sim_i)])
    return buf.getvalue()


def save_sim_csv(
    triples: Sequence[RawSimTriple] | Sequence[NormalizedSimTriple], variant: str, path: str
) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(dump_sim_csv(triples, variant))
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def load_sim_csv(path: str, left_kind: str = "etype", right_kind: str = "etype") -> tuple[str, list[RawSimTriple]]:
    """Read a similarity CSV back; returns (variant, triples)."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if not lines or not lines[0].startswith("# simtable:"):
        raise ParseError(1, 1, "missing simtable variant line")
    variant = lines[0].split(":", 1)[1].strip()
    reader = csv.reader(io.StringIO("\n".join(lines[1:])))
    header = next(reader, None)
    if header != ["left_id", "right_id", "sim_h", "sim_v", "sim_i"]:
        raise ParseError(2, 1, "bad simtable header")
    triples = []
    for lineno, rec in enumerate(reader, start=3):
        if not rec:
            continue
        if len(rec) != 5:
            raise ParseError(lineno, 1, f"expected 5 fields, got {len(rec)}")
        try:
            h, v, i = float(rec[2]), float(rec[3]), float(rec[4])
        except ValueError:
            raise ParseError(lineno, 1, "non-numeric similarity value") from None
        triples.append(
            RawSimTriple(ConceptRef(left_kind, rec[0]), ConceptRef(right_kind, rec[1]), h, v, i)
        )
    return variant, triples
