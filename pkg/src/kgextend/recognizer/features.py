"""Feature assembly for the pair classifiers.

Schema pairs get the full lexical + property-similarity layout; instance
pairs only carry the three property-similarity slots, since an entity
label rarely resembles its type's.  Semantic metrics that cannot be
computed are imputed as 0 with a companion missingness flag.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..errors import DegenerateDataError, IoError, MissingSimError, ParseError
from ..fca import ConceptRef
from ..lexsim import (
    SemanticStores,
    embedding_cos_tokens,
    lcs_sim,
    levenshtein_sim,
    needleman_wunsch_sim,
    ngram_dice,
    substring_sim,
    wu_palmer_tokens,
)
from ..model import KnowledgeGraph
from ..propsim import NormalizedSimTriple

SCHEMA_FEATURES = (
    "ngram",
    "lcs",
    "levenshtein",
    "substring",
    "needleman_wunsch",
    "wu_palmer",
    "embedding_cos",
    "sim_h",
    "sim_v",
    "sim_i",
    "wu_palmer_missing",
    "embedding_missing",
)
INSTANCE_FEATURES = ("sim_h", "sim_v", "sim_i")

SCHEMA = "schema"
INSTANCE = "instance"


def feature_names(kind: str) -> tuple[str, ...]:
    if kind == SCHEMA:
        return SCHEMA_FEATURES
    if kind == INSTANCE:
        return INSTANCE_FEATURES
    raise ValueError(f"unknown feature kind {kind!r}")


PairKey = tuple[ConceptRef, ConceptRef]


def sim_lookup(triples: Sequence[NormalizedSimTriple]) -> dict[PairKey, NormalizedSimTriple]:
    return {(t.left, t.right): t for t in triples}


@dataclass(frozen=True, slots=True)
class FeatureContext:
    """Everything featurize needs for one graph pair."""

    graph_a: KnowledgeGraph
    graph_b: KnowledgeGraph
    sims: Mapping[PairKey, NormalizedSimTriple]
    stores: SemanticStores = field(default_factory=SemanticStores)


@dataclass(frozen=True, slots=True)
class LabeledPair:
    left: ConceptRef
    right: ConceptRef
    features: np.ndarray
    label: int | None = None


def featurize(pair: PairKey, ctx: FeatureContext, kind: str) -> np.ndarray:
    """Build the feature vector for one candidate pair.

    Raises MissingSimError when the pair has no similarity entry; the
    similarity batch must cover every pair that reaches this point.
    """
    left, right = pair
    triple = ctx.sims.get(pair)
    if triple is None:
        raise MissingSimError(f"no similarity entry for ({left.id}, {right.id})")
    if kind == INSTANCE:
        return np.array([triple.sim_h, triple.sim_v, triple.sim_i], dtype=np.float64)
    if kind != SCHEMA:
        raise ValueError(f"unknown feature kind {kind!r}")

    tokens_a = ctx.graph_a.concept_tokens(left.kind, left.id)
    tokens_b = ctx.graph_b.concept_tokens(right.kind, right.id)
    joined_a = " ".join(tokens_a)
    joined_b = " ".join(tokens_b)

    wp: float | None = None
    if ctx.stores.taxonomy is not None:
        wp = wu_palmer_tokens(tokens_a, tokens_b, ctx.stores.taxonomy)
    cos: float | None = None
    if ctx.stores.embeddings is not None:
        cos = embedding_cos_tokens(tokens_a, tokens_b, ctx.stores.embeddings)

    return np.array(
        [
            ngram_dice(joined_a, joined_b),
            lcs_sim(joined_a, joined_b),
            levenshtein_sim(joined_a, joined_b),
            substring_sim(joined_a, joined_b),
            needleman_wunsch_sim(joined_a, joined_b),
            0.0 if wp is None else wp,
            0.0 if cos is None else cos,
            triple.sim_h,
            triple.sim_v,
            triple.sim_i,
            1.0 if wp is None else 0.0,
            1.0 if cos is None else 0.0,
        ],
        dtype=np.float64,
    )


def featurize_pairs(
    pairs: Sequence[PairKey],
    ctx: FeatureContext,
    kind: str,
    labels: Mapping[PairKey, int] | None = None,
) -> list[LabeledPair]:
    out = []
    for pair in pairs:
        fv = featurize(pair, ctx, kind)
        label = None if labels is None else labels.get(pair, 0)
        out.append(LabeledPair(pair[0], pair[1], fv, label))
    return out


def balance(
    train: Sequence[LabeledPair],
    target_ratio: float = 0.1,
    seed: int | None = None,
) -> list[LabeledPair]:
    """Oversample positives until pos/neg reaches the target ratio.

    Duplicates cycle through the positives in order, so the outcome is
    deterministic; ``seed`` is accepted for interface stability but the
    round-robin strategy does not consume randomness.  Never apply this
    to evaluation data.
    """
    del seed
    items = list(train)
    positives = [p for p in items if p.label == 1]
    negatives = [p for p in items if p.label == 0]
    if not positives or not negatives:
        raise DegenerateDataError("balancing needs both a positive and a negative sample")
    needed = int(np.ceil(target_ratio * len(negatives))) - len(positives)
    for i in range(max(0, needed)):
        items.append(positives[i % len(positives)])
    return items


# ---------------------------------------------------------------------------
# Feature CSV


def dump_features_csv(pairs: Sequence[LabeledPair], kind: str) -> str:
    names = feature_names(kind)
    with_labels = any(p.label is not None for p in pairs)
    buf = io.StringIO()
    buf.write(f"# features: {kind}\n")
    writer = csv.writer(buf, lineterminator="\n")
    header = ["pair_left", "pair_right", *names]
    if with_labels:
        header.append("label")
    writer.writerow(header)
    for p in pairs:
        if len(p.features) != len(names):
            raise ValueError(f"feature vector of ({p.left.id},{p.right.id}) does not fit {kind}")
        row = [p.left.id, p.right.id, *(repr(float(v)) for v in p.features)]
        if with_labels:
            row.append("" if p.label is None else str(p.label))
        writer.writerow(row)
    return buf.getvalue()


def parse_features_csv(
    text: str, left_kind: str = "etype", right_kind: str = "etype"
) -> tuple[str, list[LabeledPair]]:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# features:"):
        raise ParseError(1, 1, "missing feature kind line")
    kind = lines[0].split(":", 1)[1].strip()
    names = feature_names(kind)
    reader = csv.reader(io.StringIO("\n".join(lines[1:])))
    header = next(reader, None)
    if header is None or header[:2] != ["pair_left", "pair_right"]:
        raise ParseError(2, 1, "bad feature header")
    has_label = header[-1] == "label"
    expected = 2 + len(names) + (1 if has_label else 0)
    if len(header) != expected:
        raise ParseError(2, 1, f"expected {expected} columns for {kind} features")
    pairs: list[LabeledPair] = []
    for lineno, rec in enumerate(reader, start=3):
        if not rec:
            continue
        if len(rec) != expected:
            raise ParseError(lineno, 1, f"expected {expected} fields, got {len(rec)}")
        try:
            values = np.array([float(v) for v in rec[2 : 2 + len(names)]], dtype=np.float64)
        except ValueError:
            raise ParseError(lineno, 1, "non-numeric feature value") from None
        label: int | None = None
        if has_label and rec[-1] != "":
            if rec[-1] not in ("0", "1"):
                raise ParseError(lineno, len(rec), f"label must be 0 or 1, not {rec[-1]!r}")
            label = int(rec[-1])
        pairs.append(
            LabeledPair(ConceptRef(left_kind, rec[0]), ConceptRef(right_kind, rec[1]), values, label)
        )
    return kind, pairs


def save_features_csv(pairs: Sequence[LabeledPair], kind: str, path: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(dump_features_csv(pairs, kind))
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def load_features_csv(
    path: str, left_kind: str = "etype", right_kind: str = "etype"
) -> tuple[str, list[LabeledPair]]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return parse_features_csv(fh.read(), left_kind, right_kind)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
