"""Property alignment, candidate-pair generation, and pruning.

The property matcher is label-driven: equal normalized token lists align
outright, everything else is scored by a mean of string metrics (plus an
embedding cosine when vectors are available) with a greedy one-to-one
selection above a confidence threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .alignments import Alignment, AlignedPropertyPairs
from .errors import IoError, ParseError
from .fca import ConceptRef, FormalContext
from .lexsim import EmbeddingStore, embedding_cos_tokens, levenshtein_sim, ngram_dice
from .model import KnowledgeGraph

ETYPE_ETYPE = "etype-etype"
ETYPE_ENTITY = "etype-entity"


@dataclass(frozen=True, slots=True)
class CandidatePairList:
    """Homogeneous list of concept pairs awaiting similarity scoring."""

    kind: str
    pairs: tuple[tuple[ConceptRef, ConceptRef], ...]

    def __post_init__(self) -> None:
        if self.kind not in (ETYPE_ETYPE, ETYPE_ENTITY):
            raise ValueError(f"unknown pair kind {self.kind!r}")

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True, slots=True)
class PrunedPairs:
    """Result of a pruning pass: survivors plus a log of dropped pairs."""

    kept: CandidatePairList
    dropped: tuple[tuple[ConceptRef, ConceptRef, float], ...]


def property_score(
    tokens_a: tuple[str, ...],
    tokens_b: tuple[str, ...],
    embeddings: EmbeddingStore | None = None,
    ngram_n: int = 2,
) -> float:
    """Score two normalized property labels in [0, 1].

    Equal token lists score 1; otherwise the mean of bigram Dice and
    Levenshtein similarity on the space-joined labels, with the
    embedding cosine as a third component when both sides have known
    tokens.
    """
    if list(tokens_a) == list(tokens_b):
        return 1.0
    joined_a = " ".join(tokens_a)
    joined_b = " ".join(tokens_b)
    parts = [ngram_dice(joined_a, joined_b, ngram_n), levenshtein_sim(joined_a, joined_b)]
    if embeddings is not None:
        cos = embedding_cos_tokens(tokens_a, tokens_b, embeddings)
        if cos is not None:
            parts.append(cos)
    return sum(parts) / len(parts)


def match_properties(
    a: KnowledgeGraph,
    b: KnowledgeGraph,
    tau: float = 0.8,
    *,
    embeddings: EmbeddingStore | None = None,
    one_to_one: bool = True,
) -> AlignedPropertyPairs:
    """Align properties of two graphs by label similarity.

    Greedy descending-score selection, one-to-one by default; ties break
    on lexicographic id order so the result is deterministic.
    """
    scored: list[tuple[float, str, str]] = []
    for pid_a in sorted(a.properties):
        tokens_a = a.properties[pid_a].tokens
        for pid_b in sorted(b.properties):
            score = property_score(tokens_a, b.properties[pid_b].tokens, embeddings)
            if score >= tau:
                scored.append((score, pid_a, pid_b))
    scored.sort(key=lambda t: (-t[0], t[1], t[2]))
    out: list[Alignment] = []
    used_a: set[str] = set()
    used_b: set[str] = set()
    for score, pid_a, pid_b in scored:
        if one_to_one and (pid_a in used_a or pid_b in used_b):
            continue
        used_a.add(pid_a)
        used_b.add(pid_b)
        out.append(Alignment(pid_a, pid_b, confidence=score))
    out.sort(key=lambda al: (al.left, al.right))
    return out


def gen_pairs(a: KnowledgeGraph, b: KnowledgeGraph, kind: str) -> CandidatePairList:
    """Cross product of concepts: types x types, or types x entities."""
    lefts = [ConceptRef("etype", tid) for tid in sorted(a.etypes)]
    if kind == ETYPE_ETYPE:
        rights = [ConceptRef("etype", tid) for tid in sorted(b.etypes)]
    elif kind == ETYPE_ENTITY:
        rights = [ConceptRef("entity", eid) for eid in sorted(b.entities)]
    else:
        raise ValueError(f"unknown pair kind {kind!r}")
    return CandidatePairList(kind, tuple((l, r) for l in lefts for r in rights))


def dump_pairs_csv(pairs: CandidatePairList) -> str:
    lines = [f"# pairs: {pairs.kind}", "left,right"]
    lines.extend(f"{left.id},{right.id}" for left, right in pairs.pairs)
    return "\n".join(lines) + "\n"


def parse_pairs_csv(text: str) -> CandidatePairList:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# pairs:"):
        raise ParseError(1, 1, "missing '# pairs:' header")
    kind = lines[0][len("# pairs:") :].strip()
    if kind not in (ETYPE_ETYPE, ETYPE_ENTITY):
        raise ParseError(1, 1, f"unknown pair kind {kind!r}")
    if len(lines) < 2 or lines[1] != "left,right":
        raise ParseError(2, 1, "expected 'left,right' column header")
    right_kind = "etype" if kind == ETYPE_ETYPE else "entity"
    out: list[tuple[ConceptRef, ConceptRef]] = []
    for lineno, line in enumerate(lines[2:], start=3):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise ParseError(lineno, 1, f"expected 'left,right', got {line!r}")
        out.append((ConceptRef("etype", parts[0]), ConceptRef(right_kind, parts[1])))
    return CandidatePairList(kind, tuple(out))


def save_pairs_csv(pairs: CandidatePairList, path: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(dump_pairs_csv(pairs))
    except OSError as exc:
        raise IoError(f"cannot write {path!r}: {exc}") from exc


def load_pairs_csv(path: str) -> CandidatePairList:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_pairs_csv(fh.read())
    except OSError as exc:
        raise IoError(f"cannot read {path!r}: {exc}") from exc


def preselection_score(
    a: KnowledgeGraph,
    b: KnowledgeGraph,
    left: ConceptRef,
    right: ConceptRef,
    embeddings: EmbeddingStore | None = None,
) -> float:
    """Cheap schema pre-selection: bigram Dice plus embedding cosine.

    The embedding term is 0 when no vectors are known, so the score
    lives in [0, 2] (cosines below 0 can pull it slightly negative).
    """
    tokens_a = a.concept_tokens(left.kind, left.id)
    tokens_b = b.concept_tokens(right.kind, right.id)
    score = ngram_dice(" ".join(tokens_a), " ".join(tokens_b))
    if embeddings is not None:
        cos = embedding_cos_tokens(tokens_a, tokens_b, embeddings)
        if cos is not None:
            score += cos
    return score


def prune_schema(
    a: KnowledgeGraph,
    b: KnowledgeGraph,
    pairs: CandidatePairList,
    ps_threshold: float = 0.3,
    *,
    embeddings: EmbeddingStore | None = None,
) -> PrunedPairs:
    """Drop obvious-negative type pairs below the pre-selection threshold.

    A pair scoring exactly at the threshold is kept.  Dropped pairs are
    returned with their scores for logging; they are never classified.
    """
    if pairs.kind != ETYPE_ETYPE:
        raise ValueError("schema pruning applies to etype-etype pairs")
    kept: list[tuple[ConceptRef, ConceptRef]] = []
    dropped: list[tuple[ConceptRef, ConceptRef, float]] = []
    for left, right in pairs.pairs:
        score = preselection_score(a, b, left, right, embeddings)
        if score >= ps_threshold:
            kept.append((left, right))
        else:
            dropped.append((left, right, score))
    return PrunedPairs(CandidatePairList(pairs.kind, tuple(kept)), tuple(dropped))


def prune_instance(
    pairs: CandidatePairList,
    pm: Sequence[Alignment],
    ctx_a: FormalContext,
    ctx_b: FormalContext,
) -> PrunedPairs:
    """Drop type-entity pairs sharing no aligned owned property.

    Keeps a pair as soon as one aligned property is owned (+1) on both
    sides.
    """
    if pairs.kind != ETYPE_ENTITY:
        raise ValueError("instance pruning applies to etype-entity pairs")
    kept: list[tuple[ConceptRef, ConceptRef]] = []
    dropped: list[tuple[ConceptRef, ConceptRef, float]] = []
    for left, right in pairs.pairs:
        owned_a = set(ctx_a.owned_properties(left))
        owned_b = set(ctx_b.owned_properties(right))
        shared = sum(1 for al in pm if al.left in owned_a and al.right in owned_b)
        if shared > 0:
            kept.append((left, right))
        else:
            dropped.append((left, right, float(shared)))
    return PrunedPairs(CandidatePairList(pairs.kind, tuple(kept)), tuple(dropped))
