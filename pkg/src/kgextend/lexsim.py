"""String-level and semantic similarity between labels.

All string metrics are symmetric, live in [0, 1], and treat a pair of
empty strings as identical (score 1).  The two semantic metrics return
``None`` instead of a number when the taxonomy or embedding store cannot
say anything; callers impute at feature-assembly time.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import CycleError, IoError, ParseError
from .text import StopwordList, normalize_label


def ngram_dice(a: str, b: str, n: int = 2) -> float:
    """Dice coefficient over letter n-gram multisets (default bigrams)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not a and not b:
        return 1.0
    if len(a) < n and len(b) < n:
        return 0.0
    grams_a = Counter(a[i : i + n] for i in range(len(a) - n + 1))
    grams_b = Counter(b[i : i + n] for i in range(len(b) - n + 1))
    shared = sum((grams_a & grams_b).values())
    total = sum(grams_a.values()) + sum(grams_b.values())
    return 2.0 * shared / total if total else 0.0


def _lcs_length(a: str, b: str) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for ca in a:
        cur = [0]
        for j, cb in enumerate(b, start=1):
            if ca == cb:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def lcs_sim(a: str, b: str) -> float:
    """2 * |longest common subsequence| / (len(a) + len(b))."""
    if not a and not b:
        return 1.0
    total = len(a) + len(b)
    return 2.0 * _lcs_length(a, b) / total


def _levenshtein(a: str, b: str) -> int:
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost))
        prev = cur
    return prev[-1]


def levenshtein_sim(a: str, b: str) -> float:
    """1 - edit_distance / max length; identical empties score 1."""
    if not a and not b:
        return 1.0
    return 1.0 - _levenshtein(a, b) / max(len(a), len(b))


def _longest_common_substring(a: str, b: str) -> int:
    best = 0
    prev = [0] * (len(b) + 1)
    for ca in a:
        cur = [0]
        for j, cb in enumerate(b, start=1):
            length = prev[j - 1] + 1 if ca == cb else 0
            cur.append(length)
            if length > best:
                best = length
        prev = cur
    return best


def substring_sim(a: str, b: str) -> float:
    """2 * |longest common substring| / (len(a) + len(b))."""
    if not a and not b:
        return 1.0
    return 2.0 * _longest_common_substring(a, b) / (len(a) + len(b))


def needleman_wunsch_sim(
    a: str,
    b: str,
    *,
    match: int = 1,
    mismatch: int = -1,
    gap: int = -1,
) -> float:
    """Global-alignment score clamped at 0 and scaled by the longer length."""
    if not a and not b:
        return 1.0
    rows, cols = len(a), len(b)
    prev = [j * gap for j in range(cols + 1)]
    for i in range(1, rows + 1):
        cur = [i * gap]
        for j in range(1, cols + 1):
            diag = prev[j - 1] + (match if a[i - 1] == b[j - 1] else mismatch)
            cur.append(max(diag, prev[j] + gap, cur[j - 1] + gap))
        prev = cur
    return max(0, prev[-1]) / max(rows, cols)


# ---------------------------------------------------------------------------
# Taxonomy (Wu-Palmer)


class TaxonomyStore:
    """A forest of terms with cached depths; roots sit at depth 1.

    Terms are case-folded.  Built from ``child<TAB>parent`` lines where a
    root's parent is ``-``.
    """

    def __init__(self, parents: dict[str, str | None]) -> None:
        self._parents = {k.lower(): (v.lower() if v is not None else None) for k, v in parents.items()}
        self._depths: dict[str, int] = {}
        for term in self._parents:
            self._depth_of(term, trail=set())

    def _depth_of(self, term: str, trail: set[str]) -> int:
        cached = self._depths.get(term)
        if cached is not None:
            return cached
        if term in trail:
            raise CycleError(f"taxonomy cycle through {term!r}")
        parent = self._parents.get(term)
        if parent is None:
            depth = 1
        else:
            if parent not in self._parents:
                raise CycleError(f"taxonomy parent {parent!r} of {term!r} is not declared")
            trail.add(term)
            depth = 1 + self._depth_of(parent, trail)
            trail.discard(term)
        self._depths[term] = depth
        return depth

    def __contains__(self, term: str) -> bool:
        return term.lower() in self._parents

    def depth(self, term: str) -> int | None:
        return self._depths.get(term.lower())

    def _ancestry(self, term: str) -> list[str]:
        chain = []
        cursor: str | None = term.lower()
        while cursor is not None:
            chain.append(cursor)
            cursor = self._parents[cursor]
        return chain

    def lca_depth(self, a: str, b: str) -> int | None:
        """Depth of the deepest shared ancestor, or None when disjoint."""
        if a.lower() not in self._parents or b.lower() not in self._parents:
            return None
        ancestors_a = set(self._ancestry(a))
        for term in self._ancestry(b):
            if term in ancestors_a:
                return self._depths[term]
        return None

    @classmethod
    def load(cls, path: str) -> "TaxonomyStore":
        try:
            with open(path, encoding="utf-8") as fh:
                lines = fh.read().splitlines()
        except OSError as exc:
            raise IoError(f"cannot read taxonomy {path}: {exc}") from exc
        parents: dict[str, str | None] = {}
        for lineno, line in enumerate(lines, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(lineno, 1, "expected child<TAB>parent")
            child, parent = parts[0].strip(), parts[1].strip()
            if not child:
                raise ParseError(lineno, 1, "empty child term")
            parents[child] = None if parent == "-" else parent
        return cls(parents)


def wu_palmer_sim(a: str, b: str, tax: TaxonomyStore) -> float | None:
    """2 * depth(LCA) / (depth(a) + depth(b)); None when a term is missing.

    Terms present in the taxonomy but in different trees score 0.
    """
    depth_a = tax.depth(a)
    depth_b = tax.depth(b)
    if depth_a is None or depth_b is None:
        return None
    shared = tax.lca_depth(a, b)
    if shared is None:
        return 0.0
    return 2.0 * shared / (depth_a + depth_b)


def wu_palmer_tokens(
    tokens_a: tuple[str, ...] | list[str],
    tokens_b: tuple[str, ...] | list[str],
    tax: TaxonomyStore,
) -> float | None:
    """Best pairwise Wu-Palmer score between two token lists.

    Token pairs with a missing term are skipped; None when no pair could
    be scored at all.
    """
    best: float | None = None
    for ta in tokens_a:
        for tb in tokens_b:
            score = wu_palmer_sim(ta, tb, tax)
            if score is not None and (best is None or score > best):
                best = score
    return best


# ---------------------------------------------------------------------------
# Embeddings


class EmbeddingStore:
    """Token vectors with case-folded keys and a fixed dimension."""

    def __init__(self, vectors: dict[str, np.ndarray], dim: int) -> None:
        self.dim = dim
        self._vectors = {}
        for token, vec in vectors.items():
            arr = np.asarray(vec, dtype=np.float64)
            if arr.shape != (dim,):
                raise ValueError(f"vector for {token!r} has shape {arr.shape}, want ({dim},)")
            self._vectors[token.lower()] = arr

    def __contains__(self, token: str) -> bool:
        return token.lower() in self._vectors

    def __len__(self) -> int:
        return len(self._vectors)

    def vector(self, token: str) -> np.ndarray | None:
        return self._vectors.get(token.lower())

    def mean_vector(self, tokens: tuple[str, ...] | list[str]) -> np.ndarray | None:
        """Mean of known-token vectors; None when no token is known."""
        known = [self._vectors[t.lower()] for t in tokens if t.lower() in self._vectors]
        if not known:
            return None
        return np.mean(known, axis=0)

    @classmethod
    def load(cls, path: str) -> "EmbeddingStore":
        """Read the text format: first line ``count dim``, then one
        ``token v1 ... vdim`` line per vector."""
        try:
            with open(path, encoding="utf-8") as fh:
                lines = fh.read().splitlines()
        except OSError as exc:
            raise IoError(f"cannot read embeddings {path}: {exc}") from exc
        if not lines:
            raise ParseError(1, 1, "empty embedding file")
        head = lines[0].split()
        if len(head) != 2:
            raise ParseError(1, 1, "first line must be: count dim")
        try:
            count, dim = int(head[0]), int(head[1])
        except ValueError:
            raise ParseError(1, 1, "count and dim must be integers") from None
        vectors: dict[str, np.ndarray] = {}
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != dim + 1:
                raise ParseError(lineno, 1, f"expected token plus {dim} values")
            try:
                vectors[parts[0]] = np.array([float(x) for x in parts[1:]], dtype=np.float64)
            except ValueError:
                raise ParseError(lineno, 1, "non-numeric vector component") from None
        if len(vectors) != count:
            raise ParseError(1, 1, f"header promises {count} vectors, file has {len(vectors)}")
        return cls(vectors, dim)


def _cosine(u: np.ndarray, v: np.ndarray) -> float | None:
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return None
    return float(np.dot(u, v) / (nu * nv))


def embedding_cos_tokens(
    tokens_a: tuple[str, ...] | list[str],
    tokens_b: tuple[str, ...] | list[str],
    emb: EmbeddingStore,
) -> float | None:
    """Cosine of the two mean token vectors; None without known tokens."""
    va = emb.mean_vector(tokens_a)
    vb = emb.mean_vector(tokens_b)
    if va is None or vb is None:
        return None
    return _cosine(va, vb)


def embedding_cos(
    a: str,
    b: str,
    emb: EmbeddingStore,
    stopwords: StopwordList = frozenset(),
) -> float | None:
    """Cosine similarity between two labels via normalized tokens."""
    return embedding_cos_tokens(
        normalize_label(a, stopwords), normalize_label(b, stopwords), emb
    )


@dataclass(frozen=True, slots=True)
class SemanticStores:
    """Optional taxonomy and embedding resources handed down the pipeline."""

    taxonomy: TaxonomyStore | None = None
    embeddings: EmbeddingStore | None = None
