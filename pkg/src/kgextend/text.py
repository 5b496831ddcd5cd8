"""Label normalization shared by the graph model and the parsers.

A label is reduced to a list of lowercase tokens: split at capital-letter
boundaries, underscores, hyphens, and whitespace, drop stop-words, then
strip a handful of plural suffixes.  The pipeline is deterministic and
idempotent on its own joined output.
"""

from __future__ import annotations

import re
from importlib import resources

from .errors import IoError

StopwordList = frozenset[str]

# Groups runs of capitals so "HTTPServer" yields ["HTTP", "Server"] and
# "USA" stays one token.
_CAMEL = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z0-9]+|[A-Z]+|[0-9]+")
_SEPARATORS = re.compile(r"[\s_\-]+")

_ES_SUFFIXES = ("sses", "xes", "zes", "ches", "shes")
_KEEP_SUFFIXES = ("ss", "us", "is")


def lemmatize_token(token: str) -> str:
    """Strip naive English plural suffixes (-s, -es, -ies to y).

    This is a deliberately small suffix table, not a dictionary
    lemmatizer; tokens it cannot handle pass through unchanged.
    """
    if token.endswith("ies") and len(token) > 4:
        return token[:-3] + "y"
    if token.endswith(_ES_SUFFIXES):
        return token[:-2]
    if token.endswith(_KEEP_SUFFIXES):
        return token
    if token.endswith("s") and len(token) > 3:
        return token[:-1]
    return token


def normalize_label(
    raw: str,
    stopwords: StopwordList = frozenset(),
    *,
    lemmatize: bool = True,
) -> list[str]:
    """Normalize a display label into comparison tokens.

    Splits at capital letters, ``_``, ``-``, and whitespace, lowercases,
    drops stop-words and empty tokens, and optionally lemmatizes.  If
    every token is removed the lowercased raw string is returned as the
    single token so no label normalizes to nothing.
    """
    tokens: list[str] = []
    for chunk in _SEPARATORS.split(raw):
        for piece in _CAMEL.findall(chunk):
            token = piece.lower()
            if not token or token in stopwords:
                continue
            if lemmatize:
                token = lemmatize_token(token)
            if token:
                tokens.append(token)
    if not tokens:
        return [raw.lower()]
    return tokens


def local_name(iri: str) -> str:
    """Last path segment of an IRI, used as a default display label."""
    trimmed = iri.rstrip("#/")
    for sep in ("#", "/", ":"):
        idx = trimmed.rfind(sep)
        if idx >= 0:
            trimmed = trimmed[idx + 1 :]
    return trimmed or iri


def load_stopwords(path: str) -> StopwordList:
    """Read a stop-word file, one lowercase token per line.

    Blank lines and lines starting with ``#`` are skipped.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IoError(f"cannot read stopword file {path}: {exc}") from exc
    words = set()
    for line in lines:
        word = line.strip().lower()
        if word and not word.startswith("#"):
            words.add(word)
    return frozenset(words)


def default_stopwords() -> StopwordList:
    """The stop-word list shipped with the package."""
    data = resources.files("kgextend.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(
        w.strip().lower() for w in data.splitlines() if w.strip() and not w.startswith("#")
    )
