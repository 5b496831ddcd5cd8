"""Scored correspondences and their TSV serialization.

One record aligns a left id with a right id under a relation: ``=`` for
same-kind matches (property-property, etype-etype) and the membership
sign for etype-entity matches.  The TSV layout is
``left<TAB>right<TAB>relation<TAB>confidence``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import IoError, ParseError

EQUIV = "="
MEMBER = "∈"


@dataclass(frozen=True, slots=True)
class Alignment:
    left: str
    right: str
    relation: str = EQUIV
    confidence: float = 1.0


AlignedPropertyPairs = list[Alignment]


def dump_alignments(alignments: Iterable[Alignment]) -> str:
    lines = [
        f"{a.left}\t{a.right}\t{a.relation}\t{a.confidence!r}" for a in alignments
    ]
    return "".join(line + "\n" for line in lines)


def parse_alignments(text: str) -> list[Alignment]:
    out: list[Alignment] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise ParseError(lineno, 1, f"expected 4 tab-separated fields, got {len(parts)}")
        left, right, relation, conf = parts
        if relation not in (EQUIV, MEMBER):
            raise ParseError(lineno, 1, f"unknown relation {relation!r}")
        try:
            confidence = float(conf)
        except ValueError:
            raise ParseError(lineno, 1, f"bad confidence {conf!r}") from None
        out.append(Alignment(left, right, relation, confidence))
    return out


def save_alignments(alignments: Iterable[Alignment], path: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(dump_alignments(alignments))
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def load_alignments(path: str) -> list[Alignment]:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_alignments(fh.read())
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
