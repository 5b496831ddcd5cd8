"""Three-valued formal context derived from a graph.

Each concept row scores every property as owned (+1), undefined (0), or
absent (-1).  For an entity type, undefined means the property appears
somewhere below it in the hierarchy; for an entity, undefined means its
type inherits the property but the entity does not carry it.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import IoError, ParseError, UnknownIdError
from .model import KnowledgeGraph, PropertyId

OWNED = 1
UNDEFINED = 0
ABSENT = -1


@dataclass(frozen=True, slots=True)
class ConceptRef:
    """A row key: an entity type or an entity."""

    kind: str  # "etype" | "entity"
    id: str


class FormalContext:
    """Immutable concept-by-property matrix with cells in {+1, 0, -1}."""

    def __init__(
        self,
        source: str,
        concepts: tuple[ConceptRef, ...],
        properties: tuple[PropertyId, ...],
        cells: np.ndarray,
    ) -> None:
        if cells.shape != (len(concepts), len(properties)):
            raise ValueError("cell matrix does not match concept/property lists")
        self.source = source
        self.concepts = concepts
        self.properties = properties
        self.cells = cells.astype(np.int8, copy=True)
        self.cells.setflags(write=False)
        self._row_index = {ref: i for i, ref in enumerate(concepts)}
        self._col_index = {pid: j for j, pid in enumerate(properties)}

    def row_of(self, ref: ConceptRef) -> np.ndarray:
        try:
            return self.cells[self._row_index[ref]]
        except KeyError:
            raise UnknownIdError(f"no row for {ref.kind} {ref.id!r}") from None

    def cell(self, ref: ConceptRef, pid: PropertyId) -> int:
        try:
            col = self._col_index[pid]
        except KeyError:
            raise UnknownIdError(f"no column for property {pid!r}") from None
        return int(self.row_of(ref)[col])

    def owned_properties(self, ref: ConceptRef) -> tuple[PropertyId, ...]:
        """Properties with a +1 cell in this row, in column order."""
        row = self.row_of(ref)
        return tuple(p for p, v in zip(self.properties, row) if v == OWNED)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FormalContext):
            return NotImplemented
        return (
            self.source == other.source
            and self.concepts == other.concepts
            and self.properties == other.properties
            and bool(np.array_equal(self.cells, other.cells))
        )

    def __repr__(self) -> str:
        return f"FormalContext({self.source!r}, {len(self.concepts)}x{len(self.properties)})"


def formalize(g: KnowledgeGraph, scope: str = "schema") -> FormalContext:
    """Build the formal context of a graph.

    ``scope`` selects the rows: ``"schema"`` for entity types,
    ``"instance"`` for entities, ``"both"`` for types followed by
    entities.  Columns are all declared properties, sorted.
    """
    if scope not in ("schema", "instance", "both"):
        raise ValueError(f"scope must be schema, instance, or both, not {scope!r}")
    properties = tuple(sorted(g.properties))
    col = {pid: j for j, pid in enumerate(properties)}
    concepts: list[ConceptRef] = []
    rows: list[np.ndarray] = []

    if scope in ("schema", "both"):
        for tid in sorted(g.etypes):
            row = np.full(len(properties), ABSENT, dtype=np.int8)
            below: set[str] = set()
            for d in g.descendants(tid):
                below |= g.prop(d)
            for pid in below:
                row[col[pid]] = UNDEFINED
            for pid in g.prop(tid):
                row[col[pid]] = OWNED
            concepts.append(ConceptRef("etype", tid))
            rows.append(row)

    if scope in ("instance", "both"):
        for eid in sorted(g.entities):
            ent = g.entities[eid]
            row = np.full(len(properties), ABSENT, dtype=np.int8)
            if ent.etype is not None:
                for pid in g.prop(ent.etype):
                    row[col[pid]] = UNDEFINED
            for pid in ent.own_properties:
                row[col[pid]] = OWNED
            concepts.append(ConceptRef("entity", eid))
            rows.append(row)

    cells = (
        np.stack(rows) if rows else np.empty((0, len(properties)), dtype=np.int8)
    )
    return FormalContext(g.name, tuple(concepts), properties, cells)


def export_context(f: FormalContext) -> str:
    """Serialize a context as CSV.

    The first line carries the source graph name as a comment; the
    header names two key columns and then every property id verbatim.
    """
    buf = io.StringIO()
    buf.write(f"# context: {f.source}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["kind", "concept", *f.properties])
    for ref, row in zip(f.concepts, f.cells):
        writer.writerow([ref.kind, ref.id, *(str(int(v)) for v in row)])
    return buf.getvalue()


def import_context(text: str) -> FormalContext:
    """Parse CSV produced by :func:`export_context`."""
    lines = text.splitlines()
    source = ""
    start = 0
    if lines and lines[0].startswith("# context:"):
        source = lines[0][len("# context:") :].strip()
        start = 1
    reader = csv.reader(io.StringIO("\n".join(lines[start:])))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(start + 1, 1, "missing header row") from None
    if header[:2] != ["kind", "concept"]:
        raise ParseError(start + 1, 1, "header must start with kind,concept")
    properties = tuple(header[2:])
    concepts: list[ConceptRef] = []
    rows: list[list[int]] = []
    for lineno, rec in enumerate(reader, start=start + 2):
        if not rec:
            continue
        if len(rec) != len(properties) + 2:
            raise ParseError(lineno, 1, f"expected {len(properties) + 2} fields, got {len(rec)}")
        kind, cid = rec[0], rec[1]
        if kind not in ("etype", "entity"):
            raise ParseError(lineno, 1, f"unknown concept kind {kind!r}")
        cells: list[int] = []
        for j, value in enumerate(rec[2:], start=3):
            if value not in ("1", "0", "-1"):
                raise ParseError(lineno, j, f"cell must be 1, 0, or -1, not {value!r}")
            cells.append(int(value))
        concepts.append(ConceptRef(kind, cid))
        rows.append(cells)
    matrix = (
        np.array(rows, dtype=np.int8)
        if rows
        else np.empty((0, len(properties)), dtype=np.int8)
    )
    return FormalContext(source, tuple(concepts), properties, matrix)


def save_context(f: FormalContext, path: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(export_context(f))
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def load_context(path: str) -> FormalContext:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return import_context(fh.read())
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
