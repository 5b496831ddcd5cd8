"""Parsers and converters that turn external data into graphs.

Three input routes exist: an N-Triples file, a small Turtle subset, and
the JSON interchange format.  RDF triples are flattened into the record
form consumed by :func:`kgextend.model.build_graph` using a configurable
vocabulary for type, subclass, domain, and label predicates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

from .errors import IoError, ParseError, UnknownPrefixError
from .model import (
    EntityRecord,
    GraphRecords,
    KnowledgeGraph,
    PropertyRecord,
    SubclassRecord,
    TypeRecord,
    build_graph,
)
from .text import (  # noqa: F401  (re-exported: normalization is part of ingest's API)
    StopwordList,
    default_stopwords,
    lemmatize_token,
    load_stopwords,
    local_name,
    normalize_label,
)

RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
RDFS_SUBCLASS_OF = "http://www.w3.org/2000/01/rdf-schema#subClassOf"
RDFS_DOMAIN = "http://www.w3.org/2000/01/rdf-schema#domain"
RDFS_LABEL = "http://www.w3.org/2000/01/rdf-schema#label"


@dataclass(frozen=True, slots=True)
class Triple:
    """One RDF statement; ``object_is_literal`` separates IRIs from text."""

    subject: str
    predicate: str
    object: str
    object_is_literal: bool = False


# ---------------------------------------------------------------------------
# N-Triples


_NT_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t", "r": "\r"}


class _LineScanner:
    def __init__(self, line: str, lineno: int) -> None:
        self.line = line
        self.lineno = lineno
        self.pos = 0

    def error(self, message: str) -> ParseError:
        return ParseError(self.lineno, self.pos + 1, message)

    def skip_ws(self) -> None:
        while self.pos < len(self.line) and self.line[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.line) or self.line[self.pos] == "#"

    def expect(self, ch: str) -> None:
        self.skip_ws()
        if self.pos >= len(self.line) or self.line[self.pos] != ch:
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def iri(self) -> str:
        self.expect("<")
        start = self.pos
        end = self.line.find(">", start)
        if end < 0:
            raise self.error("unterminated IRI")
        self.pos = end + 1
        return self.line[start:end]

    def literal(self) -> str:
        self.expect('"')
        out: list[str] = []
        while True:
            if self.pos >= len(self.line):
                raise self.error("unterminated literal")
            ch = self.line[self.pos]
            if ch == '"':
                self.pos += 1
                break
            if ch == "\\":
                self.pos += 1
                if self.pos >= len(self.line):
                    raise self.error("dangling escape")
                esc = self.line[self.pos]
                if esc in _NT_ESCAPES:
                    out.append(_NT_ESCAPES[esc])
                elif esc == "u":
                    hexpart = self.line[self.pos + 1 : self.pos + 5]
                    if len(hexpart) < 4:
                        raise self.error("truncated \\u escape")
                    try:
                        out.append(chr(int(hexpart, 16)))
                    except ValueError:
                        raise self.error("bad \\u escape") from None
                    self.pos += 4
                else:
                    raise self.error(f"unknown escape \\{esc}")
                self.pos += 1
            else:
                out.append(ch)
                self.pos += 1
        # Tolerate @lang and ^^<datatype> tails; only the lexical form is kept.
        if self.pos < len(self.line) and self.line[self.pos] == "@":
            self.pos += 1
            while self.pos < len(self.line) and (
                self.line[self.pos].isalnum() or self.line[self.pos] == "-"
            ):
                self.pos += 1
        elif self.line.startswith("^^", self.pos):
            self.pos += 2
            self.iri()
        return "".join(out)


def _parse_nt_line(line: str, lineno: int) -> Triple:
    sc = _LineScanner(line, lineno)
    subject = sc.iri()
    predicate = sc.iri()
    sc.skip_ws()
    if sc.pos < len(sc.line) and sc.line[sc.pos] == '"':
        obj, is_lit = sc.literal(), True
    else:
        obj, is_lit = sc.iri(), False
    sc.expect(".")
    if not sc.at_end():
        raise sc.error("trailing content after triple")
    return Triple(subject, predicate, obj, is_lit)


def parse_ntriples(text: str, *, strict: bool = True) -> list[Triple]:
    """Parse N-Triples lines ``<s> <p> <o> .``.

    In strict mode a malformed line raises :class:`ParseError` with its
    1-based line and column; in lenient mode the line is skipped.
    """
    triples: list[Triple] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            triples.append(_parse_nt_line(line, lineno))
        except ParseError:
            if strict:
                raise
    return triples


# ---------------------------------------------------------------------------
# Turtle subset


@dataclass(frozen=True, slots=True)
class _Token:
    kind: str  # IRI PNAME LITERAL DOT SEMI COMMA PREFIX A
    value: str
    line: int
    col: int


_PNAME_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-")


def _tokenize_turtle(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        pos = 0
        n = len(line)
        while pos < n:
            ch = line[pos]
            if ch in " \t":
                pos += 1
                continue
            if ch == "#":
                break
            col = pos + 1
            if ch == "<":
                end = line.find(">", pos + 1)
                if end < 0:
                    raise ParseError(lineno, col, "unterminated IRI")
                tokens.append(_Token("IRI", line[pos + 1 : end], lineno, col))
                pos = end + 1
            elif ch == '"':
                sc = _LineScanner(line, lineno)
                sc.pos = pos
                value = sc.literal()
                tokens.append(_Token("LITERAL", value, lineno, col))
                pos = sc.pos
            elif ch == ".":
                tokens.append(_Token("DOT", ".", lineno, col))
                pos += 1
            elif ch == ";":
                tokens.append(_Token("SEMI", ";", lineno, col))
                pos += 1
            elif ch == ",":
                tokens.append(_Token("COMMA", ",", lineno, col))
                pos += 1
            elif ch == "@":
                if line.startswith("@prefix", pos):
                    tokens.append(_Token("PREFIX", "@prefix", lineno, col))
                    pos += len("@prefix")
                else:
                    raise ParseError(lineno, col, "unknown directive")
            else:
                start = pos
                while pos < n and (line[pos] in _PNAME_CHARS or line[pos] == ":"):
                    pos += 1
                word = line[start:pos]
                if not word:
                    raise ParseError(lineno, col, f"unexpected character {ch!r}")
                if word == "a":
                    tokens.append(_Token("A", word, lineno, col))
                elif ":" in word:
                    tokens.append(_Token("PNAME", word, lineno, col))
                else:
                    raise ParseError(lineno, col, f"bare word {word!r} is not allowed")
    return tokens


class _TurtleParser:
    """Recursive-descent parser for the supported Turtle subset.

    Supported: ``@prefix`` declarations, full IRIs, prefixed names,
    plain literals, ``a`` for rdf:type, and ``;`` / ``,`` continuation.
    """

    def __init__(self, tokens: list[_Token]) -> None:
        self.tokens = tokens
        self.pos = 0
        self.prefixes: dict[str, str] = {}

    def _peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _next(self, expected: str) -> _Token:
        tok = self._peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else _Token("", "", 1, 1)
            raise ParseError(last.line, last.col, f"unexpected end of input, wanted {expected}")
        self.pos += 1
        return tok

    def _expand(self, tok: _Token) -> str:
        prefix, _, local = tok.value.partition(":")
        if prefix not in self.prefixes:
            raise UnknownPrefixError(tok.line, tok.col, f"unknown prefix {prefix + ':'!r}")
        return self.prefixes[prefix] + local

    def _resource(self) -> str:
        tok = self._next("IRI or prefixed name")
        if tok.kind == "IRI":
            return tok.value
        if tok.kind == "PNAME":
            return self._expand(tok)
        raise ParseError(tok.line, tok.col, f"expected IRI or prefixed name, got {tok.value!r}")

    def _object(self) -> tuple[str, bool]:
        tok = self._peek()
        if tok is not None and tok.kind == "LITERAL":
            self.pos += 1
            return tok.value, True
        return self._resource(), False

    def _expect(self, kind: str, what: str) -> _Token:
        tok = self._next(what)
        if tok.kind != kind:
            raise ParseError(tok.line, tok.col, f"expected {what}, got {tok.value!r}")
        return tok

    def parse(self) -> list[Triple]:
        triples: list[Triple] = []
        while self._peek() is not None:
            tok = self._peek()
            assert tok is not None
            if tok.kind == "PREFIX":
                self.pos += 1
                name = self._expect("PNAME", "prefix name")
                prefix, _, local = name.value.partition(":")
                if local:
                    raise ParseError(name.line, name.col, "prefix declaration has a local part")
                iri = self._expect("IRI", "IRI")
                self._expect("DOT", "'.'")
                self.prefixes[prefix] = iri.value
                continue
            subject = self._resource()
            while True:
                ptok = self._peek()
                if ptok is not None and ptok.kind == "A":
                    self.pos += 1
                    predicate = RDF_TYPE
                else:
                    predicate = self._resource()
                while True:
                    obj, is_lit = self._object()
                    triples.append(Triple(subject, predicate, obj, is_lit))
                    nxt = self._peek()
                    if nxt is not None and nxt.kind == "COMMA":
                        self.pos += 1
                        continue
                    break
                nxt = self._next("';' or '.'")
                if nxt.kind == "SEMI":
                    # A dangling final semicolon before '.' is tolerated.
                    after = self._peek()
                    if after is not None and after.kind == "DOT":
                        self.pos += 1
                        break
                    continue
                if nxt.kind == "DOT":
                    break
                raise ParseError(nxt.line, nxt.col, f"expected ';' or '.', got {nxt.value!r}")
        return triples


def parse_turtle_subset(text: str) -> list[Triple]:
    """Parse the Turtle subset into triples.

    Raises :class:`ParseError` on anything outside the subset and
    :class:`UnknownPrefixError` for an undeclared prefix.
    """
    return _TurtleParser(_tokenize_turtle(text)).parse()


# ---------------------------------------------------------------------------
# Flattening triples into graph records


@dataclass(frozen=True, slots=True)
class FlattenConfig:
    """Vocabulary and policy used by :func:`flatten`.

    ``unknown_predicates`` is either ``"associate"`` (record the
    predicate in the subject's property set, and in the object's when
    the object is a known entity) or ``"ignore"``.
    """

    type_predicates: frozenset[str] = frozenset({RDF_TYPE})
    subclass_predicates: frozenset[str] = frozenset({RDFS_SUBCLASS_OF})
    domain_predicates: frozenset[str] = frozenset({RDFS_DOMAIN})
    label_predicates: frozenset[str] = frozenset({RDFS_LABEL})
    unknown_predicates: str = "associate"


def flatten(triples: Iterable[Triple], config: FlattenConfig | None = None, *, name: str = "kg") -> GraphRecords:
    """Flatten triples into the record form of a graph.

    Type, subclass, domain, and label predicates shape the schema; any
    other predicate becomes a property association per the config.  An
    entity carrying several type assertions keeps the lexicographically
    first type.
    """
    cfg = config or FlattenConfig()
    triples = list(triples)

    type_ids: set[str] = set()
    for t in triples:
        if t.predicate in cfg.type_predicates and not t.object_is_literal:
            type_ids.add(t.object)
        elif t.predicate in cfg.subclass_predicates and not t.object_is_literal:
            type_ids.add(t.subject)
            type_ids.add(t.object)
        elif t.predicate in cfg.domain_predicates and not t.object_is_literal:
            type_ids.add(t.object)

    entity_ids: set[str] = set()
    schema_preds = (
        cfg.type_predicates | cfg.subclass_predicates | cfg.domain_predicates | cfg.label_predicates
    )
    for t in triples:
        if t.predicate in cfg.type_predicates and t.subject not in type_ids:
            entity_ids.add(t.subject)
        elif t.predicate not in schema_preds and t.subject not in type_ids:
            entity_ids.add(t.subject)

    labels: dict[str, str] = {}
    type_props: dict[str, set[str]] = {t: set() for t in type_ids}
    entity_props: dict[str, set[str]] = {e: set() for e in entity_ids}
    entity_type: dict[str, str] = {}
    subclass_pairs: set[tuple[str, str]] = set()

    for t in triples:
        if t.predicate in cfg.label_predicates and t.object_is_literal:
            labels.setdefault(t.subject, t.object)
        elif t.predicate in cfg.type_predicates and not t.object_is_literal:
            if t.subject in entity_ids:
                current = entity_type.get(t.subject)
                if current is None or t.object < current:
                    entity_type[t.subject] = t.object
        elif t.predicate in cfg.subclass_predicates and not t.object_is_literal:
            if t.subject != t.object:
                subclass_pairs.add((t.subject, t.object))
        elif t.predicate in cfg.domain_predicates and not t.object_is_literal:
            type_props[t.object].add(t.subject)
        elif t.predicate not in schema_preds and cfg.unknown_predicates == "associate":
            if t.subject in entity_ids:
                entity_props[t.subject].add(t.predicate)
                if not t.object_is_literal and t.object in entity_ids:
                    entity_props[t.object].add(t.predicate)
            elif t.subject in type_ids:
                type_props[t.subject].add(t.predicate)

    def display(iri: str) -> str:
        return labels.get(iri, local_name(iri))

    type_records = tuple(
        TypeRecord(tid, display(tid), tuple(sorted(type_props[tid]))) for tid in sorted(type_ids)
    )
    entity_records = tuple(
        EntityRecord(eid, display(eid), entity_type.get(eid), tuple(sorted(entity_props[eid])))
        for eid in sorted(entity_ids)
    )
    subclass_records = tuple(SubclassRecord(c, p) for c, p in sorted(subclass_pairs))
    return GraphRecords(name, type_records, entity_records, subclass_records, ())


def graph_from_triples(
    name: str,
    triples: Iterable[Triple],
    config: FlattenConfig | None = None,
    *,
    stopwords: StopwordList | None = None,
) -> KnowledgeGraph:
    recs = flatten(triples, config, name=name)
    return build_graph(
        recs.name, recs.types, recs.entities, recs.subclasses, stopwords=stopwords
    )


# ---------------------------------------------------------------------------
# JSON interchange format


def _require(mapping: dict, key: str, where: str) -> object:
    if key not in mapping:
        raise ParseError(0, 0, f"{where}: missing {key!r}")
    return mapping[key]


def graph_from_json_obj(obj: dict, *, stopwords: StopwordList | None = None) -> KnowledgeGraph:
    if not isinstance(obj, dict):
        raise ParseError(0, 0, "top level must be an object")
    name = _require(obj, "name", "top level")
    etypes = _require(obj, "etypes", "top level")
    entities = _require(obj, "entities", "top level")
    type_records: list[TypeRecord] = []
    subclass_records: list[SubclassRecord] = []
    for i, entry in enumerate(etypes):
        where = f"etypes[{i}]"
        tid = str(_require(entry, "id", where))
        label = str(entry.get("label", tid))
        props = tuple(str(p) for p in entry.get("props", []))
        type_records.append(TypeRecord(tid, label, props))
        for sup in entry.get("superclasses", []):
            subclass_records.append(SubclassRecord(tid, str(sup)))
    entity_records: list[EntityRecord] = []
    for i, entry in enumerate(entities):
        where = f"entities[{i}]"
        eid = str(_require(entry, "id", where))
        label = str(entry.get("label", eid))
        etype = entry.get("etype")
        props = tuple(str(p) for p in entry.get("props", []))
        entity_records.append(EntityRecord(eid, label, None if etype is None else str(etype), props))
    return build_graph(
        str(name), type_records, entity_records, subclass_records, stopwords=stopwords
    )


def load_graph_json(path: str, *, stopwords: StopwordList | None = None) -> KnowledgeGraph:
    """Read a graph from the JSON interchange format."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.colno, exc.msg) from exc
    return graph_from_json_obj(obj, stopwords=stopwords)


def graph_to_json_obj(g: KnowledgeGraph) -> dict:
    """Interchange form of a graph with all collections sorted by id."""
    etypes = []
    for tid in sorted(g.etypes):
        t = g.etypes[tid]
        etypes.append(
            {
                "id": t.id,
                "label": t.label,
                "props": sorted(t.direct_properties),
                "superclasses": sorted(t.superclasses),
            }
        )
    entities = []
    for eid in sorted(g.entities):
        e = g.entities[eid]
        entry: dict[str, object] = {"id": e.id, "label": e.label}
        if e.etype is not None:
            entry["etype"] = e.etype
        entry["props"] = sorted(e.own_properties)
        entities.append(entry)
    return {"name": g.name, "etypes": etypes, "entities": entities}


def save_graph_json(g: KnowledgeGraph, path: str) -> None:
    """Write the interchange form; byte-stable for equal graphs."""
    payload = json.dumps(graph_to_json_obj(g), indent=2, ensure_ascii=False) + "\n"
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(payload)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
