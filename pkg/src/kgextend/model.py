"""In-memory knowledge graph: entity types, entities, properties.

A graph is built once from plain records and is read-only afterwards.
Two derived views drive everything downstream:

* ``prop(E)``, the cumulative property set of an entity type, is the
  union of its direct properties and the properties inherited from all
  transitive superclasses.
* ``types_with_property(p)`` is the set of entity types whose cumulative
  property set contains ``p``.

Layers number the hierarchy from the top: a root sits at layer 1 and
every other type sits one below its shallowest superclass.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import CycleError, DanglingRefError, DuplicateIdError, UnknownIdError
from .text import StopwordList, default_stopwords, local_name, normalize_label

PropertyId = str
EntityTypeId = str
EntityId = str


@dataclass(frozen=True, slots=True)
class TypeRecord:
    """Input record declaring one entity type."""

    id: EntityTypeId
    label: str | None = None
    properties: tuple[PropertyId, ...] = ()


@dataclass(frozen=True, slots=True)
class EntityRecord:
    """Input record declaring one entity; ``etype`` may be None."""

    id: EntityId
    label: str | None = None
    etype: EntityTypeId | None = None
    properties: tuple[PropertyId, ...] = ()


@dataclass(frozen=True, slots=True)
class SubclassRecord:
    """Input record declaring ``child`` a direct subclass of ``parent``."""

    child: EntityTypeId
    parent: EntityTypeId


@dataclass(frozen=True, slots=True)
class PropertyRecord:
    """Optional input record declaring a property ahead of any use."""

    id: PropertyId
    label: str | None = None


@dataclass(frozen=True, slots=True)
class Property:
    id: PropertyId
    raw_label: str
    tokens: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class EntityType:
    id: EntityTypeId
    label: str
    direct_properties: frozenset[PropertyId]
    superclasses: frozenset[EntityTypeId]
    layer: int


@dataclass(frozen=True, slots=True)
class Entity:
    id: EntityId
    label: str
    etype: EntityTypeId | None
    own_properties: frozenset[PropertyId]


@dataclass(frozen=True, slots=True)
class GraphRecords:
    """Record form of a graph, sufficient to rebuild it exactly."""

    name: str
    types: tuple[TypeRecord, ...]
    entities: tuple[EntityRecord, ...]
    subclasses: tuple[SubclassRecord, ...]
    properties: tuple[PropertyRecord, ...]


class KnowledgeGraph:
    """Read-only graph with cached hierarchy and property queries.

    Build instances through :func:`build_graph`; the constructor assumes
    already-validated parts.
    """

    def __init__(
        self,
        name: str,
        properties: Mapping[PropertyId, Property],
        etypes: Mapping[EntityTypeId, EntityType],
        entities: Mapping[EntityId, Entity],
        stopwords: StopwordList,
    ) -> None:
        self.name = name
        self.properties: dict[PropertyId, Property] = dict(properties)
        self.etypes: dict[EntityTypeId, EntityType] = dict(etypes)
        self.entities: dict[EntityId, Entity] = dict(entities)
        self.stopwords = stopwords
        self._children: dict[EntityTypeId, frozenset[EntityTypeId]] = {}
        self._cumulative: dict[EntityTypeId, frozenset[PropertyId]] = {}
        self._holders: dict[PropertyId, frozenset[EntityTypeId]] = {}
        self._etype_tokens: dict[EntityTypeId, tuple[str, ...]] = {}
        self._entities_of: dict[EntityTypeId, tuple[EntityId, ...]] = {}
        self._index()

    def _index(self) -> None:
        children: dict[EntityTypeId, set[EntityTypeId]] = {t: set() for t in self.etypes}
        for etype in self.etypes.values():
            for parent in etype.superclasses:
                children[parent].add(etype.id)
        self._children = {t: frozenset(kids) for t, kids in children.items()}

        # Cumulative property sets; layers do not topologically sort a
        # multi-parent hierarchy, so memoize over an explicit stack.
        for start in sorted(self.etypes):
            stack = [start]
            while stack:
                tid = stack[-1]
                if tid in self._cumulative:
                    stack.pop()
                    continue
                etype = self.etypes[tid]
                pending = [p for p in etype.superclasses if p not in self._cumulative]
                if pending:
                    stack.extend(sorted(pending))
                    continue
                acc = set(etype.direct_properties)
                for parent in etype.superclasses:
                    acc |= self._cumulative[parent]
                self._cumulative[tid] = frozenset(acc)
                stack.pop()

        holders: dict[PropertyId, set[EntityTypeId]] = {p: set() for p in self.properties}
        for tid, props in self._cumulative.items():
            for pid in props:
                holders[pid].add(tid)
        self._holders = {p: frozenset(ts) for p, ts in holders.items()}

        grouped: dict[EntityTypeId, list[EntityId]] = {t: [] for t in self.etypes}
        for ent in self.entities.values():
            if ent.etype is not None:
                grouped[ent.etype].append(ent.id)
        self._entities_of = {t: tuple(sorted(ids)) for t, ids in grouped.items()}

    def _require_etype(self, etype_id: EntityTypeId) -> EntityType:
        try:
            return self.etypes[etype_id]
        except KeyError:
            raise UnknownIdError(f"unknown entity type {etype_id!r}") from None

    def _require_entity(self, entity_id: EntityId) -> Entity:
        try:
            return self.entities[entity_id]
        except KeyError:
            raise UnknownIdError(f"unknown entity {entity_id!r}") from None

    def prop(self, etype_id: EntityTypeId) -> frozenset[PropertyId]:
        """Cumulative property set: direct plus inherited."""
        self._require_etype(etype_id)
        return self._cumulative[etype_id]

    def ent_prop(self, entity_id: EntityId) -> frozenset[PropertyId]:
        """Properties an entity actually carries.

        Inherited-but-missing properties are not included here; the
        formal context marks them as undefined instead.
        """
        return self._require_entity(entity_id).own_properties

    def types_with_property(self, pid: PropertyId) -> frozenset[EntityTypeId]:
        """All entity types whose cumulative property set contains ``pid``."""
        try:
            return self._holders[pid]
        except KeyError:
            raise UnknownIdError(f"unknown property {pid!r}") from None

    def subclasses(self, etype_id: EntityTypeId) -> frozenset[EntityTypeId]:
        """Direct subclasses."""
        self._require_etype(etype_id)
        return self._children[etype_id]

    def descendants(self, etype_id: EntityTypeId) -> frozenset[EntityTypeId]:
        """All transitive subclasses, excluding the type itself."""
        self._require_etype(etype_id)
        seen: set[EntityTypeId] = set()
        stack = list(self._children[etype_id])
        while stack:
            tid = stack.pop()
            if tid in seen:
                continue
            seen.add(tid)
            stack.extend(self._children[tid])
        return frozenset(seen)

    def siblings(self, etype_id: EntityTypeId) -> frozenset[EntityTypeId]:
        """Types sharing at least one direct superclass; roots have none."""
        etype = self._require_etype(etype_id)
        out: set[EntityTypeId] = set()
        for parent in etype.superclasses:
            out |= self._children[parent]
        out.discard(etype_id)
        return frozenset(out)

    def roots(self) -> tuple[EntityTypeId, ...]:
        return tuple(t for t in self.etypes if not self.etypes[t].superclasses)

    @property
    def max_depth(self) -> int:
        """Deepest layer present, or 0 for a graph without entity types."""
        if not self.etypes:
            return 0
        return max(e.layer for e in self.etypes.values())

    def entities_of(self, etype_id: EntityTypeId) -> tuple[EntityId, ...]:
        """Ids of entities typed exactly by ``etype_id``, sorted."""
        self._require_etype(etype_id)
        return self._entities_of[etype_id]

    def entity_count(self, etype_id: EntityTypeId) -> int:
        return len(self.entities_of(etype_id))

    def untyped_entities(self) -> tuple[EntityId, ...]:
        return tuple(sorted(e.id for e in self.entities.values() if e.etype is None))

    def etype_tokens(self, etype_id: EntityTypeId) -> tuple[str, ...]:
        """Normalized label tokens of an entity type, cached."""
        cached = self._etype_tokens.get(etype_id)
        if cached is None:
            etype = self._require_etype(etype_id)
            cached = tuple(normalize_label(etype.label, self.stopwords))
            self._etype_tokens[etype_id] = cached
        return cached

    def entity_tokens(self, entity_id: EntityId) -> tuple[str, ...]:
        """Normalized label tokens of an entity."""
        ent = self._require_entity(entity_id)
        return tuple(normalize_label(ent.label, self.stopwords))

    def concept_tokens(self, kind: str, concept_id: str) -> tuple[str, ...]:
        if kind == "etype":
            return self.etype_tokens(concept_id)
        if kind == "entity":
            return self.entity_tokens(concept_id)
        raise ValueError(f"unknown concept kind {kind!r}")

    def property_tokens(self, pid: PropertyId) -> tuple[str, ...]:
        try:
            return self.properties[pid].tokens
        except KeyError:
            raise UnknownIdError(f"unknown property {pid!r}") from None

    def records(self) -> GraphRecords:
        """Record form with all ids sorted; rebuilding yields an equal graph."""
        types = tuple(
            TypeRecord(t.id, t.label, tuple(sorted(t.direct_properties)))
            for t in (self.etypes[tid] for tid in sorted(self.etypes))
        )
        entities = tuple(
            EntityRecord(e.id, e.label, e.etype, tuple(sorted(e.own_properties)))
            for e in (self.entities[eid] for eid in sorted(self.entities))
        )
        subclasses = tuple(
            SubclassRecord(tid, parent)
            for tid in sorted(self.etypes)
            for parent in sorted(self.etypes[tid].superclasses)
        )
        properties = tuple(
            PropertyRecord(p.id, p.raw_label)
            for p in (self.properties[pid] for pid in sorted(self.properties))
        )
        return GraphRecords(self.name, types, entities, subclasses, properties)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        return (
            self.name == other.name
            and self.properties == other.properties
            and self.etypes == other.etypes
            and self.entities == other.entities
        )

    def __repr__(self) -> str:
        return (
            f"KnowledgeGraph({self.name!r}, {len(self.etypes)} types, "
            f"{len(self.entities)} entities, {len(self.properties)} properties)"
        )


def _compute_layers(
    type_ids: list[EntityTypeId],
    parents: dict[EntityTypeId, set[EntityTypeId]],
) -> dict[EntityTypeId, int]:
    """Layer of every type: 1 for roots, else 1 + min over superclasses.

    Raises CycleError when the subclass relation is not a DAG.
    """
    layers: dict[EntityTypeId, int] = {}
    remaining: dict[EntityTypeId, int] = {t: len(parents[t]) for t in type_ids}
    queue = sorted(t for t, deg in remaining.items() if deg == 0)
    children: dict[EntityTypeId, list[EntityTypeId]] = {t: [] for t in type_ids}
    for child, ps in parents.items():
        for parent in ps:
            children[parent].append(child)
    while queue:
        tid = queue.pop(0)
        ps = parents[tid]
        layers[tid] = 1 if not ps else 1 + min(layers[p] for p in ps)
        for child in sorted(children[tid]):
            remaining[child] -= 1
            if remaining[child] == 0:
                queue.append(child)
    if len(layers) != len(type_ids):
        stuck = sorted(t for t in type_ids if t not in layers)
        raise CycleError(f"subclass cycle involving {', '.join(stuck)}")
    return layers


def build_graph(
    name: str,
    type_records: Iterable[TypeRecord],
    entity_records: Iterable[EntityRecord] = (),
    subclass_records: Iterable[SubclassRecord] = (),
    *,
    property_records: Iterable[PropertyRecord] = (),
    stopwords: StopwordList | None = None,
) -> KnowledgeGraph:
    """Validate records and assemble a graph.

    Properties are declared implicitly by appearing in a type or entity
    record; ``property_records`` additionally declares unused ones or
    overrides display labels.  The result does not depend on record
    order.

    Raises DuplicateIdError, DanglingRefError, or CycleError on bad input.
    """
    if stopwords is None:
        stopwords = default_stopwords()

    type_recs = list(type_records)
    entity_recs = list(entity_records)
    subclass_recs = list(subclass_records)
    prop_recs = list(property_records)

    type_ids: set[EntityTypeId] = set()
    for rec in type_recs:
        if rec.id in type_ids:
            raise DuplicateIdError(f"entity type {rec.id!r} declared twice")
        type_ids.add(rec.id)
    entity_ids: set[EntityId] = set()
    for rec in entity_recs:
        if rec.id in entity_ids:
            raise DuplicateIdError(f"entity {rec.id!r} declared twice")
        entity_ids.add(rec.id)

    prop_labels: dict[PropertyId, str] = {}
    for rec in prop_recs:
        if rec.id in prop_labels:
            raise DuplicateIdError(f"property {rec.id!r} declared twice")
        prop_labels[rec.id] = rec.label if rec.label is not None else local_name(rec.id)
    for rec in type_recs:
        for pid in rec.properties:
            prop_labels.setdefault(pid, local_name(pid))
    for rec in entity_recs:
        for pid in rec.properties:
            prop_labels.setdefault(pid, local_name(pid))

    parents: dict[EntityTypeId, set[EntityTypeId]] = {t: set() for t in type_ids}
    for rec in subclass_recs:
        if rec.child not in type_ids:
            raise DanglingRefError(f"subclass record references unknown type {rec.child!r}")
        if rec.parent not in type_ids:
            raise DanglingRefError(f"subclass record references unknown type {rec.parent!r}")
        if rec.child == rec.parent:
            raise CycleError(f"type {rec.child!r} declared a subclass of itself")
        parents[rec.child].add(rec.parent)
    for rec in entity_recs:
        if rec.etype is not None and rec.etype not in type_ids:
            raise DanglingRefError(f"entity {rec.id!r} references unknown type {rec.etype!r}")

    layers = _compute_layers(sorted(type_ids), parents)

    properties = {
        pid: Property(pid, label, tuple(normalize_label(label, stopwords)))
        for pid, label in sorted(prop_labels.items())
    }
    etypes = {
        rec.id: EntityType(
            rec.id,
            rec.label if rec.label is not None else local_name(rec.id),
            frozenset(rec.properties),
            frozenset(parents[rec.id]),
            layers[rec.id],
        )
        for rec in sorted(type_recs, key=lambda r: r.id)
    }
    entities = {
        rec.id: Entity(
            rec.id,
            rec.label if rec.label is not None else local_name(rec.id),
            rec.etype,
            frozenset(rec.properties),
        )
        for rec in sorted(entity_recs, key=lambda r: r.id)
    }
    return KnowledgeGraph(name, properties, etypes, entities, stopwords)
