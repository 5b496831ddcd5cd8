"""Fold a candidate graph into a reference graph along type alignments.

The merge never mutates either input: it rewrites the reference records,
absorbs the candidate along the alignment, and rebuilds a fresh graph.
Aligned candidate types contribute their full property sets and direct
entities to their reference targets.  Unaligned subclasses of aligned
types are attached beneath the target with their subtrees preserved;
their entities come along.  Whatever entities remain are placed by
instance-level recognition against the original reference types, or
discarded and logged.

Identifier collisions between the graphs resolve by label: equal labels
mean the same element and are reused in place, differing labels are
renamed with a source suffix, or rejected under the strict policy.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .alignments import Alignment
from .assess import Query, _minmax, cmm, cue_e, dem
from .errors import (
    ConflictError,
    DuplicateIdError,
    IoError,
    LayoutMismatchError,
    UnknownIdError,
)
from .fca import ConceptRef, formalize
from .model import (
    EntityId,
    EntityRecord,
    EntityTypeId,
    KnowledgeGraph,
    PropertyId,
    PropertyRecord,
    SubclassRecord,
    TypeRecord,
    build_graph,
)
from .propsim import build_specificity, sim_table
from .recognizer.features import INSTANCE, INSTANCE_FEATURES, FeatureContext, featurize, sim_lookup
from .recognizer.models import Model, predict

STRICT = "strict"
RENAME = "rename"

METRIC_NAMES = ("cmm", "cue_e", "cue_er", "dem", "focus_e")


@dataclass(frozen=True, slots=True)
class ExtensionPlan:
    """Everything extend needs besides the two graphs.

    ``etype_alignments`` pair reference types (left) with candidate
    types (right), one-to-one on both sides.  ``property_alignments``
    unify candidate properties under reference ids during the merge.
    ``model`` scores leftover entities against reference types; with no
    model every leftover is discarded.
    """

    etype_alignments: tuple[Alignment, ...]
    model: Model | None = None
    property_alignments: tuple[Alignment, ...] = ()
    conflict_policy: str = RENAME
    keep_unaligned_etypes: bool = False
    cutoff: float = 0.5

    def __post_init__(self) -> None:
        if self.conflict_policy not in (STRICT, RENAME):
            raise ValueError(f"unknown conflict policy {self.conflict_policy!r}")
        lefts = [al.left for al in self.etype_alignments]
        rights = [al.right for al in self.etype_alignments]
        if len(set(lefts)) != len(lefts) or len(set(rights)) != len(rights):
            raise DuplicateIdError("type alignments must be one-to-one on both sides")
        prop_rights = [al.right for al in self.property_alignments]
        if len(set(prop_rights)) != len(prop_rights):
            raise DuplicateIdError("a candidate property is aligned twice")


@dataclass(frozen=True, slots=True)
class ExtensionCounts:
    etypes_added: int
    properties_added: int
    entities_merged: int
    entities_discarded: int


@dataclass(frozen=True, slots=True)
class MetricRow:
    """One metric for one aligned type, before and after the merge."""

    etype: EntityTypeId
    metric: str
    before: float
    after: float
    before_normalized: float
    after_normalized: float


@dataclass(frozen=True, slots=True)
class ExtensionReport:
    counts: ExtensionCounts
    merged: tuple[tuple[EntityId, EntityTypeId], ...]
    discarded: tuple[EntityId, ...]
    metrics: tuple[MetricRow, ...] = ()


class _Merge:
    """Mutable working state over the reference records during one merge."""

    def __init__(self, ref: KnowledgeGraph, cand: KnowledgeGraph, plan: ExtensionPlan):
        self.ref = ref
        self.cand = cand
        self.plan = plan
        self.prop_map = {al.right: al.left for al in plan.property_alignments}
        self.type_props: dict[EntityTypeId, set[PropertyId]] = {
            t: set(ref.etypes[t].direct_properties) for t in ref.etypes
        }
        self.type_labels: dict[EntityTypeId, str] = {
            t: ref.etypes[t].label for t in ref.etypes
        }
        self.edges: set[tuple[EntityTypeId, EntityTypeId]] = {
            (t, p) for t in ref.etypes for p in ref.etypes[t].superclasses
        }
        self.entity_props: dict[EntityId, set[PropertyId]] = {
            e: set(ref.entities[e].own_properties) for e in ref.entities
        }
        self.entity_labels: dict[EntityId, str] = {
            e: ref.entities[e].label for e in ref.entities
        }
        self.entity_types: dict[EntityId, EntityTypeId | None] = {
            e: ref.entities[e].etype for e in ref.entities
        }
        self.prop_labels: dict[PropertyId, str] = {
            p: ref.properties[p].raw_label for p in ref.properties
        }
        self.resolved_props: dict[PropertyId, PropertyId] = {}
        self.image: dict[EntityTypeId, EntityTypeId] = {}
        self.merged: dict[EntityId, EntityTypeId] = {}
        self.discarded: list[EntityId] = []

    def _conflict(self, what: str, cand_id: str) -> str:
        if self.plan.conflict_policy == STRICT:
            raise ConflictError(
                f"{what} {cand_id!r} exists in both graphs with different labels"
            )
        return f"{cand_id}__{self.cand.name}"

    def resolve_prop(self, pid: PropertyId) -> PropertyId:
        """Map a candidate property id into the extended graph."""
        cached = self.resolved_props.get(pid)
        if cached is not None:
            return cached
        cand_label = self.cand.properties[pid].raw_label
        if pid in self.prop_map:
            out = self.prop_map[pid]
        elif pid not in self.ref.properties:
            out = pid
            self.prop_labels[pid] = cand_label
        elif self.ref.properties[pid].raw_label == cand_label:
            out = pid
        else:
            out = self._conflict("property", pid)
            self.prop_labels[out] = cand_label
        self.resolved_props[pid] = out
        return out

    def absorb_entity(self, eid: EntityId, target: EntityTypeId) -> None:
        own = {self.resolve_prop(p) for p in self.cand.ent_prop(eid)}
        label = self.cand.entities[eid].label
        if eid in self.ref.entities:
            if self.ref.entities[eid].label == label:
                self.entity_props[eid] |= own
                if self.entity_types[eid] is None:
                    self.entity_types[eid] = target
                self.merged[eid] = self.entity_types[eid] or target
                return
            new_id = self._conflict("entity", eid)
        else:
            new_id = eid
        self.entity_props[new_id] = own
        self.entity_labels[new_id] = label
        self.entity_types[new_id] = target
        self.merged[eid] = target

    def attach_etype(self, tid: EntityTypeId) -> None:
        label = self.cand.etypes[tid].label
        direct = {self.resolve_prop(p) for p in self.cand.etypes[tid].direct_properties}
        if tid in self.ref.etypes:
            if self.ref.etypes[tid].label == label:
                # Same id and label: reuse the reference type in place.
                self.image[tid] = tid
                self.type_props[tid] |= direct - self.ref.prop(tid)
                return
            ext_id = self._conflict("entity type", tid)
        else:
            ext_id = tid
        self.image[tid] = ext_id
        self.type_labels[ext_id] = label
        self.type_props[ext_id] = direct

    def build(self, name: str) -> KnowledgeGraph:
        type_records = [
            TypeRecord(t, self.type_labels[t], tuple(sorted(props)))
            for t, props in sorted(self.type_props.items())
        ]
        entity_records = [
            EntityRecord(
                e,
                self.entity_labels[e],
                self.entity_types[e],
                tuple(sorted(props)),
            )
            for e, props in sorted(self.entity_props.items())
        ]
        subclass_records = [SubclassRecord(c, p) for c, p in sorted(self.edges)]
        property_records = [
            PropertyRecord(p, label) for p, label in sorted(self.prop_labels.items())
        ]
        return build_graph(
            name,
            type_records,
            entity_records,
            subclass_records,
            property_records=property_records,
            stopwords=self.ref.stopwords,
        )


def _aligned_pairs(
    ref: KnowledgeGraph, cand: KnowledgeGraph, plan: ExtensionPlan
) -> list[tuple[EntityTypeId, EntityTypeId]]:
    pairs = []
    for al in plan.etype_alignments:
        if al.left not in ref.etypes:
            raise UnknownIdError(f"aligned type {al.left!r} not in {ref.name!r}")
        if al.right not in cand.etypes:
            raise UnknownIdError(f"aligned type {al.right!r} not in {cand.name!r}")
        pairs.append((al.left, al.right))
    for al in plan.property_alignments:
        if al.left not in ref.properties:
            raise UnknownIdError(f"aligned property {al.left!r} not in {ref.name!r}")
        if al.right not in cand.properties:
            raise UnknownIdError(f"aligned property {al.right!r} not in {cand.name!r}")
    pairs.sort()
    return pairs


def _attachable(
    cand: KnowledgeGraph, aligned: set[EntityTypeId], keep_all: bool
) -> list[EntityTypeId]:
    """Unaligned candidate types that enter the extended graph, sorted."""
    if keep_all:
        return sorted(t for t in cand.etypes if t not in aligned)
    reached: set[EntityTypeId] = set()
    frontier = sorted(
        child for t in aligned for child in cand.subclasses(t) if child not in aligned
    )
    while frontier:
        tid = frontier.pop()
        if tid in reached:
            continue
        reached.add(tid)
        frontier.extend(
            child for child in cand.subclasses(tid) if child not in aligned
        )
    return sorted(reached)


def _effective_property_alignment(
    ref: KnowledgeGraph, cand: KnowledgeGraph, plan: ExtensionPlan
) -> list[Alignment]:
    # Shared ids count as aligned even without an explicit pair, so the
    # similarity pass sees identical vocabularies as overlapping.
    explicit = list(plan.property_alignments)
    taken = {al.left for al in explicit} | {al.right for al in explicit}
    shared = sorted(set(ref.properties) & set(cand.properties))
    explicit.extend(Alignment(p, p) for p in shared if p not in taken)
    return explicit


def _recognize_leftovers(
    state: _Merge, leftovers: list[EntityId], plan: ExtensionPlan
) -> None:
    ref, cand = state.ref, state.cand
    if plan.model is None or not ref.etypes:
        state.discarded.extend(leftovers)
        return
    if tuple(plan.model.feature_names) != INSTANCE_FEATURES:
        raise LayoutMismatchError(
            "the extension model must use the instance feature layout"
        )
    fa = formalize(ref, "schema")
    fb = formalize(cand, "instance")
    table_a = build_specificity(ref)
    table_b = build_specificity(cand)
    pm = _effective_property_alignment(ref, cand, plan)
    ref_types = sorted(ref.etypes)
    pairs = [
        (ConceptRef("etype", t), ConceptRef("entity", e))
        for e in leftovers
        for t in ref_types
    ]
    ctx = FeatureContext(ref, cand, sim_lookup(sim_table(fa, fb, pm, pairs, table_a, table_b)))
    for eid in leftovers:
        best_type: EntityTypeId | None = None
        best_score = -math.inf
        for tid in ref_types:
            fv = featurize((ConceptRef("etype", tid), ConceptRef("entity", eid)), ctx, INSTANCE)
            label, score = predict(plan.model, fv, plan.cutoff)
            if label == 1 and score > best_score:
                best_type, best_score = tid, score
        if best_type is None:
            state.discarded.append(eid)
        else:
            state.absorb_entity(eid, best_type)


def extend(
    ref: KnowledgeGraph, cand: KnowledgeGraph, plan: ExtensionPlan
) -> tuple[KnowledgeGraph, ExtensionReport]:
    """Produce the extended graph plus a report of what moved.

    Every candidate entity ends up either merged (with its target type
    recorded) or discarded.  Leftover-entity recognition runs against
    the reference type set as it was before the merge.
    """
    pairs = _aligned_pairs(ref, cand, plan)
    state = _Merge(ref, cand, plan)
    aligned_cand = {b for _, b in pairs}

    for ref_t, cand_t in pairs:
        state.image[cand_t] = ref_t
    for ref_t, cand_t in pairs:
        mapped = {state.resolve_prop(p) for p in cand.prop(cand_t)}
        state.type_props[ref_t] |= mapped - ref.prop(ref_t)
        for eid in cand.entities_of(cand_t):
            state.absorb_entity(eid, ref_t)

    attached = _attachable(cand, aligned_cand, plan.keep_unaligned_etypes)
    for tid in attached:
        state.attach_etype(tid)
    attached_set = set(attached)
    for child in sorted(cand.etypes):
        for parent in sorted(cand.etypes[child].superclasses):
            if child not in state.image or parent not in state.image:
                continue
            # An edge between two aligned types would rewire the
            # reference hierarchy; the reference wins there.
            if child in attached_set or parent in attached_set:
                state.edges.add((state.image[child], state.image[parent]))
    for tid in attached:
        for eid in cand.entities_of(tid):
            state.absorb_entity(eid, state.image[tid])

    leftovers = sorted(e for e in cand.entities if e not in state.merged)
    _recognize_leftovers(state, leftovers, plan)

    ext = state.build(f"{ref.name}-ext")
    counts = ExtensionCounts(
        etypes_added=len(set(ext.etypes) - set(ref.etypes)),
        properties_added=len(set(ext.properties) - set(ref.properties)),
        entities_merged=len(state.merged),
        entities_discarded=len(state.discarded),
    )
    metrics = compare_assessment(ref, ext, [a for a, _ in pairs])
    report = ExtensionReport(
        counts,
        tuple(sorted(state.merged.items())),
        tuple(sorted(state.discarded)),
        metrics,
    )
    return ext, report


def compare_assessment(
    ref: KnowledgeGraph,
    ext: KnowledgeGraph,
    aligned_etypes: Sequence[EntityTypeId],
    queries: Mapping[EntityTypeId, Query] | None = None,
    *,
    eta: float = 1.0,
) -> tuple[MetricRow, ...]:
    """Before/after metric rows for the aligned types.

    Focus values are composed over the union corpus (each type before
    and after), and every metric's normalized columns are min-maxed over
    its combined values.  Without explicit queries each type is queried
    by its own label.  A type without properties scores 0 on the cue
    ratio rather than erroring.
    """
    ids = sorted(set(aligned_etypes))
    for tid in ids:
        if tid not in ref.etypes or tid not in ext.etypes:
            raise UnknownIdError(f"aligned type {tid!r} missing from a graph")

    def ratio(g: KnowledgeGraph, tid: EntityTypeId) -> float:
        props = g.prop(tid)
        if not props:
            return 0.0
        return cue_e(g, tid) / len(props)

    def term(tid: EntityTypeId) -> Query:
        if queries is not None and tid in queries:
            return queries[tid]
        return Query((ref.etype_tokens(tid),))

    values: dict[str, tuple[list[float], list[float]]] = {
        "cmm": ([cmm(ref, term(t)) for t in ids], [cmm(ext, term(t)) for t in ids]),
        "cue_e": ([cue_e(ref, t) for t in ids], [cue_e(ext, t) for t in ids]),
        "cue_er": ([ratio(ref, t) for t in ids], [ratio(ext, t) for t in ids]),
        "dem": ([dem(ref, term(t)) for t in ids], [dem(ext, term(t)) for t in ids]),
    }
    cue_all = values["cue_e"][0] + values["cue_e"][1]
    ratio_all = values["cue_er"][0] + values["cue_er"][1]
    focus_all = [
        d + eta * s
        for d, s in zip(_minmax([math.log1p(c) for c in cue_all]), _minmax(ratio_all))
    ]
    n = len(ids)
    values["focus_e"] = (focus_all[:n], focus_all[n:])

    rows = []
    for i, tid in enumerate(ids):
        for metric in METRIC_NAMES:
            before, after = values[metric]
            normalized = _minmax(before + after)
            rows.append(
                MetricRow(
                    tid,
                    metric,
                    before[i],
                    after[i],
                    normalized[i],
                    normalized[n + i],
                )
            )
    return tuple(rows)


# -- serialization ------------------------------------------------------


def dump_extension_csv(report: ExtensionReport) -> str:
    c = report.counts
    lines = [
        "# extension counts",
        "etypes_added,properties_added,entities_merged,entities_discarded",
        f"{c.etypes_added},{c.properties_added},{c.entities_merged},{c.entities_discarded}",
        "# extension merges",
        "entity,target",
    ]
    lines.extend(f"{e},{t}" for e, t in report.merged)
    lines.append("# extension discards")
    lines.append("entity")
    lines.extend(report.discarded)
    lines.append("# extension metrics")
    lines.append("etype,metric,before,after,before_normalized,after_normalized")
    lines.extend(
        f"{r.etype},{r.metric},{r.before!r},{r.after!r},"
        f"{r.before_normalized!r},{r.after_normalized!r}"
        for r in report.metrics
    )
    return "\n".join(lines) + "\n"


def dump_extension_json(report: ExtensionReport) -> str:
    obj = {
        "counts": {
            "etypes_added": report.counts.etypes_added,
            "properties_added": report.counts.properties_added,
            "entities_merged": report.counts.entities_merged,
            "entities_discarded": report.counts.entities_discarded,
        },
        "merged": [{"entity": e, "target": t} for e, t in report.merged],
        "discarded": list(report.discarded),
        "metrics": [
            {
                "etype": r.etype,
                "metric": r.metric,
                "before": r.before,
                "after": r.after,
                "before_normalized": r.before_normalized,
                "after_normalized": r.after_normalized,
            }
            for r in report.metrics
        ],
    }
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def save_extension_csv(report: ExtensionReport, path: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(dump_extension_csv(report))
    except OSError as exc:
        raise IoError(f"cannot write {path!r}: {exc}") from exc


def save_extension_json(report: ExtensionReport, path: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(dump_extension_json(report))
    except OSError as exc:
        raise IoError(f"cannot write {path!r}: {exc}") from exc
