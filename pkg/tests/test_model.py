"""Graph construction, hierarchy queries, and property closures."""

from __future__ import annotations

import numpy as np
import pytest

from kgextend.errors import (
    CycleError,
    DanglingRefError,
    DuplicateIdError,
    UnknownIdError,
)
from kgextend.model import (
    EntityRecord,
    PropertyRecord,
    SubclassRecord,
    TypeRecord,
    build_graph,
)

from .conftest import make_graph


class TestBuildGraph:
    def test_layers_root_is_one(self, toy_a):
        assert toy_a.etypes["Person"].layer == 1
        assert toy_a.etypes["Athlete"].layer == 2
        assert toy_a.etypes["Place"].layer == 1

    def test_labels_default_to_local_name(self):
        g = build_graph(
            "g",
            [TypeRecord("http://example.org/Person", "", ())],
            [EntityRecord("http://example.org/bob", "", "http://example.org/Person", ())],
        )
        assert g.etypes["http://example.org/Person"].label == "Person"
        assert g.entities["http://example.org/bob"].label == "bob"

    def test_no_label_is_ever_none(self, toy_a):
        for t in toy_a.etypes.values():
            assert isinstance(t.label, str) and t.label
        for e in toy_a.entities.values():
            assert isinstance(e.label, str) and e.label

    def test_property_records_declare_and_relabel(self):
        g = build_graph(
            "g",
            [TypeRecord("T", "T", ("p",))],
            property_records=[PropertyRecord("p", "Fancy P"), PropertyRecord("unused", "Unused")],
        )
        assert g.properties["p"].raw_label == "Fancy P"
        assert "unused" in g.properties

    def test_duplicate_type_id_rejected(self):
        with pytest.raises(DuplicateIdError):
            build_graph("g", [TypeRecord("T", "T", ()), TypeRecord("T", "T2", ())])

    def test_duplicate_entity_id_rejected(self):
        with pytest.raises(DuplicateIdError):
            build_graph(
                "g",
                [TypeRecord("T", "T", ())],
                [EntityRecord("e", "e", "T", ()), EntityRecord("e", "e", "T", ())],
            )

    def test_dangling_superclass_rejected(self):
        with pytest.raises(DanglingRefError):
            build_graph("g", [TypeRecord("T", "T", ())], subclass_records=[SubclassRecord("T", "Nope")])

    def test_dangling_entity_type_rejected(self):
        with pytest.raises(DanglingRefError):
            build_graph("g", [], [EntityRecord("e", "e", "Nope", ())])

    def test_subclass_cycle_rejected(self):
        with pytest.raises(CycleError):
            make_graph(types=[("A", ()), ("B", ())], subclasses=[("A", "B"), ("B", "A")])

    def test_order_independent(self, toy_a):
        recs = toy_a.records()
        shuffled = build_graph(
            recs.name,
            tuple(reversed(recs.types)),
            tuple(reversed(recs.entities)),
            tuple(reversed(recs.subclasses)),
            property_records=tuple(reversed(recs.properties)),
        )
        assert shuffled == toy_a

    def test_records_round_trip(self, toy_a):
        recs = toy_a.records()
        rebuilt = build_graph(
            recs.name,
            recs.types,
            recs.entities,
            recs.subclasses,
            property_records=recs.properties,
        )
        assert rebuilt == toy_a


class TestPropertyClosure:
    def test_prop_is_cumulative(self, toy_a):
        assert toy_a.prop("Athlete") == {"name", "birth", "gold_medalist", "team"}
        assert toy_a.prop("Person") == {"name", "birth"}

    def test_ent_prop_is_own_only(self, toy_a):
        assert toy_a.ent_prop("UsainBolt") == {"name", "birth", "gold_medalist"}

    def test_types_with_property(self, toy_a):
        assert toy_a.types_with_property("name") == {"Person", "Athlete", "Place"}
        assert toy_a.types_with_property("settlement") == {"Place"}

    def test_unknown_ids_raise(self, toy_a):
        with pytest.raises(UnknownIdError):
            toy_a.prop("Nope")
        with pytest.raises(UnknownIdError):
            toy_a.ent_prop("Nope")
        with pytest.raises(UnknownIdError):
            toy_a.types_with_property("nope")

    def test_prop_monotone_along_edges(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            n = int(rng.integers(2, 10))
            types = [(f"T{i}", tuple(f"p{j}" for j in np.flatnonzero(rng.random(6) < 0.4))) for i in range(n)]
            # Edges only from higher to lower index keep the relation acyclic.
            edges = [
                (f"T{i}", f"T{j}")
                for i in range(n)
                for j in range(i)
                if rng.random() < 0.3
            ]
            g = make_graph(types=types, subclasses=edges)
            for child, parent in edges:
                assert g.prop(child) >= g.prop(parent)


class TestHierarchyQueries:
    def test_subclasses_direct_only(self, toy_a):
        assert toy_a.subclasses("Person") == {"Athlete"}
        assert toy_a.subclasses("Athlete") == frozenset()

    def test_descendants_transitive(self):
        g = make_graph(
            types=[("A", ()), ("B", ()), ("C", ())],
            subclasses=[("B", "A"), ("C", "B")],
        )
        assert g.descendants("A") == {"B", "C"}

    def test_siblings_share_a_parent(self):
        g = make_graph(
            types=[("P", ()), ("X", ()), ("Y", ()), ("Z", ())],
            subclasses=[("X", "P"), ("Y", "P")],
        )
        assert g.siblings("X") == {"Y"}
        assert g.siblings("Z") == frozenset()

    def test_roots_and_depth(self, toy_a):
        assert set(toy_a.roots()) == {"Person", "Place"}
        assert toy_a.max_depth == 2

    def test_entities_of_and_count(self, toy_a):
        assert toy_a.entities_of("Athlete") == ("UsainBolt",)
        assert toy_a.entity_count("Athlete") == 1
        assert toy_a.entity_count("Place") == 0

    def test_untyped_entities(self):
        g = make_graph(types=[("T", ())], entities=[("e", None, ("p",))])
        assert g.untyped_entities() == ("e",)


class TestTokens:
    def test_etype_tokens_normalized(self, conference_a):
        assert conference_a.etype_tokens("Committee") == ("program", "committee")

    def test_concept_tokens_dispatch(self, toy_a):
        assert toy_a.concept_tokens("etype", "Person") == toy_a.etype_tokens("Person")
        assert toy_a.concept_tokens("entity", "UsainBolt") == toy_a.entity_tokens("UsainBolt")
        with pytest.raises(ValueError):
            toy_a.concept_tokens("nope", "Person")

    def test_property_tokens(self, toy_a):
        assert toy_a.property_tokens("gold_medalist") == ("gold", "medalist")
