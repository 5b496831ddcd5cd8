"""Shared fixtures: file paths and small hand-built graphs."""

from __future__ import annotations

import os

import pytest

from kgextend.ingest import load_graph_json
from kgextend.model import EntityRecord, SubclassRecord, TypeRecord, build_graph

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


@pytest.fixture(scope="session")
def toy_a():
    return load_graph_json(fixture_path("toy_a.json"))


@pytest.fixture(scope="session")
def toy_b():
    return load_graph_json(fixture_path("toy_b.json"))


@pytest.fixture(scope="session")
def toy_b2():
    return load_graph_json(fixture_path("toy_b2.json"))


@pytest.fixture(scope="session")
def conference_a():
    return load_graph_json(fixture_path("conference_a.json"))


@pytest.fixture(scope="session")
def conference_b():
    return load_graph_json(fixture_path("conference_b.json"))


def make_graph(name="g", types=(), entities=(), subclasses=()):
    """Terse graph builder for inline test data.

    ``types`` rows are (id, props) or (id, label, props); ``entities``
    rows are (id, etype, props); ``subclasses`` rows are (child, parent).
    """
    type_records = []
    for row in types:
        if len(row) == 2:
            tid, props = row
            label = tid
        else:
            tid, label, props = row
        type_records.append(TypeRecord(tid, label, tuple(props)))
    entity_records = [EntityRecord(eid, eid, etype, tuple(props)) for eid, etype, props in entities]
    subclass_records = [SubclassRecord(c, p) for c, p in subclasses]
    return build_graph(name, type_records, entity_records, subclass_records)
