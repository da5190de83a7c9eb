import json
from pathlib import Path

import pytest

from aslkit.parser import parse
from aslkit.serialize import load_rules, load_schema, load_supply
from aslkit.validate import validate

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return CORPUS


@pytest.fixture(scope="session")
def connection_source() -> str:
    return (CORPUS / "connection.asl").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def connection_program(connection_source):
    program = parse(connection_source)
    assert validate(program) == []
    return program


@pytest.fixture(scope="session")
def schema():
    return load_schema(CORPUS / "schema.json")


@pytest.fixture(scope="session")
def rules(schema):
    return load_rules(CORPUS / "rules.json", schema)


@pytest.fixture(scope="session")
def wifi_supply():
    return load_supply(CORPUS / "supply_wifi.json")


@pytest.fixture(scope="session")
def bluetooth_supply():
    return load_supply(CORPUS / "supply_bluetooth.json")


@pytest.fixture(scope="session")
def connection_descriptor(connection_program, schema, rules):
    from aslkit.customize import build_descriptor

    return build_descriptor(connection_program, schema, rules)


@pytest.fixture()
def registry(tmp_path):
    from aslkit.registry.core import Registry

    return Registry(tmp_path / "store")


@pytest.fixture()
def published_registry(registry, connection_descriptor):
    registry.publish(connection_descriptor.to_json())
    return registry
