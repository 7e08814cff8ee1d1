from pathlib import Path

import pytest

from ontocomply.matching import MatchConfig, VectorFile
from ontocomply.rdf import load

DATA = Path(__file__).resolve().parents[1] / "src" / "ontocomply" / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def brick():
    return load(DATA / "brick.ttl", role="ontology")


@pytest.fixture(scope="session")
def rec():
    return load(DATA / "rec.ttl", role="ontology")


@pytest.fixture(scope="session")
def kg1():
    return load(DATA / "brick_building.ttl", role="kg")


@pytest.fixture(scope="session")
def kg2():
    return load(DATA / "rec_building.ttl", role="kg")


@pytest.fixture(scope="session")
def vectors():
    return VectorFile.load(DATA / "vectors.txt")


@pytest.fixture(scope="session")
def match_cfg(vectors):
    return MatchConfig(semantic_provider=vectors)


@pytest.fixture(scope="session")
def mismatch_kg():
    return load(DATA / "mismatch_kg.nt", role="kg")
