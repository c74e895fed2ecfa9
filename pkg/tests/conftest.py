"""Configuration for pytest."""

import sys
from pathlib import Path

import pytest

# Add the parent directory to sys.path to allow imports from the ontosem package
sys.path.insert(0, str(Path(__file__).parent.parent))

from ontosem.pipeline import Session
from ontosem.utils import get_data_dir

DATA_DIR = get_data_dir()


@pytest.fixture(scope="session")
def session():
    """Session over the shipped hierarchy, lexicon and definitions."""
    return Session.load(
        DATA_DIR / "ontology.txt",
        DATA_DIR / "lexicon.txt",
        DATA_DIR / "definitions.txt",
    )


@pytest.fixture(scope="session")
def hierarchy(session):
    return session.hierarchy


@pytest.fixture(scope="session")
def registry(session):
    return session.registry


@pytest.fixture(scope="session")
def lexicon(session):
    return session.lexicon


@pytest.fixture(scope="session")
def definitions(session):
    return session.definitions
