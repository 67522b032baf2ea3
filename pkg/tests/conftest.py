"""Shared fixtures for the harness tests."""

import os
import shutil
import tempfile
from pathlib import Path

import pytest

from data_store.script_store import build_database, load_short_scripts
from embedding.providers import HashEmbedder
from scene.synthetic import build_apartment_scene
from tasks.config import EpisodeConfig

DATA_DIR = Path(__file__).parent.parent / "data"


@pytest.fixture
def data_dir():
    """Directory with the shipped example data."""
    return DATA_DIR


@pytest.fixture
def temp_dir():
    """Create a temporary directory for test outputs."""
    path = tempfile.mkdtemp(prefix="harness-test-")
    yield path
    shutil.rmtree(path, ignore_errors=True)


@pytest.fixture
def temp_file():
    """Create a temporary file path for testing."""
    with tempfile.NamedTemporaryFile(suffix=".json", delete=False) as f:
        path = f.name
    yield path
    if os.path.exists(path):
        os.unlink(path)


@pytest.fixture
def provider():
    """Deterministic offline embedding provider."""
    return HashEmbedder(dim=64, seed=0)


@pytest.fixture
def example_scripts():
    """The eight example short scripts."""
    return load_short_scripts(str(DATA_DIR / "example_scripts.json"))


@pytest.fixture
def script_db(example_scripts, provider):
    """Database built from the example scripts."""
    return build_database(example_scripts, provider)


@pytest.fixture
def apartment():
    """Synthetic three-room apartment scene."""
    return build_apartment_scene()


@pytest.fixture
def cfg():
    """Default episode configuration."""
    return EpisodeConfig()
