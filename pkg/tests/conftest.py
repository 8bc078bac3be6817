"""Pytest configuration and fixtures for QEI lab tests."""

import json
import tempfile
from pathlib import Path
from typing import Generator

import pytest

from src.config import Settings, reset_settings
from src.services.integrable import IntegrableModel, make_model, reset_model_caches
from src.services.models import PolynomialP, TestFunction
from src.services.testfn import gaussian

# Small ladder keeping eigensolves fast in tests
SMALL_LADDER = [(8.0, 128), (8.0, 256)]


@pytest.fixture(autouse=True)
def reset_global_state():
    """Reset all global state between tests."""
    reset_settings()
    reset_model_caches()
    yield
    reset_settings()
    reset_model_caches()


@pytest.fixture
def temp_dir() -> Generator[Path, None, None]:
    """Create a temporary directory for tests."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def test_settings(temp_dir: Path) -> Settings:
    """Create test settings with a temporary output directory and a small ladder."""
    return Settings(output_dir=temp_dir / "out", ladder=SMALL_LADDER)


@pytest.fixture
def small_ladder() -> list[tuple[float, int]]:
    """Two-stage ladder for fast minimizations."""
    return list(SMALL_LADDER)


@pytest.fixture
def free_model() -> IntegrableModel:
    """Free Bose field with unit mass."""
    return make_model("free")


@pytest.fixture
def ising_model() -> IntegrableModel:
    """Massive Ising model with unit mass."""
    return make_model("ising")


@pytest.fixture
def sinh_gordon_model() -> IntegrableModel:
    """sinh-Gordon model at the self-dual point B = 1."""
    return make_model("sinh_gordon", coupling=1.0)


@pytest.fixture
def unit_polynomial() -> PolynomialP:
    """P ≡ 1."""
    return PolynomialP()


@pytest.fixture
def unit_gaussian() -> TestFunction:
    """gaussian(σ = 1, t₀ = 0)."""
    return gaussian(1.0)


@pytest.fixture
def write_config(temp_dir: Path):
    """Write a run configuration to a JSON file and return its path."""

    def _write(payload: dict, name: str = "config.json") -> Path:
        path = temp_dir / name
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f)
        return path

    return _write
