import numpy as np
import pytest

from whitney_dbar.settings import get_settings


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Settings are cached; tests that patch the environment see a clean read."""
    get_settings.cache_clear()
    yield monkeypatch
    get_settings.cache_clear()
