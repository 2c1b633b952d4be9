import logging

import pytest

from src.config.storage import StorageSettings
from src.services.grid import make_grid
from src.services.null_cache import NullTableCache
from src.storage.local import LocalStorageBackend
from src.utils.rng import make_rng


def pytest_configure(config):
    """Register custom markers."""
    config.addinivalue_line("markers", "unit: mark test as a unit test")
    config.addinivalue_line("markers", "integration: mark test as an integration test")
    config.addinivalue_line("markers", "slow: mark test as slow-running")


@pytest.fixture
def rng():
    """Seeded generator for test data."""
    return make_rng(12345)


@pytest.fixture
def gaussian_pair(rng):
    """Independent Gaussian blocks, n = 40, d1 = d2 = 2."""
    x = rng.standard_normal((40, 4))
    return x[:, :2], x[:, 2:]


@pytest.fixture
def grids_40():
    """Grids for n = 40 in dimensions 2 and 2."""
    return make_grid(40, 2, 0), make_grid(40, 2, 0)


@pytest.fixture
def temp_storage(tmp_path):
    """Local storage backend rooted in a temporary directory."""
    return LocalStorageBackend(base_path=tmp_path / "cache")


@pytest.fixture
def null_cache(temp_storage):
    """Null table cache over temporary storage."""
    return NullTableCache(temp_storage)


@pytest.fixture
def storage_settings(tmp_path):
    """Storage settings pointing at a temporary cache."""
    return StorageSettings(NULL_CACHE_PATH=str(tmp_path / "cache"))


@pytest.fixture
def cli_env(tmp_path, monkeypatch):
    """Isolate CLI runs from the user's cache and environment."""
    monkeypatch.setenv("NULL_CACHE_PATH", str(tmp_path / "cache"))
    for name in ("DEFAULT_ALPHA", "DEFAULT_PERMUTATIONS", "DEFAULT_METHOD", "WORKERS",
                 "SIM_REPLICATIONS", "SIM_TAUS", "SIM_CASES_FILE", "LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)

    root = logging.getLogger()
    level, handlers = root.level, list(root.handlers)
    yield tmp_path
    root.handlers[:] = handlers
    root.setLevel(level)
