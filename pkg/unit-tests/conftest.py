import numpy as np
import pytest

from ratlimits.config import Settings, configure
from ratlimits.core import catalog
from ratlimits.core.ratmap import ProjectiveRatMap
from ratlimits.core.rescaling import left_class_limits
from ratlimits.core.sphere import SpherePoint


def _settings(**overrides) -> Settings:
    return Settings(threads=1, **overrides)


# ---------- Process-wide settings ----------
@pytest.fixture(autouse=True)
def _single_threaded_settings():
    configure(_settings())
    yield
    configure(None)


# ---------- Pytest fixtures ----------
@pytest.fixture
def cfg():
    return _settings()


@pytest.fixture
def make_cfg():
    def _make(**overrides):
        return _settings(**overrides)
    return _make


@pytest.fixture
def make_map():
    """Coefficients low to high: c_i multiplies z^i w^(d-i)."""
    def _make(num, den, backend="float"):
        return ProjectiveRatMap.from_lists(list(num), list(den), backend)
    return _make


@pytest.fixture
def pt():
    def _pt(value):
        if isinstance(value, str) and value == "inf":
            return SpherePoint.infinity()
        return SpherePoint.from_complex(complex(value))
    return _pt


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


# ---------- Shared schemes (expensive: built once per session) ----------
@pytest.fixture(scope="session")
def z2_scheme():
    return left_class_limits(catalog.z2_plus_inverse_t(), 4, _settings())


@pytest.fixture(scope="session")
def antipodal_scheme():
    return left_class_limits(catalog.demarco_faber(), 4, _settings())
