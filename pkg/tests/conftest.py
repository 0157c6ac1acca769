"""Pytest configuration file with common fixtures."""

from pathlib import Path

import pytest

from src.curve import MeromorphicCurve, TransalgebraicCurve
from src.curvefile import airy_curve, atlantes_curve, rs_curve
from src.recursion import CorrelatorTable, compute_table


FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def temp_dir(tmp_path) -> Path:
    """Provide a temporary directory for test files."""
    return tmp_path


@pytest.fixture
def airy_file_path() -> Path:
    """Return the path to the explicit Airy curve file."""
    return FIXTURES / "airy.json"


@pytest.fixture
def atlantes_file_path() -> Path:
    """Return the path to the family-tagged Atlantes r = 2 curve file."""
    return FIXTURES / "atlantes_r2.json"


@pytest.fixture
def finite_n_file_path() -> Path:
    """Return the path to the N = 1 approximation of the Lambert curve."""
    return FIXTURES / "lambert_finite_n.json"


@pytest.fixture
def malformed_file_path() -> Path:
    """Return the path to a curve file that is not valid JSON."""
    return FIXTURES / "malformed.json"


@pytest.fixture
def bad_coefficients_path() -> Path:
    """Return the path to a curve file with a non-numeric coefficient."""
    return FIXTURES / "bad_coefficients.json"


@pytest.fixture
def airy() -> MeromorphicCurve:
    return airy_curve()


@pytest.fixture
def lambert() -> TransalgebraicCurve:
    """The r = 1 Atlantes curve x = z·e^{−z}, y = z/x."""
    return atlantes_curve(1)


@pytest.fixture
def atlantes2() -> TransalgebraicCurve:
    return atlantes_curve(2)


@pytest.fixture(scope="module")
def airy_table() -> CorrelatorTable:
    """Airy correlators up to 2g − 2 + n = 2, shared within a test module."""
    return compute_table(airy_curve(), 2, workers=2)


@pytest.fixture(scope="module")
def rs32_table() -> CorrelatorTable:
    """Correlators of x = z³, y = 1/z up to 2g − 2 + n = 1."""
    return compute_table(rs_curve(3, 2), 1, workers=2)


@pytest.fixture
def cache_dir(temp_dir, monkeypatch) -> Path:
    """An empty correlator cache directory, also exported as TR_CACHE_DIR."""
    directory = temp_dir / "cache"
    monkeypatch.setenv("TR_CACHE_DIR", str(directory))
    return directory
