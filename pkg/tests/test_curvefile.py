"""
Unit tests for curve description files and family shorthands.
"""

from fractions import Fraction

import pytest

from src.algebra import RatFunc
from src.curve import MeromorphicCurve, TransalgebraicCurve, curve_hash
from src.curvefile import (
    airy_curve,
    dump_curve,
    load_curve_file,
    parse_curve_text,
    resolve_curve,
    rs_curve,
)
from src.errors import CurveFileError


def test_load_explicit_curve(airy_file_path):
    """Test that an explicit Airy file hashes like the built-in family."""
    curve_file = load_curve_file(airy_file_path)
    assert isinstance(curve_file.curve, MeromorphicCurve)
    assert curve_file.curve.label == "airy-explicit"
    assert curve_file.family is None
    assert curve_file.source == airy_file_path
    assert curve_hash(curve_file.curve) == curve_hash(airy_curve())


def test_load_family_file(atlantes_file_path):
    curve_file = load_curve_file(atlantes_file_path)
    assert isinstance(curve_file.curve, TransalgebraicCurve)
    assert curve_file.curve.label == "atlantes-two"
    assert curve_file.family == "atlantes"
    assert curve_file.params == {"r": 2}
    assert curve_file.name == "atlantes-two"


def test_load_finite_n_file(finite_n_file_path):
    """Test that an "N" entry replaces the curve by its finite-N approximation."""
    curve_file = load_curve_file(finite_n_file_path)
    assert isinstance(curve_file.curve, MeromorphicCurve)
    assert curve_file.curve.x == RatFunc.of([0, 1], [1, 1])
    assert curve_file.N == 1
    assert curve_file.tau == 0
    assert isinstance(curve_file.origin, TransalgebraicCurve)


def test_malformed_json_reports_position(malformed_file_path):
    with pytest.raises(CurveFileError) as excinfo:
        load_curve_file(malformed_file_path)
    assert excinfo.value.line == 1
    assert "line 1" in str(excinfo.value)


def test_bad_coefficient_reports_key_position(bad_coefficients_path):
    with pytest.raises(CurveFileError) as excinfo:
        load_curve_file(bad_coefficients_path)
    assert (excinfo.value.line, excinfo.value.column) == (3, 3)


@pytest.mark.parametrize(
    "text",
    [
        "[1, 2]",
        '{"kind": "algebraic"}',
        '{"family": "hyperbolic"}',
        '{"family": "rs", "r": 3}',
        '{"family": "atlantes", "r": "two"}',
        '{"family": "airy", "N": 2}',
        '{"kind": "meromorphic", "x": {"num": [1]}, "y": {"num": [0, 1]}}',
    ],
)
def test_invalid_curve_text(text):
    with pytest.raises(CurveFileError):
        parse_curve_text(text)


def test_family_parameter_error_points_at_parameter():
    text = '{\n  "family": "atlantes",\n  "r": "two"\n}'
    with pytest.raises(CurveFileError) as excinfo:
        parse_curve_text(text)
    assert excinfo.value.line == 3


def test_tau_is_parsed_exactly():
    text = '{"family": "atlantes", "r": 1, "N": 2, "tau": "1/2"}'
    curve_file = parse_curve_text(text)
    assert curve_file.tau == Fraction(1, 2)
    assert curve_file.curve.label.startswith("atlantes-r1")


@pytest.mark.parametrize(
    "name, family, params",
    [
        ("airy", "airy", {}),
        ("appendix", "appendix", {}),
        ("atlantes-r3", "atlantes", {"r": 3}),
        ("q-orbifold-q2-r2", "q-orbifold", {"q": 2, "r": 2}),
        ("rs-3-2", "rs", {"r": 3, "s": 2}),
    ],
)
def test_resolve_shorthand(name, family, params):
    curve_file = resolve_curve(name)
    assert curve_file.family == family
    assert curve_file.params == params


def test_resolve_rs_shorthand_builds_curve():
    assert curve_hash(resolve_curve("rs-3-2").curve) == curve_hash(rs_curve(3, 2))


@pytest.mark.parametrize("name", ["hyperbolic", "atlantes-rx", "rs-3", "q-orbifold-q2"])
def test_unknown_shorthand(name):
    with pytest.raises(CurveFileError):
        resolve_curve(name)


def test_resolve_prefers_existing_path(airy_file_path):
    assert resolve_curve(str(airy_file_path)).curve.label == "airy-explicit"


def test_dump_and_reload_explicit_curve(airy_file_path, temp_dir):
    original = load_curve_file(airy_file_path)
    path = temp_dir / "nested" / "airy.json"
    dump_curve(original, path)
    reloaded = load_curve_file(path)
    assert reloaded.curve == original.curve


def test_dump_and_reload_finite_n_curve(finite_n_file_path, temp_dir):
    """Test that a dumped finite-N file stores the transalgebraic data and N."""
    original = load_curve_file(finite_n_file_path)
    path = temp_dir / "finite.json"
    dump_curve(original, path)
    reloaded = load_curve_file(path)
    assert reloaded.curve == original.curve
    assert reloaded.N == 1


def test_dump_and_reload_family_curve(atlantes_file_path, temp_dir):
    original = load_curve_file(atlantes_file_path)
    path = temp_dir / "atlantes.json"
    dump_curve(original, path)
    reloaded = load_curve_file(path)
    assert reloaded.family == "atlantes"
    assert reloaded.curve == original.curve
