"""Tests for the acceptance suite runner and its quicker criteria."""

from fractions import Fraction

import pytest

from src.acceptance import (
    CRITERIA,
    RECURSION_WAVE_X_ORDER,
    CriterionResult,
    _differing_terms,
    bernoulli_formula,
    essential_orbifold,
    random_regular_curves,
    run_criterion,
    run_suite,
)
from src.algebra import RatFunc
from src.curve import is_admissible
from src.recursion import Verdict, infinity_descriptor


def test_criteria_are_numbered_consecutively():
    assert sorted(CRITERIA) == list(range(1, 10))


def test_criterion_result_needs_verdicts():
    """Test that an empty criterion does not count as passed."""
    assert not CriterionResult(1, "empty").passed
    result = CriterionResult(2, "two checks", [Verdict("a", True), Verdict("b", False, {"k": 1})])
    assert not result.passed

    data = result.to_dict()
    assert data["criterion"] == 2
    assert [check["name"] for check in data["checks"]] == ["a", "b"]


def test_random_curves_are_admissible_and_reproducible():
    curves = random_regular_curves(3)
    assert len(curves) == 3
    assert all(is_admissible(c).admissible for c in curves)
    assert [c.M1 for c in curves] == [c.M1 for c in random_regular_curves(3)]


def test_run_suite_rejects_unknown_criterion():
    with pytest.raises(ValueError):
        run_suite([42])


@pytest.mark.parametrize("number", [1, 8])
def test_quick_criteria_pass(number):
    result = run_criterion(number, workers=2)
    assert result.passed, [v.to_dict() for v in result.verdicts if not v.passed]


def test_run_suite_reports_progress():
    seen = []
    results = run_suite([1], workers=2, progress=seen.append)
    assert seen == results
    assert results[0].number == 1


@pytest.mark.slow
def test_symmetric_group_oracle():
    assert run_criterion(6, workers=2).passed


@pytest.mark.slow
def test_hurwitz_cross_check():
    """Test that compact and meromorphic ω_{1,1} match their tau functions."""
    result = run_criterion(5, workers=2)
    assert result.passed, [v.to_dict() for v in result.verdicts if not v.passed]


def test_random_curves_vary_m2_and_m0():
    """Test that the random family is not pinned to M0 = M2 = z."""
    curves = random_regular_curves(5)
    z = RatFunc.of([0, 1])
    assert any(c.M2 != z for c in curves)
    assert any(c.M0 != z for c in curves)
    assert len({str(c.M2.to_text()) for c in curves}) > 1


def test_differing_terms_names_each_disagreeing_pole():
    d3, d5 = infinity_descriptor(3), infinity_descriptor(5)
    differences = _differing_terms({d3: Fraction(1), d5: Fraction(2)}, {d3: Fraction(1)})
    assert differences == [{"pole": d5.to_json(), "first": "2/1", "second": "0/1"}]
    assert _differing_terms({d3: Fraction(1)}, {d3: Fraction(1)}) == []


def test_essential_and_direct_formula_agree_on_orbifolds():
    verdicts = essential_orbifold(workers=2)
    assert [v.name for v in verdicts][:2] == ["essential[q=1,r=2]", "direct-formula[q=1,r=2]"]
    assert all(v.passed and v.witness is None for v in verdicts)


@pytest.mark.slow
def test_bernoulli_formula_on_random_curves():
    verdicts = bernoulli_formula(workers=2)
    assert len(verdicts) == 5
    assert all(v.passed for v in verdicts), [v.witness for v in verdicts if not v.passed]


@pytest.mark.slow
def test_quantum_curve_criterion_checks_several_x_orders():
    """Test the recursion-built ψ against the quantum curve through x^{RECURSION_WAVE_X_ORDER − 2}."""
    assert RECURSION_WAVE_X_ORDER >= 6
    result = run_criterion(7, workers=2)
    assert result.passed, [v.to_dict() for v in result.verdicts if not v.passed]
