"""
Unit tests for ℏ-differential operators, wave functions and quantum curves.
"""

from fractions import Fraction

import pytest

from src.algebra import INFINITY
from src.curve import spectral_polynomial
from src.curvefile import airy_curve, appendix_curve, atlantes_curve
from src.quantum import (
    WaveFunction,
    DiffOperator,
    apply_operator,
    appendix_presentation,
    atlantes_closed_form,
    atlantes_operator,
    atlantes_presentation,
    build_qc_pole_base,
    build_qc_zero_base,
    check_conjugation,
    check_conjugation_diagonal,
    check_tau_independence,
    compare_wave_functions,
    conjugation_solver,
    curve_limits,
    exponential_polynomial,
    is_quantisation_of,
    operator_exp,
    presentation_from_polynomial,
    verify_annihilation,
    wave_function,
)
from src.recursion import compute_table
from src.transalgebraic import transalgebraic_table


def test_canonical_commutator():
    """Test [ŷ, x̂] = ℏ."""
    y, x = DiffOperator.y(), DiffOperator.x()
    assert y.commutator(x).terms == {(1, 0, 0): 1}


def test_operator_rejects_negative_powers_of_hbar():
    with pytest.raises(ValueError):
        DiffOperator({(-1, 0, 0): Fraction(1)})


def test_grade_truncation_drops_high_terms():
    op = DiffOperator.y(1) * DiffOperator.y(1)
    assert op.is_zero()


def test_operator_exponential():
    result = operator_exp(DiffOperator.hbar(), 3)
    assert result.terms == {
        (0, 0, 0): 1,
        (1, 0, 0): 1,
        (2, 0, 0): Fraction(1, 2),
        (3, 0, 0): Fraction(1, 6),
    }


def test_operator_exponential_needs_hbar_in_every_term():
    with pytest.raises(ValueError):
        operator_exp(DiffOperator.x(), 3)


def test_operator_json_round_trip():
    op = atlantes_operator(2, 4)
    assert DiffOperator.from_json(op.to_json()).equals(op)


def test_symbol_of_atlantes_operator():
    """Test that ŷ − e^{x̂ŷ} quantises y − e^{xy}."""
    op = atlantes_operator(1, 2)
    assert is_quantisation_of(op, exponential_polynomial(1, 2)).passed
    assert not is_quantisation_of(op, exponential_polynomial(1, 2, sign=1)).passed


def test_closed_form_coefficients():
    """Test Ψ = 1 + x/ℏ + x²/(2ℏ²)·e^ℏ + … for r = 1."""
    psi = atlantes_closed_form(1, 4, 3)
    assert psi.coefficient(0, 0) == 1
    assert psi.coefficient(1, -1) == 1
    assert psi.coefficient(2, -2) == Fraction(1, 2)
    assert psi.coefficient(2, -1) == Fraction(1, 2)
    with pytest.raises(ValueError):
        psi.coefficient(4, 0)


def test_apply_operator_acts_by_derivation():
    """Test that x̂ŷ acts on x^n as nℏ."""
    psi = atlantes_closed_form(1, 3, 3)
    result = apply_operator(DiffOperator.euler(), psi)
    assert result.coeffs[1].coefficient(0) == psi.coefficient(1, -1)


@pytest.mark.parametrize("r", [1, 2, 3])
def test_closed_form_is_annihilated(r):
    K, x_order = 2, 5
    psi = atlantes_closed_form(r, x_order, K + 2)
    assert verify_annihilation(atlantes_operator(r, K + x_order), psi, K).passed


def test_annihilation_fails_for_the_wrong_operator():
    K, x_order = 2, 5
    psi = atlantes_closed_form(1, x_order, K + 2)
    verdict = verify_annihilation(atlantes_operator(2, K + x_order), psi, K)
    assert not verdict.passed
    assert verdict.witness["hbar_power"] <= K


def test_annihilation_refuses_short_operator():
    psi = atlantes_closed_form(1, 3, 4)
    with pytest.raises(ValueError):
        verify_annihilation(atlantes_operator(1, 1), psi, 3)


def test_compare_wave_functions():
    assert compare_wave_functions(atlantes_closed_form(1, 4, 3), atlantes_closed_form(1, 4, 3)).passed
    verdict = compare_wave_functions(atlantes_closed_form(1, 4, 3), atlantes_closed_form(2, 4, 3))
    assert not verdict.passed
    assert verdict.witness["x_power"] == 2


def test_atlantes_presentation_coefficients():
    """Test q_0 = −1 and q_1 = 1 for P = y e^{−xy} − 1."""
    presentation = atlantes_presentation(1, 0)
    assert presentation.q(0) == {0: -1}
    assert presentation.q(1) == {0: 1}
    assert presentation.degree is None


def test_airy_presentation_and_pole_base_curve():
    """Test that P = y² − x gives x̂⁻¹ŷ² − 1."""
    presentation = presentation_from_polynomial({(0, 2): 1, (1, 0): -1}, limits={1: 0})
    assert presentation.regular
    assert [presentation.floor(m) for m in range(3)] == [1, 0, 0]
    op = build_qc_pole_base(presentation, 2)
    assert op.terms == {(0, -1, 2): 1, (0, 0, 0): -1}


def test_pole_base_needs_limits():
    presentation = presentation_from_polynomial({(0, 2): 1, (1, 0): -1})
    with pytest.raises(ValueError):
        build_qc_pole_base(presentation, 2)


def test_irregular_curve_is_refused():
    presentation = appendix_presentation()
    assert not presentation.regular
    with pytest.raises(ValueError):
        build_qc_zero_base(presentation, 3)


def test_zero_base_needs_zero_of_x():
    with pytest.raises(ValueError):
        build_qc_zero_base(atlantes_presentation(1), 3, x_at_base=1)


def test_tau_independence():
    verdict = check_tau_independence(1, (0, Fraction(1, 2), 1), 4)
    assert verdict.passed, verdict.witness


@pytest.mark.parametrize(
    "r, expected",
    [
        (1, [Fraction(0)]),
        (2, [Fraction(1, 12), Fraction(0)]),
        (3, [Fraction(-1, 8), Fraction(1, 8), Fraction(0)]),
    ],
)
def test_conjugation_solver(r, expected):
    assert conjugation_solver(r) == expected


def test_conjugation_solver_rejects_zero():
    with pytest.raises(ValueError):
        conjugation_solver(0)


@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_conjugation_diagonal(r):
    assert check_conjugation_diagonal(r).passed


@pytest.mark.parametrize("r", [1, 2])
def test_conjugation_operator_identity(r):
    verdict = check_conjugation(r, 4)
    assert verdict.passed, verdict.witness


def test_airy_limits_at_infinity():
    """Test E_1 = 0 for P = y² − x at the pole of x."""
    airy = airy_curve()
    presentation = presentation_from_polynomial(spectral_polynomial(airy))
    assert curve_limits(presentation, airy.x, airy.y, "inf", "E") == {1: 0}


def test_limits_need_a_finite_presentation():
    lambert = atlantes_curve(1)
    with pytest.raises(ValueError):
        curve_limits(atlantes_presentation(1), lambert.M0, lambert.M2, 0)


@pytest.mark.slow
def test_recursion_wave_function_is_annihilated():
    """Test that ψ built from the compact r = 2 correlators solves the quantum curve."""
    K, x_order = 2, 6
    table = transalgebraic_table(atlantes_curve(2), K, workers=2)
    psi = wave_function(table, 0, K + 1, x_order)
    verdict = verify_annihilation(atlantes_operator(2, K + x_order), psi, K)
    assert verdict.passed, verdict.witness


def test_airy_wave_function_at_infinity(airy_table):
    """Test ψ at the pole of dx at ∞: s = x^{−1/2}, prefactor s^{1/2}, exp((2/3)s^{−3}/ℏ)."""
    psi = wave_function(airy_table, INFINITY, 2, 4)
    assert psi.variable == "s=(lx)^(-1/2)"
    assert psi.singular == {-3: Fraction(2, 3)}
    assert psi.prefactor == Fraction(1, 2)
    assert psi.coefficient(0, 0) == 1
    assert psi.coefficient(1, 0) == 0
    # ∫ω_{1,1} + (1/6)∫∫∫ω_{0,3} = −s³/48 − s³/12
    assert psi.coefficient(3, 1) == Fraction(-5, 48)


def test_wave_function_at_a_simple_pole_of_x():
    """Test the x = z + 1/z, y = z² curve at ∞, where s = 1/x."""
    table = compute_table(appendix_curve(), 1, workers=2)
    psi = wave_function(table, INFINITY, 2, 4)
    assert psi.variable == "s=(lx)^(-1/1)"
    # ∫ y dx = x³/3 − 2x + 1/x + ⋯
    assert psi.singular == {-3: Fraction(1, 3), -1: Fraction(-2)}
    assert psi.prefactor == 0
    assert psi.coefficient(1, -1) == 1
    assert psi.coefficient(0, 0) == 1


def test_wave_function_base_must_be_zero_or_pole(airy_table):
    with pytest.raises(ValueError):
        wave_function(airy_table, 1, 2, 4)
    with pytest.raises(ValueError):
        wave_function(airy_table, 0, 2, 4)


def test_operators_refuse_pole_base_wave_functions(airy_table):
    psi = wave_function(airy_table, INFINITY, 2, 4)
    with pytest.raises(ValueError):
        apply_operator(DiffOperator.y(), psi)
    chart_x = WaveFunction(dict(psi.coeffs), psi.x_order)
    assert not compare_wave_functions(psi, chart_x).passed
