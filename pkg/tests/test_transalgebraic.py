"""
Unit tests for transalgebraic curves: essential-singularity contributions,
compact tables and the finite-N experiment guard.
"""

from fractions import Fraction

import pytest

from src.algebra import INFINITY, RatFunc
from src.curve import RamificationPoint, TransalgebraicCurve, ramification_locus
from src.curvefile import atlantes_curve, q_orbifold_curve
from src.errors import ConjecturalContributionError
from src.recursion import INFINITY_ORBIT, infinity_descriptor
from src.transalgebraic import (
    ExpRational,
    atlantes_family_parameters,
    bernoulli_g1_form,
    bernoulli_prefactor,
    check_essential_bound,
    direct_formula_g1,
    essential_contribution,
    finite_N_experiment,
    meromorphic_table,
    transalgebraic_table,
)


@pytest.fixture
def conjectural_curve():
    """M0 = z, M1 = −z⁵, M2 = z + 1: outside the Atlantes family."""
    z = RatFunc.variable()
    return TransalgebraicCurve(z, RatFunc.of([0, 0, 0, 0, 0, -1]), RatFunc.of([1, 1]), "quintic")


@pytest.fixture
def quintic_locus():
    return [RamificationPoint(0, INFINITY, None, None, None, "infinite", pole_orders=(1, 5, 1))]


def test_bernoulli_prefactor():
    assert bernoulli_prefactor(1) == Fraction(-1, 24)
    assert bernoulli_prefactor(2) == Fraction(7, 5760)


def test_atlantes_family_parameters():
    assert atlantes_family_parameters(atlantes_curve(3)) == (1, 3)
    assert atlantes_family_parameters(q_orbifold_curve(2, 2)) == (2, 2)


def test_atlantes_family_rejects_other_curves(conjectural_curve):
    assert atlantes_family_parameters(conjectural_curve) is None


@pytest.mark.parametrize(
    "r, expected",
    [(2, Fraction(-1, 12)), (3, Fraction(-1, 4))],
)
def test_atlantes_genus_one_contribution(r, expected):
    """Test the −r(r−1)/24 · z^{r−2} dz correction to ω_{1,1}."""
    contribution = essential_contribution(atlantes_curve(r), 1)
    assert contribution.terms == {infinity_descriptor(r): expected}
    assert contribution.provenance == "proved"
    assert not contribution.vanishing


def test_lambert_contribution_vanishes(lambert):
    """Test that 2g·m2 ≥ m1 + m2 switches the correction off for r = 1."""
    contribution = essential_contribution(lambert, 1)
    assert contribution.vanishing
    assert contribution.terms == {}


def test_q_orbifold_contribution():
    contribution = essential_contribution(q_orbifold_curve(2, 2), 1)
    assert contribution.terms == {infinity_descriptor(3): Fraction(-1, 6)}


def test_genus_zero_has_no_essential_contribution(atlantes2):
    with pytest.raises(ValueError):
        essential_contribution(atlantes2, 0)


def test_conjectural_contribution_needs_opt_in(conjectural_curve, quintic_locus):
    with pytest.raises(ConjecturalContributionError):
        essential_contribution(conjectural_curve, 2, locus=quintic_locus)


def test_conjectural_contribution_when_allowed(conjectural_curve, quintic_locus):
    """Test 7/5760 · D⁴M1 = 7/48 · z dz with D = d/dM2."""
    contribution = essential_contribution(
        conjectural_curve, 2, allow_conjectural=True, locus=quintic_locus
    )
    assert contribution.provenance == "conjectural"
    assert contribution.terms == {infinity_descriptor(3): Fraction(7, 48)}


def test_genus_one_is_always_proved(conjectural_curve, quintic_locus):
    contribution = essential_contribution(conjectural_curve, 1, locus=quintic_locus)
    assert contribution.provenance == "proved"


def test_bernoulli_form_matches_contribution(atlantes2):
    assert bernoulli_g1_form(atlantes2) == essential_contribution(atlantes2, 1).terms


def test_essential_bound(atlantes2):
    locus = ramification_locus(atlantes2)
    result = check_essential_bound(essential_contribution(atlantes2, 1, locus=locus), locus)
    assert result["passed"]
    assert result["failures"] == []


def test_contribution_json(atlantes2):
    data = essential_contribution(atlantes2, 1).to_json()
    assert data["terms"] == [{"pole": ["inf", 2], "coeff": "-1/12"}]


def test_compact_table_carries_essential_pole(atlantes2):
    """Test that ω_{1,1} of the compact curve picks up the pole at ∞."""
    table = transalgebraic_table(atlantes2, 1, workers=2)
    omega11 = table.get(1, 1)
    assert omega11.coefficient((infinity_descriptor(2),)) == Fraction(-1, 12)
    assert "essential" in omega11.provenance
    assert table.mode == "transalgebraic"


def test_meromorphic_table_ignores_essential_points(atlantes2):
    table = meromorphic_table(atlantes2, 1, workers=2)
    for g, n in table.stable_keys():
        for key in table.get(g, n).terms:
            assert all(d.orbit != INFINITY_ORBIT for d in key)


def test_compact_and_meromorphic_agree_for_n_at_least_two(atlantes2):
    compact = transalgebraic_table(atlantes2, 1, workers=2)
    meromorphic = meromorphic_table(atlantes2, 1, workers=2)
    assert compact.get(0, 3).terms == meromorphic.get(0, 3).terms


def test_exp_rational_quotient_and_dominant_grade(atlantes2):
    x = ExpRational.x_of(atlantes2)
    assert x.derivative().quotient(x) == atlantes2.log_dx_density()
    assert (x * x).grades() == [2]
    assert (x * x + x).dominant().grades() == [2]
    with pytest.raises(ValueError):
        (x * x).quotient(x)
    assert x.derivative().terms[1] == RatFunc.of([1, 0, -2])


def test_direct_formula_needs_m1_in_terms_of_m2():
    z = RatFunc.variable()
    curve = TransalgebraicCurve(z, RatFunc.of([0, 0, 0, -1]), RatFunc.of([0, 0, 1]))
    with pytest.raises(ValueError):
        direct_formula_g1(curve)


@pytest.mark.parametrize("Ns", [(1, 2), (2, 6)])
def test_finite_n_experiment_guards_n(lambert, Ns):
    with pytest.raises(ValueError):
        finite_N_experiment(lambert, Ns=Ns)


@pytest.mark.parametrize("q, r", [(1, 2), (1, 3), (2, 2)])
def test_direct_formula_matches_essential_contribution(q, r):
    """Test the exact Taylor residue of the direct g = 1 formula on the q-orbifold family."""
    curve = q_orbifold_curve(q, r)
    locus = ramification_locus(curve)
    expected = essential_contribution(curve, 1, locus=locus).terms
    assert direct_formula_g1(curve, locus).terms == expected


def test_bernoulli_form_with_nontrivial_m0_and_m2():
    """Test the log x route where M0 and M2 are not z."""
    m2 = RatFunc.of([1, 2])
    curve = TransalgebraicCurve(RatFunc.of([-1, 1]) * 2, RatFunc.of([0, 0, -1]).compose(m2), m2)
    locus = ramification_locus(curve)
    assert bernoulli_g1_form(curve, locus) == essential_contribution(curve, 1, locus=locus).terms


def test_finite_n_experiment_needs_a_real_point():
    """Test that M1 = z², ramified only at z² = −1/2, is reported rather than indexed."""
    z = RatFunc.variable()
    curve = TransalgebraicCurve(z, RatFunc.of([0, 0, 1]), z, "no-real-point")
    with pytest.raises(ValueError, match="real point"):
        finite_N_experiment(curve, Ns=(2, 3))
