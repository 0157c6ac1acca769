"""
Unit tests for the meromorphic topological recursion and its property checks.
"""

from fractions import Fraction

import pytest

from src.algebra import RatFunc
from src.curve import ramification_locus
from src.curvefile import atlantes_curve, rs_curve
from src.errors import InadmissibleCurveError
from src.recursion import (
    Correlator,
    CorrelatorTable,
    PoleBasis,
    PoleDescriptor,
    check_homogeneity,
    check_loop_equations,
    check_pole_bound,
    check_pole_locations,
    check_projection,
    check_symmetry,
    combine_orderings,
    compute_table,
    euler_keys,
    expand_correlator,
    eynard_orantin_step,
    infinity_descriptor,
    pole_bound,
    populate,
    property_suite,
    recursion_step,
)


def PD(k: int) -> PoleDescriptor:
    """Pole of order k at the orbit of z = 0."""
    return PoleDescriptor(0, 0, k)


def test_euler_keys_are_ordered_by_euler_characteristic():
    assert euler_keys(1) == [(0, 3), (1, 1)]
    assert euler_keys(2) == [(0, 3), (1, 1), (0, 4), (1, 2)]


def test_pole_bound():
    assert pole_bound(3, 1, 1) == 4
    assert pole_bound(3, 0, 3) == 2


def test_infinity_descriptor_serialises_with_tag():
    assert infinity_descriptor(3).to_json() == ["inf", 3]
    assert PD(4).to_json() == [0, 0, 4]


def test_correlator_add_drops_cancelled_terms():
    corr = Correlator(1, 1)
    corr.add((PD(4),), Fraction(1, 3))
    corr.add((PD(4),), Fraction(-1, 3))
    assert corr.terms == {}


def test_correlator_is_symmetric_in_its_keys():
    corr = Correlator(0, 3)
    corr.add((PD(4), PD(2), PD(2)), Fraction(1))
    assert corr.coefficient((PD(2), PD(4), PD(2))) == 1


def test_correlator_json_round_trip(airy_table):
    original = airy_table.get(1, 1)
    restored = Correlator.from_json(original.to_json())
    assert restored.terms == original.terms
    assert restored.provenance == "recursion"


def test_galois_summed_basis_is_rational():
    """Test that Σ_α 1/(z − α) and Σ_α α/(z − α) over ±1/√2 are rational."""
    basis = PoleBasis(ramification_locus(atlantes_curve(2)))
    assert basis.ratfunc(PoleDescriptor(0, 0, 1)) == RatFunc.of(
        [0, 2], [Fraction(-1, 2), 0, 1]
    )
    assert basis.ratfunc(PoleDescriptor(0, 1, 1)) == RatFunc.of(
        [1], [Fraction(-1, 2), 0, 1]
    )


def test_airy_omega_03_and_11(airy_table):
    """Test ω_{0,3} = dz₁dz₂dz₃/(2z₁²z₂²z₃²) and ω_{1,1} = dz/(16z⁴)."""
    assert airy_table.get(0, 3).terms == {(PD(2), PD(2), PD(2)): Fraction(1, 2)}
    assert airy_table.get(1, 1).terms == {(PD(4),): Fraction(1, 16)}


def test_airy_euler_characteristic_two(airy_table):
    """Test the intersection numbers ⟨τ₁τ₀³⟩ = 1 and ⟨τ₂τ₀⟩ = ⟨τ₁²⟩ = 1/24."""
    assert airy_table.get(0, 4).terms == {(PD(2), PD(2), PD(2), PD(4)): Fraction(3, 4)}
    assert airy_table.get(1, 2).terms == {
        (PD(2), PD(6)): Fraction(5, 32),
        (PD(4), PD(4)): Fraction(3, 32),
    }


def test_table_keys_and_lookup(airy_table):
    assert airy_table.stable_keys() == [(0, 3), (1, 1), (0, 4), (1, 2)]
    assert (0, 1) in airy_table
    with pytest.raises(KeyError):
        airy_table.get(2, 1)


def test_recursion_step_rejects_unstable_targets(airy_table):
    with pytest.raises(ValueError):
        recursion_step(airy_table, 0, 2)


def test_inadmissible_curve_is_refused():
    with pytest.raises(InadmissibleCurveError):
        compute_table(rs_curve(3, 5), 1, workers=1)


def test_two_sheet_kernel_agrees_with_general_recursion(airy, airy_table):
    """Test that the simple-ramification kernel reproduces the general residues."""
    table = populate(CorrelatorTable(airy, workers=1), 2, step=eynard_orantin_step)
    for g, n in airy_table.stable_keys():
        assert table.get(g, n).terms == airy_table.get(g, n).terms


def test_two_sheet_kernel_needs_simple_points(rs32_table):
    with pytest.raises(ValueError):
        eynard_orantin_step(rs32_table, 1, 1)


def test_property_suite_on_airy(airy_table):
    verdicts = property_suite(airy_table, homogeneity=False)
    assert verdicts
    assert all(v.passed for v in verdicts), [v.to_dict() for v in verdicts if not v.passed]


def test_structural_checks_on_order_three_point(rs32_table):
    for g, n in rs32_table.stable_keys():
        for check in (check_symmetry, check_pole_locations, check_pole_bound, check_projection):
            verdict = check(rs32_table, g, n)
            assert verdict.passed, verdict.to_dict()


@pytest.mark.slow
def test_homogeneity_of_airy(airy_table):
    """Test that y → 2y rescales ω_{g,n} by 2^(2−2g−n)."""
    assert check_homogeneity(airy_table).passed


def test_expand_correlator_refuses_pinned_slot(airy_table):
    with pytest.raises(ValueError):
        expand_correlator(airy_table, airy_table.get(0, 3), 0, Fraction(0), 4, (Fraction(0), 1))


def test_expand_correlator_at_finite_point(airy_table):
    series = expand_correlator(airy_table, airy_table.get(1, 1), 0, Fraction(0), 0)
    assert series.terms() == {-4: Fraction(1, 16)}


def test_combine_orderings_flags_a_missing_ordering():
    """Test that an ordering no point produced counts as zero against its partner."""
    lopsided = combine_orderings(1, 2, [{(PD(2), PD(4)): Fraction(1)}])
    assert lopsided.terms == {(PD(2), PD(4)): Fraction(1)}
    assert lopsided.symmetry_witnesses == [
        {
            "key": [PD(2).to_json(), PD(4).to_json()],
            "ordering": [PD(4).to_json(), PD(2).to_json()],
            "first": "1/1",
            "second": "0/1",
        }
    ]
    balanced = combine_orderings(
        1, 2, [{(PD(2), PD(4)): Fraction(1)}, {(PD(4), PD(2)): Fraction(1)}]
    )
    assert balanced.symmetry_witnesses == []
    assert balanced.terms == {(PD(2), PD(4)): Fraction(1)}


def test_combine_orderings_drops_keys_that_vanish_everywhere():
    parts = [{(PD(2), PD(2)): Fraction(1)}, {(PD(2), PD(2)): Fraction(-1)}]
    combined = combine_orderings(1, 2, parts)
    assert combined.terms == {}
    assert combined.symmetry_witnesses == []


def test_loop_equations_at_order_three_point(rs32_table):
    point = next(p for p in ramification_locus(rs32_table.curve) if p.contributes())
    assert point.order == 3
    for g, n in rs32_table.stable_keys():
        for i in range(1, 4):
            verdict = check_loop_equations(rs32_table, g, n, point, i)
            assert verdict.passed, verdict.to_dict()


@pytest.mark.slow
def test_loop_equations_of_omega_12_at_order_three_point():
    table = compute_table(rs_curve(3, 2), 2, workers=2)
    point = next(p for p in ramification_locus(table.curve) if p.contributes())
    for i in range(1, 4):
        verdict = check_loop_equations(table, 1, 2, point, i)
        assert verdict.passed, verdict.to_dict()
