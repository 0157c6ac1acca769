"""
Unit tests for symmetric-group characters, Jucys-Murphy elements and the
Atlantes Hurwitz numbers.
"""

from fractions import Fraction

import pytest

from src.hurwitz import (
    MAX_DIRECT_DEGREE,
    ClassAlgebraElement,
    atlantes_hurwitz,
    atlantes_tau,
    atlantes_weight,
    centralizer_order,
    character,
    check_h01,
    check_h02,
    class_size,
    compare_with_recursion,
    completed_cycles_weight,
    contents,
    cycle_type,
    dimension,
    elementary_jm,
    hurwitz_table,
    jm_power_sum,
    jucys_identity,
    linear_y_hat,
    normalize_partition,
    partitions_of,
    tau_truncate,
)
from src.recursion import CorrelatorTable


def test_partitions_and_normalisation():
    assert partitions_of(3) == ((3,), (2, 1), (1, 1, 1))
    assert len(partitions_of(5)) == 7
    assert normalize_partition([1, 3, 2]) == (3, 2, 1)
    with pytest.raises(ValueError):
        normalize_partition([2, 0])


def test_young_diagram_data():
    assert contents((2, 1)) == [0, 1, -1]
    assert centralizer_order((2, 1, 1)) == 4
    assert class_size((2, 1, 1)) == 6
    assert cycle_type((1, 0, 2)) == (2, 1)


def test_characters():
    """Test Murnaghan-Nakayama values against the S_3 and S_5 character tables."""
    assert character((2, 1), (3,)) == -1
    assert character((2, 1), (1, 1, 1)) == 2
    assert character((1, 1, 1), (2, 1)) == -1
    assert dimension((3, 2)) == 5
    with pytest.raises(ValueError):
        character((2, 1), (2,))


def test_column_orthogonality():
    for mu in partitions_of(4):
        total = sum(character(nu, mu) ** 2 for nu in partitions_of(4))
        assert total == centralizer_order(mu)


def test_class_algebra_product():
    """Test that (Σ transpositions)² = 3·1 + 3·C_(3) in S_3."""
    transpositions = ClassAlgebraElement.class_sum((2, 1))
    square = transpositions * transpositions
    assert square.coeffs == {(1, 1, 1): 3, (3,): 3}
    assert square.identity_coefficient() == 3


def test_class_algebra_rejects_foreign_class():
    with pytest.raises(ValueError):
        ClassAlgebraElement(3, {(2,): Fraction(1)})


@pytest.mark.parametrize("d, r", [(3, 1), (4, 2), (4, 3)])
def test_jm_power_sum_routes_agree(d, r):
    assert jm_power_sum(d, r, "characters").coeffs == jm_power_sum(d, r, "direct").coeffs


def test_first_jm_power_sum_is_the_transposition_class():
    assert jm_power_sum(3, 1).coeffs == {(2, 1): 1}
    assert elementary_jm(3, 1).coeffs == {(2, 1): 1}


def test_direct_route_is_guarded():
    with pytest.raises(ValueError):
        jm_power_sum(MAX_DIRECT_DEGREE + 1, 1, "direct")


@pytest.mark.parametrize("d, b", [(3, 1), (4, 2), (5, 3)])
def test_jucys_identity(d, b):
    """Test σ_b(𝒥) = Σ_{ℓ(α)=d−b} C_α."""
    assert jucys_identity(d, b, "direct").passed
    assert jucys_identity(d, b, "characters").passed


def test_atlantes_hurwitz_small_values():
    assert atlantes_hurwitz(0, (3,), 1) == 1
    assert atlantes_hurwitz(0, (2,), 1) == Fraction(1, 2)
    assert atlantes_hurwitz(0, (3,), 2) == Fraction(1, 3)


@pytest.mark.parametrize(
    "g, mu, r",
    [(0, (3,), 1), (0, (2, 1), 1), (1, (3,), 2), (0, (3, 1), 2), (1, (1, 1), 1)],
)
def test_hurwitz_character_route_matches_brute_force(g, mu, r):
    assert atlantes_hurwitz(g, mu, r, "characters") == atlantes_hurwitz(g, mu, r, "direct")


def test_non_integral_block_count_is_rejected():
    with pytest.raises(ValueError):
        atlantes_hurwitz(0, (2, 1), 2)


def test_tau_function_connected_numbers():
    """Test that log Z recovers the connected single-part numbers."""
    trunc = atlantes_tau(1, 3, 3)
    assert trunc.connected_hurwitz(0, (1,), 1) == 1
    assert trunc.connected_hurwitz(0, (2,), 1) == Fraction(1, 2)
    assert trunc.connected_hurwitz(0, (3,), 1) == atlantes_hurwitz(0, (3,), 1)


def test_tau_unstable_terms():
    assert check_h01(atlantes_tau(2, 4, 2), 4).passed
    assert check_h01(atlantes_tau(1, 4, 2), 4).passed
    assert check_h02(atlantes_tau(1, 4, 3), 3).passed


def test_completed_cycles_weight():
    """Test 𝒮(ℏ∂_y) y² = y² + ℏ²/12."""
    assert completed_cycles_weight(2) == {(0, 2): 1, (1, 0): Fraction(1, 12)}


def test_hurwitz_table_rows():
    rows = hurwitz_table(1, 0, 2)
    assert {"r": 1, "g": 0, "mu": [2], "connected": "1/2"} in rows
    assert all(row["r"] == 1 for row in rows)


def test_comparison_degree_is_bounded_by_truncation(lambert):
    with pytest.raises(ValueError):
        compare_with_recursion(CorrelatorTable(lambert), atlantes_tau(1, 2, 2), 1, 1, 3)


def test_tau_truncation_needs_positive_degree():
    with pytest.raises(ValueError):
        tau_truncate(atlantes_weight(1), linear_y_hat(), 0, 3)


def test_generating_function_drops_the_hbar_sign():
    """Test H against log of Σ xⁿ/(n!ℏⁿ) e^{ℏ n(n−1)/2} at ℏ⁰x³ and ℏ¹x²."""
    assert atlantes_tau(1, 3, 3).H(0, (1, 2)) == Fraction(2, 3)
    assert atlantes_tau(1, 2, 2).H(1, (2,)) == Fraction(1, 12)


def test_comparison_refuses_a_curve_with_other_spectral_data(airy):
    """Test that x·y = z³ is not matched against the tau function's ŷ(0, z) = z."""
    with pytest.raises(ValueError):
        compare_with_recursion(CorrelatorTable(airy), atlantes_tau(1, 3, 2), 0, 3, 2)
