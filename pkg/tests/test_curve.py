"""
Unit tests for spectral curves: ramification, admissibility, regularity and
finite-N approximations.
"""

from fractions import Fraction

import pytest
import sympy

from src.algebra import INFINITY, Poly, RatFunc
from src.curve import (
    MeromorphicCurve,
    RamificationPoint,
    TransalgebraicCurve,
    curve_hash,
    deck_transformations,
    finite_N_curve,
    is_admissible,
    is_mobius,
    is_regular,
    local_invariants,
    m1_in_terms_of_m2,
    mobius_inverse,
    newton_polygon,
    ramification_locus,
    separates_points,
    spectral_polynomial,
)
from src.curvefile import appendix_curve, atlantes_curve, q_orbifold_curve, rs_curve


def test_constant_x_is_rejected():
    with pytest.raises(ValueError):
        MeromorphicCurve(RatFunc.constant(1), RatFunc.variable())


def test_constant_m1_is_rejected():
    z = RatFunc.variable()
    with pytest.raises(ValueError):
        TransalgebraicCurve(z, RatFunc.constant(2), z)


def test_airy_ramification_locus(airy):
    """Test that Airy has (r, s) = (2, 3) at 0 and a non-contributing point at ∞."""
    locus = ramification_locus(airy)
    contributing = [p for p in locus if p.contributes()]
    assert len(contributing) == 1
    point = contributing[0]
    assert point.location == 0
    assert (point.order, point.s) == (2, 3)
    assert point.minimal_polynomial == Poly((0, 1))
    at_infinity = [p for p in locus if p.at_infinity]
    assert len(at_infinity) == 1
    assert at_infinity[0].pole_of_x
    assert at_infinity[0].s is not None and at_infinity[0].s <= -1


def test_local_invariants_of_rs_curves():
    assert local_invariants(rs_curve(3, 2), Fraction(0)) == (3, 2)
    assert local_invariants(rs_curve(3, 5), Fraction(0)) == (3, 5)


def test_atlantes_ramification_points(atlantes2):
    """Test that Atlantes r = 2 ramifies at ±1/√2 with (r, s) = (2, 3)."""
    locus = ramification_locus(atlantes2)
    finite = [p for p in locus if p.kind == "finite"]
    assert len(finite) == 1
    orbit = finite[0]
    assert orbit.minimal_polynomial == Poly((Fraction(-1, 2), 0, 1))
    assert orbit.degree == 2
    assert (orbit.order, orbit.s) == (2, 3)
    essential = [p for p in locus if p.kind == "infinite"]
    assert len(essential) == 1
    assert essential[0].at_infinity
    assert essential[0].pole_orders == (1, 2, 1)


def test_lambert_curve_is_simply_ramified_at_one(lambert):
    finite = [p for p in ramification_locus(lambert) if p.kind == "finite"]
    assert [(p.location, p.order, p.s) for p in finite] == [(1, 2, 3)]


def test_admissibility_verdicts():
    """Test the coprimality and r = ±1 mod s conditions."""
    assert is_admissible(rs_curve(3, 2)).admissible
    too_large = is_admissible(rs_curve(3, 5))
    assert not too_large.admissible
    assert "violates" in too_large.verdicts[0].reason
    not_coprime = is_admissible(rs_curve(4, 6))
    assert not not_coprime.admissible
    assert "coprime" in not_coprime.verdicts[0].reason


def test_airy_point_is_flagged(airy):
    """Test that s = r + 1 is admissible and flagged."""
    verdict = is_admissible(airy).verdicts[0]
    assert verdict.admissible
    assert verdict.flagged


def test_essential_point_needs_pole_of_m2():
    z = RatFunc.variable()
    curve = TransalgebraicCurve(z, RatFunc.of([0, -1]), RatFunc.constant(2))
    report = is_admissible(curve)
    assert not report.admissible
    assert any("regular at a pole of M1" in v.reason for v in report.verdicts)


def test_admissibility_report_to_dict(atlantes2):
    data = is_admissible(atlantes2).to_dict()
    assert data["admissible"] is True
    assert len(data["points"]) == 2


def test_deck_transformation_of_airy(airy):
    """Test that the Airy involution is σ(t) = −t."""
    point = [p for p in ramification_locus(airy) if p.contributes()][0]
    sigmas = deck_transformations(airy, point, 6)
    assert len(sigmas) == 1
    assert sigmas[0].terms() == {1: -1}


def test_deck_transformations_of_order_three():
    curve = rs_curve(3, 2)
    point = [p for p in ramification_locus(curve) if p.contributes()][0]
    sigmas = deck_transformations(curve, point, 5)
    assert len(sigmas) == 2


def test_deck_transformations_need_finite_point():
    point = RamificationPoint(0, INFINITY, None, None, None, "infinite", pole_orders=(1, 2, 1))
    with pytest.raises(ValueError):
        deck_transformations(atlantes_curve(2), point, 4)


def test_finite_n_curve_of_lambert(lambert):
    """Test x_N = z/(1 + z) and y_N = 1 + z at N = 1, τ = 0."""
    curve = finite_N_curve(lambert, 1)
    assert curve.x == RatFunc.of([0, 1], [1, 1])
    assert curve.y == RatFunc.of([1, 1])
    with pytest.raises(ValueError):
        finite_N_curve(lambert, 0)


def test_finite_n_curve_depends_on_tau(lambert):
    assert finite_N_curve(lambert, 2, 0).x != finite_N_curve(lambert, 2, Fraction(1, 2)).x


def test_curve_hash_ignores_label():
    """Test that the hash depends on the curve data only."""
    assert curve_hash(rs_curve(2, 3)) == curve_hash(MeromorphicCurve(
        RatFunc.of([0, 0, 1]), RatFunc.of([0, 1]), "other"
    ))
    assert curve_hash(rs_curve(2, 3)) != curve_hash(rs_curve(3, 2))


def test_newton_polygon_rows():
    polygon = newton_polygon({(0, 0): 1, (2, 0): 1, (0, 2): 1})
    assert polygon.alpha(0) == 0
    assert polygon.beta(0) == 2
    assert polygon.beta(1) == 1
    assert not polygon.has_interior_point()
    with pytest.raises(ValueError):
        polygon.alpha(3)


def test_appendix_curve_is_not_regular():
    """Test that y² + (2 − x²)y + 1 has the interior lattice point (1, 1)."""
    curve = appendix_curve()
    P = spectral_polynomial(curve)
    assert set(P) == {(0, 0), (0, 1), (2, 1), (0, 2)}
    assert newton_polygon(P).interior_points() == [(1, 1)]
    assert not is_regular(curve)


def test_airy_is_regular(airy):
    assert is_regular(airy)


def test_transalgebraic_regularity_uses_m2():
    assert is_regular(atlantes_curve(3))
    assert not is_regular(q_orbifold_curve(2, 1))


def test_mobius_helpers():
    f = RatFunc.of([1, 2], [3, 1])
    assert is_mobius(f)
    assert f.compose(mobius_inverse(f)) == RatFunc.variable()
    assert not is_mobius(RatFunc.of([0, 0, 1]))
    with pytest.raises(ValueError):
        mobius_inverse(RatFunc.of([0, 0, 1]))


def test_m1_in_terms_of_m2():
    assert m1_in_terms_of_m2(atlantes_curve(2)) == RatFunc.of([0, 0, -1])
    assert m1_in_terms_of_m2(q_orbifold_curve(2, 1)) is None


def test_separates_points(airy):
    assert separates_points(airy)["separates"]
    square = MeromorphicCurve(RatFunc.of([0, 0, 1]), RatFunc.of([0, 0, 1]), "square")
    assert not separates_points(square)["separates"]


def test_separation_samples_are_seeded(airy):
    first = separates_points(airy)
    assert first["method"] == "resultant-degree+sampling"
    assert len(first["samples"]) == 8
    assert first["samples"] == separates_points(airy)["samples"]
    assert first["samples"] != separates_points(airy, seed=7)["samples"]
    assert first["collisions"] == []


def test_sampling_finds_second_preimages():
    """Test that every sample of z ↦ (z², z²) reports its partner −a."""
    square = MeromorphicCurve(RatFunc.of([0, 0, 1]), RatFunc.of([0, 0, 1]), "square")
    report = separates_points(square, samples=3)
    nonzero = [s for s in report["samples"] if Fraction(s) != 0]
    assert len(report["collisions"]) == len(nonzero) > 0
    for collision in report["collisions"]:
        a = Fraction(collision["sample"])
        assert sympy.sympify(collision["other_preimages"]).subs("z", -a) == 0


def test_transalgebraic_separation_uses_m0_m1_m2():
    assert separates_points(atlantes_curve(2))["method"] == "M2-nonconstant+sampling"
    assert separates_points(atlantes_curve(2))["separates"]
    even = TransalgebraicCurve(RatFunc.of([0, 0, 1]), RatFunc.of([0, 0, 1]), RatFunc.of([0, 0, 1]))
    report = separates_points(even)
    assert not report["separates"]
    assert report["collisions"]
