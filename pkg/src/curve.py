"""
Spectral curves on the Riemann sphere.

This module represents meromorphic curves (x, y rational) and transalgebraic
curves (x = M0·exp(M1), y = M2/x), locates their ramification points as Galois
orbits, computes the local invariants (r_a, s_a), admissibility, regularity,
Newton polygons, local deck transformations and the finite-N approximations.
"""

import hashlib
import json
import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Any, ClassVar, Dict, List, Optional, Tuple, Union

import sympy
from sympy.geometry import Point, Polygon, Segment, convex_hull

from src.algebra import (
    INFINITY,
    NumberField,
    NumberFieldElement,
    PointAtInfinity,
    Poly,
    RatFunc,
    TruncatedSeries,
    cyclotomic_field,
    factor_over_rationals,
    format_scalar,
    lagrange_invert,
    series_compose,
)
from src.errors import PrecisionError

logging.basicConfig(
    level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)
logger = logging.getLogger(__name__)

MAX_LOCAL_ORDER = 256
SEPARATION_SAMPLES = 8
SEPARATION_SEED = 20240601


@dataclass(frozen=True)
class MeromorphicCurve:
    """
    Genus-zero meromorphic spectral curve (P¹, x, y, dz₁dz₂/(z₁−z₂)²).

    Attributes:
        x: Rational function x(z).
        y: Rational function y(z).
        label: Free-form name used in reports.
    """

    x: RatFunc
    y: RatFunc
    label: str = ""

    kind: ClassVar[str] = "meromorphic"

    def __post_init__(self) -> None:
        if self.x.is_constant():
            logger.error(f"Curve {self.label!r} has constant x")
            raise ValueError("x must be nonconstant")

    def omega01_density(self) -> RatFunc:
        """Coefficient of dz in ω_{0,1} = y dx."""
        return self.y * self.x.derivative()

    def product(self) -> RatFunc:
        return self.x * self.y

    def local_x(self, point: Any, order: int) -> TruncatedSeries:
        return self.x.laurent(point, order)

    def local_y(self, point: Any, order: int) -> TruncatedSeries:
        return self.y.laurent(point, order)

    def candidate_polynomial(self) -> Poly:
        """Polynomial whose roots contain every finite ramification point."""
        dx = self.x.derivative()
        if dx.is_zero():
            raise ValueError("dx vanishes identically")
        return dx.num * self.x.den

    def is_essential(self, point: Any) -> bool:
        return False

    def rescaled(self, factor: Any) -> "MeromorphicCurve":
        """The curve with y replaced by factor·y."""
        return MeromorphicCurve(self.x, self.y * factor, f"{self.label}*{factor}")

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "x": self.x.to_text(), "y": self.y.to_text()}


@dataclass(frozen=True)
class TransalgebraicCurve:
    """
    Compact transalgebraic curve on P¹ with x = M0·exp(M1) and y = M2/x.

    Attributes:
        M0: Nonzero rational function.
        M1: Nonconstant rational function; its poles are the essential points.
        M2: The rational function x·y.
        label: Free-form name used in reports.
    """

    M0: RatFunc
    M1: RatFunc
    M2: RatFunc
    label: str = ""

    kind: ClassVar[str] = "transalgebraic"

    def __post_init__(self) -> None:
        if self.M1.is_constant():
            logger.error(f"Curve {self.label!r} has constant M1")
            raise ValueError("M1 must be nonconstant; enter the curve as meromorphic")
        if self.M0.is_zero():
            raise ValueError("M0 must be nonzero")

    def log_dx_density(self) -> RatFunc:
        """Coefficient of dz in dx/x = d log M0 + dM1."""
        return self.M0.derivative() / self.M0 + self.M1.derivative()

    def omega01_density(self) -> RatFunc:
        return self.M2 * self.log_dx_density()

    def product(self) -> RatFunc:
        return self.M2

    def is_essential(self, point: Any) -> bool:
        if isinstance(point, PointAtInfinity):
            return self.M1.num.degree() > self.M1.den.degree()
        return self.M1.den(point) == 0

    def _shift_exponent(self, point: Any, order: int, sign: int) -> TruncatedSeries:
        base = self.M1.laurent(point, max(order, 1))
        delta = base - base.coefficient(0) if base.order > 0 else base
        return (delta * sign).exp()

    def local_x(self, point: Any, order: int) -> TruncatedSeries:
        """x(a+t)/exp(M1(a)), exact to the requested order."""
        if self.is_essential(point):
            raise ValueError(f"{point!r} is an essential singularity of x")
        m0 = self.M0.laurent(point, order)
        return m0 * self._shift_exponent(point, order - m0.valuation, 1)

    def local_y(self, point: Any, order: int) -> TruncatedSeries:
        """y(a+t)·exp(M1(a)); pairs with ``local_x`` so that y dx is exact."""
        if self.is_essential(point):
            raise ValueError(f"{point!r} is an essential singularity of x")
        ratio = (self.M2 / self.M0).laurent(point, order)
        return ratio * self._shift_exponent(point, order - ratio.valuation, -1)

    def candidate_polynomial(self) -> Poly:
        log_dx = self.log_dx_density()
        if log_dx.is_zero():
            raise ValueError("dx vanishes identically")
        return log_dx.num * self.M0.num * self.M0.den

    def rescaled(self, factor: Any) -> "TransalgebraicCurve":
        return TransalgebraicCurve(
            self.M0, self.M1, self.M2 * factor, f"{self.label}*{factor}"
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "M0": self.M0.to_text(),
            "M1": self.M1.to_text(),
            "M2": self.M2.to_text(),
        }


Curve = Union[MeromorphicCurve, TransalgebraicCurve]


def curve_hash(c: Curve) -> str:
    """Stable SHA-256 of the canonical curve data."""
    text = json.dumps(c.to_dict(), sort_keys=True)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class RamificationPoint:
    """
    A ramification point, stored as a representative of its Galois orbit.

    Attributes:
        orbit: Index of this orbit in the curve's ramification locus.
        location: Fraction, NumberFieldElement (a root of ``minimal_polynomial``)
            or INFINITY.
        minimal_polynomial: Monic irreducible polynomial of the location, None at ∞.
        order: Ramification order r_a; None for essential singularities.
        s: The invariant s_a; None when undefined or essential.
        kind: "finite" or "infinite".
        pole_of_x: Whether x has a pole at the point.
        pole_orders: (m0, m1, m2) pole orders of M0, M1, M2 at essential points.
    """

    orbit: int
    location: Any
    minimal_polynomial: Optional[Poly]
    order: Optional[int]
    s: Optional[int]
    kind: str
    pole_of_x: bool = False
    pole_orders: Optional[Tuple[int, int, int]] = None

    @property
    def degree(self) -> int:
        if self.minimal_polynomial is None:
            return 1
        return self.minimal_polynomial.degree()

    @property
    def field(self) -> Optional[NumberField]:
        if isinstance(self.location, NumberFieldElement):
            return self.location.field
        return None

    @property
    def at_infinity(self) -> bool:
        return isinstance(self.location, PointAtInfinity)

    def contributes(self) -> bool:
        """Finite-order points with s_a ≥ 1 enter the residue sum."""
        return self.kind == "finite" and self.s is not None and self.s >= 1

    def describe(self) -> Dict[str, Any]:
        return {
            "orbit": self.orbit,
            "minimal_polynomial": (
                self.minimal_polynomial.to_text() if self.minimal_polynomial else None
            ),
            "at_infinity": self.at_infinity,
            "order": self.order,
            "s": self.s,
            "kind": self.kind,
            "pole_of_x": self.pole_of_x,
            "pole_orders": list(self.pole_orders) if self.pole_orders else None,
        }


@dataclass(frozen=True)
class LocalChart:
    """
    Local uniformiser at a finite ramification point.

    ``zeta`` is ζ(t) with x = x(a) + c·ζ^r (or x = c·ζ^(-r) at poles of x) in the
    coordinate t = z − a (w = 1/z at ∞); ``t_of_zeta`` is its inverse.
    """

    order: int
    pole_of_x: bool
    zeta: TruncatedSeries
    t_of_zeta: TruncatedSeries
    base: TruncatedSeries


def _location_of(factor: Poly) -> Any:
    if factor.degree() == 1:
        return -factor.coeffs[0]
    return NumberField(factor).generator()


def omega01_local(c: Curve, point: Any, order: int) -> TruncatedSeries:
    """Density of ω_{0,1} in the local coordinate t (dt-coefficient)."""
    density = c.omega01_density()
    if isinstance(point, PointAtInfinity):
        return density.laurent(point, order + 2).shift(-2) * -1
    return density.laurent(point, order)


def _local_base(c: Curve, point: Any, order: int) -> Tuple[TruncatedSeries, bool]:
    """x − x(a) at a regular value, or 1/x at a pole, as a series in t."""
    x_loc = c.local_x(point, order)
    if x_loc.valuation < 0:
        return x_loc.inverse(), True
    return x_loc - x_loc.coefficient(0), False


def ramification_order(c: Curve, point: Any) -> Tuple[int, bool]:
    """Ramification order of x at a non-essential point and whether x has a pole."""
    order = 8
    while order <= MAX_LOCAL_ORDER:
        base, is_pole = _local_base(c, point, order)
        if base.coeffs:
            return base.valuation, is_pole
        order *= 2
    raise ValueError(f"x is locally constant at {point!r}")


def local_chart(c: Curve, point: Any, order: int) -> LocalChart:
    """
    Build ζ(t) and t(ζ) to absolute order ``order``.

    Args:
        c: The curve.
        point: Finite location or INFINITY (must not be essential).
        order: Truncation order of ζ(t) and t(ζ).
    """
    r, is_pole = ramification_order(c, point)
    if is_pole:
        x_loc = c.local_x(point, order - r - 1)
        base = x_loc.inverse()
    else:
        base, _ = _local_base(c, point, order + r - 1)
    unit = base.shift(-r)
    unit = unit * (1 / unit.coefficient(0))
    zeta = unit.power(Fraction(1, r)).shift(1)
    return LocalChart(r, is_pole, zeta, lagrange_invert(zeta), base)


def local_invariants(c: Curve, point: Any) -> Tuple[int, Optional[int]]:
    """
    Compute (r_a, s_a) from the ζ_a-expansion of ω_{0,1}.

    Returns:
        The ramification order and s_a, or None for s_a when every nonzero
        coefficient t_k has r_a | k.

    Raises:
        ValueError: If ω_{0,1} vanishes identically near the point.
    """
    if c.omega01_density().is_zero():
        logger.error("omega_{0,1} vanishes identically")
        raise ValueError("omega_{0,1} is identically zero")
    r, _ = ramification_order(c, point)
    density_val = c.omega01_density().valuation_at(point)
    if isinstance(point, PointAtInfinity):
        density_val -= 2
    width = 2 * r + 6
    while True:
        chart = local_chart(c, point, width)
        dens = omega01_local(c, point, density_val + width)
        form = series_compose(dens, chart.t_of_zeta) * chart.t_of_zeta.derivative()
        for exponent, coeff in sorted(form.terms().items()):
            k = exponent + 1
            if k % r != 0:
                return r, k
        if width >= 4 * r + 24:
            return r, None
        width *= 2


def ramification_locus(c: Curve) -> List[RamificationPoint]:
    """
    All ramification points of x, finite ones grouped by Galois orbit.

    Finite points are zeros of dx and poles of x of order ≥ 2; for transalgebraic
    curves the poles of M1 are added as infinite points.

    Raises:
        ValueError: If dx vanishes identically.
    """
    points: List[RamificationPoint] = []
    for factor, _ in factor_over_rationals(c.candidate_polynomial()):
        location = _location_of(factor)
        if c.is_essential(location):
            continue
        r, is_pole = ramification_order(c, location)
        if r < 2:
            continue
        _, s = local_invariants(c, location)
        points.append(
            RamificationPoint(
                len(points), location, factor, r, s, "finite", pole_of_x=is_pole
            )
        )
    if not c.is_essential(INFINITY):
        r, is_pole = ramification_order(c, INFINITY)
        if r >= 2:
            _, s = local_invariants(c, INFINITY)
            points.append(
                RamificationPoint(
                    len(points), INFINITY, None, r, s, "finite", pole_of_x=is_pole
                )
            )
    if isinstance(c, TransalgebraicCurve):
        essential: List[Tuple[Any, Optional[Poly]]] = [
            (_location_of(f), f) for f, _ in factor_over_rationals(c.M1.den)
        ]
        if c.is_essential(INFINITY):
            essential.append((INFINITY, None))
        for location, factor in essential:
            m0 = -c.M0.valuation_at(location)
            m1 = -c.M1.valuation_at(location)
            m2 = -c.M2.valuation_at(location) if not c.M2.is_zero() else 0
            points.append(
                RamificationPoint(
                    len(points),
                    location,
                    factor,
                    None,
                    None,
                    "infinite",
                    pole_orders=(m0, m1, m2),
                )
            )
    logger.debug(f"Ramification locus of {c.label!r}: {len(points)} orbits")
    return points


@dataclass
class PointVerdict:
    """Admissibility verdict at one ramification point."""

    orbit: int
    admissible: bool
    reason: str
    flagged: bool = False


@dataclass
class AdmissibilityReport:
    """Per-point admissibility verdicts and the overall result."""

    verdicts: List[PointVerdict] = field(default_factory=list)

    @property
    def admissible(self) -> bool:
        return all(v.admissible for v in self.verdicts)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "admissible": self.admissible,
            "points": [vars(v) for v in self.verdicts],
        }


def _finite_verdict(point: RamificationPoint) -> PointVerdict:
    r, s = point.order, point.s
    assert r is not None
    if s is None:
        return PointVerdict(point.orbit, False, "s undefined: y is locally a function of x")
    if gcd(r, abs(s)) != 1:
        return PointVerdict(point.orbit, False, f"r={r} and s={s} are not coprime")
    if s <= -1:
        return PointVerdict(point.orbit, True, f"s={s} <= -1 (no contribution)")
    if 1 <= s <= r + 1 and (r % s in (1 % s, (s - 1) % s)):
        return PointVerdict(
            point.orbit, True, f"(r, s) = ({r}, {s})", flagged=(s == r + 1)
        )
    return PointVerdict(point.orbit, False, f"(r, s) = ({r}, {s}) violates r = ±1 mod s")


def is_admissible(
    c: Curve, locus: Optional[List[RamificationPoint]] = None
) -> AdmissibilityReport:
    """
    Check admissibility at finite points and the M2-pole condition at essential ones.

    Args:
        c: The curve.
        locus: Precomputed ramification locus, recomputed when omitted.
    """
    locus = ramification_locus(c) if locus is None else locus
    report = AdmissibilityReport()
    for point in locus:
        if point.kind == "finite":
            report.verdicts.append(_finite_verdict(point))
        else:
            assert point.pole_orders is not None
            m2 = point.pole_orders[2]
            if m2 >= 1:
                report.verdicts.append(
                    PointVerdict(point.orbit, True, f"M2 has a pole of order {m2}")
                )
            else:
                report.verdicts.append(
                    PointVerdict(point.orbit, False, "M2 is regular at a pole of M1")
                )
    return report


def root_of_unity(point: RamificationPoint) -> Any:
    """A primitive r_a-th root of unity compatible with the point's field."""
    r = point.order
    assert r is not None
    if r == 1:
        return Fraction(1)
    if r == 2:
        return Fraction(-1)
    if point.field is not None:
        logger.error(
            f"Orbit {point.orbit} has degree {point.degree} and order {r} > 2"
        )
        raise ValueError(
            "Roots of unity are only adjoined at rational ramification points"
        )
    return cyclotomic_field(r).generator()


def deck_transformations(
    c: Curve, point: RamificationPoint, order: int
) -> List[TruncatedSeries]:
    """
    The r_a − 1 nontrivial local deck transformations σ_m(t) = ζ⁻¹(θ^m ζ(t)).

    Args:
        c: The curve.
        point: A finite ramification point.
        order: Truncation order of each series in t.

    Returns:
        Series σ_1, …, σ_{r−1}, each verified to satisfy x∘σ = x exactly.

    Raises:
        PrecisionError: If the exact check x∘σ = x fails.
    """
    if point.kind != "finite" or point.order is None:
        raise ValueError("Deck transformations need a finite ramification point")
    chart = local_chart(c, point.location, order)
    theta = root_of_unity(point)
    result = []
    for m in range(1, point.order):
        rotated = chart.zeta * (theta**m)
        sigma = series_compose(chart.t_of_zeta, rotated)
        check = series_compose(chart.base, sigma) - chart.base
        if not check.is_zero():
            logger.error(f"Deck transformation {m} at orbit {point.orbit} fails x∘σ = x")
            raise PrecisionError(
                "Deck transformation failed exactness check", required_order=2 * order
            )
        result.append(sigma)
    return result


def finite_N_curve(c: TransalgebraicCurve, N: int, tau: Any = 0) -> MeromorphicCurve:
    """
    The approximating curve x_N = M0(1+(τ−1)M1/N)^(−N)(1+τM1/N)^N, y_N = M2/x_N.

    Raises:
        ValueError: If N < 1 or x_N degenerates to a constant.
    """
    if N < 1:
        raise ValueError("N must be positive")
    tau = Fraction(tau)
    first = (c.M1 * ((tau - 1) / N) + 1) ** (-N)
    second = (c.M1 * (tau / N) + 1) ** N
    x_n = c.M0 * first * second
    if x_n.is_constant():
        logger.error(f"x_N is constant for N={N}, tau={tau}")
        raise ValueError("Degenerate finite-N curve")
    return MeromorphicCurve(x_n, c.M2 / x_n, f"{c.label}-N{N}-tau{tau}")


# ---------------------------------------------------------------------------
# Newton polygons and regularity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NewtonPolygon:
    """
    Convex hull Δ of the exponent support of P(x, y) = Σ c_{a,m} x^a y^m.

    Attributes:
        support: Exponent pairs (a, m) with nonzero coefficient.
        vertices: Hull vertices in counterclockwise order.
    """

    support: Tuple[Tuple[int, int], ...]
    vertices: Tuple[Tuple[Fraction, Fraction], ...]

    def _row(self, m: int) -> List[Fraction]:
        xs: List[Fraction] = []
        verts = self.vertices
        if len(verts) == 1:
            return [verts[0][0]] if verts[0][1] == m else []
        for i in range(len(verts)):
            (x0, y0), (x1, y1) = verts[i], verts[(i + 1) % len(verts)]
            if y0 == y1:
                if y0 == m:
                    xs.extend([x0, x1])
            elif min(y0, y1) <= m <= max(y0, y1):
                xs.append(x0 + (m - y0) * (x1 - x0) / (y1 - y0))
        return xs

    def alpha(self, m: int) -> Fraction:
        """inf{a : (a, m) ∈ Δ}."""
        row = self._row(m)
        if not row:
            raise ValueError(f"Row {m} does not meet the Newton polygon")
        return min(row)

    def beta(self, m: int) -> Fraction:
        """sup{a : (a, m) ∈ Δ}."""
        row = self._row(m)
        if not row:
            raise ValueError(f"Row {m} does not meet the Newton polygon")
        return max(row)

    def interior_points(self) -> List[Tuple[int, int]]:
        if len(self.vertices) < 3:
            return []
        polygon = Polygon(*[Point(x, y) for x, y in self.vertices])
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        found = []
        for a in range(int(min(xs)), int(max(xs)) + 1):
            for m in range(int(min(ys)), int(max(ys)) + 1):
                if polygon.encloses_point(Point(a, m)):
                    found.append((a, m))
        return found

    def has_interior_point(self) -> bool:
        return bool(self.interior_points())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "support": [list(p) for p in self.support],
            "vertices": [[str(x), str(y)] for x, y in self.vertices],
            "interior_points": [list(p) for p in self.interior_points()],
        }


def newton_polygon(P: Dict[Tuple[int, int], Any]) -> NewtonPolygon:
    """
    Newton polygon of bivariate polynomial data {(a, m): coefficient}.

    Raises:
        ValueError: If P has no nonzero coefficient.
    """
    support = tuple(sorted(k for k, v in P.items() if v != 0))
    if not support:
        raise ValueError("Empty Newton polygon")
    hull = convex_hull(*[Point(a, m) for a, m in support], polygon=True)
    if isinstance(hull, Polygon):
        raw = hull.vertices
    elif isinstance(hull, Segment):
        raw = [hull.p1, hull.p2]
    else:
        raw = [hull]
    vertices = tuple(
        (Fraction(int(p.x.p), int(p.x.q)), Fraction(int(p.y.p), int(p.y.q)))
        for p in raw
    )
    return NewtonPolygon(support, vertices)


def spectral_polynomial(c: MeromorphicCurve) -> Dict[Tuple[int, int], Fraction]:
    """Defining polynomial P(x, y) of a meromorphic curve, via a resultant in z."""
    z, X, Y = sympy.symbols("z X Y")
    ex = X * c.x.den.to_sympy(z) - c.x.num.to_sympy(z)
    ey = Y * c.y.den.to_sympy(z) - c.y.num.to_sympy(z)
    res = sympy.Poly(sympy.resultant(ex, ey, z), X, Y)
    return {
        (int(a), int(m)): Fraction(int(sympy.Rational(v).p), int(sympy.Rational(v).q))
        for (a, m), v in res.terms()
    }


def is_mobius(f: RatFunc) -> bool:
    return (
        f.num.degree() <= 1
        and f.den.degree() <= 1
        and not f.is_constant()
    )


def mobius_inverse(f: RatFunc) -> RatFunc:
    """Inverse of a Möbius transformation (a z + b)/(c z + d)."""
    if not is_mobius(f):
        raise ValueError("Not a Möbius transformation")
    b, a = f.num.coefficient(0), f.num.coefficient(1)
    d, cc = f.den.coefficient(0), f.den.coefficient(1)
    return RatFunc.of([-b, d], [a, -cc])


def m1_in_terms_of_m2(c: TransalgebraicCurve) -> Optional[RatFunc]:
    """M1 as a polynomial in the coordinate M2, or None when it is not one."""
    if not is_mobius(c.M2):
        return None
    composed = c.M1.compose(mobius_inverse(c.M2))
    return composed if composed.is_polynomial() else None


def is_regular(c: Curve) -> bool:
    """
    Regularity: M2 is Möbius (transalgebraic), or the Newton polygon of P has no
    interior lattice point (meromorphic).
    """
    if isinstance(c, TransalgebraicCurve):
        return is_mobius(c.M2)
    return not newton_polygon(spectral_polynomial(c)).has_interior_point()


def _sample_points(rng: random.Random, count: int, poles: List[Poly]) -> List[Fraction]:
    points: List[Fraction] = []
    while len(points) < count:
        a = Fraction(rng.randint(-20, 20), rng.randint(1, 7))
        if a in points or any(p(a) == 0 for p in poles):
            continue
        points.append(a)
    return points


def _other_preimages(parts: List[RatFunc], a: Fraction, z: sympy.Symbol) -> sympy.Poly:
    """gcd over the parts f of num(f) − f(a)·den(f), with every factor z − a removed."""
    a_sym = sympy.Rational(a.numerator, a.denominator)
    common: Optional[sympy.Expr] = None
    for f in parts:
        value = Fraction(f(a))
        scale = sympy.Rational(value.numerator, value.denominator)
        equation = f.num.to_sympy(z) - scale * f.den.to_sympy(z)
        common = equation if common is None else sympy.gcd(common, equation)
    g = sympy.Poly(common, z)
    linear = sympy.Poly(z - a_sym, z)
    while g.degree() > 0 and g.eval(a_sym) == 0:
        g = sympy.quo(g, linear)
    return g


def separates_points(
    c: Curve, samples: int = SEPARATION_SAMPLES, seed: int = SEPARATION_SEED
) -> Dict[str, Any]:
    """
    Heuristic check that z ↦ (x(z), y(z)) is injective.

    At seeded rational samples a, every other preimage of (x(a), y(a)) is a common
    root of the numerators of f(z) − f(a). For meromorphic curves f runs over x and
    y, and P(x, y) must not be a proper power (degree argument). For transalgebraic
    curves f runs over M0, M1 and M2: at algebraic points exp(M1(z) − M1(a)) is
    algebraic only when M1(z) = M1(a), so equal x forces equal M0 and M1.

    Returns:
        Method, verdict, the samples used and any sample with a second preimage.
    """
    z = sympy.symbols("z")
    if isinstance(c, TransalgebraicCurve):
        parts = [c.M0, c.M1, c.M2]
        method = "M2-nonconstant+sampling"
        degree_ok = not c.M2.is_constant()
    else:
        parts = [c.x, c.y]
        method = "resultant-degree+sampling"
        X, Y = sympy.symbols("X Y")
        ex = X * c.x.den.to_sympy(z) - c.x.num.to_sympy(z)
        ey = Y * c.y.den.to_sympy(z) - c.y.num.to_sympy(z)
        _, factors = sympy.factor_list(sympy.resultant(ex, ey, z), X, Y)
        powers = [int(m) for f, m in factors if sympy.Poly(f, X, Y).total_degree() > 0]
        degree_ok = powers == [1]
    rng = random.Random(seed)
    points = _sample_points(rng, samples, [f.den for f in parts])
    collisions = []
    for a in points:
        others = _other_preimages(parts, a, z)
        if others.degree() > 0:
            collisions.append(
                {"sample": format_scalar(a), "other_preimages": str(others.as_expr())}
            )
    if collisions:
        logger.info(f"{len(collisions)} of {len(points)} samples have a second preimage")
    return {
        "method": method,
        "separates": degree_ok and not collisions,
        "samples": [format_scalar(a) for a in points],
        "collisions": collisions,
    }
