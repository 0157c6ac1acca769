"""
Topological recursion on compact transalgebraic curves.

The correlators of x = M0·exp(M1), y = M2/x are computed by the ordinary recursion
at the finite ramification points R₀, corrected for n = 1 by the principal parts
at the essential singularities R_∞ of x:

    −c_g · Σ_{a∈R_∞} Res_{t=a} (∫B(z0,·)) dM2(t) (d/dM2(t))^{2g} M1(t),
    c_g = (2^{1−2g} − 1) B_{2g} / (2g)!

The residue is taken with the orientation that reproduces the Atlantes value
−r(r−1)/24 · z^{r−2} dz for ω_{1,1}. Finite-N approximating curves are provided
as a numerical validation experiment.
"""

import logging
import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import sympy

from src.algebra import (
    INFINITY,
    NumberFieldElement,
    Poly,
    RatFunc,
    bernoulli,
    cyclotomic_field,
    format_scalar,
)
from src.curve import (
    Curve,
    RamificationPoint,
    TransalgebraicCurve,
    finite_N_curve,
    is_mobius,
    m1_in_terms_of_m2,
    ramification_locus,
)
from src.errors import ConjecturalContributionError
from src.recursion import (
    INFINITY_ORBIT,
    Correlator,
    CorrelatorTable,
    PoleBasis,
    PoleDescriptor,
    euler_keys,
    infinity_descriptor,
    populate,
    recursion_step,
)

logging.basicConfig(
    level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)
logger = logging.getLogger(__name__)

MAX_FINITE_N = 5
RESIDUE_TERMS = 4


def bernoulli_prefactor(g: int) -> Fraction:
    """(2^{1−2g} − 1) B_{2g} / (2g)!; equals −1/24 at g = 1 and 7/5760 at g = 2."""
    return (Fraction(2) ** (1 - 2 * g) - 1) * bernoulli(2 * g) / math.factorial(2 * g)


def _monomial(f: RatFunc) -> Optional[Tuple[Fraction, int]]:
    """(c, p) when f = c·z^p with p ≥ 0, else None."""
    if f.den.degree() != 0:
        return None
    nonzero = [(i, v) for i, v in enumerate(f.num.coeffs) if v != 0]
    if len(nonzero) != 1:
        return None
    power, value = nonzero[0]
    return Fraction(value) / Fraction(f.den.coeffs[0]), power


def atlantes_family_parameters(c: TransalgebraicCurve) -> Optional[Tuple[int, int]]:
    """
    (q, r) when the curve is the q-orbifold r-Atlantes curve M0 = z,
    M1 = −z^{qr}, M2 = z^q (q = 1 is the plain Atlantes curve).
    """
    m0, m1, m2 = _monomial(c.M0), _monomial(c.M1), _monomial(c.M2)
    if m0 != (1, 1) or m1 is None or m2 is None:
        return None
    if m2[0] != 1 or m2[1] < 1 or m1[0] != -1 or m1[1] % m2[1] != 0:
        return None
    return m2[1], m1[1] // m2[1]


def kernel_principal_parts(
    f: RatFunc, locus: Sequence[RamificationPoint], basis: PoleBasis
) -> Dict[PoleDescriptor, Fraction]:
    """
    Σ_{a∈R_∞} Res_{t=a} f(t) dt · dz0/(z0 − t) expanded in the pole basis.

    A finite essential orbit contributes Σ_k f_{−k} ξ_{a,k}; the point at infinity
    contributes Σ_m φ_m ξ_{∞,m+2} from the polynomial part Σ_m φ_m t^m of f.
    """
    terms: Dict[PoleDescriptor, Fraction] = {}
    if f.is_zero():
        return terms
    for point in locus:
        if point.kind != "infinite":
            continue
        if point.at_infinity:
            polynomial = f.num // f.den
            for m, value in enumerate(polynomial.coeffs):
                if value != 0:
                    terms[infinity_descriptor(m + 2)] = Fraction(value)
            continue
        depth = -f.valuation_at(point.location)
        if depth < 1:
            continue
        local = f.laurent(point.location, 0)
        for k in range(1, depth + 1):
            value = local.coefficient(-k)
            for j, coord in enumerate(basis.coordinates(point.orbit, value)):
                if coord != 0:
                    terms[PoleDescriptor(point.orbit, j, k)] = coord
    return terms


@dataclass
class EssentialContribution:
    """Principal parts of ω_{g,1} at the essential singularities."""

    g: int
    terms: Dict[PoleDescriptor, Fraction] = field(default_factory=dict)
    provenance: str = "proved"
    vanishing: bool = False

    def pole_orders(self) -> Dict[int, int]:
        orders: Dict[int, int] = {}
        for d in self.terms:
            orders[d.orbit] = max(orders.get(d.orbit, 0), d.order)
        return orders

    def to_json(self) -> Dict[str, Any]:
        return {
            "g": self.g,
            "provenance": self.provenance,
            "vanishing": self.vanishing,
            "terms": [
                {"pole": d.to_json(), "coeff": format_scalar(v)}
                for d, v in sorted(self.terms.items())
            ],
        }


def _vanishes(point: RamificationPoint, g: int, n: int = 1) -> bool:
    assert point.pole_orders is not None
    _, m1, m2 = point.pole_orders
    return 2 * g * m2 >= (2 - n) * (m1 + m2)


def _apply_d(f: RatFunc, m2_prime: RatFunc, times: int) -> RatFunc:
    for _ in range(times):
        f = f.derivative() / m2_prime
    return f


def essential_contribution(
    c: TransalgebraicCurve,
    g: int,
    allow_conjectural: bool = False,
    locus: Optional[List[RamificationPoint]] = None,
) -> EssentialContribution:
    """
    Essential-singularity correction to ω_{g,1}.

    Args:
        c: Transalgebraic curve.
        g: Genus, at least 1.
        allow_conjectural: Accept contributions outside the proved cases.
        locus: Precomputed ramification locus.

    Returns:
        The contribution with its provenance; zero when every essential point
        satisfies 2g·m2 ≥ m1 + m2.

    Raises:
        ConjecturalContributionError: If the contribution is nonzero, only
            conjectural, and ``allow_conjectural`` is not set.
    """
    if g < 1:
        raise ValueError("Essential contributions start at genus 1")
    locus = ramification_locus(c) if locus is None else locus
    essential = [p for p in locus if p.kind == "infinite"]
    proved = g == 1 or atlantes_family_parameters(c) is not None
    result = EssentialContribution(g, provenance="proved" if proved else "conjectural")
    if all(_vanishes(p, g) for p in essential):
        result.vanishing = True
        return result
    if not proved:
        if not allow_conjectural:
            logger.error(f"omega_{{{g},1}} needs the conjectural essential contribution")
            raise ConjecturalContributionError(
                f"The essential-singularity contribution at g={g} is conjectural for "
                f"{c.label!r}; pass allow_conjectural to use it"
            )
        logger.warning(f"Using conjectural essential contribution at g={g}")
    m2_prime = c.M2.derivative()
    integrand = m2_prime * _apply_d(c.M1, m2_prime, 2 * g)
    prefactor = -bernoulli_prefactor(g)
    parts = kernel_principal_parts(integrand, locus, PoleBasis(locus))
    result.terms = {d: v * prefactor for d, v in parts.items() if v != 0}
    logger.debug(f"Essential contribution at g={g}: {len(result.terms)} terms")
    return result


def bernoulli_g1_form(
    c: TransalgebraicCurve, locus: Optional[List[RamificationPoint]] = None
) -> Dict[PoleDescriptor, Fraction]:
    """
    The g = 1 residue form (B₂/4) Σ Res (∫B) d(D log x), D = (1/M2') d/dz, with the
    same orientation as ``essential_contribution``.

    D log x is taken from x = M0·exp(M1) in the ExpRational ring, so M0 enters
    here and the M1-only route of ``essential_contribution`` is checked against it.
    """
    locus = ramification_locus(c) if locus is None else locus
    x = ExpRational.x_of(c)
    d_log_x = x.derivative().quotient(x) / c.M2.derivative()
    parts = kernel_principal_parts(d_log_x.derivative(), locus, PoleBasis(locus))
    prefactor = bernoulli(2) / 4
    return {d: v * prefactor for d, v in parts.items() if v != 0}


def check_essential_bound(
    contribution: EssentialContribution, locus: Sequence[RamificationPoint]
) -> Dict[str, Any]:
    """Pole order at each essential point is at most m2(1−2g) + m1 + 1."""
    failures = []
    orders = contribution.pole_orders()
    for point in locus:
        if point.kind != "infinite":
            continue
        assert point.pole_orders is not None
        _, m1, m2 = point.pole_orders
        bound = m2 * (1 - 2 * contribution.g) + m1 + 1
        key = INFINITY_ORBIT if point.at_infinity else point.orbit
        if orders.get(key, 0) > bound:
            failures.append({"orbit": point.orbit, "order": orders[key], "bound": bound})
    return {"passed": not failures, "failures": failures}


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------


def transalgebraic_step(
    table: CorrelatorTable, g: int, n: int, allow_conjectural: bool = False
) -> Correlator:
    """Recursion at R₀ plus, for n = 1, the essential-singularity correction."""
    correlator = recursion_step(table, g, n)
    if n == 1 and g >= 1:
        assert isinstance(table.curve, TransalgebraicCurve)
        extra = essential_contribution(table.curve, g, allow_conjectural, table.locus)
        for d, v in extra.terms.items():
            correlator.add((d,), v)
        if extra.terms:
            correlator.provenance = f"recursion+essential({extra.provenance})"
    return correlator


def transalgebraic_table(
    c: TransalgebraicCurve,
    max_euler: int,
    allow_conjectural: bool = False,
    workers: int = 4,
    table: Optional[CorrelatorTable] = None,
) -> CorrelatorTable:
    """
    All ω_{g,n} of the compact transalgebraic curve with 2g−2+n ≤ max_euler.

    A partially filled ``table`` (for instance seeded from a cache) is completed
    in place.

    Raises:
        ConjecturalContributionError: If a needed contribution is conjectural.
        InadmissibleCurveError: If the curve is not admissible.
    """
    if table is None:
        table = CorrelatorTable(c, workers=workers, mode="transalgebraic")
    for g, n in euler_keys(max_euler):
        if n == 1 and g >= 1:
            essential_contribution(c, g, allow_conjectural, table.locus)
    return populate(
        table,
        max_euler,
        step=lambda tab, g, n: transalgebraic_step(tab, g, n, allow_conjectural),
    )


def meromorphic_table(
    c: Curve,
    max_euler: int,
    workers: int = 4,
    table: Optional[CorrelatorTable] = None,
) -> CorrelatorTable:
    """The non-compact meromorphic curve on P¹ minus R_∞ (essential points ignored)."""
    if table is None:
        table = CorrelatorTable(c, workers=workers, mode="meromorphic")
    return populate(table, max_euler)


# ---------------------------------------------------------------------------
# Direct g = 1 formula
# ---------------------------------------------------------------------------


@dataclass
class ExpRational:
    """
    Finite sum Σ_k f_k(z)·exp(k·M1(z)) with rational f_k.

    Products add exponents; ``dominant`` keeps only the top exponent, which is the
    leading behaviour as exp(M1) → ∞.
    """

    m1: RatFunc
    terms: Dict[int, RatFunc] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.terms = {k: f for k, f in self.terms.items() if not f.is_zero()}

    def _same(self, other: "ExpRational") -> None:
        if other.m1 != self.m1:
            raise ValueError("ExpRational values with different exponents M1")

    def __add__(self, other: "ExpRational") -> "ExpRational":
        self._same(other)
        terms = dict(self.terms)
        for k, f in other.terms.items():
            terms[k] = terms[k] + f if k in terms else f
        return ExpRational(self.m1, terms)

    def __neg__(self) -> "ExpRational":
        return ExpRational(self.m1, {k: -f for k, f in self.terms.items()})

    def __sub__(self, other: "ExpRational") -> "ExpRational":
        return self + (-other)

    def __mul__(self, other: Any) -> "ExpRational":
        if not isinstance(other, ExpRational):
            return ExpRational(self.m1, {k: f * other for k, f in self.terms.items()})
        self._same(other)
        terms: Dict[int, RatFunc] = {}
        for k1, f1 in self.terms.items():
            for k2, f2 in other.terms.items():
                k = k1 + k2
                terms[k] = terms[k] + f1 * f2 if k in terms else f1 * f2
        return ExpRational(self.m1, terms)

    def derivative(self) -> "ExpRational":
        m1_prime = self.m1.derivative()
        return ExpRational(
            self.m1,
            {k: f.derivative() + m1_prime * f * k for k, f in self.terms.items()},
        )

    def grades(self) -> List[int]:
        return sorted(self.terms)

    def dominant(self) -> "ExpRational":
        if not self.terms:
            return self
        top = max(self.terms)
        return ExpRational(self.m1, {top: self.terms[top]})

    def quotient(self, other: "ExpRational") -> RatFunc:
        """
        self/other as exp(M1) → ∞, read off the top grades.

        Exact when both values have a single grade; otherwise the lower grades are
        dropped against the top one.

        Raises:
            ZeroDivisionError: If ``other`` is zero.
            ValueError: If the top grades differ, so no rational limit exists.
        """
        self._same(other)
        if not other.terms:
            raise ZeroDivisionError("Quotient by the zero ExpRational value")
        if not self.terms:
            return RatFunc(Poly())
        ((k_top, f_top),) = self.dominant().terms.items()
        ((k_bottom, f_bottom),) = other.dominant().terms.items()
        if k_top != k_bottom:
            logger.error(f"ExpRational quotient across grades {k_top} and {k_bottom}")
            raise ValueError("Top exponential grades differ; the quotient is not rational")
        return f_top / f_bottom

    @classmethod
    def x_of(cls, c: TransalgebraicCurve) -> "ExpRational":
        return cls(c.M1, {1: c.M0})


@dataclass
class DirectFormulaResult:
    """Residue of the g = 1 integrand at R_∞ and its sheet-by-sheet data."""

    terms: Dict[PoleDescriptor, Fraction]
    integrand: RatFunc
    sheets: List[Dict[str, Any]] = field(default_factory=list)


def _series_product(a: Sequence[RatFunc], b: Sequence[RatFunc], size: int) -> List[RatFunc]:
    out = [RatFunc(Poly()) for _ in range(size)]
    for i in range(min(size, len(a))):
        for j in range(min(size - i, len(b))):
            out[i + j] = out[i + j] + a[i] * b[j]
    return out


def _series_reciprocal(a: Sequence[RatFunc], size: int) -> List[RatFunc]:
    inv_a0 = 1 / a[0]
    out = [inv_a0]
    for n in range(1, size):
        acc = RatFunc(Poly())
        for k in range(1, min(n, len(a) - 1) + 1):
            acc = acc + a[k] * out[n - k]
        out.append(-acc * inv_a0)
    return out


def _trivial_sheet_integrand(c: TransalgebraicCurve) -> RatFunc:
    """
    Res_{t1=t} [x(t)/(x(t)−x(t1))] B(t,t1) / (M2(t)−M2(t1)) as a rational function.

    With t1 = t + u, 1 − x(t+u)/x(t) = u·A(u) and M2(t) − M2(t+u) = u·C(u), so the
    residue is [u³] 1/(A·C). The Taylor coefficients of x are ExpRational values
    of grade 1, and their quotients by x are rational.
    """
    if c.M2.is_constant():
        raise ValueError("M2 must be nonconstant")
    size = RESIDUE_TERMS
    x = ExpRational.x_of(c)
    a_terms: List[RatFunc] = []
    c_terms: List[RatFunc] = []
    x_derivative, m2_derivative = x, c.M2
    for k in range(1, size + 1):
        x_derivative = x_derivative.derivative()
        m2_derivative = m2_derivative.derivative()
        a_terms.append(-x_derivative.quotient(x) / math.factorial(k))
        c_terms.append(-m2_derivative / math.factorial(k))
    reciprocal = _series_reciprocal(_series_product(a_terms, c_terms, size), size)
    return reciprocal[size - 1]


def direct_formula_g1(
    c: TransalgebraicCurve, locus: Optional[List[RamificationPoint]] = None
) -> DirectFormulaResult:
    """
    Independent evaluation of the essential contribution to ω_{1,1}.

    The inner residue at t1 = t is expanded exactly; the other points of the fibre
    M2(t1) = M2(t) are simple poles and, for M2 = c·z^q with M0 a monomial, give
    terms homogeneous of degree −q−1 in t which have no principal part at ∞.

    Raises:
        ValueError: If M1 is not a function of M2, or M2 has several sheets and
            is not of the supported monomial shape.
    """
    locus = ramification_locus(c) if locus is None else locus
    sheets: List[Dict[str, Any]] = []
    if not is_mobius(c.M2):
        m2 = _monomial(c.M2)
        m0 = _monomial(c.M0)
        m1_support = [i for i, v in enumerate(c.M1.num.coeffs) if v != 0]
        if m2 is None or m0 is None or c.M1.den.degree() != 0:
            logger.error("Direct formula needs monomial M0 and M2 with polynomial M1")
            raise ValueError("Unsupported sheet structure of M2 for the direct formula")
        q = m2[1]
        if any(i % q for i in m1_support):
            raise ValueError("M1 is not a function of M2")
        p = m0[1]
        theta = cyclotomic_field(q).generator() if q > 2 else Fraction(-1)
        for m in range(1, q):
            rotation = theta**m
            ratio = rotation**p
            if ratio == 1:
                raise ValueError("x is constant along an M2-sheet; the residue is not simple")
            # x(t)/(x(t)−x(θt)) · 1/(t−θt)² · 1/(−M2'(θt)) = κ · t^(−q−1)
            kappa = -rotation / ((1 - ratio) * (1 - rotation) ** 2 * m2[0] * q)
            sheets.append(
                {
                    "sheet": m,
                    "coefficient": format_scalar(
                        kappa if isinstance(kappa, NumberFieldElement) else Fraction(kappa)
                    ),
                    "degree": -q - 1,
                }
            )
    elif m1_in_terms_of_m2(c) is None:
        raise ValueError("M1 is not a function of M2")
    integrand = _trivial_sheet_integrand(c)
    terms = kernel_principal_parts(integrand, locus, PoleBasis(locus))
    return DirectFormulaResult(terms, integrand, sheets)


# ---------------------------------------------------------------------------
# Finite-N experiment
# ---------------------------------------------------------------------------


def _real_roots(minimal: Optional[Poly]) -> List[float]:
    if minimal is None:
        return []
    z = sympy.Symbol("z")
    roots = sympy.Poly(minimal.to_sympy(z), z).nroots()
    return [float(sympy.re(r)) for r in roots if abs(float(sympy.im(r))) < 1e-12]


def _point_coefficients(
    corr: Correlator, point: RamificationPoint, root: float
) -> Dict[int, float]:
    """Float coefficients of ξ_{a,k} at the numerical representative ``root``."""
    values: Dict[int, float] = {}
    for key, coeff in corr.terms.items():
        if len(key) != 1 or key[0].orbit != point.orbit:
            continue
        d = key[0]
        values[d.order] = values.get(d.order, 0.0) + float(coeff) * root**d.power
    return values


def _matching_point(
    points: Iterable[RamificationPoint], target: float, order: int
) -> Tuple[RamificationPoint, float]:
    best: Optional[Tuple[float, RamificationPoint, float]] = None
    for point in points:
        if point.order != order or not point.contributes():
            continue
        for root in _real_roots(point.minimal_polynomial):
            distance = abs(root - target)
            if best is None or distance < best[0]:
                best = (distance, point, root)
    if best is None:
        raise ValueError("No finite-N ramification point matches the reference point")
    return best[1], best[2]


def _max_delta(a: Dict[int, float], b: Dict[int, float]) -> float:
    keys = set(a) | set(b)
    return max((abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in keys), default=0.0)


def finite_N_experiment(
    c: TransalgebraicCurve,
    g: int = 1,
    n: int = 1,
    Ns: Sequence[int] = (2, 3, 4),
    taus: Sequence[Any] = (0, Fraction(1, 2)),
    workers: int = 4,
    fit_scaling: bool = False,
) -> Dict[str, Any]:
    """
    Compare ω^N_{g,n} on finite_N_curve(c, N, τ) with the transalgebraic table.

    All recursion is exact; coefficients are converted to floats only here.

    Returns:
        Report with per-(N, τ) coefficients at the finite ramification point,
        distances to the N → ∞ value, τ-differences, monotonicity flags and,
        with ``fit_scaling``, the fitted N-exponent of the largest principal-part
        coefficient at the points that collide with R_∞.

    Raises:
        ValueError: If some N exceeds the enumeration guard.
    """
    if any(N > MAX_FINITE_N or N < 2 for N in Ns):
        logger.error(f"finite-N experiment with N outside 2..{MAX_FINITE_N}: {list(Ns)}")
        raise ValueError(f"N must lie in 2..{MAX_FINITE_N}")
    chi = 2 * g - 2 + n
    ref_points = [p for p in ramification_locus(c) if p.contributes()]
    if not ref_points:
        raise ValueError("The curve has no contributing finite ramification point")
    ref_point = ref_points[0]
    assert ref_point.order is not None
    real_roots = _real_roots(ref_point.minimal_polynomial)
    if not real_roots:
        logger.error(f"Orbit {ref_point.orbit} of {c.label!r} has no real representative")
        raise ValueError(
            f"The reference ramification orbit {ref_point.orbit} has no real point; "
            "finite-N coefficients are compared at a real representative"
        )
    ref_root = real_roots[0]
    reference = transalgebraic_table(c, chi, workers=workers).get(g, n)
    ref_coeffs = _point_coefficients(reference, ref_point, ref_root)

    def run(job: Tuple[int, Any]) -> Dict[str, Any]:
        N, tau = job
        finite = finite_N_curve(c, N, tau)
        table = populate(CorrelatorTable(finite, workers=1), chi)
        corr = table.get(g, n)
        point, root = _matching_point(table.locus, ref_root, ref_point.order or 2)
        coeffs = _point_coefficients(corr, point, root)
        far = [
            abs(float(v))
            for key, v in corr.terms.items()
            for d in key
            if d.orbit != INFINITY_ORBIT and table.locus[d.orbit].order == N
        ]
        return {
            "N": N,
            "tau": format_scalar(Fraction(tau)),
            "point": root,
            "coefficients": {str(k): v for k, v in sorted(coeffs.items())},
            "delta": _max_delta(coeffs, ref_coeffs),
            "colliding_max": max(far, default=0.0),
            "raw": coeffs,
        }

    jobs = [(N, tau) for N in Ns for tau in taus]
    with ThreadPoolExecutor(max_workers=max(workers, 1)) as executor:
        runs = list(executor.map(run, jobs))
    by_key = {(r["N"], r["tau"]): r for r in runs}
    first_tau = format_scalar(Fraction(taus[0]))
    deltas = [by_key[(N, first_tau)]["delta"] for N in Ns]
    tau_deltas: List[float] = []
    if len(taus) >= 2:
        second_tau = format_scalar(Fraction(taus[1]))
        tau_deltas = [
            _max_delta(by_key[(N, first_tau)]["raw"], by_key[(N, second_tau)]["raw"])
            for N in Ns
        ]
    report: Dict[str, Any] = {
        "curve": c.label,
        "g": g,
        "n": n,
        "reference": {str(k): v for k, v in sorted(ref_coeffs.items())},
        "runs": [{k: v for k, v in r.items() if k != "raw"} for r in runs],
        "deltas": deltas,
        "tau_deltas": tau_deltas,
        "converging": all(a > b for a, b in zip(deltas, deltas[1:])),
        "tau_converging": all(a > b for a, b in zip(tau_deltas, tau_deltas[1:])),
    }
    if fit_scaling:
        samples = [
            (math.log(N), math.log(by_key[(N, first_tau)]["colliding_max"]))
            for N in Ns
            if by_key[(N, first_tau)]["colliding_max"] > 0
        ]
        if len(samples) >= 2:
            slope, _ = statistics.linear_regression(
                [s[0] for s in samples], [s[1] for s in samples]
            )
            report["scaling_exponent"] = slope
    logger.info(
        f"Finite-N experiment on {c.label!r}: deltas {deltas}, tau deltas {tau_deltas}"
    )
    return report
