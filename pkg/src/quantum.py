"""
Wave functions, ℏ-differential operators and quantum curves.

Operators are kept normally ordered, x̂ to the left of ŷ = ℏ d/dx, and truncated
by ℏ-grade: a term ℏ^m x̂^i ŷ^j has grade m + j, which is additive under
composition. Wave functions are stored in a chart as Σ_n c_n(ℏ) s^n where each
c_n is a truncated Laurent series in ℏ; s = x at a zero of x, where expanding
exp(S_0/ℏ) leaves only finitely many negative powers of ℏ at every order. At a
pole of dx the divergent part of S_0 is kept apart.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from sympy.utilities.iterables import multiset_permutations

from src.algebra import (
    HbarSeries,
    PointAtInfinity,
    RatFunc,
    TruncatedSeries,
    falling_factorial,
    format_scalar,
    lagrange_invert,
    series_compose,
    to_field,
)
from src.curve import TransalgebraicCurve, local_chart, newton_polygon
from src.recursion import CorrelatorTable, PoleDescriptor, Verdict

logging.basicConfig(
    level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)
logger = logging.getLogger(__name__)

Term = Tuple[int, int, int]


# ---------------------------------------------------------------------------
# Operator algebra
# ---------------------------------------------------------------------------


@dataclass
class DiffOperator:
    """
    Σ c · ℏ^m x̂^i ŷ^j, keyed by (m, i, j); i may be negative.

    ``grade`` is the truncation: terms of ℏ-grade m + j above it are unknown.
    ``None`` means exact.
    """

    terms: Dict[Term, Fraction] = field(default_factory=dict)
    grade: Optional[int] = None

    def __post_init__(self) -> None:
        cleaned = {}
        for (m, i, j), c in self.terms.items():
            if m < 0 or j < 0:
                raise ValueError(f"Invalid operator term {(m, i, j)}")
            c = to_field(c)
            if c != 0 and (self.grade is None or m + j <= self.grade):
                cleaned[(m, i, j)] = c
        self.terms = cleaned

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls, grade: Optional[int] = None) -> "DiffOperator":
        return cls({(0, 0, 0): Fraction(1)}, grade)

    @classmethod
    def scalar(cls, value: Any, grade: Optional[int] = None) -> "DiffOperator":
        return cls({(0, 0, 0): value}, grade)

    @classmethod
    def hbar(cls, grade: Optional[int] = None) -> "DiffOperator":
        return cls({(1, 0, 0): Fraction(1)}, grade)

    @classmethod
    def x(cls, power: int = 1, grade: Optional[int] = None) -> "DiffOperator":
        return cls({(0, power, 0): Fraction(1)}, grade)

    @classmethod
    def y(cls, grade: Optional[int] = None) -> "DiffOperator":
        """ŷ = ℏ d/dx."""
        return cls({(0, 0, 1): Fraction(1)}, grade)

    @classmethod
    def euler(cls, grade: Optional[int] = None) -> "DiffOperator":
        """Ŷ = x̂ŷ = ℏ x d/dx."""
        return cls({(0, 1, 1): Fraction(1)}, grade)

    @classmethod
    def multiplication(
        cls, laurent: Dict[int, Any], grade: Optional[int] = None
    ) -> "DiffOperator":
        """Multiplication by the Laurent polynomial Σ a_k x^k."""
        return cls({(0, k, 0): v for k, v in laurent.items()}, grade)

    # -- arithmetic ----------------------------------------------------------

    def _grade_with(self, other: "DiffOperator") -> Optional[int]:
        grades = [g for g in (self.grade, other.grade) if g is not None]
        return min(grades) if grades else None

    def truncate(self, grade: Optional[int]) -> "DiffOperator":
        if grade is None:
            return self
        current = grade if self.grade is None else min(grade, self.grade)
        return DiffOperator(dict(self.terms), current)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: Any) -> "DiffOperator":
        if not isinstance(other, DiffOperator):
            other = DiffOperator.scalar(other)
        grade = self._grade_with(other)
        terms = dict(self.terms)
        for key, c in other.terms.items():
            terms[key] = terms.get(key, Fraction(0)) + c
        return DiffOperator(terms, grade)

    __radd__ = __add__

    def __neg__(self) -> "DiffOperator":
        return DiffOperator({k: -c for k, c in self.terms.items()}, self.grade)

    def __sub__(self, other: Any) -> "DiffOperator":
        return self + (-other)

    def __rsub__(self, other: Any) -> "DiffOperator":
        return (-self) + other

    def __mul__(self, other: Any) -> "DiffOperator":
        """Composition; ŷ^j x^a = Σ_k C(j,k) (a)_k ℏ^k x^{a−k} ŷ^{j−k}."""
        if not isinstance(other, DiffOperator):
            value = to_field(other)
            return DiffOperator({k: c * value for k, c in self.terms.items()}, self.grade)
        grade = self._grade_with(other)
        out: Dict[Term, Fraction] = {}
        for (m1, i1, j1), c1 in self.terms.items():
            for (m2, i2, j2), c2 in other.terms.items():
                if grade is not None and m1 + j1 + m2 + j2 > grade:
                    continue
                for k in range(j1 + 1):
                    ff = falling_factorial(i2, k)
                    if ff == 0:
                        break
                    key = (m1 + m2 + k, i1 + i2 - k, j1 - k + j2)
                    value = c1 * c2 * math.comb(j1, k) * ff
                    out[key] = out.get(key, Fraction(0)) + value
        return DiffOperator(out, grade)

    def __rmul__(self, other: Any) -> "DiffOperator":
        return self * other

    def __pow__(self, exponent: int) -> "DiffOperator":
        result = DiffOperator.identity(self.grade)
        for _ in range(exponent):
            result = result * self
        return result

    def commutator(self, other: "DiffOperator") -> "DiffOperator":
        return self * other - other * self

    def min_grade(self) -> int:
        return min((m + j for m, _, j in self.terms), default=0)

    def symbol(self) -> Dict[Tuple[int, int], Fraction]:
        """Classical limit ℏ → 0 with ŷ ↦ y, as {(x-power, y-power): coeff}."""
        return {(i, j): c for (m, i, j), c in self.terms.items() if m == 0}

    def equals(self, other: "DiffOperator", grade: Optional[int] = None) -> bool:
        """Equality of all terms up to the common (or given) grade."""
        limit = self._grade_with(other)
        if grade is not None:
            limit = grade if limit is None else min(limit, grade)
        difference = (self - other).truncate(limit)
        return difference.is_zero()

    def to_json(self) -> Dict[str, Any]:
        return {
            "grade": self.grade,
            "terms": [
                [m, i, j, format_scalar(c)] for (m, i, j), c in sorted(self.terms.items())
            ],
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "DiffOperator":
        terms = {(int(m), int(i), int(j)): Fraction(c) for m, i, j, c in data["terms"]}
        return cls(terms, data.get("grade"))


def operator_exp(op: DiffOperator, grade: int) -> DiffOperator:
    """
    exp(op) truncated at ``grade``.

    Raises:
        ValueError: If op has a grade-zero term (the series would not terminate).
    """
    if op.terms and op.min_grade() < 1:
        logger.error("Operator exponential of an operator with grade-zero terms")
        raise ValueError("exp needs an operator whose terms all carry ℏ")
    op = op.truncate(grade)
    result = DiffOperator.identity(grade)
    power = DiffOperator.identity(grade)
    k = 1
    while True:
        power = (power * op) * Fraction(1, k)
        if power.is_zero():
            break
        result = result + power
        k += 1
    return result


def polynomial_in(coeffs: Sequence[Any], op: DiffOperator, grade: Optional[int] = None) -> DiffOperator:
    """Σ_k coeffs[k] · op^k, where coefficients may themselves be operators."""
    result = DiffOperator({}, grade)
    power = DiffOperator.identity(grade)
    for k, c in enumerate(coeffs):
        if k:
            power = power * op
        if isinstance(c, DiffOperator):
            result = result + c * power
        elif c != 0:
            result = result + power * c
    return result


# ---------------------------------------------------------------------------
# Wave functions
# ---------------------------------------------------------------------------


@dataclass
class WaveFunction:
    """
    ψ = s^p · exp(S(s)/ℏ) · Σ_n c_n(ℏ) s^n with each c_n a truncated ℏ-Laurent series.

    The chart variable s is x itself at a zero of x. At a pole of dx it is
    s = (λx)^{−1/r}, where r is the pole order of x and λ is fixed by s = t + O(t²)
    in the local coordinate t.

    Attributes:
        coeffs: s-power ↦ ℏ-series.
        x_order: s-powers at or above this are unknown.
        base: Description of the integration base point.
        variable: Description of the chart variable s.
        singular: Negative s-power ↦ coefficient of the divergent part S of ∫ω_{0,1}.
        prefactor: The exponent p left by the regularised ω_{0,2} at a ramified pole.
    """

    coeffs: Dict[int, TruncatedSeries]
    x_order: int
    base: str = "z=0"
    variable: str = "x"
    singular: Dict[int, Fraction] = field(default_factory=dict)
    prefactor: Fraction = Fraction(0)

    def coefficient(self, n: int, e: int) -> Fraction:
        if n >= self.x_order:
            raise ValueError(f"x^{n} is beyond the x-truncation {self.x_order}")
        series = self.coeffs.get(n)
        return Fraction(0) if series is None else series.coefficient(e)

    def known_order(self, n: int) -> int:
        series = self.coeffs.get(n)
        return series.order if series is not None else 10**9

    def to_json(self) -> Dict[str, Any]:
        return {
            "base": self.base,
            "variable": self.variable,
            "x_order": self.x_order,
            "singular": {str(e): format_scalar(c) for e, c in sorted(self.singular.items())},
            "prefactor": format_scalar(self.prefactor),
            "coefficients": [
                {
                    "x_power": n,
                    "hbar_order": s.order,
                    "terms": {str(e): format_scalar(c) for e, c in s.terms().items()},
                }
                for n, s in sorted(self.coeffs.items())
            ],
        }


def apply_operator(op: DiffOperator, psi: WaveFunction) -> WaveFunction:
    """Act termwise: ℏ^m x^i ŷ^j x^n = ℏ^{m+j} (n)_j x^{n−j+i}."""
    if psi.variable != "x" or psi.singular or psi.prefactor:
        logger.error(f"Operators act in the x-chart, got a wave function in {psi.variable}")
        raise ValueError("Only wave functions built at a zero of x can be acted on")
    out: Dict[int, TruncatedSeries] = {}
    for (m, i, j), c in op.terms.items():
        for n, series in psi.coeffs.items():
            ff = falling_factorial(n, j)
            if ff == 0:
                continue
            term = series.shift(m + j) * (c * ff)
            key = n - j + i
            out[key] = out[key] + term if key in out else term
    shift = max((i - j for _, i, j in op.terms), default=0)
    return WaveFunction(out, psi.x_order + shift, psi.base)


def _residual_window(op: DiffOperator, psi: WaveFunction) -> Tuple[int, Dict[int, int]]:
    """Largest complete x-power of op·ψ and the ℏ-order known at each x-power."""
    drop = max((j - i for _, i, j in op.terms), default=0)
    last = psi.x_order - 1 - max(drop, 0)
    known: Dict[int, int] = {}
    for N in range(min(psi.coeffs, default=0), last + 1):
        order = 10**9
        low = 10**9
        for (m, i, j), _ in op.terms.items():
            n = N + j - i
            series = psi.coeffs.get(n)
            if series is None:
                continue
            order = min(order, series.order + m + j)
        for n in range(min(psi.coeffs, default=0), N + max(drop, 0) + 1):
            series = psi.coeffs.get(n)
            if series is not None:
                low = min(low, series.valuation)
        if op.grade is not None and low < 10**9:
            order = min(order, op.grade + 1 + low)
        known[N] = order
    return last, known


def verify_annihilation(op: DiffOperator, psi: WaveFunction, K: int) -> Verdict:
    """
    Check that op·ψ vanishes through ℏ^K at every complete x-power.

    Raises:
        ValueError: If the operator grade or ψ's ℏ-order cannot certify ℏ^K.
    """
    last, known = _residual_window(op, psi)
    short = [N for N, order in known.items() if order <= K]
    if short:
        logger.error(f"Truncations certify only up to {min(known.values())}, asked for {K}")
        raise ValueError(
            f"Incompatible truncations: x^{short[0]} known below ℏ^{known[short[0]]}"
        )
    residual = apply_operator(op, psi)
    for N in sorted(known):
        series = residual.coeffs.get(N)
        if series is None:
            continue
        for e, c in series.terms().items():
            if e <= K and c != 0:
                witness = {"hbar_power": e, "x_power": N, "value": format_scalar(c)}
                logger.info(f"Annihilation fails at x^{N} hbar^{e}")
                return Verdict("annihilation", False, witness)
    logger.info(f"Annihilation verified through hbar^{K} for x-powers <= {last}")
    return Verdict("annihilation", True)


def compare_wave_functions(a: WaveFunction, b: WaveFunction) -> Verdict:
    """Coefficientwise equality wherever both are known."""
    if (a.variable, a.singular, a.prefactor) != (b.variable, b.singular, b.prefactor):
        witness = {"left": a.variable, "right": b.variable}
        return Verdict("wave-function", False, witness)
    for n in range(min(a.x_order, b.x_order)):
        sa, sb = a.coeffs.get(n), b.coeffs.get(n)
        order = min(a.known_order(n), b.known_order(n))
        low = min(
            sa.valuation if sa is not None else order,
            sb.valuation if sb is not None else order,
        )
        for e in range(low, order):
            ca = sa.coefficient(e) if sa is not None else Fraction(0)
            cb = sb.coefficient(e) if sb is not None else Fraction(0)
            if ca != cb:
                witness = {"x_power": n, "hbar_power": e, "left": format_scalar(ca), "right": format_scalar(cb)}
                return Verdict("wave-function", False, witness)
    return Verdict("wave-function", True)


def _diagonal_wave_function(
    exponents: Callable[[int], Dict[int, Fraction]], x_order: int, hbar_order: int, base: str
) -> WaveFunction:
    coeffs: Dict[int, TruncatedSeries] = {}
    for n in range(x_order):
        exponent = HbarSeries.from_dict(exponents(n), hbar_order + n)
        series = exponent.exp() if not exponent.is_zero() else HbarSeries.one(hbar_order + n)
        coeffs[n] = series.shift(-n) * Fraction(1, math.factorial(n))
    return WaveFunction(coeffs, x_order, base)


def atlantes_closed_form(r: int, x_order: int, hbar_order: int) -> WaveFunction:
    """Ψ = Σ_n x^n/(n! ℏ^n) · exp(ℏ^r Σ_{j<n} j^r), coefficients known below ℏ^hbar_order."""
    if r < 1 or x_order < 1:
        raise ValueError("r and x_order must be positive")
    return _diagonal_wave_function(
        lambda n: {r: Fraction(sum(j**r for j in range(n)))}, x_order, hbar_order, "closed-form"
    )


def _s_coefficients(r: int) -> List[Fraction]:
    """S(Y) = ((Y+ℏ)^{r+1} − Y^{r+1})/((r+1)ℏ) as Σ_k a_k Y^k ℏ^{r−k}."""
    return [Fraction(math.comb(r + 1, k), r + 1) for k in range(r + 1)]


# ---------------------------------------------------------------------------
# Wave function from correlators
# ---------------------------------------------------------------------------


def _local_density(f: RatFunc, base: Any, order: int) -> TruncatedSeries:
    """Coefficient of dt in f(z) dz, with t = z − b, or t = 1/z at INFINITY."""
    if isinstance(base, PointAtInfinity):
        return f.laurent(base, order + 2).shift(-2) * -1
    return f.laurent(base, order)


def _principal_integral(
    table: CorrelatorTable, g: int, n: int, base: Any, order: int
) -> TruncatedSeries:
    """∫_b^z ⋯ ∫_b^z ω_{g,n} with all variables set equal, as a series in the local coordinate."""
    corr = table.get(g, n)
    integrals: Dict[PoleDescriptor, TruncatedSeries] = {}
    total = TruncatedSeries.zero(order, base)
    for key, coeff in corr.terms.items():
        count = sum(1 for _ in multiset_permutations(list(key)))
        product: Optional[TruncatedSeries] = None
        for d in key:
            if d not in integrals:
                local = _local_density(table.basis.ratfunc(d), base, order)
                if local.valuation < 0:
                    logger.error(f"omega_{{{g},{n}}} has a pole at the base point {base}")
                    raise ValueError(f"Correlator pole at the base point {base}")
                integrals[d] = local.integral().truncate(order)
            product = integrals[d] if product is None else (product * integrals[d]).truncate(order)
        assert product is not None
        total = total + product * (coeff * count)
    return total


def _local_x(table: CorrelatorTable, base: Any, order: int) -> TruncatedSeries:
    curve = table.curve
    if isinstance(curve, TransalgebraicCurve):
        if curve.is_essential(base):
            logger.error(f"x has an essential singularity at the base point {base}")
            raise ValueError("The base point must not be an essential singularity")
        if curve.M1.laurent(base, 1).coefficient(0) != 0:
            logger.error("exp(M1(b)) is transcendental at the base point")
            raise ValueError("Transalgebraic wave functions need M1(b) = 0")
    return curve.local_x(base, order)


def _stable_pieces(
    table: CorrelatorTable, base: Any, hbar_order: int, order: int
) -> Dict[int, TruncatedSeries]:
    """ℏ^{k−1}-coefficients of the exponent for 2 ≤ k ≤ hbar_order, in the local coordinate."""
    pieces: Dict[int, TruncatedSeries] = {}
    for k in range(2, hbar_order + 1):
        total = TruncatedSeries.zero(order, base)
        chi = k - 1
        for g in range(0, chi // 2 + 2):
            n = chi + 2 - 2 * g
            if n < 1:
                continue
            if (g, n) not in table:
                logger.error(f"omega_{{{g},{n}}} missing for the wave function")
                raise ValueError(f"Correlator ({g},{n}) has not been computed")
            total = total + _principal_integral(table, g, n, base, order) * Fraction(1, math.factorial(n))
        pieces[k] = total
    return pieces


def _collect(
    exponent: Dict[int, TruncatedSeries],
    hbar_power: int,
    series: TruncatedSeries,
    hbar_order: int,
    x_order: int,
) -> None:
    """Add the positive chart powers of ℏ^hbar_power · series to ``exponent``."""
    for m in range(1, x_order):
        c = series.coefficient(m) if m < series.order else Fraction(0)
        if c == 0:
            continue
        term = HbarSeries.from_dict({hbar_power: c}, hbar_order)
        exponent[m] = exponent[m] + term if m in exponent else term


def _exponentiate(
    exponent: Dict[int, TruncatedSeries], hbar_order: int, x_order: int
) -> Dict[int, TruncatedSeries]:
    coeffs: Dict[int, TruncatedSeries] = {0: HbarSeries.one(hbar_order)}
    power: Dict[int, TruncatedSeries] = {0: HbarSeries.one(hbar_order)}
    for j in range(1, x_order):
        nxt: Dict[int, TruncatedSeries] = {}
        for a, s in power.items():
            for b, u in exponent.items():
                if a + b >= x_order:
                    continue
                prod = s * u * Fraction(1, j)
                nxt[a + b] = nxt[a + b] + prod if a + b in nxt else prod
        power = nxt
        for key, s in power.items():
            coeffs[key] = coeffs[key] + s if key in coeffs else s
        if not power:
            break
    return coeffs


def _zero_base(
    table: CorrelatorTable, base: Any, X: TruncatedSeries, hbar_order: int, x_order: int
) -> WaveFunction:
    order = x_order + 1
    t_of_x = lagrange_invert(X.truncate(order + 1))
    density = _local_density(table.curve.omega01_density(), base, order)
    pieces: Dict[int, TruncatedSeries] = {0: density.integral().truncate(order)}
    # regularised ω_{0,2}: 2 log((x − x(b))/(z − b)) − log x'(z) − log x'(b)
    dx = X.derivative()
    lead = dx.coefficient(0)
    ratio = X.shift(-1) * (1 / lead)
    f02 = ratio.log() * 2 - (dx * (1 / lead)).log()
    pieces[1] = f02.truncate(order) * Fraction(1, 2)
    pieces.update(_stable_pieces(table, base, hbar_order, order))
    exponent: Dict[int, TruncatedSeries] = {}
    for k, piece in pieces.items():
        in_x = series_compose(piece, t_of_x) if not piece.is_zero() else piece
        _collect(exponent, k - 1, in_x, hbar_order, x_order)
    logger.info(f"Wave function built at z={base} through x^{x_order - 1}")
    return WaveFunction(_exponentiate(exponent, hbar_order, x_order), x_order, f"z={base}")


def _pole_base(
    table: CorrelatorTable, base: Any, X: TruncatedSeries, hbar_order: int, x_order: int
) -> WaveFunction:
    curve = table.curve
    r = -X.valuation
    order = x_order + 1
    density = _local_density(curve.omega01_density(), base, order)
    if density.coefficient(-1) != 0:
        logger.error(f"omega_{{0,1}} has a residue at the base point {base}")
        raise ValueError("A pole base needs omega_{0,1} without residue there")
    s0 = density.integral().truncate(order)
    depth = max(0, -s0.valuation)
    chart = local_chart(curve, base, order + depth + 1)
    t_of_s = chart.t_of_zeta
    v = t_of_s.shift(-1)
    v_inverse = v.inverse()
    # divergent part Σ c_k t^{-k} = Σ c_k s^{-k} v(s)^{-k}
    in_s = TruncatedSeries.zero(order)
    for e, c in s0.terms().items():
        if e < 0:
            in_s = in_s + (v_inverse ** (-e)).shift(e).truncate(order) * c
    singular = {e: c for e, c in in_s.terms().items() if e < 0}
    regular = TruncatedSeries.from_dict(
        {e: c for e, c in s0.terms().items() if e > 0}, s0.order, base
    )
    exponent: Dict[int, TruncatedSeries] = {}
    _collect(exponent, -1, in_s, hbar_order, x_order)
    pieces: Dict[int, TruncatedSeries] = {0: regular}
    # regularised ω_{0,2}: log(1/x'(t)) − 2 log t = (r − 1) log t + log of a unit
    g02 = X.derivative().inverse().shift(-(r + 1))
    pieces[1] = (g02 * (1 / g02.coefficient(0))).log().truncate(order) * Fraction(1, 2)
    _collect(exponent, 0, v.log() * Fraction(r - 1, 2), hbar_order, x_order)
    pieces.update(_stable_pieces(table, base, hbar_order, order))
    for k, piece in pieces.items():
        if not piece.is_zero():
            _collect(exponent, k - 1, series_compose(piece, t_of_s), hbar_order, x_order)
    logger.info(f"Wave function built at the pole z={base} through s^{x_order - 1}")
    return WaveFunction(
        _exponentiate(exponent, hbar_order, x_order),
        x_order,
        f"z={base}",
        variable=f"s=(lx)^(-1/{r})",
        singular=singular,
        prefactor=Fraction(r - 1, 2),
    )


def wave_function(
    table: CorrelatorTable, base: Any = 0, hbar_order: int = 3, x_order: int = 6
) -> WaveFunction:
    """
    ψ = exp Σ ℏ^{2g+n−2}/n! ∫_b^z⋯∫_b^z (ω_{g,n} − δ_{g,0}δ_{n,2} dx dx/(x−x)²).

    The base point b is either a simple zero of x, giving a series in x, or a pole
    of dx (possibly INFINITY) where the correlators are holomorphic, giving a series
    in s = (λx)^{−1/r}. Correlators with 2g−2+n < hbar_order − 1 must be in the table.

    Raises:
        ValueError: If b is neither kind of base point, a correlator has a pole at
            b, or a correlator is missing.
    """
    if not isinstance(base, PointAtInfinity):
        base = to_field(base)
    X = _local_x(table, base, x_order + 2)
    if X.valuation == 1:
        return _zero_base(table, base, X, hbar_order, x_order)
    if X.valuation < 0:
        return _pole_base(table, base, X, hbar_order, x_order)
    logger.error(f"Base point {base} is neither a simple zero of x nor a pole of dx")
    raise ValueError("Base point must be a simple zero of x or a pole of dx")



# ---------------------------------------------------------------------------
# Quantum-curve presentations
# ---------------------------------------------------------------------------


@dataclass
class QuantumCurvePresentation:
    """
    P(x, y) = Σ_i q_i(x) y^i with Laurent-polynomial q_i.

    Attributes:
        q: Index i ↦ {x-power: coeff}.
        floor: Index m ↦ ⌊α_m⌋.
        degree: Largest y-degree, or None for an infinite family.
        regular: Whether the Newton polygon has no interior lattice point.
        limit: Index i ↦ E_i or G_i, when known in closed form.
        label: Free-form name.
    """

    q: Callable[[int], Dict[int, Fraction]]
    floor: Callable[[int], int]
    degree: Optional[int]
    regular: bool
    limit: Optional[Callable[[int], Fraction]] = None
    label: str = ""

    def indices(self, grade: int) -> range:
        """Indices i needed for a grade-``grade`` operator."""
        top = grade if self.degree is None else min(self.degree, grade)
        return range(0, top + 1)

    def Q(self, m: int, grade: int) -> Dict[Tuple[int, int], Fraction]:
        """Q_m(x, y) = Σ_{i≥1} q_{m+i+1}(x) y^i as {(x-power, y-power): coeff}."""
        top = (self.degree - m - 1) if self.degree is not None else grade
        out: Dict[Tuple[int, int], Fraction] = {}
        for i in range(1, top + 1):
            for a, c in self.q(m + i + 1).items():
                out[(a, i)] = out.get((a, i), Fraction(0)) + c
        return out

    def polynomial(self, grade: int) -> Dict[Tuple[int, int], Fraction]:
        return {
            (a, i): c for i in self.indices(grade) for a, c in self.q(i).items() if c != 0
        }


def presentation_from_polynomial(
    P: Dict[Tuple[int, int], Any],
    limits: Optional[Dict[int, Any]] = None,
    label: str = "",
) -> QuantumCurvePresentation:
    """Finite presentation read off from {(x-power, y-power): coeff}."""
    polygon = newton_polygon(P)
    degree = max(m for (_, m), v in P.items() if v != 0)
    floors = {m: math.floor(polygon.alpha(m)) for m in range(degree + 1)}

    def q(i: int) -> Dict[int, Fraction]:
        return {a: to_field(c) for (a, m), c in P.items() if m == i and c != 0}

    limit = None
    if limits is not None:
        table = {int(k): to_field(v) for k, v in limits.items()}
        limit = lambda i: table.get(i, Fraction(0))  # noqa: E731
    return QuantumCurvePresentation(
        q, floors.__getitem__, degree, not polygon.has_interior_point(), limit, label
    )


def atlantes_presentation(r: int, tau: Any = 0) -> QuantumCurvePresentation:
    """P = y e^{(τ−1)(xy)^r} − e^{τ(xy)^r}, base z = 0 with G_i = 0."""
    tau = to_field(tau)

    def q(i: int) -> Dict[int, Fraction]:
        out: Dict[int, Fraction] = {}
        if i % r == 0:
            m = i // r
            out[r * m] = out.get(r * m, Fraction(0)) - tau**m / math.factorial(m)
        if (i - 1) % r == 0 and i >= 1:
            m = (i - 1) // r
            out[r * m] = out.get(r * m, Fraction(0)) + (tau - 1) ** m / math.factorial(m)
        return {a: c for a, c in out.items() if c != 0}

    def floor(m: int) -> int:
        return m - 1 + (1 if m == 0 else 0)

    return QuantumCurvePresentation(
        q, floor, None, True, lambda i: Fraction(0), f"atlantes-r{r}-tau{tau}"
    )


def appendix_presentation() -> QuantumCurvePresentation:
    """x = z + 1/z, y = z²: P = y² + (2 − x²) y + 1."""
    return presentation_from_polynomial(
        {(0, 0): 1, (0, 1): 2, (2, 1): -1, (0, 2): 1}, label="appendix"
    )


@dataclass
class QCCoefficients:
    """Per-index data of an Appendix-style quantum curve."""

    floors: Dict[int, int]
    F: Dict[int, DiffOperator]
    H: Dict[int, DiffOperator]
    limits: Dict[int, Fraction]
    base: str

    def to_json(self) -> Dict[str, Any]:
        return {
            "base": self.base,
            "floors": {str(k): v for k, v in self.floors.items()},
            "limits": {str(k): format_scalar(v) for k, v in self.limits.items()},
            "F": {str(k): op.to_json() for k, op in self.F.items()},
            "H": {str(k): op.to_json() for k, op in self.H.items()},
        }


def _q_over_floor(presentation: QuantumCurvePresentation, i: int, grade: int) -> DiffOperator:
    shift = presentation.floor(i)
    return DiffOperator.multiplication({a - shift: c for a, c in presentation.q(i).items()}, grade)


def _limits(
    presentation: QuantumCurvePresentation, indices: Iterable[int], kind: str
) -> Dict[int, Fraction]:
    if presentation.limit is None:
        logger.error(f"No {kind} limits supplied for {presentation.label!r}")
        raise ValueError(f"Presentation needs closed-form {kind} limits")
    return {i: presentation.limit(i) for i in indices}


def curve_limits(
    presentation: QuantumCurvePresentation,
    x: RatFunc,
    y: RatFunc,
    base: Any,
    kind: str = "G",
) -> Dict[int, Fraction]:
    """
    E_i = −lim Q_{i−1}/x^{⌊α_i⌋+1} or G_i = lim Q_{i−1}/x^{⌊α_i⌋} at z → b for finite presentations.

    Raises:
        ValueError: If a limit is infinite.
    """
    if presentation.degree is None:
        raise ValueError("Limits are computed only for finite presentations")
    out: Dict[int, Fraction] = {}
    for i in range(1, presentation.degree):
        value = RatFunc.constant(0)
        for (a, m), c in presentation.Q(i - 1, presentation.degree).items():
            value = value + (x**a if a >= 0 else 1 / x ** (-a)) * y**m * c
        power = presentation.floor(i) + (1 if kind == "E" else 0)
        quotient = value / x**power if power >= 0 else value * x ** (-power)
        try:
            limit = quotient.value_at_infinity() if base == "inf" else quotient(to_field(base))
        except ZeroDivisionError as e:
            logger.error(f"{kind}_{i} diverges at the base point")
            raise ValueError(f"{kind}_{i} is infinite at the base point") from e
        out[i] = -limit if kind == "E" else limit
    return out


def _check_regular(presentation: QuantumCurvePresentation) -> None:
    if not presentation.regular:
        logger.error(f"Presentation {presentation.label!r} is not regular")
        raise ValueError("Quantum curves are built for regular curves only")


def qc_coefficients(
    presentation: QuantumCurvePresentation, base: str, grade: int, x_at_base: Any = 0
) -> QCCoefficients:
    """F_i, H_i and the limits for a ``"pole"`` or ``"zero"`` base point."""
    _check_regular(presentation)
    indices = list(presentation.indices(grade))
    floors = {m: presentation.floor(m) for m in indices}
    F: Dict[int, DiffOperator] = {}
    H: Dict[int, DiffOperator] = {}
    for i in indices[1:]:
        gap = floors[i] - floors[i - 1]
        F[i] = DiffOperator.x(gap, grade) * DiffOperator.y(grade)
        if base == "zero":
            if to_field(x_at_base) != 0:
                logger.error("Zero base with x(b) != 0")
                raise ValueError("Zero-base quantum curves need x(b) = 0")
            H[i] = DiffOperator.x(gap, grade) * (
                DiffOperator.y(grade) - DiffOperator.hbar(grade) * DiffOperator.x(-1, grade)
            )
    kind = "G" if base == "zero" else "E"
    limits = _limits(presentation, range(1, max(indices[-1], 1)), kind)
    return QCCoefficients(floors, F, H, limits, base)


def build_qc_pole_base(
    presentation: QuantumCurvePresentation, grade: int
) -> DiffOperator:
    """
    q_0/x^{⌊α_0⌋} + Σ F_1⋯F_{i−1} (q_i/x^{⌊α_i⌋}) F_i + ℏ Σ E_i F_1⋯F_{i−1} x^{⌊α_i⌋−⌊α_{i−1}⌋},
    truncated at ``grade``.
    """
    data = qc_coefficients(presentation, "pole", grade)
    op = _q_over_floor(presentation, 0, grade)
    chain = DiffOperator.identity(grade)
    hbar = DiffOperator.hbar(grade)
    for i in sorted(data.F):
        op = op + chain * _q_over_floor(presentation, i, grade) * data.F[i]
        if i in data.limits and data.limits[i] != 0:
            gap = data.floors[i] - data.floors[i - 1]
            op = op + hbar * chain * DiffOperator.x(gap, grade) * data.limits[i]
        chain = chain * data.F[i]
    logger.info(f"Pole-base quantum curve for {presentation.label!r} to grade {grade}")
    return op


def build_qc_zero_base(
    presentation: QuantumCurvePresentation, grade: int, x_at_base: Any = 0
) -> DiffOperator:
    """
    q_0/x^{⌊α_0⌋} + Σ H_1⋯H_{i−1} (q_i/x^{⌊α_i⌋}) F_i + ℏ Σ G_i H_1⋯H_{i−1} x^{⌊α_i⌋−⌊α_0⌋}/(x − x(b)),
    truncated at ``grade``.
    """
    data = qc_coefficients(presentation, "zero", grade, x_at_base)
    op = _q_over_floor(presentation, 0, grade)
    chain = DiffOperator.identity(grade)
    hbar = DiffOperator.hbar(grade)
    for i in sorted(data.F):
        op = op + chain * _q_over_floor(presentation, i, grade) * data.F[i]
        if i in data.limits and data.limits[i] != 0:
            gap = data.floors[i] - data.floors[0] - 1
            op = op + hbar * chain * DiffOperator.x(gap, grade) * data.limits[i]
        chain = chain * data.H[i]
    logger.info(f"Zero-base quantum curve for {presentation.label!r} to grade {grade}")
    return op


# ---------------------------------------------------------------------------
# Atlantes and completed-cycles operators
# ---------------------------------------------------------------------------


def atlantes_operator(r: int, grade: int) -> DiffOperator:
    """ŷ − exp((x̂ŷ)^r)."""
    return DiffOperator.y(grade) - operator_exp(DiffOperator.euler(grade) ** r, grade)


def reduce_atlantes_operator(op: DiffOperator, r: int, tau: Any, grade: int) -> DiffOperator:
    """Left-multiply e^{(τ−1)Ŷ^r}ŷ − e^{τŶ^r} by e^{(1−τ)Ŷ^r}."""
    factor = operator_exp(DiffOperator.euler(grade) ** r * (1 - to_field(tau)), grade)
    return factor * op


def check_tau_independence(r: int, taus: Sequence[Any], grade: int) -> Verdict:
    """Reduced zero-base operators for every τ coincide with ŷ − e^{(x̂ŷ)^r}."""
    target = atlantes_operator(r, grade)
    for tau in taus:
        built = build_qc_zero_base(atlantes_presentation(r, tau), grade)
        reduced = reduce_atlantes_operator(built, r, tau, grade)
        if not reduced.equals(target, grade):
            difference = (reduced - target).truncate(grade)
            return Verdict("tau-independence", False, {"tau": format_scalar(to_field(tau)), "difference": difference.to_json()})
    return Verdict("tau-independence", True)


def _shifted_euler(shift: Fraction, grade: int) -> DiffOperator:
    return DiffOperator.euler(grade) + DiffOperator.hbar(grade) * shift


def completed_cycles_exponent(r: int, grade: int) -> DiffOperator:
    """S(Ŷ − ℏ/2) = Σ_k C(r+1,k)/(r+1) (Ŷ − ℏ/2)^k ℏ^{r−k}."""
    base = _shifted_euler(Fraction(-1, 2), grade)
    hbar = DiffOperator.hbar(grade)
    coeffs = [hbar ** (r - k) * a for k, a in enumerate(_s_coefficients(r))]
    return polynomial_in(coeffs, base, grade)


def completed_cycles_operator(r: int, grade: int) -> DiffOperator:
    """ŷ − exp(S(Ŷ − ℏ/2)), the normal-ordered form of ŷ − x̂^{1/2} e^{S(Ŷ)} x̂^{−1/2}."""
    return DiffOperator.y(grade) - operator_exp(completed_cycles_exponent(r, grade), grade)


def conjugation_solver(r: int) -> List[Fraction]:
    """
    h_1, …, h_r solving, for j = r, …, 0,

        Σ_{n=j}^r h_n C(n,j) ((3/2)^{n−j} − (1/2)^{n−j}) = C(r+1,j)/(r+1) − C(r,j)(1/2)^{r−j}.

    Row j determines h_{j+1}; the constant h_0 is irrelevant and not returned.
    """
    if r < 1:
        raise ValueError("r must be positive")
    h: Dict[int, Fraction] = {}

    def weight(n: int, j: int) -> Fraction:
        return math.comb(n, j) * (Fraction(3, 2) ** (n - j) - Fraction(1, 2) ** (n - j))

    def rhs(j: int) -> Fraction:
        return Fraction(math.comb(r + 1, j), r + 1) - math.comb(r, j) * Fraction(1, 2) ** (r - j)

    if rhs(r) != 0:
        raise ArithmeticError("Inconsistent top row in the conjugation system")
    for j in range(r - 1, -1, -1):
        known = sum((h[n] * weight(n, j) for n in range(j + 2, r + 1)), Fraction(0))
        h[j + 1] = (rhs(j) - known) / weight(j + 1, j)
    return [h[n] for n in range(1, r + 1)]


def conjugation_exponent(r: int, grade: int, shift: Fraction = Fraction(0)) -> DiffOperator:
    """L(Ŷ + shift·ℏ) with L(Y) = Σ_n ℏ^{r−n} h_n Y^n."""
    h = conjugation_solver(r)
    hbar = DiffOperator.hbar(grade)
    coeffs: List[Any] = [Fraction(0)] + [hbar ** (r - n) * h[n - 1] for n in range(1, r + 1)]
    return polynomial_in(coeffs, _shifted_euler(shift, grade), grade)


def conjugation_operator(r: int, grade: int, inverse: bool = False) -> DiffOperator:
    """Ĥ = exp(Σ_n ℏ^{r−n} h_n Ŷ^n), or its inverse."""
    exponent = conjugation_exponent(r, grade)
    return operator_exp(-exponent if inverse else exponent, grade)


def check_conjugation(r: int, grade: int) -> Verdict:
    """
    e^{L(Ŷ+ℏ)−L(Ŷ)} · Ĥ (ŷ − e^{Ŷ^r}) Ĥ^{−1} equals ŷ − e^{S(Ŷ−ℏ/2)} through ``grade``.
    """
    H = conjugation_operator(r, grade)
    H_inv = conjugation_operator(r, grade, inverse=True)
    left = operator_exp(
        conjugation_exponent(r, grade, Fraction(1)) - conjugation_exponent(r, grade), grade
    )
    conjugated = left * (H * atlantes_operator(r, grade) * H_inv)
    target = completed_cycles_operator(r, grade)
    if conjugated.equals(target, grade):
        return Verdict(f"conjugation[r={r}]", True)
    return Verdict(f"conjugation[r={r}]", False, (conjugated - target).truncate(grade).to_json())


def check_conjugation_diagonal(r: int, m_max: int = 8) -> Verdict:
    """Σ_{j<m} j^r + Σ_k h_k m^k − ((m−½)^{r+1} − (−½)^{r+1})/(r+1) does not depend on m."""
    h = conjugation_solver(r)
    values = []
    for m in range(m_max + 1):
        value = Fraction(sum(j**r for j in range(m)))
        value += sum((h[k - 1] * m**k for k in range(1, r + 1)), Fraction(0))
        value -= (Fraction(2 * m - 1, 2) ** (r + 1) - Fraction(-1, 2) ** (r + 1)) / (r + 1)
        values.append(value)
    passed = len(set(values)) == 1
    return Verdict(f"conjugation-diagonal[r={r}]", passed, None if passed else [format_scalar(v) for v in values])


# ---------------------------------------------------------------------------
# Quantisation check
# ---------------------------------------------------------------------------


def exponential_polynomial(
    r: int, grade: int, sign: int = -1
) -> Dict[Tuple[int, int], Fraction]:
    """P = y + sign·e^{x^r y^r}, keeping y-degrees up to ``grade``."""
    P: Dict[Tuple[int, int], Fraction] = {(0, 1): Fraction(1)}
    for k in range(grade // r + 1):
        key = (r * k, r * k)
        P[key] = P.get(key, Fraction(0)) + Fraction(sign, math.factorial(k))
    return {key: v for key, v in P.items() if v != 0}


def is_quantisation_of(
    op: DiffOperator, P: Dict[Tuple[int, int], Any], degree: Optional[int] = None
) -> Verdict:
    """
    The ℏ → 0 symbol of ``op`` equals P (compared through y-degree ``op.grade``),
    and, for finite P, every ℏ-correction has y-degree below deg_y P.
    """
    limit = op.grade
    target = {
        k: to_field(v) for k, v in P.items() if v != 0 and (limit is None or k[1] <= limit)
    }
    symbol = {k: v for k, v in op.symbol().items() if limit is None or k[1] <= limit}
    if symbol != target:
        missing = sorted(set(symbol) ^ set(target) | {k for k in symbol if k in target and symbol[k] != target[k]})
        return Verdict("quantisation", False, {"symbol_mismatch": [list(k) for k in missing]})
    if degree is not None:
        high = [list(k) for k in op.terms if k[0] > 0 and k[2] > degree - 1]
        if high:
            return Verdict("quantisation", False, {"correction_degree": high})
    return Verdict("quantisation", True)
