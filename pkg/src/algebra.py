"""
Exact arithmetic foundation for the topological recursion engine.

This module provides rationals (``fractions.Fraction``), simple algebraic number
fields Q[a]/(p), dense univariate polynomials and rational functions over a
generic coefficient field, and truncated power/Laurent series that carry their
guaranteed order through every operation.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import factorial
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import sympy

from src.errors import PrecisionError

logging.basicConfig(
    level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)
logger = logging.getLogger(__name__)


class PointAtInfinity:
    """The point z = ∞ on the Riemann sphere (singleton)."""

    _instance: Optional["PointAtInfinity"] = None

    def __new__(cls) -> "PointAtInfinity":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "inf"

    def __hash__(self) -> int:
        return hash("inf")

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PointAtInfinity)


INFINITY = PointAtInfinity()


def to_field(value: Any) -> Any:
    """
    Coerce a scalar into an exact field element.

    Integers and decimal strings become ``Fraction``; ``Fraction`` and
    ``NumberFieldElement`` pass through unchanged.

    Raises:
        TypeError: For floats and unsupported types.
    """
    if isinstance(value, (Fraction, NumberFieldElement)):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, sympy.Rational):
        return Fraction(int(value.p), int(value.q))
    raise TypeError(f"Cannot use {value!r} ({type(value).__name__}) as exact scalar")


def format_scalar(value: Any) -> Any:
    """Canonical text for an exact scalar: "p/q" or a list of "p/q" coordinates."""
    if isinstance(value, NumberFieldElement):
        if value.is_rational():
            return format_scalar(value.to_rational())
        return [format_scalar(c) for c in value.coeffs]
    value = to_field(value)
    return f"{value.numerator}/{value.denominator}"


def parse_scalar(text: Any) -> Fraction:
    """Inverse of ``format_scalar`` for rational values."""
    if isinstance(text, int):
        return Fraction(text)
    return Fraction(str(text).strip())


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Poly:
    """
    Dense univariate polynomial, coefficients stored low to high.

    The zero polynomial has the empty coefficient tuple and degree -1.
    """

    coeffs: Tuple[Any, ...] = ()

    def __post_init__(self) -> None:
        values = [to_field(c) for c in self.coeffs]
        while values and values[-1] == 0:
            values.pop()
        object.__setattr__(self, "coeffs", tuple(values))

    @classmethod
    def constant(cls, value: Any) -> "Poly":
        return cls((value,))

    @classmethod
    def monomial(cls, power: int, value: Any = 1) -> "Poly":
        return cls((0,) * power + (value,))

    @classmethod
    def variable(cls) -> "Poly":
        return cls((0, 1))

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def leading(self) -> Any:
        if not self.coeffs:
            return Fraction(0)
        return self.coeffs[-1]

    def coefficient(self, power: int) -> Any:
        if 0 <= power < len(self.coeffs):
            return self.coeffs[power]
        return Fraction(0)

    def valuation(self) -> int:
        """Lowest exponent with a nonzero coefficient (degree + 1 for zero)."""
        for i, c in enumerate(self.coeffs):
            if c != 0:
                return i
        return len(self.coeffs)

    def _lift(self, other: Any) -> "Poly":
        if isinstance(other, Poly):
            return other
        return Poly((other,))

    def __add__(self, other: Any) -> "Poly":
        if isinstance(other, RatFunc):
            return NotImplemented
        other = self._lift(other)
        size = max(len(self.coeffs), len(other.coeffs))
        return Poly(
            tuple(self.coefficient(i) + other.coefficient(i) for i in range(size))
        )

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(tuple(-c for c in self.coeffs))

    def __sub__(self, other: Any) -> "Poly":
        if isinstance(other, RatFunc):
            return NotImplemented
        return self + (-self._lift(other))

    def __rsub__(self, other: Any) -> "Poly":
        return self._lift(other) - self

    def __mul__(self, other: Any) -> "Poly":
        if isinstance(other, (RatFunc, TruncatedSeries)):
            return NotImplemented
        if not isinstance(other, Poly):
            other = to_field(other)
            return Poly(tuple(c * other for c in self.coeffs))
        if not self.coeffs or not other.coeffs:
            return Poly()
        out: List[Any] = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return Poly(tuple(out))

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "Poly":
        if exponent < 0:
            raise ValueError("Negative powers of polynomials are RatFunc values")
        result = Poly((1,))
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __call__(self, value: Any) -> Any:
        """Evaluate by Horner's rule; ``value`` may be a scalar, Poly or series."""
        if not self.coeffs:
            return Fraction(0)
        acc: Any = self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * value + c
        return acc

    def compose(self, inner: "Poly") -> "Poly":
        result = self(inner)
        return result if isinstance(result, Poly) else Poly((result,))

    def shift(self, point: Any) -> "Poly":
        """Return p(point + t) as a polynomial in t."""
        return self.compose(Poly((point, 1)))

    def derivative(self) -> "Poly":
        return Poly(tuple(i * c for i, c in enumerate(self.coeffs) if i > 0))

    def __divmod__(self, other: "Poly") -> Tuple["Poly", "Poly"]:
        if other.is_zero():
            raise ZeroDivisionError("Polynomial division by zero")
        remainder = list(self.coeffs)
        quotient: List[Any] = [Fraction(0)] * max(
            len(self.coeffs) - len(other.coeffs) + 1, 0
        )
        lead_inv = 1 / other.leading()
        dg = other.degree()
        for k in range(len(remainder) - 1, dg - 1, -1):
            c = remainder[k]
            if c == 0:
                continue
            q = c * lead_inv
            quotient[k - dg] = q
            for j, b in enumerate(other.coeffs):
                remainder[k - dg + j] = remainder[k - dg + j] - q * b
        return Poly(tuple(quotient)), Poly(tuple(remainder[:dg] if dg > 0 else ()))

    def __floordiv__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[0]

    def __mod__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[1]

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        return self * (1 / self.leading())

    def to_text(self) -> List[Any]:
        return [format_scalar(c) for c in self.coeffs]

    def to_sympy(self, symbol: sympy.Symbol) -> sympy.Expr:
        terms = []
        for i, c in enumerate(self.coeffs):
            if isinstance(c, NumberFieldElement):
                raise ValueError("Only rational polynomials convert to sympy")
            terms.append(sympy.Rational(c.numerator, c.denominator) * symbol**i)
        return sympy.Add(*terms)

    @classmethod
    def from_sympy(cls, expr: sympy.Expr, symbol: sympy.Symbol) -> "Poly":
        poly = sympy.Poly(expr, symbol)
        coeffs = list(reversed(poly.all_coeffs()))
        return cls(tuple(to_field(sympy.Rational(c)) for c in coeffs))


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """
    Monic greatest common divisor of two polynomials over a field.

    Args:
        a: First polynomial.
        b: Second polynomial.

    Returns:
        The monic gcd; the zero polynomial when both inputs vanish.
    """
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def poly_xgcd(a: Poly, b: Poly) -> Tuple[Poly, Poly, Poly]:
    """Extended Euclid: returns (g, s, t) with s*a + t*b = g, g monic."""
    r0, r1 = a, b
    s0, s1 = Poly((1,)), Poly()
    t0, t1 = Poly(), Poly((1,))
    while not r1.is_zero():
        q, r = divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if r0.is_zero():
        return r0, s0, t0
    lead_inv = 1 / r0.leading()
    return r0 * lead_inv, s0 * lead_inv, t0 * lead_inv


def factor_over_rationals(p: Poly) -> List[Tuple[Poly, int]]:
    """
    Factor a rational polynomial into monic irreducibles with multiplicities.

    Factors are ordered by (degree, coefficient text) so that orbit numbering is
    deterministic.
    """
    z = sympy.Symbol("z")
    _, factors = sympy.factor_list(p.to_sympy(z), z, domain="QQ")
    result = [(Poly.from_sympy(f, z).monic(), int(m)) for f, m in factors]
    result = [(f, m) for f, m in result if f.degree() > 0]
    result.sort(key=lambda fm: (fm[0].degree(), [str(c) for c in fm[0].coeffs]))
    return result


# ---------------------------------------------------------------------------
# Number fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NumberField:
    """
    Simple extension Q[a]/(p) with p monic and squarefree.

    Attributes:
        minimal_polynomial: Monic rational polynomial defining the generator.
        name: Display name of the generator.
    """

    minimal_polynomial: Poly
    name: str = "a"

    def __post_init__(self) -> None:
        p = self.minimal_polynomial
        if p.degree() < 1:
            logger.error(f"Minimal polynomial {p.to_text()} has degree < 1")
            raise ValueError("Number field needs a polynomial of positive degree")
        if p.leading() != 1:
            raise ValueError("Minimal polynomial must be monic")
        if any(isinstance(c, NumberFieldElement) for c in p.coeffs):
            raise ValueError("Minimal polynomial must have rational coefficients")
        if poly_gcd(p, p.derivative()).degree() > 0:
            logger.error(f"Minimal polynomial {p.to_text()} is not squarefree")
            raise ValueError("Minimal polynomial must be squarefree")

    @property
    def degree(self) -> int:
        return self.minimal_polynomial.degree()

    @cached_property
    def _reductions(self) -> Tuple[Tuple[Fraction, ...], ...]:
        # _reductions[k] holds the coordinates of a^(degree + k)
        deg = self.degree
        p = self.minimal_polynomial.coeffs
        top = tuple(-p[i] for i in range(deg))
        rows = [top]
        for _ in range(deg - 2):
            prev = rows[-1]
            carry = prev[-1]
            shifted = (Fraction(0),) + prev[:-1]
            rows.append(tuple(shifted[i] + carry * top[i] for i in range(deg)))
        return tuple(rows)

    def reduce(self, values: Sequence[Fraction]) -> Tuple[Fraction, ...]:
        deg = self.degree
        out = [Fraction(0)] * deg
        for i, c in enumerate(values):
            if c == 0:
                continue
            if i < deg:
                out[i] += c
            else:
                row = self._reductions[i - deg]
                for j in range(deg):
                    out[j] += c * row[j]
        return tuple(out)

    def element(self, coeffs: Sequence[Any]) -> "NumberFieldElement":
        return NumberFieldElement(self, coeffs)

    def generator(self) -> "NumberFieldElement":
        if self.degree == 1:
            return self.element([-self.minimal_polynomial.coeffs[0]])
        return self.element([0, 1])

    def one(self) -> "NumberFieldElement":
        return self.element([1])


class NumberFieldElement:
    """Element of a NumberField, stored as coordinates in the power basis."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: NumberField, coeffs: Sequence[Any]) -> None:
        values = [to_field(c) for c in coeffs]
        if any(isinstance(v, NumberFieldElement) for v in values):
            raise TypeError("Nested number field elements are not supported")
        self.field = field
        self.coeffs: Tuple[Fraction, ...] = field.reduce(values)

    def _coerce(self, other: Any) -> Optional["NumberFieldElement"]:
        if isinstance(other, NumberFieldElement):
            if other.field != self.field:
                raise ValueError("Elements of different number fields")
            return other
        if isinstance(other, (int, Fraction)):
            return NumberFieldElement(self.field, [other])
        return None

    def __add__(self, other: Any) -> Any:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return NumberFieldElement(
            self.field, [a + b for a, b in zip(self.coeffs, o.coeffs)]
        )

    __radd__ = __add__

    def __neg__(self) -> "NumberFieldElement":
        return NumberFieldElement(self.field, [-a for a in self.coeffs])

    def __sub__(self, other: Any) -> Any:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other: Any) -> Any:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other: Any) -> Any:
        if isinstance(other, (int, Fraction)):
            other = Fraction(other)
            return NumberFieldElement(self.field, [a * other for a in self.coeffs])
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        deg = self.field.degree
        prod = [Fraction(0)] * (2 * deg - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(o.coeffs):
                prod[i + j] += a * b
        return NumberFieldElement(self.field, prod)

    __rmul__ = __mul__

    def inverse(self) -> "NumberFieldElement":
        if self == 0:
            raise ZeroDivisionError("Inverse of zero in a number field")
        g, s, _ = poly_xgcd(Poly(self.coeffs), self.field.minimal_polynomial)
        if g.degree() != 0:
            raise ZeroDivisionError("Element is not invertible")
        return NumberFieldElement(self.field, s.coeffs)

    def __truediv__(self, other: Any) -> Any:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other: Any) -> Any:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, exponent: int) -> "NumberFieldElement":
        base = self if exponent >= 0 else self.inverse()
        exponent = abs(exponent)
        result = self.field.one()
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, NumberFieldElement):
            return self.field == other.field and self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs[0] == other and all(c == 0 for c in self.coeffs[1:])
        return NotImplemented

    def __hash__(self) -> int:
        if self.is_rational():
            return hash(self.coeffs[0])
        return hash((self.field.minimal_polynomial.coeffs, self.coeffs))

    def __bool__(self) -> bool:
        return any(c != 0 for c in self.coeffs)

    def __repr__(self) -> str:
        terms = [
            f"{c}*{self.field.name}^{i}" if i else str(c)
            for i, c in enumerate(self.coeffs)
            if c != 0
        ]
        return " + ".join(terms) if terms else "0"

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def to_rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self!r} is not rational")
        return self.coeffs[0]

    def trace(self) -> Fraction:
        """Field trace Tr_{K/Q}, i.e. the sum over all conjugates."""
        gen = self.field.generator()
        total = Fraction(0)
        power = self.field.one()
        for i in range(self.field.degree):
            total += (power * self).coeffs[i]
            power = power * gen
        return total


def cyclotomic_field(order: int) -> NumberField:
    """Q(θ) for θ a primitive ``order``-th root of unity."""
    z = sympy.Symbol("z")
    phi = Poly.from_sympy(sympy.cyclotomic_poly(order, z), z)
    return NumberField(phi, name=f"theta{order}")


def rationalize(value: Any) -> Fraction:
    """Return a Fraction, insisting that number field values are rational."""
    if isinstance(value, NumberFieldElement):
        return value.to_rational()
    return to_field(value)


# ---------------------------------------------------------------------------
# Rational functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RatFunc:
    """
    Reduced quotient num/den of polynomials with monic denominator.
    """

    num: Poly
    den: Poly = Poly((1,))

    def __post_init__(self) -> None:
        num, den = self.num, self.den
        if not isinstance(num, Poly):
            num = Poly(tuple(num))
        if not isinstance(den, Poly):
            den = Poly(tuple(den))
        if den.is_zero():
            raise ZeroDivisionError("Rational function with zero denominator")
        if num.is_zero():
            num, den = Poly(), Poly((1,))
        else:
            g = poly_gcd(num, den)
            if g.degree() > 0:
                num, den = num // g, den // g
            lead = den.leading()
            if lead != 1:
                num, den = num * (1 / lead), den * (1 / lead)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def of(cls, num: Iterable[Any], den: Iterable[Any] = (1,)) -> "RatFunc":
        return cls(Poly(tuple(num)), Poly(tuple(den)))

    @classmethod
    def variable(cls) -> "RatFunc":
        return cls(Poly.variable())

    @classmethod
    def constant(cls, value: Any) -> "RatFunc":
        return cls(Poly((value,)))

    def _lift(self, other: Any) -> "RatFunc":
        if isinstance(other, RatFunc):
            return other
        if isinstance(other, Poly):
            return RatFunc(other)
        return RatFunc(Poly((other,)))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.degree() == 0

    def is_constant(self) -> bool:
        return self.is_polynomial() and self.num.degree() <= 0

    def __add__(self, other: Any) -> "RatFunc":
        o = self._lift(other)
        if self.den == o.den:
            return RatFunc(self.num + o.num, self.den)
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self) -> "RatFunc":
        return RatFunc(-self.num, self.den)

    def __sub__(self, other: Any) -> "RatFunc":
        return self + (-self._lift(other))

    def __rsub__(self, other: Any) -> "RatFunc":
        return self._lift(other) - self

    def __mul__(self, other: Any) -> "RatFunc":
        if isinstance(other, TruncatedSeries):
            return NotImplemented
        o = self._lift(other)
        return RatFunc(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "RatFunc":
        o = self._lift(other)
        if o.is_zero():
            raise ZeroDivisionError("Division by the zero rational function")
        return RatFunc(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other: Any) -> "RatFunc":
        return self._lift(other) / self

    def __pow__(self, exponent: int) -> "RatFunc":
        if exponent >= 0:
            return RatFunc(self.num**exponent, self.den**exponent)
        return RatFunc(self.den ** (-exponent), self.num ** (-exponent))

    def derivative(self) -> "RatFunc":
        num = self.num.derivative() * self.den - self.num * self.den.derivative()
        return RatFunc(num, self.den * self.den)

    def __call__(self, value: Any) -> Any:
        if isinstance(value, PointAtInfinity):
            return self.value_at_infinity()
        d = self.den(value)
        if d == 0:
            raise ZeroDivisionError(f"Pole of rational function at {value!r}")
        return self.num(value) / d

    def value_at_infinity(self) -> Any:
        dn, dd = self.num.degree(), self.den.degree()
        if dn > dd:
            raise ZeroDivisionError("Pole of rational function at infinity")
        if dn < dd:
            return Fraction(0)
        return self.num.leading() / self.den.leading()

    def compose(self, inner: "RatFunc") -> "RatFunc":
        """Return self(inner(z))."""
        num = self.num(inner)
        den = self.den(inner)
        return self._lift(num) / self._lift(den)

    def valuation_at(self, point: Any) -> int:
        """Order of vanishing at a finite point or at INFINITY (negative for poles)."""
        if self.is_zero():
            raise ValueError("The zero function has no valuation")
        if isinstance(point, PointAtInfinity):
            return self.den.degree() - self.num.degree()
        return self.num.shift(point).valuation() - self.den.shift(point).valuation()

    def laurent(self, point: Any, order: int) -> "TruncatedSeries":
        """
        Laurent expansion in t = z - point (or w = 1/z at INFINITY).

        Args:
            point: Finite field element or INFINITY.
            order: Exclusive bound on the exponents returned.

        Returns:
            TruncatedSeries exact for all exponents below ``order``.
        """
        if isinstance(point, PointAtInfinity):
            num = Poly(tuple(reversed(self.num.coeffs)))
            den = Poly(tuple(reversed(self.den.coeffs)))
            offset = self.den.degree() - self.num.degree()
        else:
            num = self.num.shift(point)
            den = self.den.shift(point)
            offset = 0
        if num.is_zero():
            return TruncatedSeries((), order, order, point)
        vn, vd = num.valuation(), den.valuation()
        valuation = vn - vd + offset
        rel = order - valuation
        if rel <= 0:
            return TruncatedSeries((), order, order, point)
        a = [num.coefficient(vn + i) for i in range(rel)]
        b = [den.coefficient(vd + i) for i in range(rel)]
        return TruncatedSeries(tuple(_series_divide(a, b, rel)), valuation, order, point)

    def to_text(self) -> Dict[str, List[Any]]:
        return {"num": self.num.to_text(), "den": self.den.to_text()}


def _series_divide(a: Sequence[Any], b: Sequence[Any], count: int) -> List[Any]:
    inv_b0 = 1 / b[0]
    q: List[Any] = []
    for k in range(count):
        acc = a[k] if k < len(a) else Fraction(0)
        for j in range(1, min(k, len(b) - 1) + 1):
            if b[j] != 0:
                acc = acc - b[j] * q[k - j]
        q.append(acc * inv_b0)
    return q


# ---------------------------------------------------------------------------
# Truncated series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TruncatedSeries:
    """
    Truncated Laurent series Σ c_e t^e + O(t^order) at a base point.

    ``coeffs[i]`` is the coefficient of t^(valuation + i). After construction the
    leading coefficient is nonzero (or the series is known to vanish below
    ``order``, in which case ``valuation == order``), and
    ``len(coeffs) == order - valuation``.
    """

    coeffs: Tuple[Any, ...]
    valuation: int
    order: int
    point: Any = 0

    def __post_init__(self) -> None:
        size = max(self.order - self.valuation, 0)
        values = [to_field(c) for c in self.coeffs[:size]]
        valuation = self.valuation
        start = 0
        while start < len(values) and values[start] == 0:
            start += 1
        values = values[start:]
        valuation += start
        if not values:
            valuation = self.order
        values.extend([Fraction(0)] * (self.order - valuation - len(values)))
        object.__setattr__(self, "coeffs", tuple(values))
        object.__setattr__(self, "valuation", valuation)

    # -- construction ------------------------------------------------------

    def _new(self, coeffs: Sequence[Any], valuation: int, order: int) -> Any:
        return type(self)(tuple(coeffs), valuation, order, self.point)

    @classmethod
    def zero(cls, order: int, point: Any = 0) -> Any:
        return cls((), order, order, point)

    @classmethod
    def one(cls, order: int, point: Any = 0) -> Any:
        return cls((1,), 0, order, point)

    @classmethod
    def from_dict(cls, terms: Dict[int, Any], order: int, point: Any = 0) -> Any:
        if not terms:
            return cls.zero(order, point)
        low = min(min(terms), order)
        coeffs = [terms.get(e, 0) for e in range(low, order)]
        return cls(tuple(coeffs), low, order, point)

    # -- access ------------------------------------------------------------

    def coefficient(self, exponent: int) -> Any:
        """
        Coefficient of t^exponent.

        Raises:
            PrecisionError: If ``exponent`` is at or beyond the truncation order.
        """
        if exponent >= self.order:
            raise PrecisionError(
                f"Coefficient t^{exponent} requested from series known to "
                f"O(t^{self.order})",
                required_order=exponent + 1,
            )
        if exponent < self.valuation:
            return Fraction(0)
        return self.coeffs[exponent - self.valuation]

    def is_zero(self) -> bool:
        return not any(c != 0 for c in self.coeffs)

    def terms(self) -> Dict[int, Any]:
        return {
            self.valuation + i: c for i, c in enumerate(self.coeffs) if c != 0
        }

    def truncate(self, order: int) -> Any:
        if order >= self.order:
            return self
        return self._new(self.coeffs, self.valuation, order)

    def shift(self, power: int) -> Any:
        """Multiply by t^power."""
        return self._new(self.coeffs, self.valuation + power, self.order + power)

    # -- arithmetic --------------------------------------------------------

    def _check_point(self, other: "TruncatedSeries") -> None:
        if other.point != self.point:
            raise ValueError(
                f"Series at different base points: {self.point!r} vs {other.point!r}"
            )

    def __add__(self, other: Any) -> Any:
        if isinstance(other, TruncatedSeries):
            self._check_point(other)
            order = min(self.order, other.order)
            low = min(self.valuation, other.valuation, order)
            coeffs = []
            for e in range(low, order):
                a = self.coeffs[e - self.valuation] if e >= self.valuation else 0
                b = other.coeffs[e - other.valuation] if e >= other.valuation else 0
                coeffs.append(a + b)
            return self._new(coeffs, low, order)
        if isinstance(other, (RatFunc, Poly)):
            return NotImplemented
        other = to_field(other)
        if other == 0 or self.order <= 0:
            return self
        low = min(self.valuation, 0)
        coeffs = [self.coefficient(e) for e in range(low, self.order)]
        coeffs[-low] = coeffs[-low] + other
        return self._new(coeffs, low, self.order)

    __radd__ = __add__

    def __neg__(self) -> Any:
        return self._new([-c for c in self.coeffs], self.valuation, self.order)

    def __sub__(self, other: Any) -> Any:
        return self + (-other)

    def __rsub__(self, other: Any) -> Any:
        return (-self) + other

    def __mul__(self, other: Any) -> Any:
        if isinstance(other, TruncatedSeries):
            self._check_point(other)
            order = min(self.order + other.valuation, other.order + self.valuation)
            low = self.valuation + other.valuation
            size = order - low
            if size <= 0:
                return self._new((), order, order)
            a, b = self.coeffs, other.coeffs
            out: List[Any] = [Fraction(0)] * size
            for i in range(min(size, len(a))):
                ai = a[i]
                if ai == 0:
                    continue
                for j in range(min(size - i, len(b))):
                    out[i + j] = out[i + j] + ai * b[j]
            return self._new(out, low, order)
        if isinstance(other, (RatFunc, Poly)):
            return NotImplemented
        other = to_field(other)
        return self._new([c * other for c in self.coeffs], self.valuation, self.order)

    __rmul__ = __mul__

    def inverse(self) -> Any:
        """
        Multiplicative inverse.

        Raises:
            PrecisionError: If no nonzero coefficient is known.
        """
        if not self.coeffs:
            raise PrecisionError(
                "Cannot invert a series with no known nonzero coefficient",
                required_order=self.order + 1,
            )
        size = len(self.coeffs)
        a = self.coeffs
        inv_a0 = 1 / a[0]
        b: List[Any] = [inv_a0]
        for n in range(1, size):
            acc: Any = Fraction(0)
            for k in range(1, n + 1):
                if a[k] != 0:
                    acc = acc + a[k] * b[n - k]
            b.append(-acc * inv_a0)
        return self._new(b, -self.valuation, -self.valuation + size)

    def __truediv__(self, other: Any) -> Any:
        if isinstance(other, TruncatedSeries):
            return self * other.inverse()
        return self * (1 / to_field(other))

    def __rtruediv__(self, other: Any) -> Any:
        return self.inverse() * other

    def __pow__(self, exponent: int) -> Any:
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = self._new((1,), 0, self.order - self.valuation)
        base = self
        first = True
        while exponent:
            if exponent & 1:
                result = base if first else result * base
                first = False
            exponent >>= 1
            if exponent:
                base = base * base
        return result

    def power(self, exponent: Fraction) -> Any:
        """
        Rational power of a series with constant term 1.

        Raises:
            ValueError: If the series does not start with 1 + O(t).
        """
        exponent = to_field(exponent)
        if self.valuation != 0 or self.coeffs[0] != 1:
            raise ValueError("Rational powers need a series of the form 1 + O(t)")
        f = self.coeffs
        h: List[Any] = [Fraction(1)]
        for n in range(1, len(f)):
            acc: Any = Fraction(0)
            for k in range(1, n + 1):
                if f[k] != 0:
                    acc = acc + (exponent * k - (n - k)) * f[k] * h[n - k]
            h.append(acc / n)
        return self._new(h, 0, self.order)

    def exp(self) -> Any:
        """Exponential of a series with positive valuation."""
        if self.valuation < 1:
            raise ValueError("exp needs a series without constant or polar terms")
        order = self.order
        f = [self.coefficient(e) for e in range(order)] if order > 0 else []
        h: List[Any] = [Fraction(1)]
        for n in range(1, order):
            acc: Any = Fraction(0)
            for k in range(1, n + 1):
                if f[k] != 0:
                    acc = acc + k * f[k] * h[n - k]
            h.append(acc / n)
        return self._new(h, 0, order)

    def log(self) -> Any:
        """Logarithm of a series of the form 1 + O(t)."""
        if self.valuation != 0 or self.coeffs[0] != 1:
            raise ValueError("log needs a series of the form 1 + O(t)")
        return (self.derivative() / self).integral()

    def derivative(self) -> Any:
        coeffs = [(self.valuation + i) * c for i, c in enumerate(self.coeffs)]
        return self._new(coeffs, self.valuation - 1, self.order - 1)

    def integral(self) -> Any:
        """Antiderivative with zero constant term."""
        coeffs = []
        for i, c in enumerate(self.coeffs):
            e = self.valuation + i
            if e == -1:
                if c != 0:
                    logger.error("Series has a t^-1 term and no rational antiderivative")
                    raise ValueError("Cannot integrate a series with a residue")
                coeffs.append(Fraction(0))
            else:
                coeffs.append(c / (e + 1))
        return self._new(coeffs, self.valuation + 1, self.order + 1)

    def compose(self, inner: "TruncatedSeries") -> "TruncatedSeries":
        return series_compose(self, inner)

    def to_text(self) -> Dict[str, Any]:
        point = "inf" if isinstance(self.point, PointAtInfinity) else self.point
        return {
            "point": format_scalar(point) if point != "inf" else point,
            "valuation": self.valuation,
            "coefficients": [format_scalar(c) for c in self.coeffs],
            "order": self.order,
        }


class HbarSeries(TruncatedSeries):
    """Truncated Laurent series in ℏ; same discipline as TruncatedSeries."""


def series_compose(outer: TruncatedSeries, inner: TruncatedSeries) -> TruncatedSeries:
    """
    Compose two truncated series, outer(inner(t)).

    Args:
        outer: Series in s.
        inner: Series in t with positive valuation.

    Returns:
        The composition, truncated at the tightest order implied by both inputs.

    Raises:
        ValueError: If ``inner`` has nonpositive valuation.
    """
    if inner.valuation < 1 or not inner.coeffs:
        logger.error(f"Composition needs positive inner valuation, got {inner.valuation}")
        raise ValueError("Inner series must have positive valuation")
    v_in = inner.valuation
    rel_in = inner.order - v_in
    order = outer.order * v_in
    for e, c in outer.terms().items():
        order = min(order, e * v_in + rel_in)
    result = type(outer).zero(order, inner.point)
    if not outer.terms():
        return result
    first = outer.valuation
    power = (inner**first).truncate(order)
    for e in range(first, outer.order):
        c = outer.coefficient(e)
        if c != 0:
            result = result + power * c
        if e + 1 < outer.order:
            power = (power * inner).truncate(order)
    return result.truncate(order)


def lagrange_invert(s: TruncatedSeries) -> TruncatedSeries:
    """
    Functional inverse of a series with valuation exactly 1.

    Uses the Lagrange formula b_n = (1/n) [w^(n-1)] (w / s(w))^n.

    Raises:
        ValueError: If the valuation of ``s`` is not 1.
    """
    if s.valuation != 1:
        logger.error(f"Lagrange inversion needs valuation 1, got {s.valuation}")
        raise ValueError("Series must have valuation exactly 1")
    order = s.order
    phi = TruncatedSeries(s.coeffs, 0, order - 1, s.point).inverse()
    coeffs: List[Any] = []
    power = phi
    for n in range(1, order):
        coeffs.append(power.coefficient(n - 1) / n)
        if n + 1 < order:
            power = power * phi
    return type(s)(tuple(coeffs), 1, order, 0)


def residue(s: TruncatedSeries) -> Any:
    """
    Residue of the differential f dt represented by the series f.

    At a finite base point this is the coefficient of t^-1. At INFINITY the series
    stores f(z) for the differential f(z) dz expanded in w = 1/z, and the residue
    is -[w^1] f because dz = -dw/w^2.

    Raises:
        PrecisionError: If the needed coefficient lies beyond the truncation.
    """
    if isinstance(s.point, PointAtInfinity):
        return -s.coefficient(1)
    return s.coefficient(-1)


def sfun_series(order: int) -> HbarSeries:
    """
    Series of S(z) = sinh(z/2)/(z/2) through z^order.

    Args:
        order: Highest power of z kept (inclusive).
    """
    terms = {
        2 * k: Fraction(1, 4**k * factorial(2 * k + 1)) for k in range(order // 2 + 1)
    }
    return HbarSeries.from_dict(terms, order + 1)


def bernoulli(n: int) -> Fraction:
    """Bernoulli number B_n with B_1 = -1/2."""
    value = sympy.bernoulli(n)
    if n == 1:
        return Fraction(-1, 2)
    return to_field(sympy.Rational(value))


def falling_factorial(n: Any, k: int) -> Any:
    result: Any = Fraction(1)
    for i in range(k):
        result = result * (n - i)
    return result
