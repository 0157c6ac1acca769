"""
Symmetric-group ground truth for Atlantes and completed-cycles Hurwitz numbers.

Two independent routes are provided: characters of S_d (Murnaghan–Nakayama,
content eigenvalues of Jucys–Murphy elements) and brute-force expansion in the
group algebra Q[S_d]. The hypergeometric tau function

    Z = Σ_ν exp(Σ_{□∈ν} ψ̂(ℏ², −ℏ c_□)) s_ν(p) s_ν({ŷ_k/ℏ})

is truncated in p-degree and ℏ, its logarithm F gives the connected generating
series H_{g,n}, and these are compared with recursion correlators expanded in
X = z·exp(−ψ(ŷ(z))).
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Dict, Iterable, List, Sequence, Tuple

import sympy
from sympy.combinatorics import Permutation
from sympy.utilities.iterables import multiset_permutations, partitions

from src.algebra import (
    HbarSeries,
    RatFunc,
    TruncatedSeries,
    format_scalar,
    lagrange_invert,
    series_compose,
    sfun_series,
)
from src.recursion import CorrelatorTable, PoleDescriptor, Verdict

logging.basicConfig(
    level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)
logger = logging.getLogger(__name__)

Partition = Tuple[int, ...]

MAX_DIRECT_DEGREE = 6
MAX_CHARACTER_DEGREE = 10


# ---------------------------------------------------------------------------
# Partitions and characters
# ---------------------------------------------------------------------------


def normalize_partition(parts: Iterable[int]) -> Partition:
    """Weakly decreasing tuple of positive parts."""
    values = [int(p) for p in parts]
    if any(p <= 0 for p in values):
        raise ValueError(f"Partition parts must be positive: {values}")
    return tuple(sorted(values, reverse=True))


@lru_cache(maxsize=None)
def partitions_of(d: int) -> Tuple[Partition, ...]:
    """All partitions of d in reverse lexicographic order."""
    if d == 0:
        return ((),)
    out = []
    for p in partitions(d):
        out.append(normalize_partition(k for k, m in p.items() for _ in range(m)))
    return tuple(sorted(out, reverse=True))


def contents(nu: Partition) -> List[int]:
    """Contents j − i of the cells (i, j) of the Young diagram."""
    return [j - i for i, row in enumerate(nu) for j in range(row)]


def centralizer_order(mu: Partition) -> int:
    """z_μ = ∏ i^{m_i} m_i!."""
    result = 1
    for part in set(mu):
        m = mu.count(part)
        result *= part**m * math.factorial(m)
    return result


def class_size(mu: Partition) -> int:
    return math.factorial(sum(mu)) // centralizer_order(mu)


def cycle_type(perm: Sequence[int]) -> Partition:
    structure = Permutation(list(perm)).cycle_structure
    return normalize_partition(k for k, m in structure.items() for _ in range(m))


@lru_cache(maxsize=None)
def _character_beta(beta: Tuple[int, ...], mu: Partition) -> int:
    if not mu:
        return 1
    k, rest = mu[0], mu[1:]
    members = set(beta)
    total = 0
    for b in beta:
        target = b - k
        if target < 0 or target in members:
            continue
        height = sum(1 for c in beta if target < c < b)
        new_beta = tuple(sorted((members - {b}) | {target}, reverse=True))
        total += (-1) ** height * _character_beta(new_beta, rest)
    return total


def character(nu: Partition, mu: Partition) -> int:
    """
    χ^ν(μ) by the Murnaghan–Nakayama rule on beta numbers.

    Raises:
        ValueError: If |ν| ≠ |μ|.
    """
    if sum(nu) != sum(mu):
        raise ValueError(f"Partitions of different sizes: {nu} and {mu}")
    length = len(nu)
    beta = tuple(part + length - 1 - i for i, part in enumerate(nu))
    return _character_beta(beta, normalize_partition(mu) if mu else ())


def dimension(nu: Partition) -> int:
    return character(nu, (1,) * sum(nu)) if nu else 1


# ---------------------------------------------------------------------------
# Class algebra
# ---------------------------------------------------------------------------


@dataclass
class ClassAlgebraElement:
    """Central element Σ_μ a_μ C_μ of Q[S_d] in the class-sum basis."""

    d: int
    coeffs: Dict[Partition, Fraction] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for mu in self.coeffs:
            if sum(mu) != self.d:
                raise ValueError(f"Class {mu} does not belong to S_{self.d}")
        self.coeffs = {mu: Fraction(v) for mu, v in self.coeffs.items() if v != 0}

    @classmethod
    def class_sum(cls, mu: Partition) -> "ClassAlgebraElement":
        mu = normalize_partition(mu)
        return cls(sum(mu), {mu: Fraction(1)})

    @classmethod
    def from_eigenvalues(
        cls, d: int, eigenvalue: Callable[[Partition], Any]
    ) -> "ClassAlgebraElement":
        """The central element acting on V_ν by ``eigenvalue(ν)``."""
        coeffs: Dict[Partition, Fraction] = {}
        for mu in partitions_of(d):
            total = Fraction(0)
            for nu in partitions_of(d):
                total += Fraction(dimension(nu), math.factorial(d)) * eigenvalue(nu) * character(nu, mu)
            coeffs[mu] = total
        return cls(d, coeffs)

    def eigenvalue(self, nu: Partition) -> Fraction:
        """Scalar by which the element acts on the irreducible V_ν."""
        dim = dimension(nu)
        return sum(
            (v * class_size(mu) * character(nu, mu) / dim for mu, v in self.coeffs.items()),
            Fraction(0),
        )

    def __add__(self, other: "ClassAlgebraElement") -> "ClassAlgebraElement":
        coeffs = dict(self.coeffs)
        for mu, v in other.coeffs.items():
            coeffs[mu] = coeffs.get(mu, Fraction(0)) + v
        return ClassAlgebraElement(self.d, coeffs)

    def __mul__(self, other: Any) -> "ClassAlgebraElement":
        if not isinstance(other, ClassAlgebraElement):
            return ClassAlgebraElement(self.d, {mu: v * other for mu, v in self.coeffs.items()})
        if other.d != self.d:
            raise ValueError("Class algebra elements of different degrees")
        return ClassAlgebraElement.from_eigenvalues(
            self.d, lambda nu: self.eigenvalue(nu) * other.eigenvalue(nu)
        )

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "ClassAlgebraElement":
        return ClassAlgebraElement.from_eigenvalues(
            self.d, lambda nu: self.eigenvalue(nu) ** exponent
        )

    def identity_coefficient(self) -> Fraction:
        return self.coeffs.get((1,) * self.d, Fraction(0))

    def to_json(self) -> Dict[str, Any]:
        return {
            "d": self.d,
            "classes": [
                {"mu": list(mu), "coeff": format_scalar(v)}
                for mu, v in sorted(self.coeffs.items())
            ],
        }


# ---------------------------------------------------------------------------
# Brute force in Q[S_d]
# ---------------------------------------------------------------------------

GroupElement = Dict[Tuple[int, ...], Fraction]


def _compose(p: Tuple[int, ...], q: Tuple[int, ...]) -> Tuple[int, ...]:
    return tuple(p[i] for i in q)


def group_multiply(a: GroupElement, b: GroupElement) -> GroupElement:
    out: GroupElement = {}
    for p, u in a.items():
        for q, v in b.items():
            key = _compose(p, q)
            out[key] = out.get(key, Fraction(0)) + u * v
    return {k: v for k, v in out.items() if v != 0}


def _identity(d: int) -> Tuple[int, ...]:
    return tuple(range(d))


def _transposition(d: int, i: int, j: int) -> Tuple[int, ...]:
    arr = list(range(d))
    arr[i], arr[j] = arr[j], arr[i]
    return tuple(arr)


def jucys_murphy(d: int, k: int) -> GroupElement:
    """𝒥_k = Σ_{j<k} (j k), with 1-based k."""
    return {_transposition(d, j, k - 1): Fraction(1) for j in range(k - 1)}


def class_sum_element(mu: Partition) -> GroupElement:
    d = sum(mu)
    return {
        perm: Fraction(1)
        for perm in itertools.permutations(range(d))
        if cycle_type(perm) == normalize_partition(mu)
    }


def to_class_basis(d: int, element: GroupElement) -> ClassAlgebraElement:
    """
    Class-basis form of a central group-algebra element.

    Raises:
        ValueError: If the element is not constant on conjugacy classes.
    """
    coeffs: Dict[Partition, Fraction] = {}
    for perm in itertools.permutations(range(d)):
        mu = cycle_type(perm)
        value = element.get(perm, Fraction(0))
        if mu in coeffs and coeffs[mu] != value:
            logger.error(f"Element is not central in S_{d} (class {mu})")
            raise ValueError("Element is not constant on conjugacy classes")
        coeffs[mu] = value
    return ClassAlgebraElement(d, coeffs)


def _check_direct(d: int) -> None:
    if d > MAX_DIRECT_DEGREE:
        logger.error(f"Direct S_{d} enumeration beyond the limit {MAX_DIRECT_DEGREE}")
        raise ValueError(f"Direct enumeration supports d <= {MAX_DIRECT_DEGREE}")


def _group_power(element: GroupElement, exponent: int, d: int) -> GroupElement:
    result: GroupElement = {_identity(d): Fraction(1)}
    for _ in range(exponent):
        result = group_multiply(result, element)
    return result


def power_sum(values: Iterable[int], r: int) -> int:
    return sum(v**r for v in values)


def jm_power_sum(d: int, r: int, method: str = "characters") -> ClassAlgebraElement:
    """
    p_r(𝒥_2, …, 𝒥_d) in the class-sum basis.

    Args:
        d: Degree of the symmetric group.
        r: Power.
        method: "characters" (content eigenvalues) or "direct" (expansion in Q[S_d]).

    Raises:
        ValueError: For d beyond the enumeration limit of the chosen route.
    """
    if d < 1 or r < 1:
        raise ValueError("d and r must be positive")
    if method == "direct":
        _check_direct(d)
        total: GroupElement = {}
        for k in range(2, d + 1):
            for perm, v in _group_power(jucys_murphy(d, k), r, d).items():
                total[perm] = total.get(perm, Fraction(0)) + v
        return to_class_basis(d, total)
    if d > MAX_CHARACTER_DEGREE:
        raise ValueError(f"Character route supports d <= {MAX_CHARACTER_DEGREE}")
    return ClassAlgebraElement.from_eigenvalues(d, lambda nu: power_sum(contents(nu), r))


def elementary_jm(d: int, b: int, method: str = "characters") -> ClassAlgebraElement:
    """σ_b(𝒥_2, …, 𝒥_d), directly as [t^b] ∏_k (1 + t𝒥_k) or by content eigenvalues."""
    if method == "direct":
        _check_direct(d)
        layers: List[GroupElement] = [{_identity(d): Fraction(1)}]
        for k in range(2, d + 1):
            jk = jucys_murphy(d, k)
            updated = [dict(layer) for layer in layers] + [{}]
            for degree, layer in enumerate(layers):
                for perm, v in group_multiply(layer, jk).items():
                    target = updated[degree + 1]
                    target[perm] = target.get(perm, Fraction(0)) + v
            layers = updated
        return to_class_basis(d, layers[b] if b < len(layers) else {})

    def eigen(nu: Partition) -> int:
        return sum(math.prod(c) for c in itertools.combinations(contents(nu), b))

    return ClassAlgebraElement.from_eigenvalues(d, eigen)


def jucys_identity(d: int, b: int, method: str = "direct") -> Verdict:
    """σ_b(𝒥) equals the sum of the classes C_α with ℓ(α) = d − b."""
    expected = ClassAlgebraElement(
        d, {mu: Fraction(1) for mu in partitions_of(d) if len(mu) == d - b}
    )
    actual = elementary_jm(d, b, method)
    passed = actual.coeffs == expected.coeffs
    return Verdict(f"jucys[{d},{b}]", passed, None if passed else actual.to_json())


def _blocks(g: int, mu: Partition, r: int) -> int:
    d, length = sum(mu), len(mu)
    numerator = 2 * g - 2 + d + length
    if numerator < 0 or numerator % r:
        logger.error(f"b = {numerator}/{r} is not a nonnegative integer for g={g}, mu={mu}")
        raise ValueError(f"Riemann-Hurwitz count (2g-2+d+l)/r = {numerator}/{r} is not integral")
    return numerator // r


def atlantes_hurwitz(
    g: int, mu: Sequence[int], r: int, method: str = "characters"
) -> Fraction:
    """
    Disconnected Atlantes Hurwitz number (1/d!)[1] C_μ p_r(𝒥)^b.

    For μ = (d) this is also the connected number.

    Raises:
        ValueError: If b = (2g−2+d+ℓ(μ))/r is not a nonnegative integer.
    """
    mu = normalize_partition(mu)
    d = sum(mu)
    b = _blocks(g, mu, r)
    if method == "direct":
        _check_direct(d)
        jm: GroupElement = {}
        for k in range(2, d + 1):
            for perm, v in _group_power(jucys_murphy(d, k), r, d).items():
                jm[perm] = jm.get(perm, Fraction(0)) + v
        product = group_multiply(class_sum_element(mu), _group_power(jm, b, d))
        return product.get(_identity(d), Fraction(0)) / math.factorial(d)
    factorial = math.factorial(d)
    total = Fraction(0)
    for nu in partitions_of(d):
        dim = dimension(nu)
        central = Fraction(class_size(mu) * character(nu, mu), dim)
        total += Fraction(dim * dim, factorial) * central * power_sum(contents(nu), r) ** b
    return total / factorial


# ---------------------------------------------------------------------------
# Hypergeometric tau function
# ---------------------------------------------------------------------------


def atlantes_weight(r: int) -> Dict[Tuple[int, int], Fraction]:
    """ψ̂(ℏ², y) = y^r as {(ℏ²-power, y-power): coefficient}."""
    return {(0, r): Fraction(1)}


def completed_cycles_weight(r: int) -> Dict[Tuple[int, int], Fraction]:
    """ψ̂(ℏ², y) = 𝒮(ℏ∂_y) y^r with 𝒮(z) = sinh(z/2)/(z/2)."""
    weight = {}
    series = sfun_series(r)
    for k in range(r // 2 + 1):
        s_k = series.coefficient(2 * k)
        weight[(k, r - 2 * k)] = s_k * math.factorial(r) / math.factorial(r - 2 * k)
    return weight


def linear_y_hat() -> Dict[Tuple[int, int], Fraction]:
    """ŷ(ℏ², z) = z."""
    return {(0, 1): Fraction(1)}


def _multiply_partitions(a: Partition, b: Partition) -> Partition:
    return tuple(sorted(a + b, reverse=True))


def _schur_jacobi_trudi(nu: Partition, power_sums: Dict[int, Any], one: Any) -> Any:
    """s_ν from the power sums via Newton's identities and the Jacobi–Trudi determinant."""
    d = sum(nu)
    h: List[Any] = [one]
    for m in range(1, d + 1):
        acc = None
        for k in range(1, m + 1):
            pk = power_sums.get(k)
            if pk is None:
                continue
            term = pk * h[m - k]
            acc = term if acc is None else acc + term
        h.append(acc * Fraction(1, m) if acc is not None else one * 0)
    length = len(nu)
    total = None
    for perm in itertools.permutations(range(length)):
        term = one * Permutation(list(perm)).signature()
        for i, j in enumerate(perm):
            index = nu[i] - i + j
            if index < 0:
                term = None
                break
            term = term * h[index]
        if term is None:
            continue
        total = term if total is None else total + term
    return total if total is not None else one * 0


@dataclass
class TauTruncation:
    """
    Truncated Z and F = log Z as p-polynomials with ℏ-series coefficients.

    ``Z[μ]`` and ``F[μ]`` are the coefficients of p_μ, known for ℏ-exponents below
    ``hbar_order``; μ ranges over partitions with |μ| ≤ d_max.
    """

    psi: Dict[Tuple[int, int], Fraction]
    y_hat: Dict[Tuple[int, int], Fraction]
    d_max: int
    hbar_order: int
    Z: Dict[Partition, TruncatedSeries] = field(default_factory=dict)
    F: Dict[Partition, TruncatedSeries] = field(default_factory=dict)

    def f_coefficient(self, mu: Sequence[int], power: int) -> Fraction:
        series = self.F.get(normalize_partition(mu))
        return series.coefficient(power) if series is not None else Fraction(0)

    def H(self, g: int, ks: Sequence[int]) -> Fraction:
        """
        Coefficient of ∏ X_i^{k_i} in H_{g,n}.

        The ℏ-expansion of F carries the sign (−1)^{|μ|+ℓ(μ)}, the (−1)^{rb} of
        ``connected_hurwitz``; H is the generating function without it.
        """
        mu = normalize_partition(ks)
        multiplicity = math.prod(math.factorial(mu.count(k)) for k in set(mu))
        sign = (-1) ** (sum(mu) + len(mu))
        return sign * self.f_coefficient(mu, 2 * g - 2 + len(ks)) * multiplicity

    def spectral_y(self) -> RatFunc:
        """y(z) = ŷ(0, z)."""
        degree = max((m for (k, m) in self.y_hat if k == 0), default=0)
        coeffs = [Fraction(0)] * (degree + 1)
        for (k, m), c in self.y_hat.items():
            if k == 0:
                coeffs[m] += c
        return RatFunc.of(coeffs)

    def spectral_X(self, order: int) -> TruncatedSeries:
        """X(z) = z·exp(−ψ(y(z))) with ψ = ψ̂(0, ·) and y = ŷ(0, ·)."""
        y = TruncatedSeries.from_dict(
            {m: c for (k, m), c in self.y_hat.items() if k == 0}, order
        )
        psi = TruncatedSeries.zero(order)
        for (k, m), c in self.psi.items():
            if k == 0:
                psi = psi + (y**m) * c
        return (-psi).exp().shift(1).truncate(order)

    def connected_hurwitz(self, g: int, mu: Sequence[int], r: int) -> Fraction:
        """Connected Atlantes number (−1)^{rb} b! [p_μ ℏ^{2g−2+ℓ}] F."""
        mu = normalize_partition(mu)
        b = _blocks(g, mu, r)
        return (-1) ** (r * b) * math.factorial(b) * self.f_coefficient(mu, 2 * g - 2 + len(mu))

    def to_json(self) -> Dict[str, Any]:
        return {
            "d_max": self.d_max,
            "hbar_order": self.hbar_order,
            "F": [
                {
                    "mu": list(mu),
                    "coefficients": {str(e): format_scalar(c) for e, c in s.terms().items()},
                }
                for mu, s in sorted(self.F.items())
            ],
        }


def _weight_series(
    nu: Partition, psi: Dict[Tuple[int, int], Fraction], order: int
) -> TruncatedSeries:
    cells = contents(nu)
    terms: Dict[int, Fraction] = {}
    for (k, m), coeff in psi.items():
        power = 2 * k + m
        if power == 0:
            raise ValueError("ψ̂ has an ℏ-independent constant term")
        value = coeff * (-1) ** m * (len(cells) if m == 0 else power_sum(cells, m))
        terms[power] = terms.get(power, Fraction(0)) + value
    exponent = HbarSeries.from_dict({e: v for e, v in terms.items() if e < order}, order)
    return exponent.exp() if not exponent.is_zero() else HbarSeries.one(order)


def tau_truncate(
    psi: Dict[Tuple[int, int], Fraction],
    y_hat: Dict[Tuple[int, int], Fraction],
    d_max: int,
    hbar_order: int,
) -> TauTruncation:
    """
    Truncate Z and F = log Z to p-degree ``d_max`` and ℏ-exponents below
    ``hbar_order``.
    """
    if d_max < 1:
        raise ValueError("d_max must be positive")
    work = hbar_order + 3 * d_max + 2
    power_sums: Dict[int, TruncatedSeries] = {}
    for (k, m), coeff in y_hat.items():
        series = HbarSeries.from_dict({2 * k - 1: coeff}, work)
        power_sums[m] = power_sums[m] + series if m in power_sums else series
    one = HbarSeries.one(work)
    Z: Dict[Partition, TruncatedSeries] = {(): HbarSeries.one(hbar_order + d_max)}
    for d in range(1, d_max + 1):
        for nu in partitions_of(d):
            schur = _schur_jacobi_trudi(nu, power_sums, one)
            weighted = _weight_series(nu, psi, work) * schur
            for mu in partitions_of(d):
                chi = character(nu, mu)
                if chi == 0:
                    continue
                term = weighted * Fraction(chi, centralizer_order(mu))
                Z[mu] = Z[mu] + term if mu in Z else term
    target = hbar_order + d_max
    for mu in list(Z):
        Z[mu] = Z[mu].truncate(target)
    reduced = {mu: s for mu, s in Z.items() if mu}
    F: Dict[Partition, TruncatedSeries] = {}
    power: Dict[Partition, TruncatedSeries] = dict(reduced)
    for j in range(1, d_max + 1):
        sign = Fraction((-1) ** (j + 1), j)
        for mu, s in power.items():
            F[mu] = F[mu] + s * sign if mu in F else s * sign
        nxt: Dict[Partition, TruncatedSeries] = {}
        for mu, s in power.items():
            for lam, u in reduced.items():
                if sum(mu) + sum(lam) > d_max:
                    continue
                key = _multiply_partitions(mu, lam)
                prod = s * u
                nxt[key] = nxt[key] + prod if key in nxt else prod
        power = nxt
        if not power:
            break
    for mu in list(F):
        F[mu] = F[mu].truncate(hbar_order)
    logger.info(f"Tau function truncated to degree {d_max}, hbar order {hbar_order}")
    return TauTruncation(psi, y_hat, d_max, hbar_order, Z, F)


def atlantes_tau(r: int, d_max: int, hbar_order: int) -> TauTruncation:
    return tau_truncate(atlantes_weight(r), linear_y_hat(), d_max, hbar_order)


def completed_cycles_tau(r: int, d_max: int, hbar_order: int) -> TauTruncation:
    return tau_truncate(completed_cycles_weight(r), linear_y_hat(), d_max, hbar_order)


def hurwitz_table(r: int, g_max: int, d_max: int) -> List[Dict[str, Any]]:
    """Connected single-part and general numbers keyed by (r, g, μ), from F."""
    trunc = atlantes_tau(r, d_max, 2 * g_max + d_max)
    rows = []
    for d in range(1, d_max + 1):
        for mu in partitions_of(d):
            for g in range(g_max + 1):
                if (2 * g - 2 + d + len(mu)) % r or 2 * g - 2 + d + len(mu) < 0:
                    continue
                rows.append(
                    {
                        "r": r,
                        "g": g,
                        "mu": list(mu),
                        "connected": format_scalar(trunc.connected_hurwitz(g, mu, r)),
                    }
                )
    return rows


# ---------------------------------------------------------------------------
# Unstable checks and the comparison with recursion
# ---------------------------------------------------------------------------


def y_convention_adapter(curve: Any) -> RatFunc:
    """
    The tau-side y(z): the spectral curve's product x·y, i.e. y ↦ xy, which is M2
    for transalgebraic curves.
    """
    return curve.product()


def check_h01(trunc: TauTruncation, degree: int) -> Verdict:
    """X d/dX H_{0,1} evaluated at X(z) reproduces y(z) = ŷ(0, z)."""
    terms = {k: k * trunc.H(0, (k,)) for k in range(1, degree + 1)}
    dh = TruncatedSeries.from_dict(terms, degree + 1)
    composed = series_compose(dh, trunc.spectral_X(degree + 1))
    expected = trunc.spectral_y().laurent(Fraction(0), degree + 1)
    difference = composed - expected
    passed = difference.is_zero()
    return Verdict("H01", passed, None if passed else difference.to_text())


def _truncated_log(expr: sympy.Expr, symbols: Sequence[sympy.Symbol], degree: int) -> sympy.Expr:
    """log(1 + E) for a polynomial E without constant term, truncated by total degree."""

    def cut(e: sympy.Expr) -> sympy.Expr:
        poly = sympy.Poly(sympy.expand(e), *symbols)
        return sum(
            (c * sympy.prod([s**p for s, p in zip(symbols, monom)])
             for monom, c in poly.terms() if sum(monom) <= degree),
            sympy.Integer(0),
        )

    E = cut(expr - 1)
    total, power = sympy.Integer(0), sympy.Integer(1)
    for j in range(1, degree + 1):
        power = cut(power * E)
        total += sympy.Rational((-1) ** (j + 1), j) * power
    return sympy.expand(total)


def check_h02(trunc: TauTruncation, degree: int) -> Verdict:
    """H_{0,2} = log((z₁⁻¹ − z₂⁻¹)/(X₁⁻¹ − X₂⁻¹)) through total degree ``degree``."""
    z_of_x = lagrange_invert(trunc.spectral_X(degree + 2))
    X1, X2 = sympy.symbols("X1 X2")
    coeffs = [z_of_x.coefficient(k) for k in range(1, degree + 2)]

    def z_poly(X: sympy.Symbol) -> sympy.Expr:
        return sum(sympy.Rational(c.numerator, c.denominator) * X**k for k, c in enumerate(coeffs, 1))

    ratio1 = sympy.Poly(sympy.expand(z_poly(X1) / X1), X1).as_expr()
    ratio2 = sympy.Poly(sympy.expand(z_poly(X2) / X2), X2).as_expr()
    quotient = sum(
        sympy.Rational(c.numerator, c.denominator)
        * sum(X1**i * X2 ** (k - 1 - i) for i in range(k))
        for k, c in enumerate(coeffs, 1)
    )
    # log(X1 X2 (z2 − z1) / (z1 z2 (X2 − X1))) = −log(z1/X1) − log(z2/X2) + log Q
    expected = (
        _truncated_log(quotient, (X1, X2), degree)
        - _truncated_log(ratio1, (X1, X2), degree)
        - _truncated_log(ratio2, (X1, X2), degree)
    )
    poly = sympy.Poly(expected, X1, X2)
    mismatches = []
    for k1 in range(1, degree):
        for k2 in range(1, degree - k1 + 1):
            want = poly.coeff_monomial(X1**k1 * X2**k2)
            got = trunc.H(0, (k1, k2))
            if sympy.Rational(got.numerator, got.denominator) != want:
                mismatches.append({"k": [k1, k2], "tau": format_scalar(got), "expected": str(want)})
    return Verdict("H02", not mismatches, mismatches[:3] or None)


def _x_expansions(
    table: CorrelatorTable, descriptors: Iterable[PoleDescriptor], z_of_x: TruncatedSeries, degree: int
) -> Dict[PoleDescriptor, TruncatedSeries]:
    dz = z_of_x.derivative()
    out = {}
    for d in descriptors:
        local = table.basis.ratfunc(d).laurent(Fraction(0), degree + 1)
        out[d] = (series_compose(local, z_of_x) * dz).truncate(degree)
    return out


def compare_with_recursion(
    table: CorrelatorTable, trunc: TauTruncation, g: int, n: int, degree: int = 5
) -> Verdict:
    """
    Expand ω_{g,n} at z_i = 0 in X_i and compare with d₁⋯d_n H_{g,n}.

    The coefficient of ∏ X_i^{k_i−1} dX_i must equal ∏ k_i times the coefficient of
    ∏ X_i^{k_i} in H_{g,n}, for all k_i ≤ ``degree`` with Σ k_i ≤ d_max.

    Raises:
        ValueError: If ``degree`` exceeds the truncation, or the curve's x·y is
            not the tau function's ŷ(0, z).
    """
    if degree > trunc.d_max:
        raise ValueError("Comparison degree exceeds the tau truncation degree")
    if y_convention_adapter(table.curve) != trunc.spectral_y():
        logger.error(f"Curve {table.curve.label!r} does not match the tau spectral data")
        raise ValueError("The table's x·y differs from the tau function's ŷ(0, z)")
    corr = table.get(g, n)
    z_of_x = lagrange_invert(trunc.spectral_X(degree + 2))
    expansions = _x_expansions(table, corr.descriptors(), z_of_x, degree)
    recursion_side: Dict[Tuple[int, ...], Fraction] = {}
    for key, coeff in corr.terms.items():
        for perm in multiset_permutations(list(key)):
            perm = [PoleDescriptor(*d) for d in perm]
            series = [expansions[d] for d in perm]
            for ks in itertools.product(range(1, degree + 1), repeat=n):
                if sum(ks) > trunc.d_max:
                    continue
                value = coeff
                for s, k in zip(series, ks):
                    value = value * s.coefficient(k - 1)
                    if value == 0:
                        break
                if value != 0:
                    recursion_side[ks] = recursion_side.get(ks, Fraction(0)) + value
    for ks in itertools.product(range(1, degree + 1), repeat=n):
        if sum(ks) > trunc.d_max:
            continue
        expected = math.prod(ks) * trunc.H(g, ks)
        got = recursion_side.get(ks, Fraction(0))
        if got != expected:
            witness = {"k": list(ks), "recursion": format_scalar(got), "tau": format_scalar(expected)}
            logger.info(f"Recursion/tau mismatch for ({g},{n}) at {list(ks)}")
            return Verdict(f"hurwitz[{g},{n}]", False, witness)
    return Verdict(f"hurwitz[{g},{n}]", True)
