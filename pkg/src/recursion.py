"""
Topological recursion with arbitrary ramification on admissible genus-zero curves.

Correlators are stored as sparse symmetric decompositions over the pole basis

    Ξ_{O,j,k}(z) = Σ_{a∈O} a^j dz/(z−a)^k     (O a Galois orbit, j < deg O, k ≥ 2)
    ξ_{∞,k}(z)  = z^(k−2) dz

with rational coefficients. Residues are computed from Laurent expansions in
t = z − α at a representative α of each orbit, over the number field Q(α)
(extended by roots of unity at rational points of order > 2).
"""

import itertools
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import (
    Any,
    Callable,
    Dict,
    Iterable,
    Iterator,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
)

from sympy.utilities.iterables import multiset_partitions, multiset_permutations

from src.algebra import (
    INFINITY,
    NumberFieldElement,
    PointAtInfinity,
    Poly,
    RatFunc,
    TruncatedSeries,
    format_scalar,
    rationalize,
    series_compose,
)
from src.curve import (
    Curve,
    RamificationPoint,
    deck_transformations,
    is_admissible,
    omega01_local,
    ramification_locus,
)
from src.errors import InadmissibleCurveError, PrecisionError

logging.basicConfig(
    level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)
logger = logging.getLogger(__name__)

INFINITY_ORBIT = -1
PRECISION_MARGIN = 4


class PoleDescriptor(NamedTuple):
    """Basis differential Ξ_{orbit,power,order}; orbit −1 denotes ξ_{∞,order}."""

    orbit: int
    power: int
    order: int

    def to_json(self) -> List[Any]:
        if self.orbit == INFINITY_ORBIT:
            return ["inf", self.order]
        return [self.orbit, self.power, self.order]


Key = Tuple[PoleDescriptor, ...]


def infinity_descriptor(order: int) -> PoleDescriptor:
    return PoleDescriptor(INFINITY_ORBIT, 0, order)


def pole_bound(s: int, g: int, n: int) -> int:
    """Maximal pole order (s−1)(2g−2+n)+2g of ω_{g,n} at a point with invariant s."""
    return (s - 1) * (2 * g - 2 + n) + 2 * g


class PoleBasis:
    """
    Global rational realisations and local expansions of the pole basis.

    Local expansions are memoised; the cache is the only shared mutable state and
    is guarded by a lock.
    """

    def __init__(self, locus: Sequence[RamificationPoint]) -> None:
        self.locus = list(locus)
        self._ratfuncs: Dict[PoleDescriptor, RatFunc] = {}
        self._local: Dict[Tuple[PoleDescriptor, Any, int], TruncatedSeries] = {}
        self._lock = threading.Lock()

    def point(self, orbit: int) -> RamificationPoint:
        return self.locus[orbit]

    def _power_sums(self, orbit: int, count: int) -> List[Fraction]:
        location = self.locus[orbit].location
        if isinstance(location, NumberFieldElement):
            return [(location**i).trace() for i in range(count)]
        return [location**i for i in range(count)]

    def ratfunc(self, descriptor: PoleDescriptor) -> RatFunc:
        """The dz-coefficient of the basis differential as a rational function."""
        with self._lock:
            cached = self._ratfuncs.get(descriptor)
        if cached is not None:
            return cached
        if descriptor.orbit == INFINITY_ORBIT:
            value = RatFunc(Poly.monomial(descriptor.order - 2))
        else:
            point = self.locus[descriptor.orbit]
            p = point.minimal_polynomial
            assert p is not None
            j = descriptor.power
            sums = self._power_sums(descriptor.orbit, j)
            simple = RatFunc(Poly.monomial(j) * p.derivative(), p)
            for i in range(j):
                simple = simple - Poly.monomial(j - 1 - i, sums[i])
            value = simple
            for _ in range(descriptor.order - 1):
                value = value.derivative()
            value = value * Fraction((-1) ** (descriptor.order - 1), factorial(descriptor.order - 1))
        with self._lock:
            self._ratfuncs[descriptor] = value
        return value

    def local(self, descriptor: PoleDescriptor, location: Any, order: int) -> TruncatedSeries:
        """Laurent expansion of the basis function at ``location`` to absolute order."""
        key = (descriptor, location, order)
        with self._lock:
            cached = self._local.get(key)
        if cached is not None:
            return cached
        value = self.ratfunc(descriptor).laurent(location, order)
        with self._lock:
            self._local[key] = value
        return value

    def lift_coefficients(self, orbit: int) -> List[Any]:
        """
        D_j(α) with ξ_{α,k}(z) ≡ Σ_j D_j(α) Ξ_{O,j,k}(z) after Galois summation.
        """
        point = self.locus[orbit]
        p = point.minimal_polynomial
        assert p is not None
        alpha = point.location
        derivative = p.derivative()(alpha)
        deg = p.degree()
        result = []
        for j in range(deg):
            acc: Any = Fraction(0)
            for m in range(j + 1, deg + 1):
                acc = acc + p.coefficient(m) * alpha ** (m - 1 - j)
            result.append(acc / derivative)
        return result

    def coordinates(self, orbit: int, value: Any) -> List[Fraction]:
        """Power-basis coordinates of an orbit-field value (rational at degree 1)."""
        deg = self.locus[orbit].degree
        if deg == 1:
            return [rationalize(value)]
        if isinstance(value, NumberFieldElement):
            return list(value.coeffs)
        return [Fraction(value)] + [Fraction(0)] * (deg - 1)


@dataclass
class Correlator:
    """
    Symmetric n-differential ω_{g,n}.

    ``terms`` maps sorted descriptor tuples to the coefficient shared by all
    orderings of that tuple; ω = Σ over all orderings T of c_{sort T} ∏ ξ_{T_i}(z_i).
    ω_{0,1} keeps its dz-coefficient in ``density``; ω_{0,2} is the standard
    bidifferential and has ``kind == "omega02"``.
    """

    g: int
    n: int
    terms: Dict[Key, Fraction] = field(default_factory=dict)
    kind: str = "general"
    density: Optional[RatFunc] = None
    symmetry_witnesses: List[Dict[str, Any]] = field(default_factory=list)
    provenance: str = "recursion"

    def coefficient(self, descriptors: Sequence[PoleDescriptor]) -> Fraction:
        return self.terms.get(tuple(sorted(descriptors)), Fraction(0))

    def add(self, key: Sequence[PoleDescriptor], value: Fraction) -> None:
        canonical = tuple(sorted(key))
        total = self.terms.get(canonical, Fraction(0)) + value
        if total == 0:
            self.terms.pop(canonical, None)
        else:
            self.terms[canonical] = total

    def descriptors(self) -> List[PoleDescriptor]:
        return sorted({d for key in self.terms for d in key})

    def slot_function(
        self, basis: PoleBasis, slot: int, values: Sequence[Any]
    ) -> RatFunc:
        """dz-coefficient in one slot with every other slot specialised to ``values``."""
        if self.kind == "omega01":
            assert self.density is not None
            return self.density
        others = list(values)
        if self.kind == "omega02":
            other = others[0]
            return RatFunc(Poly((1,)), Poly((-other, 1)) ** 2)
        total = RatFunc(Poly())
        for key, coeff in self.terms.items():
            for perm in multiset_permutations(list(key)):
                perm = [PoleDescriptor(*d) for d in perm]
                weight: Any = coeff
                rest = perm[:slot] + perm[slot + 1 :]
                for d, v in zip(rest, others):
                    weight = weight * basis.ratfunc(d)(v)
                if weight != 0:
                    total = total + basis.ratfunc(perm[slot]) * weight
        return total

    def scaled(self, factor: Any) -> "Correlator":
        out = Correlator(self.g, self.n, kind=self.kind, provenance=self.provenance)
        out.terms = {k: v * factor for k, v in self.terms.items()}
        if self.density is not None:
            out.density = self.density * factor
        return out

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"g": self.g, "n": self.n, "kind": self.kind}
        if self.kind == "omega01":
            assert self.density is not None
            data["density"] = self.density.to_text()
            return data
        data["provenance"] = self.provenance
        data["terms"] = [
            {"poles": [d.to_json() for d in key], "coeff": format_scalar(value)}
            for key, value in sorted(self.terms.items())
        ]
        return data

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "Correlator":
        out = cls(int(data["g"]), int(data["n"]), kind=data.get("kind", "general"))
        out.provenance = data.get("provenance", "recursion")
        if out.kind == "omega01":
            text = data["density"]
            out.density = RatFunc.of(
                [Fraction(c) for c in text["num"]], [Fraction(c) for c in text["den"]]
            )
            return out
        for term in data.get("terms", []):
            key = tuple(
                infinity_descriptor(int(p[1])) if p[0] == "inf" else PoleDescriptor(*map(int, p))
                for p in term["poles"]
            )
            out.terms[key] = Fraction(term["coeff"])
        return out


def omega01(c: Curve) -> Correlator:
    """ω_{0,1} = y dx as a rational dz-density."""
    return Correlator(0, 1, kind="omega01", density=c.omega01_density())


def omega02(c: Curve) -> Correlator:
    """ω_{0,2} = dz₁dz₂/(z₁−z₂)²."""
    return Correlator(0, 2, kind="omega02")


class CorrelatorTable:
    """
    Correlators of one curve, keyed by (g, n).

    Many readers may query concurrently; insertion takes the lock and a
    correlator becomes visible only once complete.
    """

    def __init__(
        self,
        curve: Curve,
        locus: Optional[List[RamificationPoint]] = None,
        workers: int = 4,
        mode: str = "meromorphic",
    ) -> None:
        self.curve = curve
        self.locus = ramification_locus(curve) if locus is None else locus
        self.basis = PoleBasis(self.locus)
        self.workers = workers
        self.mode = mode
        self._store: Dict[Tuple[int, int], Correlator] = {}
        self._lock = threading.Lock()
        self.insert(omega01(curve))
        self.insert(omega02(curve))

    def insert(self, correlator: Correlator) -> None:
        with self._lock:
            self._store[(correlator.g, correlator.n)] = correlator

    def get(self, g: int, n: int) -> Correlator:
        with self._lock:
            if (g, n) not in self._store:
                raise KeyError(f"omega_{{{g},{n}}} has not been computed")
            return self._store[(g, n)]

    def __contains__(self, key: Tuple[int, int]) -> bool:
        with self._lock:
            return key in self._store

    def keys(self) -> List[Tuple[int, int]]:
        with self._lock:
            return sorted(self._store, key=lambda gn: (2 * gn[0] - 2 + gn[1], gn))

    def stable_keys(self) -> List[Tuple[int, int]]:
        return [(g, n) for g, n in self.keys() if 2 * g - 2 + n > 0]

    def contributing_points(self) -> List[RamificationPoint]:
        points = []
        for point in self.locus:
            if not point.contributes():
                continue
            if point.at_infinity:
                logger.error("Ramification point at infinity with s >= 1")
                raise InadmissibleCurveError(
                    "A contributing ramification point at z = inf is not supported; "
                    "move it to a finite point with a Möbius change of coordinate"
                )
            points.append(point)
        return points

    def to_json(self) -> Dict[str, Any]:
        return {
            "points": [p.describe() for p in self.locus],
            "correlators": [self.get(g, n).to_json() for g, n in self.keys()],
        }


def euler_keys(max_euler: int) -> List[Tuple[int, int]]:
    """All (g, n) with n ≥ 1 and 1 ≤ 2g−2+n ≤ max_euler, by increasing 2g−2+n."""
    keys = []
    for chi in range(1, max_euler + 1):
        for g in range(0, (chi + 2) // 2 + 1):
            n = chi + 2 - 2 * g
            if n >= 1:
                keys.append((g, n))
    return keys


# ---------------------------------------------------------------------------
# Local machinery at one ramification point
# ---------------------------------------------------------------------------


@dataclass
class _Sheet:
    sigma: Optional[TruncatedSeries]
    dsigma: Optional[TruncatedSeries]
    cache: Dict[PoleDescriptor, TruncatedSeries] = field(default_factory=dict)


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _set_partitions(size: int) -> List[List[List[int]]]:
    return [list(map(list, p)) for p in multiset_partitions(list(range(size)))]


class LocalRecursion:
    """
    Laurent-series evaluation of recursion integrands at one ramification point.

    Args:
        table: Correlator table providing lower correlators.
        point: A contributing finite ramification point.
        precision: Relative precision of every local series.
        max_order: Largest basis pole order kept in free slots.
        omega01_sign: Sign with which ω_{0,1} = y dx enters the blocks.
    """

    def __init__(
        self,
        table: CorrelatorTable,
        point: RamificationPoint,
        precision: int,
        max_order: int,
        omega01_sign: int = 1,
    ) -> None:
        self.table = table
        self.omega01_sign = omega01_sign
        self.point = point
        self.alpha = point.location
        self.precision = precision
        self.max_order = max_order
        self.basis = table.basis
        curve = table.curve
        assert point.order is not None
        self.r = point.order
        self.sheets = [_Sheet(None, None)]
        for sigma in deck_transformations(curve, point, precision + 1):
            self.sheets.append(_Sheet(sigma, sigma.derivative()))
        self.y_local = curve.local_y(self.alpha, precision)
        self.y_local = self.y_local.truncate(self.y_local.valuation + precision)
        x_local = curve.local_x(self.alpha, precision + 1)
        self.dx_local = x_local.derivative()
        self.lift = self.basis.lift_coefficients(point.orbit)
        self._blocks: Dict[Tuple[int, Tuple[int, ...], int], Dict[Key, TruncatedSeries]] = {}

    # -- sheet evaluations ---------------------------------------------------

    def _on_sheet(self, series: TruncatedSeries, sheet: _Sheet) -> TruncatedSeries:
        if sheet.sigma is None:
            return series
        assert sheet.dsigma is not None
        return series_compose(series, sheet.sigma) * sheet.dsigma

    def basis_on_sheet(self, descriptor: PoleDescriptor, index: int) -> TruncatedSeries:
        """ξ_D(α + σ_index(t)) · σ'_index(t) as a series in t."""
        sheet = self.sheets[index]
        cached = sheet.cache.get(descriptor)
        if cached is not None:
            return cached
        shift = -descriptor.order if descriptor.orbit == self.point.orbit else 0
        local = self.basis.local(descriptor, self.alpha, shift + self.precision)
        value = self._on_sheet(local, sheet)
        sheet.cache[descriptor] = value
        return value

    def omega01_on_sheet(self, index: int) -> TruncatedSeries:
        dens = omega01_local(self.table.curve, self.alpha, self.precision)
        return self._on_sheet(dens * self.omega01_sign, self.sheets[index])

    def y_on_sheet(self, index: int) -> TruncatedSeries:
        sheet = self.sheets[index]
        if sheet.sigma is None:
            return self.y_local
        return series_compose(self.y_local, sheet.sigma)

    def _t(self, index: int) -> TruncatedSeries:
        sheet = self.sheets[index]
        if sheet.sigma is None:
            return TruncatedSeries((1,), 1, self.precision + 1, self.alpha)
        return sheet.sigma

    def _dt(self, index: int) -> TruncatedSeries:
        sheet = self.sheets[index]
        if sheet.dsigma is None:
            return TruncatedSeries.one(self.precision, self.alpha)
        return sheet.dsigma

    def bidifferential(self, p: int, q: int) -> TruncatedSeries:
        """B(α+σ_p, α+σ_q) as a series in t (coefficient of dt²)."""
        diff = self._t(p) - self._t(q)
        return self._dt(p) * self._dt(q) * (diff * diff).inverse()

    def bidifferential_free(self, p: int) -> Dict[Key, TruncatedSeries]:
        """B(α+σ_p(t), z) expanded in the orbit basis of the free variable z."""
        out: Dict[Key, TruncatedSeries] = {}
        sigma, dsigma = self._t(p), self._dt(p)
        power = dsigma
        for k in range(2, self.max_order + 1):
            series = power * (k - 1)
            for j, lift in enumerate(self.lift):
                if lift != 0:
                    out[(PoleDescriptor(self.point.orbit, j, k),)] = series * lift
            power = power * sigma
        return out

    # -- blocks --------------------------------------------------------------

    def block(self, g: int, bound: Tuple[int, ...], free: int) -> Dict[Key, TruncatedSeries]:
        """
        ω_{g, |bound|+free} with the bound slots on sheets ``bound``, keyed by the
        descriptors of the free slots.
        """
        key = (g, bound, free)
        cached = self._blocks.get(key)
        if cached is not None:
            return cached
        n = len(bound) + free
        if (g, n) == (0, 1):
            result = {(): self.omega01_on_sheet(bound[0])}
        elif (g, n) == (0, 2) and free == 0:
            result = {(): self.bidifferential(bound[0], bound[1])}
        elif (g, n) == (0, 2):
            result = self.bidifferential_free(bound[0])
        else:
            result = self._bind(self.table.get(g, n), bound)
        self._blocks[key] = result
        return result

    def _bind(self, corr: Correlator, bound: Tuple[int, ...]) -> Dict[Key, TruncatedSeries]:
        m = len(bound)
        out: Dict[Key, TruncatedSeries] = {}
        for key, coeff in corr.terms.items():
            for perm in multiset_permutations(list(key)):
                perm = [PoleDescriptor(*d) for d in perm]
                series: Any = None
                for d, sheet in zip(perm[:m], bound):
                    factor = self.basis_on_sheet(d, sheet)
                    series = factor if series is None else series * factor
                assert series is not None
                series = series * coeff
                free_key = tuple(perm[m:])
                out[free_key] = out[free_key] + series if free_key in out else series
        return out

    # -- symmetrised products --------------------------------------------------

    def product_sum(
        self,
        g: int,
        n_free: int,
        bound: Tuple[int, ...],
        include_omega01: bool,
        sorted_only: bool,
    ) -> Dict[Key, TruncatedSeries]:
        """
        Σ over set partitions μ of the bound sheets, distributions of the free
        points and genus splits Σ g_b = g + ℓ(μ) − |bound| of ∏ ω_{g_b}(μ_b, z_{N_b}).
        """
        k = len(bound)
        total: Dict[Key, TruncatedSeries] = {}
        for partition in _set_partitions(k):
            ell = len(partition)
            genus_total = g + ell - k
            if genus_total < 0:
                continue
            for assignment in itertools.product(range(ell), repeat=n_free):
                free_sets = [[i for i in range(n_free) if assignment[i] == b] for b in range(ell)]
                for genera in _compositions(genus_total, ell):
                    sizes = [len(partition[b]) + len(free_sets[b]) for b in range(ell)]
                    if not include_omega01 and any(
                        genera[b] == 0 and sizes[b] == 1 for b in range(ell)
                    ):
                        continue
                    if any(2 * genera[b] - 2 + sizes[b] < -1 for b in range(ell)):
                        continue
                    factors = [
                        (
                            self.block(
                                genera[b],
                                tuple(bound[p] for p in partition[b]),
                                len(free_sets[b]),
                            ),
                            free_sets[b],
                        )
                        for b in range(ell)
                    ]
                    self._accumulate(factors, n_free, sorted_only, total)
        return total

    def _accumulate(
        self,
        factors: List[Tuple[Dict[Key, TruncatedSeries], List[int]]],
        n_free: int,
        sorted_only: bool,
        total: Dict[Key, TruncatedSeries],
    ) -> None:
        slots: List[Optional[PoleDescriptor]] = [None] * n_free

        def consistent() -> bool:
            if not sorted_only:
                return True
            filled = [d for d in slots if d is not None]
            positions = [i for i, d in enumerate(slots) if d is not None]
            for a in range(len(positions) - 1):
                if slots[positions[a]] > slots[positions[a + 1]]:  # type: ignore[operator]
                    return False
            return len(filled) == len(positions)

        def walk(index: int, partial: Optional[TruncatedSeries]) -> None:
            if index == len(factors):
                assert partial is not None
                key = tuple(slots)  # type: ignore[arg-type]
                total[key] = total[key] + partial if key in total else partial
                return
            block, positions = factors[index]
            for free_key, series in block.items():
                for pos, d in zip(positions, free_key):
                    slots[pos] = d
                if consistent():
                    walk(index + 1, series if partial is None else partial * series)
                for pos in positions:
                    slots[pos] = None

        walk(0, None)

    # -- recursion kernel ----------------------------------------------------

    def kernel_denominator(self, subset: Tuple[int, ...]) -> TruncatedSeries:
        """1 / (∏_{i∈Z}(y(σ_i) − y(t)) · x'(t)^|Z|)."""
        y0 = self.y_on_sheet(0)
        denom: Any = None
        for i in subset:
            factor = (self.y_on_sheet(i) - y0) * self.dx_local
            denom = factor if denom is None else denom * factor
        assert denom is not None
        return denom.inverse()

    def principal_parts(self, g: int, n: int) -> Dict[Key, List[Any]]:
        """
        Coefficients c_k(α) of ξ_{α,k}(z0) in ω_{g,n}, keyed by the sorted free tuple.

        Raises:
            PrecisionError: If the integrand is not known up to t^-1.
        """
        n_free = n - 1
        integrand: Dict[Key, TruncatedSeries] = {}
        deck = list(range(1, self.r))
        for size in range(1, self.r):
            for subset in itertools.combinations(deck, size):
                products = self.product_sum(g, n_free, (0,) + subset, False, True)
                if not products:
                    continue
                kernel = self.kernel_denominator(subset)
                for key, series in products.items():
                    term = kernel * series
                    integrand[key] = integrand[key] + term if key in integrand else term
        result: Dict[Key, List[Any]] = {}
        for key, series in integrand.items():
            if series.order < 0:
                logger.debug(f"Integrand known only to O(t^{series.order}) at orbit {self.point.orbit}")
                raise PrecisionError(
                    "Integrand truncated above the residue term",
                    required_order=self.precision - series.order + PRECISION_MARGIN,
                )
            result[key] = [series.coefficient(-k) for k in range(1, self.max_order + 1)]
        return result


def _working_precision(point: RamificationPoint, g: int, n: int) -> int:
    assert point.order is not None and point.s is not None
    r, s = point.order, point.s
    bound = pole_bound(s, g, n)
    return (r - 1) * (abs(s) + r) + r * (bound + 2) + PRECISION_MARGIN


def _point_contribution(
    table: CorrelatorTable, point: RamificationPoint, g: int, n: int
) -> Dict[Key, Fraction]:
    assert point.s is not None
    precision = _working_precision(point, g, n)
    max_order = pole_bound(point.s, g, n) + 1
    for attempt in range(2):
        try:
            local = LocalRecursion(table, point, precision, max_order)
            parts = local.principal_parts(g, n)
            break
        except PrecisionError as exc:
            if attempt == 1:
                logger.error(f"Precision shortfall at orbit {point.orbit} after retry")
                raise
            logger.warning(
                f"Precision shortfall at orbit {point.orbit} for ({g},{n}); "
                f"retrying at {2 * precision} (needed {exc.required_order})"
            )
            precision *= 2
    out: Dict[Key, Fraction] = {}
    basis = table.basis
    for free_key, coefficients in parts.items():
        for k, value in enumerate(coefficients, start=1):
            if value == 0:
                continue
            for j, coord in enumerate(basis.coordinates(point.orbit, value)):
                if coord != 0:
                    out[(PoleDescriptor(point.orbit, j, k),) + free_key] = coord
    return out


def recursion_step(
    table: CorrelatorTable,
    g: int,
    n: int,
    points: Optional[List[RamificationPoint]] = None,
) -> Correlator:
    """
    Compute ω_{g,n} by residues at the contributing finite ramification points.

    Args:
        table: Table holding all correlators of smaller 2g−2+n.
        g: Genus.
        n: Number of slots (the first slot is the recursion variable z0).
        points: Override of the ramification points to sum over.

    Returns:
        The correlator in canonical symmetric form; any disagreement between two
        slot orderings of the same key, a missing ordering counting as zero, is
        recorded in ``symmetry_witnesses``.

    Raises:
        PrecisionError: If the automatic retry at doubled precision also fails.
        InadmissibleCurveError: If a contributing point cannot be handled.
    """
    if n < 1 or 2 * g - 2 + n < 1:
        raise ValueError(f"(g, n) = ({g}, {n}) is not a recursion target")
    points = table.contributing_points() if points is None else points
    logger.info(f"Computing omega_{{{g},{n}}} on {table.curve.label!r} at {len(points)} orbits")
    with ThreadPoolExecutor(max_workers=max(table.workers, 1)) as executor:
        parts = list(executor.map(lambda p: _point_contribution(table, p, g, n), points))
    return combine_orderings(g, n, parts)


def combine_orderings(g: int, n: int, parts: Iterable[Dict[Key, Fraction]]) -> Correlator:
    """
    Merge per-point contributions keyed by slot ordering into a symmetric correlator.

    Each canonical key is compared across every choice of first slot, the rest
    sorted; an ordering no point produced counts as zero. The canonical ordering
    supplies the stored value.
    """
    correlator = Correlator(g, n)
    orderings: Dict[Key, Dict[Key, Fraction]] = {}
    for contribution in parts:
        for ordered, value in contribution.items():
            bucket = orderings.setdefault(tuple(sorted(ordered)), {})
            bucket[ordered] = bucket.get(ordered, Fraction(0)) + value
    for canonical, values in orderings.items():
        reference = values.get(canonical, Fraction(0))
        for first in sorted(set(canonical)):
            rest = list(canonical)
            rest.remove(first)
            ordered = (first,) + tuple(rest)
            value = values.get(ordered, Fraction(0))
            if value != reference:
                correlator.symmetry_witnesses.append(
                    {
                        "key": [d.to_json() for d in canonical],
                        "ordering": [d.to_json() for d in ordered],
                        "first": format_scalar(reference),
                        "second": format_scalar(value),
                    }
                )
        if reference != 0:
            correlator.terms[canonical] = reference
    return correlator


def populate(
    table: CorrelatorTable,
    max_euler: int,
    step: Optional[Callable[[CorrelatorTable, int, int], Correlator]] = None,
) -> CorrelatorTable:
    """
    Fill the table with every ω_{g,n} with 2g−2+n ≤ max_euler, in increasing order.

    Raises:
        InadmissibleCurveError: If the curve is not admissible.
    """
    report = is_admissible(table.curve, table.locus)
    if not report.admissible:
        logger.error(f"Curve {table.curve.label!r} is not admissible")
        raise InadmissibleCurveError(str(report.to_dict()))
    step = recursion_step if step is None else step
    for g, n in euler_keys(max_euler):
        if (g, n) in table:
            continue
        table.insert(step(table, g, n))
    logger.info(f"Table for {table.curve.label!r} populated to Euler characteristic {max_euler}")
    return table


def compute_table(c: Curve, max_euler: int, workers: int = 4) -> CorrelatorTable:
    return populate(CorrelatorTable(c, workers=workers), max_euler)


# ---------------------------------------------------------------------------
# Specialised simple-ramification path
# ---------------------------------------------------------------------------


def eynard_orantin_step(table: CorrelatorTable, g: int, n: int) -> Correlator:
    """
    ω_{g,n} for curves whose contributing points are all simple (r_a = 2), using
    the two-sheet kernel directly:

        Res K(z0, t) [ω_{g−1,n+1}(t, σ(t), z) + Σ' ω_{h,1+|I|}(t, z_I) ω_{g−h,1+|J|}(σ(t), z_J)]
    """
    points = table.contributing_points()
    if any(p.order != 2 for p in points):
        raise ValueError("The two-sheet kernel needs simple ramification points")
    correlator = Correlator(g, n)
    for point in points:
        assert point.s is not None
        local = LocalRecursion(
            table, point, _working_precision(point, g, n), pole_bound(point.s, g, n) + 1
        )
        n_free = n - 1
        terms: Dict[Key, TruncatedSeries] = {}
        if g >= 1:
            for key, series in local.block(g - 1, (0, 1), n_free).items():
                if list(key) == sorted(key):
                    terms[key] = series
        for mask in itertools.product((0, 1), repeat=n_free):
            first = [i for i in range(n_free) if mask[i] == 0]
            second = [i for i in range(n_free) if mask[i] == 1]
            for h in range(g + 1):
                if (h, len(first)) == (0, 0) or (g - h, len(second)) == (0, 0):
                    continue
                left = local.block(h, (0,), len(first))
                right = local.block(g - h, (1,), len(second))
                for lk, ls in left.items():
                    for rk, rs in right.items():
                        slots: List[Any] = [None] * n_free
                        for pos, d in zip(first, lk):
                            slots[pos] = d
                        for pos, d in zip(second, rk):
                            slots[pos] = d
                        if slots != sorted(slots):
                            continue
                        key = tuple(slots)
                        prod = ls * rs
                        terms[key] = terms[key] + prod if key in terms else prod
        kernel = local.kernel_denominator((1,))
        for key, series in terms.items():
            total = kernel * series
            for k in range(1, local.max_order + 1):
                value = total.coefficient(-k)
                if value == 0:
                    continue
                for j, coord in enumerate(table.basis.coordinates(point.orbit, value)):
                    if coord != 0:
                        canonical = tuple(sorted((PoleDescriptor(point.orbit, j, k),) + key))
                        correlator.terms[canonical] = coord
    correlator.terms = {k: v for k, v in correlator.terms.items() if v != 0}
    return correlator


# ---------------------------------------------------------------------------
# Expansions and property checks
# ---------------------------------------------------------------------------


@dataclass
class Verdict:
    """Outcome of an exact property check."""

    name: str
    passed: bool
    witness: Any = None

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "passed": self.passed, "witness": self.witness}


def expand_correlator(
    table: CorrelatorTable,
    correlator: Correlator,
    slot: int,
    point: Any,
    order: int,
    values: Sequence[Any] = (),
) -> TruncatedSeries:
    """
    Laurent expansion of one slot of a correlator at ``point``.

    Other slots must be specialised to rational ``values`` (in slot order, the
    expanded slot omitted). At INFINITY the series is the dz-coefficient in w = 1/z,
    matching the residue convention of the algebra module.

    Raises:
        ValueError: If a specialised slot sits at the expansion point.
    """
    if any(v == point for v in values):
        logger.error(f"Slot pinned at the expansion point {point!r}")
        raise ValueError("Another slot is pinned at the expansion point")
    function = correlator.slot_function(table.basis, slot, values)
    return function.laurent(point, order)


def check_symmetry(table: CorrelatorTable, g: int, n: int) -> Verdict:
    corr = table.get(g, n)
    return Verdict("symmetry", not corr.symmetry_witnesses, corr.symmetry_witnesses or None)


def check_residueless(table: CorrelatorTable, g: int, n: int) -> Verdict:
    bad = [
        [d.to_json() for d in key]
        for key in table.get(g, n).terms
        if any(d.order < 2 for d in key)
    ]
    return Verdict("residueless", not bad, bad[:5] or None)


def check_pole_locations(table: CorrelatorTable, g: int, n: int) -> Verdict:
    allowed = {p.orbit for p in table.locus if p.contributes() or p.kind == "infinite"}
    essential = any(p.kind == "infinite" and p.at_infinity for p in table.locus)
    bad = []
    for d in table.get(g, n).descriptors():
        if d.orbit == INFINITY_ORBIT:
            if not essential:
                bad.append(d.to_json())
        elif d.orbit not in allowed:
            bad.append(d.to_json())
    return Verdict("pole_locations", not bad, bad or None)


def check_pole_bound(table: CorrelatorTable, g: int, n: int) -> Verdict:
    bad = []
    for d in table.get(g, n).descriptors():
        if d.orbit == INFINITY_ORBIT:
            continue
        point = table.locus[d.orbit]
        assert point.s is not None
        bound = pole_bound(point.s, g, n)
        if d.order > bound:
            bad.append({"pole": d.to_json(), "bound": bound})
    return Verdict("pole_bound", not bad, bad or None)


def check_loop_equations(
    table: CorrelatorTable, g: int, n: int, point: RamificationPoint, i: int
) -> Verdict:
    """
    i-th abstract loop equation for ω_{g,n} at ``point``: the sum over i-element
    subsets of the fibre of ℰ (ω_{0,1} included) vanishes to order
    r(1 + ⌊s(i−1)/r⌋) − i in t.

    The kernel divides by y(σ_i(t)) − y(t), so ω_{0,1} enters ℰ as −y dx.
    """
    assert point.order is not None and point.s is not None
    r, s = point.order, point.s
    if not 1 <= i <= r:
        raise ValueError(f"Loop equation index {i} outside 1..{r}")
    required = r * (1 + (s * (i - 1)) // r) - i
    precision = _working_precision(point, g, n) + max(required, 0) + r
    max_order = pole_bound(s, g, n) + max(required, 0) + 2 * r + 2
    local = LocalRecursion(table, point, precision, max_order, omega01_sign=-1)
    n_free = n - 1
    combined: Dict[Key, TruncatedSeries] = {}
    for subset in itertools.combinations(range(r), i):
        for key, series in local.product_sum(g, n_free, subset, True, False).items():
            combined[key] = combined[key] + series if key in combined else series
    for key, series in combined.items():
        if series.order <= required:
            raise PrecisionError("Loop equation series too short", required_order=required + 1)
        low = [e for e in series.terms() if e < required]
        if low:
            return Verdict(
                f"loop_equation_{i}",
                False,
                {"free": [d.to_json() for d in key], "exponent": min(low), "required": required},
            )
    return Verdict(f"loop_equation_{i}", True)


def _principal_part_function(
    function: RatFunc, table: CorrelatorTable
) -> RatFunc:
    basis = table.basis
    total = RatFunc(Poly())
    for point in table.locus:
        if point.kind != "finite" or point.at_infinity:
            continue
        order = -function.valuation_at(point.location) if not function.is_zero() else 0
        if order < 1:
            continue
        local = function.laurent(point.location, 0)
        for k in range(1, order + 1):
            value = local.coefficient(-k)
            for j, coord in enumerate(basis.coordinates(point.orbit, value)):
                if coord != 0:
                    total = total + basis.ratfunc(PoleDescriptor(point.orbit, j, k)) * coord
    polynomial_part = function.num // function.den
    return total + polynomial_part


def check_projection(
    table: CorrelatorTable, g: int, n: int, values: Optional[Sequence[Fraction]] = None
) -> Verdict:
    """
    Projection property: with the other slots at generic rational values, slot 0
    equals the sum of its principal parts at the ramification points.
    """
    corr = table.get(g, n)
    values = list(values) if values is not None else [Fraction(7 + 3 * i, 11 + i) for i in range(n - 1)]
    function = corr.slot_function(table.basis, 0, values)
    difference = function - _principal_part_function(function, table)
    return Verdict("projection", difference.is_zero(), None if difference.is_zero() else difference.to_text())


def check_homogeneity(
    table: CorrelatorTable,
    factor: Any = 2,
    builder: Optional[Callable[[Curve], CorrelatorTable]] = None,
) -> Verdict:
    """Rescaling y by c rescales ω_{g,n} by c^(2−2g−n)."""
    max_euler = max((2 * g - 2 + n for g, n in table.stable_keys()), default=0)
    if builder is None:
        scaled = compute_table(table.curve.rescaled(factor), max_euler, table.workers)
    else:
        scaled = builder(table.curve.rescaled(factor))
    factor = Fraction(factor)
    for g, n in table.stable_keys():
        expected = table.get(g, n).scaled(factor ** (2 - 2 * g - n)).terms
        if scaled.get(g, n).terms != expected:
            return Verdict("homogeneity", False, {"g": g, "n": n})
    return Verdict("homogeneity", True)


def property_suite(
    table: CorrelatorTable,
    homogeneity: bool = True,
    builder: Optional[Callable[[Curve], CorrelatorTable]] = None,
) -> List[Verdict]:
    """
    Run every exact property check on every stable correlator of the table.

    ``builder`` recomputes a table for the rescaled curve in the homogeneity
    check; it defaults to the meromorphic recursion.
    """
    verdicts: List[Verdict] = []
    for g, n in table.stable_keys():
        for check in (check_symmetry, check_residueless, check_pole_locations, check_pole_bound):
            verdict = check(table, g, n)
            verdict.name = f"{verdict.name}[{g},{n}]"
            verdicts.append(verdict)
        projection = check_projection(table, g, n)
        projection.name = f"projection[{g},{n}]"
        verdicts.append(projection)
        for point in table.contributing_points():
            assert point.order is not None
            for i in range(1, min(point.order, 2) + 1):
                loop = check_loop_equations(table, g, n, point, i)
                loop.name = f"{loop.name}[{g},{n}]@{point.orbit}"
                verdicts.append(loop)
    if homogeneity and table.stable_keys():
        verdicts.append(check_homogeneity(table, builder=builder))
    failed = [v.name for v in verdicts if not v.passed]
    logger.info(f"Property suite: {len(verdicts) - len(failed)}/{len(verdicts)} passed")
    return verdicts
