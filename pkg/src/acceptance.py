"""
End-to-end acceptance suite.

Each criterion is a function returning a ``CriterionResult``; ``run_suite`` runs
a selection of them and reports pass/fail per item together with timings.
"""

import logging
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from src.algebra import RatFunc, format_scalar
from src.curve import TransalgebraicCurve, is_admissible, ramification_locus
from src.curvefile import airy_curve, atlantes_curve, q_orbifold_curve, rs_curve
from src.hurwitz import (
    atlantes_hurwitz,
    atlantes_tau,
    completed_cycles_tau,
    compare_with_recursion,
    jucys_identity,
    partitions_of,
)
from src.quantum import (
    atlantes_closed_form,
    atlantes_operator,
    check_conjugation,
    check_tau_independence,
    conjugation_solver,
    verify_annihilation,
    wave_function,
)
from src.recursion import (
    INFINITY_ORBIT,
    CorrelatorTable,
    PoleDescriptor,
    Verdict,
    compute_table,
    infinity_descriptor,
    property_suite,
)
from src.transalgebraic import (
    bernoulli_g1_form,
    direct_formula_g1,
    essential_contribution,
    finite_N_experiment,
    meromorphic_table,
    transalgebraic_table,
)

logging.basicConfig(
    level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)
logger = logging.getLogger(__name__)

QUANTUM_X_ORDER = 9
RECURSION_WAVE_HBAR = 4
RECURSION_WAVE_X_ORDER = 6
RANDOM_CURVES = 5
RANDOM_SEED = 20240601


@dataclass
class CriterionResult:
    """Outcome of one acceptance criterion."""

    number: int
    title: str
    verdicts: List[Verdict] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.verdicts) and all(v.passed for v in self.verdicts)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "criterion": self.number,
            "title": self.title,
            "passed": self.passed,
            "seconds": round(self.seconds, 3),
            "checks": [v.to_dict() for v in self.verdicts],
        }


def _differing_terms(
    first: Dict[PoleDescriptor, Fraction], second: Dict[PoleDescriptor, Fraction]
) -> List[Dict[str, Any]]:
    """Pole-basis coefficients on which two principal parts disagree."""
    return [
        {
            "pole": d.to_json(),
            "first": format_scalar(first.get(d, Fraction(0))),
            "second": format_scalar(second.get(d, Fraction(0))),
        }
        for d in sorted(set(first) | set(second))
        if first.get(d, Fraction(0)) != second.get(d, Fraction(0))
    ]


def essential_orbifold(workers: int = 4) -> List[Verdict]:
    """g = 1 essential contribution of the q-orbifold family is −(r/24) d(z^{q(r−1)})."""
    verdicts = []
    for q, r in ((1, 2), (1, 3), (2, 2)):
        curve = q_orbifold_curve(q, r)
        locus = ramification_locus(curve)
        contribution = essential_contribution(curve, 1, locus=locus)
        expected = {infinity_descriptor(q * (r - 1) + 1): Fraction(-r * q * (r - 1), 24)}
        mismatch = _differing_terms(expected, contribution.terms)
        verdicts.append(Verdict(f"essential[q={q},r={r}]", not mismatch, mismatch or None))
        direct = direct_formula_g1(curve, locus)
        disagreement = _differing_terms(contribution.terms, direct.terms)
        verdicts.append(
            Verdict(f"direct-formula[q={q},r={r}]", not disagreement, disagreement or None)
        )
    return verdicts


def _random_fraction(rng: random.Random, nonzero: bool = False) -> Fraction:
    value = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
    return Fraction(1) if nonzero and value == 0 else value


def random_regular_curves(count: int, seed: int = RANDOM_SEED) -> List[TransalgebraicCurve]:
    """
    Admissible regular curves with random Möbius M2, M0 = λ(z − e) and M1 = P(M2)
    for a random polynomial P of degree 2 or 3.

    M1 is built as a function of M2, so its poles sit at the pole of M2.

    Raises:
        RuntimeError: If too few admissible curves turn up.
    """
    rng = random.Random(seed)
    curves: List[TransalgebraicCurve] = []
    attempts = 0
    while len(curves) < count:
        attempts += 1
        if attempts > 20 * count:
            logger.error(f"Only {len(curves)} admissible random curves in {attempts - 1} draws")
            raise RuntimeError("Could not draw enough admissible random curves")
        a, b = _random_fraction(rng, nonzero=True), _random_fraction(rng)
        c, d = rng.choice([0, 0, 1, -1, 2]), _random_fraction(rng, nonzero=True)
        if a * d - b * c == 0:
            continue
        m2 = RatFunc.of([b, a], [d, c])
        degree = rng.randint(2, 3)
        coeffs = [_random_fraction(rng) for _ in range(degree)] + [
            _random_fraction(rng, nonzero=True)
        ]
        m1 = RatFunc.of(coeffs).compose(m2)
        m0 = RatFunc.of([-rng.randint(-2, 2), 1]) * _random_fraction(rng, nonzero=True)
        curve = TransalgebraicCurve(m0, m1, m2, f"random-{len(curves)}")
        if is_admissible(curve).admissible:
            curves.append(curve)
    return curves


def bernoulli_formula(workers: int = 4) -> List[Verdict]:
    """essential_contribution(1) matches the −1/24-prefactor residue formula in log x."""
    verdicts = []
    for curve in random_regular_curves(RANDOM_CURVES):
        locus = ramification_locus(curve)
        ours = essential_contribution(curve, 1, locus=locus).terms
        formula = bernoulli_g1_form(curve, locus)
        differences = _differing_terms(ours, formula)
        verdicts.append(
            Verdict(
                f"bernoulli[{curve.label}]",
                not differences,
                {"curve": curve.to_dict(), "differences": differences} if differences else None,
            )
        )
    return verdicts


def vanishing_for_n_at_least_two(workers: int = 4) -> List[Verdict]:
    """No ∞-poles in ω_{g,n} with n ≥ 2 for the Atlantes family."""
    verdicts = []
    for r in (1, 2, 3):
        table = transalgebraic_table(atlantes_curve(r), 3, workers=workers)
        offenders = [
            [g, n]
            for g, n in table.stable_keys()
            if n >= 2
            and any(d.orbit == INFINITY_ORBIT for key in table.get(g, n).terms for d in key)
        ]
        verdicts.append(Verdict(f"no-infinity-poles[r={r}]", not offenders, offenders or None))
    return verdicts


Builder = Callable[[Any], CorrelatorTable]


def _fixture_tables(workers: int) -> List[Tuple[CorrelatorTable, Optional[Builder]]]:
    def builder(c: Any) -> CorrelatorTable:
        return transalgebraic_table(c, 2, workers=workers)

    tables: List[Tuple[CorrelatorTable, Optional[Builder]]] = []
    for curve in (airy_curve(), rs_curve(2, 3), rs_curve(3, 2)):
        tables.append((compute_table(curve, 2, workers), None))
    for r in (1, 2):
        tables.append((builder(atlantes_curve(r)), builder))
    return tables


def property_checks(workers: int = 4) -> List[Verdict]:
    """Full exact property suite on the fixture curves."""
    verdicts = []
    for table, builder in _fixture_tables(workers):
        for verdict in property_suite(table, homogeneity=True, builder=builder):
            verdict.name = f"{table.curve.label}:{verdict.name}"
            verdicts.append(verdict)
    return verdicts


def hurwitz_cross_check(workers: int = 4) -> List[Verdict]:
    """ω_{1,1} expanded in X against the Atlantes and completed-cycles tau functions."""
    verdicts = []
    degree = 5
    for r in (1, 2):
        curve = atlantes_curve(r)
        compact = transalgebraic_table(curve, 1, workers=workers)
        non_compact = meromorphic_table(curve, 1, workers=workers)
        atlantes = atlantes_tau(r, degree, 3)
        completed = completed_cycles_tau(r, degree, 3)
        check = compare_with_recursion(compact, atlantes, 1, 1, degree)
        check.name = f"atlantes[r={r}]"
        verdicts.append(check)
        check = compare_with_recursion(non_compact, completed, 1, 1, degree)
        check.name = f"completed-cycles[r={r}]"
        verdicts.append(check)
        if r == 2:
            mismatch = compare_with_recursion(non_compact, atlantes, 1, 1, degree)
            verdicts.append(Verdict("meromorphic-differs[r=2]", not mismatch.passed))
    return verdicts


def symmetric_group_oracle(workers: int = 4) -> List[Verdict]:
    """Character route against brute force, and the Jucys identity."""
    verdicts = []
    for r in (1, 2):
        for d in range(1, 6):
            for mu in partitions_of(d):
                for g in range(0, 4):
                    numerator = 2 * g - 2 + d + len(mu)
                    if numerator < 0 or numerator % r or numerator // r > 3:
                        continue
                    fast = atlantes_hurwitz(g, mu, r, "characters")
                    slow = atlantes_hurwitz(g, mu, r, "direct")
                    verdicts.append(
                        Verdict(
                            f"hurwitz[r={r},g={g},mu={list(mu)}]",
                            fast == slow,
                            None if fast == slow else [str(fast), str(slow)],
                        )
                    )
    for d in range(1, 7):
        for b in range(d):
            verdicts.append(jucys_identity(d, b, "direct"))
    return verdicts


def quantum_curve(workers: int = 4) -> List[Verdict]:
    """(ŷ − e^{(x̂ŷ)^r})Ψ = 0, on the closed form and on the recursion-built ψ."""
    verdicts = []
    K = 4
    for r in (1, 2, 3):
        psi = atlantes_closed_form(r, QUANTUM_X_ORDER, K + 2)
        op = atlantes_operator(r, K + QUANTUM_X_ORDER)
        verdict = verify_annihilation(op, psi, K)
        verdict.name = f"closed-form[r={r}]"
        verdicts.append(verdict)
    hbar_order = RECURSION_WAVE_HBAR + 1
    x_order = RECURSION_WAVE_X_ORDER
    table = transalgebraic_table(atlantes_curve(2), hbar_order - 1, workers=workers)
    psi = wave_function(table, 0, hbar_order, x_order)
    verdict = verify_annihilation(
        atlantes_operator(2, RECURSION_WAVE_HBAR + x_order), psi, RECURSION_WAVE_HBAR
    )
    verdict.name = "recursion-wave-function[r=2]"
    verdicts.append(verdict)
    for r in (1, 2, 3):
        verdict = check_tau_independence(r, (0, Fraction(1, 3), 1), 6)
        verdict.name = f"tau-presentation[r={r}]"
        verdicts.append(verdict)
    return verdicts


def conjugation(workers: int = 4) -> List[Verdict]:
    """Solved conjugation coefficients and the operator identity."""
    verdicts = []
    for r in range(1, 5):
        h = conjugation_solver(r)
        expected: Dict[int, Fraction] = {r: Fraction(0)}
        if r >= 2:
            expected[r - 1] = Fraction(r, 24)
        if r >= 3:
            expected[r - 2] = Fraction(-r * (r - 1), 48)
        got = {k: h[k - 1] for k in expected}
        verdicts.append(
            Verdict(
                f"coefficients[r={r}]",
                got == expected,
                None if got == expected else {str(k): str(v) for k, v in got.items()},
            )
        )
    for r in (1, 2, 3):
        verdicts.append(check_conjugation(r, 6))
    return verdicts


def finite_n_convergence(workers: int = 4) -> List[Verdict]:
    """Monotone approach of the finite-N coefficients for Atlantes r = 1, g = 1."""
    report = finite_N_experiment(atlantes_curve(1), 1, 1, (2, 3, 4), (0, Fraction(1, 2)), workers)
    return [
        Verdict("distance-decreasing", report["converging"], report["deltas"]),
        Verdict("tau-difference-decreasing", report["tau_converging"], report["tau_deltas"]),
    ]


CRITERIA: Dict[int, Tuple[str, Callable[[int], List[Verdict]]]] = {
    1: ("Essential contribution of the q-orbifold family", essential_orbifold),
    2: ("g = 1 Bernoulli formula on random curves", bernoulli_formula),
    3: ("No essential poles for n >= 2", vanishing_for_n_at_least_two),
    4: ("Exact property suite", property_checks),
    5: ("Hurwitz cross-check", hurwitz_cross_check),
    6: ("Symmetric-group oracle", symmetric_group_oracle),
    7: ("Quantum curve", quantum_curve),
    8: ("Conjugation", conjugation),
    9: ("Finite-N convergence", finite_n_convergence),
}


def run_criterion(number: int, workers: int = 4) -> CriterionResult:
    title, check = CRITERIA[number]
    start = time.time()
    result = CriterionResult(number, title)
    result.verdicts = check(workers)
    result.seconds = time.time() - start
    logger.info(
        f"Criterion {number} ({title}): {'PASS' if result.passed else 'FAIL'} "
        f"in {result.seconds:.1f}s"
    )
    return result


def run_suite(
    only: Optional[Sequence[int]] = None,
    workers: int = 4,
    progress: Optional[Callable[[CriterionResult], None]] = None,
) -> List[CriterionResult]:
    """
    Run the selected criteria (all by default) in order.

    Raises:
        ValueError: If ``only`` names an unknown criterion.
    """
    numbers = sorted(CRITERIA) if not only else sorted(set(only))
    unknown = [n for n in numbers if n not in CRITERIA]
    if unknown:
        logger.error(f"Unknown acceptance criteria {unknown}")
        raise ValueError(f"Unknown acceptance criteria {unknown}; choose from 1-{len(CRITERIA)}")
    results = []
    for number in numbers:
        result = run_criterion(number, workers)
        if progress is not None:
            progress(result)
        results.append(result)
    return results
