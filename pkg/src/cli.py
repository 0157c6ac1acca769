#!/usr/bin/env python
"""Command-line interface for exact topological recursion on spectral curves."""
import argparse
import logging
import sys
import time
from functools import partial
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import sympy

from src.acceptance import RECURSION_WAVE_X_ORDER, CriterionResult, run_suite
from src.algebra import RatFunc, format_scalar, parse_scalar
from src.curve import (
    MeromorphicCurve,
    TransalgebraicCurve,
    curve_hash,
    is_admissible,
    is_regular,
    newton_polygon,
    ramification_locus,
    separates_points,
    spectral_polynomial,
)
from src.curvefile import CurveFile, resolve_curve
from src.errors import (
    ConjecturalContributionError,
    CurveFileError,
    InadmissibleCurveError,
    PrecisionError,
    TRError,
    VerificationError,
)
from src.hurwitz import (
    atlantes_hurwitz,
    atlantes_tau,
    check_h01,
    check_h02,
    completed_cycles_tau,
    hurwitz_table,
    normalize_partition,
)
from src.manifest import CorrelatorCache, RunManifest, resolve_cache_dir, write_json
from src.quantum import (
    DiffOperator,
    atlantes_closed_form,
    atlantes_operator,
    atlantes_presentation,
    build_qc_pole_base,
    build_qc_zero_base,
    check_tau_independence,
    curve_limits,
    exponential_polynomial,
    is_quantisation_of,
    presentation_from_polynomial,
    reduce_atlantes_operator,
    verify_annihilation,
    wave_function,
)
from src.recursion import (
    Correlator,
    CorrelatorTable,
    Verdict,
    euler_keys,
    property_suite,
)
from src.renderer import render_report
from src.transalgebraic import (
    atlantes_family_parameters,
    finite_N_experiment,
    meromorphic_table,
    transalgebraic_table,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VERIFICATION = 2
EXIT_PRECISION = 3

DEFAULT_OUTPUT = Path("tr_output")


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from e


def _scalar_list(text: str) -> List[Fraction]:
    try:
        return [parse_scalar(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated rationals, got {text!r}") from e


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """Parse command-line arguments; ``argv`` defaults to ``sys.argv[1:]``."""
    common = argparse.ArgumentParser(add_help=False)
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="Log debug detail")
    verbosity.add_argument("--quiet", action="store_true", help="Log warnings and errors only")
    common.add_argument("--workers", type=int, default=4, help="Thread pool size")
    common.add_argument(
        "--cache-dir", default=None, help="Correlator cache (default $TR_CACHE_DIR or ./.tr_cache)"
    )
    common.add_argument("--no-cache", action="store_true", help="Disable the correlator cache")
    common.add_argument(
        "-o", "--output", type=Path, default=DEFAULT_OUTPUT, help="Directory for JSON outputs"
    )
    common.add_argument("--report", type=Path, default=None, help="Render a Markdown report")

    parser = argparse.ArgumentParser(
        description="Exact topological recursion on meromorphic and transalgebraic curves"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser("analyze", parents=[common], help="Ramification and regularity")
    analyze.add_argument("curve", help="Curve file or family shorthand (e.g. atlantes-r2)")
    analyze.add_argument("--allow-inadmissible", action="store_true")

    correlators = commands.add_parser("correlators", parents=[common], help="Compute ω_{g,n}")
    correlators.add_argument("curve")
    correlators.add_argument("--g", type=int, default=None)
    correlators.add_argument("--n", type=int, default=None)
    correlators.add_argument("--max-euler", type=int, default=2, help="Largest 2g-2+n")
    correlators.add_argument("--mode", choices=("meromorphic", "transalgebraic"), default=None)
    correlators.add_argument("--allow-conjectural", action="store_true")
    correlators.add_argument("--allow-inadmissible", action="store_true")
    correlators.add_argument("--skip-checks", action="store_true", help="Skip the property suite")
    correlators.add_argument(
        "--homogeneity", action="store_true", help="Include the rescaling check (recomputes)"
    )

    hurwitz = commands.add_parser("hurwitz", parents=[common], help="Atlantes Hurwitz numbers")
    hurwitz.add_argument("--r", type=int, required=True)
    target = hurwitz.add_mutually_exclusive_group(required=True)
    target.add_argument("--mu", type=_int_list, help="Ramification profile, e.g. 2,1")
    target.add_argument("--tau-truncate", type=int, metavar="D", help="Truncate Z to degree D")
    hurwitz.add_argument("--g", type=int, default=0)
    hurwitz.add_argument("--g-max", type=int, default=1)
    hurwitz.add_argument("--method", choices=("characters", "direct"), default="characters")
    hurwitz.add_argument("--weight", choices=("atlantes", "completed"), default="atlantes")

    qc = commands.add_parser("qc", parents=[common], help="Quantum curve construction")
    qc.add_argument("curve")
    qc.add_argument("--verify-order", type=int, default=4, metavar="K")
    qc.add_argument("--x-order", type=int, default=8)
    qc.add_argument("--tau", type=_scalar_list, default=[Fraction(0), Fraction(1, 3), Fraction(1)])
    qc.add_argument(
        "--recursion-wave", action="store_true", help="Also test the recursion-built wave function"
    )

    experiment = commands.add_parser("experiment", parents=[common], help="Finite-N approach")
    experiment.add_argument("curve")
    experiment.add_argument("--g", type=int, default=1)
    experiment.add_argument("--n", type=int, default=1)
    experiment.add_argument("--N", type=_int_list, default=[2, 3, 4])
    experiment.add_argument("--tau", type=_scalar_list, default=[Fraction(0), Fraction(1, 2)])
    experiment.add_argument("--fit-scaling", action="store_true")

    accept = commands.add_parser("accept", parents=[common], help="Run the acceptance suite")
    accept.add_argument("--only", type=_int_list, default=None, help="Criterion numbers")

    return parser.parse_args(argv)


def configure_logging(args: argparse.Namespace) -> None:
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.getLogger().setLevel(level)


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------


def _load(args: argparse.Namespace, manifest: RunManifest) -> CurveFile:
    curve_file = resolve_curve(args.curve)
    manifest.curve_hash = curve_hash(curve_file.curve)
    return curve_file


def _require_admissible(curve: Any, allow: bool) -> Dict[str, Any]:
    report = is_admissible(curve).to_dict()
    if not report["admissible"] and not allow:
        logger.error(f"Curve {curve.label!r} is not admissible")
        raise InadmissibleCurveError(f"Curve {curve.label!r} is not admissible: {report['points']}")
    return report


def _density_text(table: CorrelatorTable, corr: Correlator) -> str:
    """ω_{g,1} as a factored rational function of z (dz omitted)."""
    total = RatFunc.constant(0)
    for key, coeff in corr.terms.items():
        total = total + table.basis.ratfunc(key[0]) * coeff
    z = sympy.Symbol("z")
    return str(sympy.factor(total.num.to_sympy(z) / total.den.to_sympy(z)))


def build_table(
    curve_file: CurveFile,
    mode: str,
    max_euler: int,
    allow_conjectural: bool,
    workers: int,
    cache: Optional[CorrelatorCache],
) -> Tuple[CorrelatorTable, int]:
    """
    Correlator table up to ``max_euler``, seeded from and written back to the cache.

    Returns:
        The table and the number of correlators read from the cache.
    """
    curve = curve_file.curve
    if mode == "transalgebraic" and not isinstance(curve, TransalgebraicCurve):
        raise ValueError("Transalgebraic mode needs a transalgebraic curve")
    digest = curve_hash(curve)
    table = CorrelatorTable(curve, workers=workers, mode=mode)
    cached = set()
    if cache is not None:
        for g, n in euler_keys(max_euler):
            entry = cache.get(CorrelatorCache.key(digest, g, n, mode))
            if entry is not None:
                table.insert(Correlator.from_json(entry))
                cached.add((g, n))
    if isinstance(curve, TransalgebraicCurve) and mode == "transalgebraic":
        transalgebraic_table(curve, max_euler, allow_conjectural, workers, table=table)
    else:
        meromorphic_table(curve, max_euler, workers, table=table)
    if cache is not None:
        for g, n in euler_keys(max_euler):
            if (g, n) not in cached:
                cache.put(CorrelatorCache.key(digest, g, n, mode), table.get(g, n).to_json())
    computed = len(euler_keys(max_euler)) - len(cached)
    logger.info(f"{len(cached)} correlators from cache, {computed} computed")
    return table, len(cached)


def _write_outputs(
    args: argparse.Namespace,
    manifest: RunManifest,
    data: Dict[str, Any],
    report_kind: str,
    report_data: Optional[Dict[str, Any]] = None,
) -> None:
    output = args.output / f"{args.command}.json"
    write_json(data, output)
    manifest.outputs.append(str(output))
    if args.report is not None:
        render_report(report_kind, report_data if report_data is not None else data, args.report)
        manifest.outputs.append(str(args.report))


def _verdicts(verdicts: Sequence[Verdict]) -> List[Dict[str, Any]]:
    return [v.to_dict() for v in verdicts]


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_analyze(args: argparse.Namespace, manifest: RunManifest) -> int:
    curve_file = _load(args, manifest)
    curve = curve_file.curve
    locus = ramification_locus(curve)
    admissibility = is_admissible(curve, locus).to_dict()
    newton = None
    if isinstance(curve, MeromorphicCurve):
        newton = newton_polygon(spectral_polynomial(curve)).to_dict()
    data = {
        "label": curve_file.name,
        "kind": curve.kind,
        "curve_hash": manifest.curve_hash,
        "points": [p.describe() for p in locus],
        "admissibility": admissibility,
        "regular": is_regular(curve),
        "newton": newton,
        "separates": separates_points(curve),
    }
    _write_outputs(args, manifest, data, "analyze")
    print(f"Curve: {curve_file.name}")
    print(f" - ramification points: {len(locus)}")
    print(f" - admissible: {'yes' if admissibility['admissible'] else 'no'}")
    print(f" - regular: {'yes' if data['regular'] else 'no'}")
    if not admissibility["admissible"] and not args.allow_inadmissible:
        print("Curve is not admissible (use --allow-inadmissible to accept)", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def cmd_correlators(args: argparse.Namespace, manifest: RunManifest) -> int:
    curve_file = _load(args, manifest)
    curve = curve_file.curve
    mode = args.mode or curve.kind
    if (args.g is None) != (args.n is None):
        raise ValueError("--g and --n must be given together")
    if args.g is not None:
        max_euler = 2 * args.g - 2 + args.n
        if args.g < 0 or args.n < 1 or max_euler < 1:
            raise ValueError("(g, n) must satisfy 2g-2+n >= 1")
    else:
        max_euler = args.max_euler
    _require_admissible(curve, args.allow_inadmissible)
    manifest.parameters.update({"mode": mode, "max_euler": max_euler})
    cache = None if args.no_cache else CorrelatorCache(resolve_cache_dir(args.cache_dir))
    start = time.time()
    table, hits = build_table(
        curve_file, mode, max_euler, args.allow_conjectural, args.workers, cache
    )
    manifest.timings["recursion"] = time.time() - start
    manifest.cache_hits = hits
    keys = [(args.g, args.n)] if args.g is not None else table.stable_keys()
    correlators = []
    for g, n in keys:
        corr = table.get(g, n)
        entry = corr.to_json()
        if n == 1:
            entry["density"] = _density_text(table, corr)
        correlators.append(entry)
    checks: List[Verdict] = []
    if not args.skip_checks:
        start = time.time()
        builder: Optional[Callable[[Any], CorrelatorTable]] = None
        if mode == "transalgebraic":
            builder = partial(
                transalgebraic_table,
                max_euler=max_euler,
                allow_conjectural=args.allow_conjectural,
                workers=args.workers,
            )
        checks = property_suite(table, homogeneity=args.homogeneity, builder=builder)
        manifest.timings["checks"] = time.time() - start
    data = {
        "label": curve_file.name,
        "curve_hash": manifest.curve_hash,
        "mode": mode,
        "max_euler": max_euler,
        "points": [p.describe() for p in table.locus],
        "correlators": correlators,
        "checks": _verdicts(checks),
    }
    _write_outputs(args, manifest, data, "correlators")
    for entry in correlators:
        line = f"omega_{{{entry['g']},{entry['n']}}}: {len(entry['terms'])} terms"
        if "density" in entry:
            line += f", density {entry['density']} dz"
        print(line)
    failed = [v.name for v in checks if not v.passed]
    if checks:
        print(f"Property checks: {len(checks) - len(failed)}/{len(checks)} passed")
    if failed:
        raise VerificationError(f"Property checks failed: {failed}", failed)
    return EXIT_OK


def cmd_hurwitz(args: argparse.Namespace, manifest: RunManifest) -> int:
    r = args.r
    if r < 1:
        raise ValueError("--r must be positive")
    if args.mu is not None:
        mu = normalize_partition(args.mu)
        manifest.parameters.update({"r": r, "g": args.g, "mu": list(mu), "method": args.method})
        value = atlantes_hurwitz(args.g, mu, r, args.method)
        trunc = atlantes_tau(r, sum(mu), 2 * args.g - 1 + len(mu))
        connected = trunc.connected_hurwitz(args.g, mu, r)
        data: Dict[str, Any] = {
            "r": r,
            "g": args.g,
            "mu": list(mu),
            "disconnected": format_scalar(value),
            "connected": format_scalar(connected),
        }
        report = {"title": "Hurwitz number", "checks": []}
        _write_outputs(args, manifest, data, "verification", report)
        print(connected)
        return EXIT_OK
    degree = args.tau_truncate
    hbar_order = 2 * args.g_max + degree
    manifest.parameters.update(
        {"r": r, "tau_truncate": degree, "g_max": args.g_max, "weight": args.weight}
    )
    truncate = atlantes_tau if args.weight == "atlantes" else completed_cycles_tau
    trunc = truncate(r, degree, hbar_order)
    checks = [check_h01(trunc, degree), check_h02(trunc, min(degree, 4))]
    data = {"r": r, "weight": args.weight, "tau": trunc.to_json(), "checks": _verdicts(checks)}
    if args.weight == "atlantes":
        data["numbers"] = hurwitz_table(r, args.g_max, degree)
        for row in data["numbers"]:
            print(f"g={row['g']} mu={row['mu']}: {row['connected']}")
    _write_outputs(
        args,
        manifest,
        data,
        "verification",
        {"title": f"Tau function (r={r})", "checks": data["checks"]},
    )
    failed = [v.name for v in checks if not v.passed]
    if failed:
        raise VerificationError(f"Unstable checks failed: {failed}", failed)
    return EXIT_OK


def _qc_atlantes(
    args: argparse.Namespace, r: int, curve_file: CurveFile
) -> Tuple[Dict[str, Any], List[Verdict]]:
    K, x_order = args.verify_order, args.x_order
    grade = K + x_order
    operator = atlantes_operator(r, grade)
    checks = [check_tau_independence(r, args.tau, grade)]
    built = build_qc_zero_base(atlantes_presentation(r, args.tau[0]), grade)
    reduced = reduce_atlantes_operator(built, r, args.tau[0], grade)
    checks.append(is_quantisation_of(reduced, exponential_polynomial(r, grade)))
    verdict = verify_annihilation(operator, atlantes_closed_form(r, x_order, K + 2), K)
    verdict.name = "annihilation[closed-form]"
    checks.append(verdict)
    if args.recursion_wave:
        wave_x = RECURSION_WAVE_X_ORDER
        cache = None if args.no_cache else CorrelatorCache(resolve_cache_dir(args.cache_dir))
        table, _ = build_table(curve_file, "transalgebraic", K, False, args.workers, cache)
        psi = wave_function(table, 0, K + 1, wave_x)
        verdict = verify_annihilation(atlantes_operator(r, K + wave_x), psi, K)
        verdict.name = "annihilation[recursion]"
        checks.append(verdict)
    data = {"operator": operator.to_json(), "presentation": f"atlantes r={r}"}
    return data, checks


def _qc_meromorphic(
    args: argparse.Namespace, curve: MeromorphicCurve
) -> Tuple[Dict[str, Any], List[Verdict]]:
    P = spectral_polynomial(curve)
    draft = presentation_from_polynomial(P, label=curve.label)
    if not draft.regular:
        logger.error(f"Curve {curve.label!r} is not regular")
        raise ValueError(f"Curve {curve.label!r} is not regular; no quantum curve is built")
    limits = curve_limits(draft, curve.x, curve.y, "inf", "E")
    presentation = presentation_from_polynomial(P, limits, curve.label)
    assert presentation.degree is not None
    grade = presentation.degree + args.verify_order
    operator = build_qc_pole_base(presentation, grade)
    # the symbol of the pole-base operator is P/x^{floor(alpha_0)}
    normalised = DiffOperator.x(presentation.floor(0), grade) * operator
    checks = [is_quantisation_of(normalised, P, presentation.degree)]
    data = {
        "operator": operator.to_json(),
        "presentation": {f"{a},{m}": format_scalar(c) for (a, m), c in sorted(P.items())},
        "limits": {str(i): format_scalar(v) for i, v in limits.items()},
    }
    return data, checks


def cmd_qc(args: argparse.Namespace, manifest: RunManifest) -> int:
    curve_file = _load(args, manifest)
    curve = curve_file.curve
    manifest.parameters.update(
        {
            "verify_order": args.verify_order,
            "x_order": args.x_order,
            "tau": [format_scalar(t) for t in args.tau],
        }
    )
    if isinstance(curve, TransalgebraicCurve):
        family = atlantes_family_parameters(curve)
        if family is None or family[0] != 1:
            raise ValueError("Transalgebraic quantum curves are built for the Atlantes family")
        data, checks = _qc_atlantes(args, family[1], curve_file)
    else:
        data, checks = _qc_meromorphic(args, curve)
    data["checks"] = _verdicts(checks)
    report = {"title": f"Quantum curve of {curve_file.name}", "checks": data["checks"]}
    _write_outputs(args, manifest, data, "verification", report)
    for v in checks:
        print(f"{v.name}: {'PASS' if v.passed else 'FAIL'}")
    failed = [v.name for v in checks if not v.passed]
    if failed:
        raise VerificationError(f"Quantum-curve checks failed: {failed}", failed)
    return EXIT_OK


def cmd_experiment(args: argparse.Namespace, manifest: RunManifest) -> int:
    curve_file = _load(args, manifest)
    curve = curve_file.curve
    if not isinstance(curve, TransalgebraicCurve):
        raise ValueError("The finite-N experiment needs a transalgebraic curve")
    manifest.parameters.update(
        {"g": args.g, "n": args.n, "N": args.N, "tau": [format_scalar(t) for t in args.tau]}
    )
    report = finite_N_experiment(
        curve, args.g, args.n, args.N, args.tau, args.workers, args.fit_scaling
    )
    checks = [
        Verdict("distance-decreasing", report["converging"], report["deltas"]),
        Verdict("tau-difference-decreasing", report["tau_converging"], report["tau_deltas"]),
    ]
    summary = {"title": "Finite-N experiment", "checks": _verdicts(checks)}
    _write_outputs(args, manifest, report, "verification", summary)
    for v in checks:
        print(f"{v.name}: {'yes' if v.passed else 'no'}")
    return EXIT_OK


def cmd_accept(args: argparse.Namespace, manifest: RunManifest) -> int:
    manifest.parameters["only"] = args.only

    def progress(result: CriterionResult) -> None:
        print(f"Criterion {result.number}: {'PASS' if result.passed else 'FAIL'} - {result.title}")

    results = run_suite(args.only, args.workers, progress)
    for result in results:
        manifest.timings[f"criterion_{result.number}"] = result.seconds
    data = {"criteria": [r.to_dict() for r in results]}
    for entry in data["criteria"]:
        entry.pop("seconds")
    checks = [
        {"name": f"{r.number}. {r.title}", "passed": r.passed, "witness": None}
        for r in results
    ]
    report = {"title": "Acceptance suite", "checks": checks}
    _write_outputs(args, manifest, data, "verification", report)
    failed = [r.number for r in results if not r.passed]
    if failed:
        raise VerificationError(f"Acceptance criteria failed: {failed}", failed)
    return EXIT_OK


COMMANDS: Dict[str, Callable[[argparse.Namespace, RunManifest], int]] = {
    "analyze": cmd_analyze,
    "correlators": cmd_correlators,
    "hurwitz": cmd_hurwitz,
    "qc": cmd_qc,
    "experiment": cmd_experiment,
    "accept": cmd_accept,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Execute the CLI and return its exit code."""
    start_time = time.time()
    args = parse_args(argv)
    configure_logging(args)
    recorded = list(argv) if argv is not None else sys.argv[1:]
    manifest = RunManifest(command=args.command, argv=recorded)
    try:
        code = COMMANDS[args.command](args, manifest)
    except PrecisionError as e:
        print(f"Precision failure: {e}", file=sys.stderr)
        return EXIT_PRECISION
    except VerificationError as e:
        print(f"Verification failure: {e}", file=sys.stderr)
        code = EXIT_VERIFICATION
    except (CurveFileError, InadmissibleCurveError, ConjecturalContributionError) as e:
        print(f"Input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (TRError, ValueError, OSError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INPUT
    manifest.timings["total"] = time.time() - start_time
    manifest.to_json(args.output / "manifest.json")
    return code


if __name__ == "__main__":
    sys.exit(main())
