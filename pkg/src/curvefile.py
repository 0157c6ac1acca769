"""
Curve description files.

A curve file is a JSON object. Explicit curves give rational functions as
coefficient lists in increasing degree, each coefficient an exact "p/q" string
or integer:

    {"kind": "meromorphic", "x": {"num": [0, 0, 1]}, "y": {"num": [0, 1]}}
    {"kind": "transalgebraic", "M0": {"num": [0, 1]}, "M1": {"num": [0, 0, -1]},
     "M2": {"num": [0, 1]}}

Family tags expand to explicit data:

    {"family": "airy"}                    x = z², y = z
    {"family": "rs", "r": 3, "s": 2}      x = z^r, y = z^{s−r}
    {"family": "atlantes", "r": 2}        M0 = z, M1 = −z^r, M2 = z
    {"family": "q-orbifold", "q": 2, "r": 2}  M0 = z, M1 = −z^{qr}, M2 = z^q
    {"family": "appendix"}                x = z + 1/z, y = z²

A transalgebraic curve with an "N" entry (and optional "tau") is replaced by its
finite-N meromorphic approximation.
"""

import json
import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from src.algebra import Poly, RatFunc, format_scalar, parse_scalar
from src.curve import Curve, MeromorphicCurve, TransalgebraicCurve, finite_N_curve
from src.errors import CurveFileError

logging.basicConfig(
    level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)
logger = logging.getLogger(__name__)

FAMILIES = ("airy", "rs", "atlantes", "q-orbifold", "appendix")


def _monomial(power: int, coeff: Any = 1) -> RatFunc:
    if power >= 0:
        return RatFunc(Poly.monomial(power, coeff), Poly.constant(1))
    return RatFunc(Poly.constant(coeff), Poly.monomial(-power, 1))


def airy_curve() -> MeromorphicCurve:
    return MeromorphicCurve(_monomial(2), _monomial(1), "airy")


def rs_curve(r: int, s: int) -> MeromorphicCurve:
    """x = z^r, y = z^{s−r}; ramified of type (r, s) at z = 0."""
    if r < 2 or s < 1:
        raise ValueError("rs family needs r >= 2 and s >= 1")
    return MeromorphicCurve(_monomial(r), _monomial(s - r), f"rs-{r}-{s}")


def atlantes_curve(r: int) -> TransalgebraicCurve:
    if r < 1:
        raise ValueError("Atlantes family needs r >= 1")
    return TransalgebraicCurve(_monomial(1), _monomial(r, -1), _monomial(1), f"atlantes-r{r}")


def q_orbifold_curve(q: int, r: int) -> TransalgebraicCurve:
    if q < 1 or r < 1:
        raise ValueError("q-orbifold family needs q, r >= 1")
    return TransalgebraicCurve(
        _monomial(1), _monomial(q * r, -1), _monomial(q), f"q-orbifold-q{q}-r{r}"
    )


def appendix_curve() -> MeromorphicCurve:
    x = RatFunc(Poly((1, 0, 1)), Poly((0, 1)))
    return MeromorphicCurve(x, _monomial(2), "appendix")


@dataclass
class CurveFile:
    """
    Parsed contents of a curve file.

    Attributes:
        curve: The explicit curve (finite-N approximation applied if requested).
        family: Family tag, if the file used one.
        params: Family parameters.
        tau: Deformation parameter of the finite-N sequence.
        N: Finite-N index, if any.
        source: Path the file was read from.
        origin: The transalgebraic curve behind a finite-N approximation.
    """

    curve: Curve
    family: Optional[str] = None
    params: Optional[Dict[str, int]] = None
    tau: Optional[Fraction] = None
    N: Optional[int] = None
    source: Optional[Path] = None
    origin: Optional[Curve] = None

    @property
    def name(self) -> str:
        return self.curve.label or (self.source.stem if self.source else "curve")

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"label": (self.origin or self.curve).label}
        if self.family is not None:
            data["family"] = self.family
            data.update(self.params or {})
        else:
            data.update((self.origin or self.curve).to_dict())
        if self.N is not None:
            data["N"] = self.N
        if self.tau is not None:
            data["tau"] = format_scalar(self.tau)
        return data


def _locate(text: str, key: str) -> Tuple[int, int]:
    """Line and column of the first occurrence of a JSON key, for error messages."""
    index = text.find(f'"{key}"')
    if index < 0:
        return 1, 1
    line = text.count("\n", 0, index) + 1
    column = index - (text.rfind("\n", 0, index) + 1) + 1
    return line, column


def _ratfunc(value: Any, key: str, text: str) -> RatFunc:
    line, column = _locate(text, key)
    if not isinstance(value, dict) or "num" not in value:
        raise CurveFileError(f"{key!r} must be an object with a 'num' list", line, column)
    try:
        num = [parse_scalar(c) for c in value["num"]]
        den = [parse_scalar(c) for c in value.get("den", [1])]
        return RatFunc.of(num, den)
    except (ValueError, ZeroDivisionError, TypeError) as e:
        raise CurveFileError(f"bad coefficients for {key!r}: {e}", line, column) from e


def _family(data: Dict[str, Any], text: str) -> Curve:
    family = data["family"]
    line, column = _locate(text, "family")

    def param(name: str) -> int:
        if name not in data:
            raise CurveFileError(f"family {family!r} needs parameter {name!r}", line, column)
        value = data[name]
        if not isinstance(value, int) or isinstance(value, bool):
            raise CurveFileError(f"parameter {name!r} must be an integer", *_locate(text, name))
        return value

    try:
        if family == "airy":
            return airy_curve()
        if family == "rs":
            return rs_curve(param("r"), param("s"))
        if family == "atlantes":
            return atlantes_curve(param("r"))
        if family == "q-orbifold":
            return q_orbifold_curve(param("q"), param("r"))
        if family == "appendix":
            return appendix_curve()
    except CurveFileError:
        raise
    except ValueError as e:
        raise CurveFileError(str(e), line, column) from e
    raise CurveFileError(f"unknown family {family!r}; expected one of {FAMILIES}", line, column)


def parse_curve_text(text: str, source: Optional[Path] = None) -> CurveFile:
    """
    Parse curve-file text.

    Raises:
        CurveFileError: With the line and column of the offending input.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        logger.error(f"Malformed curve file {source}: {e.msg}")
        raise CurveFileError(e.msg, e.lineno, e.colno) from e
    if not isinstance(data, dict):
        raise CurveFileError("curve file must contain a JSON object", 1, 1)
    family = data.get("family")
    params: Optional[Dict[str, int]] = None
    if family is not None:
        curve = _family(data, text)
        params = {k: v for k, v in data.items() if k in ("r", "s", "q")}
        if "label" in data:
            curve = replace(curve, label=str(data["label"]))
    else:
        kind = data.get("kind")
        try:
            if kind == "meromorphic":
                curve = MeromorphicCurve(
                    _ratfunc(data.get("x"), "x", text),
                    _ratfunc(data.get("y"), "y", text),
                    str(data.get("label", "")),
                )
            elif kind == "transalgebraic":
                curve = TransalgebraicCurve(
                    _ratfunc(data.get("M0"), "M0", text),
                    _ratfunc(data.get("M1"), "M1", text),
                    _ratfunc(data.get("M2"), "M2", text),
                    str(data.get("label", "")),
                )
            else:
                raise CurveFileError(
                    f"'kind' must be 'meromorphic' or 'transalgebraic', got {kind!r}",
                    *_locate(text, "kind"),
                )
        except CurveFileError:
            raise
        except ValueError as e:
            raise CurveFileError(str(e), *_locate(text, "kind")) from e
    tau = parse_scalar(data["tau"]) if "tau" in data else None
    N = data.get("N")
    origin: Optional[Curve] = None
    if N is not None:
        if not isinstance(curve, TransalgebraicCurve):
            raise CurveFileError("'N' applies to transalgebraic curves only", *_locate(text, "N"))
        try:
            origin = curve
            curve = finite_N_curve(origin, int(N), tau if tau is not None else Fraction(0))
        except ValueError as e:
            raise CurveFileError(str(e), *_locate(text, "N")) from e
    logger.debug(f"Parsed curve {curve.label!r} from {source}")
    return CurveFile(curve, family, params, tau, N, source, origin)


def load_curve_file(path: Path) -> CurveFile:
    """Read and parse a curve file from disk."""
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    return parse_curve_text(text, path)


def resolve_curve(name: str) -> CurveFile:
    """
    A curve file path, or a bare family shorthand such as ``atlantes-r2``,
    ``q-orbifold-q2-r2``, ``rs-3-2``, ``airy`` or ``appendix``.
    """
    path = Path(name)
    if path.exists():
        return load_curve_file(path)
    parts = name.split("-")
    try:
        if name in ("airy", "appendix"):
            data: Dict[str, Any] = {"family": name}
        elif name.startswith("atlantes-r"):
            data = {"family": "atlantes", "r": int(name[len("atlantes-r"):])}
        elif name.startswith("q-orbifold-q"):
            q_part, r_part = name[len("q-orbifold-q"):].split("-r")
            data = {"family": "q-orbifold", "q": int(q_part), "r": int(r_part)}
        elif parts[0] == "rs" and len(parts) == 3:
            data = {"family": "rs", "r": int(parts[1]), "s": int(parts[2])}
        else:
            raise CurveFileError(f"no such file or family shorthand: {name!r}", 0, 0)
    except ValueError as e:
        if isinstance(e, CurveFileError):
            raise
        raise CurveFileError(f"bad family shorthand {name!r}", 0, 0) from e
    return parse_curve_text(json.dumps(data))


def dump_curve(curve_file: CurveFile, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(curve_file.to_dict(), f, indent=2)

