"""Tests for the CLI module."""

import json
import sys
from pathlib import Path

import pytest

from src.cli import (
    COMMANDS,
    DEFAULT_OUTPUT,
    EXIT_INPUT,
    EXIT_OK,
    EXIT_PRECISION,
    EXIT_VERIFICATION,
    main,
    parse_args,
)
from src.errors import PrecisionError, VerificationError
from src.manifest import RunManifest


@pytest.fixture
def output_dir(temp_dir, monkeypatch) -> Path:
    """Run every CLI test from a scratch directory and return its output path."""
    monkeypatch.chdir(temp_dir)
    return temp_dir / "out"


def test_parse_args_correlators():
    """Test that parse_args reads the shared and command options."""
    args = parse_args(["correlators", "airy", "--g", "1", "--n", "1", "--workers", "2"])
    assert args.command == "correlators"
    assert (args.g, args.n) == (1, 1)
    assert args.workers == 2
    assert args.output == DEFAULT_OUTPUT
    assert not args.no_cache


def test_parse_args_output():
    args = parse_args(["analyze", "airy", "--output", "reports"])
    assert args.output == Path("reports")


def test_parse_args_help(capsys):
    """Test that parse_args shows help and exits when called with --help."""
    with pytest.raises(SystemExit) as excinfo:
        parse_args(["--help"])
    assert excinfo.value.code == 0
    captured = capsys.readouterr()
    assert "Exact topological recursion" in captured.out
    assert "correlators" in captured.out


def test_parse_args_rejects_bad_partition():
    with pytest.raises(SystemExit):
        parse_args(["hurwitz", "--r", "1", "--mu", "2,x"])


def test_verbosity_flags_are_exclusive():
    with pytest.raises(SystemExit):
        parse_args(["analyze", "airy", "--verbose", "--quiet"])


def test_every_command_is_registered():
    assert set(COMMANDS) == {"analyze", "correlators", "hurwitz", "qc", "experiment", "accept"}


def test_correlators_airy(output_dir, capsys):
    """Test ω_{1,1} = dz/(16z⁴) for the Airy curve end to end."""
    code = main(["correlators", "airy", "--g", "1", "--n", "1", "--no-cache", "-o", str(output_dir)])
    assert code == EXIT_OK
    assert "omega_{1,1}: 1 terms" in capsys.readouterr().out

    with open(output_dir / "correlators.json", "r") as f:
        data = json.load(f)
    assert data["max_euler"] == 1
    (omega11,) = data["correlators"]
    assert omega11["terms"] == [{"poles": [[0, 0, 4]], "coeff": "1/16"}]
    assert all(check["passed"] for check in data["checks"])

    manifest = RunManifest.from_json(output_dir / "manifest.json")
    assert manifest.command == "correlators"
    assert manifest.cache_hits == 0
    assert str(output_dir / "correlators.json") in manifest.outputs


def test_correlators_uses_cache(output_dir, cache_dir):
    argv = ["correlators", "airy", "--g", "1", "--n", "1", "-o", str(output_dir)]
    assert main(argv) == EXIT_OK
    first = (output_dir / "correlators.json").read_bytes()
    assert main(argv) == EXIT_OK

    assert RunManifest.from_json(output_dir / "manifest.json").cache_hits == 2
    assert (output_dir / "correlators.json").read_bytes() == first
    assert any(cache_dir.rglob("*.json"))


def test_correlators_writes_report(output_dir):
    report = output_dir / "airy.md"
    argv = ["correlators", "airy", "--max-euler", "1", "--no-cache", "-o", str(output_dir)]
    assert main(argv + ["--report", str(report)]) == EXIT_OK
    assert "# Correlators of airy" in report.read_text(encoding="utf-8")


def test_correlators_needs_g_and_n_together(output_dir, capsys):
    assert main(["correlators", "airy", "--g", "1", "--no-cache", "-o", str(output_dir)]) == EXIT_INPUT
    assert "--g and --n" in capsys.readouterr().err


def test_unknown_curve_is_an_input_error(output_dir, capsys):
    assert main(["analyze", "hyperbolic", "-o", str(output_dir)]) == EXIT_INPUT
    assert "Input error" in capsys.readouterr().err
    assert not (output_dir / "manifest.json").exists()


def test_analyze_appendix(output_dir):
    assert main(["analyze", "appendix", "-o", str(output_dir)]) == EXIT_OK
    with open(output_dir / "analyze.json", "r") as f:
        data = json.load(f)
    assert data["regular"] is False
    assert data["newton"]["interior_points"] == [[1, 1]]


def test_qc_refuses_irregular_curve(output_dir):
    assert main(["qc", "appendix", "-o", str(output_dir)]) == EXIT_INPUT


@pytest.mark.parametrize("mu, expected", [("3", "1/1"), ("2", "1/2")])
def test_hurwitz_numbers(output_dir, capsys, mu, expected):
    assert main(["hurwitz", "--r", "1", "--mu", mu, "-o", str(output_dir)]) == EXIT_OK
    assert capsys.readouterr().out.strip() == expected
    with open(output_dir / "hurwitz.json", "r") as f:
        assert json.load(f)["connected"] == expected


def test_hurwitz_rejects_non_integral_blocks(output_dir):
    assert main(["hurwitz", "--r", "2", "--mu", "2,1", "-o", str(output_dir)]) == EXIT_INPUT


def test_experiment_needs_transalgebraic_curve(output_dir):
    assert main(["experiment", "airy", "-o", str(output_dir)]) == EXIT_INPUT


def test_accept_rejects_unknown_criterion(output_dir):
    assert main(["accept", "--only", "42", "-o", str(output_dir)]) == EXIT_INPUT


def test_verification_failure_still_writes_manifest(output_dir, monkeypatch, capsys):
    """Test exit code 2 and that the manifest survives a failed check."""

    def failing(args, manifest):
        raise VerificationError("symmetry failed", ["symmetry"])

    monkeypatch.setitem(COMMANDS, "analyze", failing)
    assert main(["analyze", "airy", "-o", str(output_dir)]) == EXIT_VERIFICATION
    assert "Verification failure" in capsys.readouterr().err
    assert RunManifest.from_json(output_dir / "manifest.json").command == "analyze"


def test_precision_failure_exit_code(output_dir, monkeypatch):
    def starved(args, manifest):
        raise PrecisionError("series too short", 7)

    monkeypatch.setitem(COMMANDS, "analyze", starved)
    assert main(["analyze", "airy", "-o", str(output_dir)]) == EXIT_PRECISION


def test_main_reads_sys_argv(output_dir, monkeypatch):
    """Test that main falls back to sys.argv and records it in the manifest."""
    argv = ["hurwitz", "--r", "1", "--mu", "3", "-o", str(output_dir)]
    monkeypatch.setattr(sys, "argv", ["cli.py"] + argv)
    assert main() == EXIT_OK
    assert RunManifest.from_json(output_dir / "manifest.json").argv == argv
