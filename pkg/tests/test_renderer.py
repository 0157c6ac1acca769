"""
Unit tests for the renderer module.
"""

import pytest
from jinja2 import FileSystemLoader
from jinja2.exceptions import TemplateNotFound, UndefinedError

from src.renderer import (
    REPORT_TEMPLATES,
    TEMPLATE_DIR,
    generate_report,
    load_template,
    render_report,
    setup_jinja_env,
)


@pytest.fixture
def correlator_context():
    """A one-correlator table in the layout the CLI passes to the template."""
    return {
        "label": "airy",
        "mode": "meromorphic",
        "curve_hash": "abc123",
        "max_euler": 1,
        "correlators": [
            {
                "g": 1,
                "n": 1,
                "kind": "general",
                "provenance": "recursion",
                "terms": [{"poles": [[0, 0, 4]], "coeff": "1/16"}],
            },
            {
                "g": 0,
                "n": 2,
                "kind": "unstable",
                "provenance": "initial data",
                "terms": [],
            },
        ],
        "checks": [{"name": "symmetry", "passed": True}],
    }


def test_setup_jinja_env():
    """Test that the Jinja2 environment is set up correctly."""
    env = setup_jinja_env()

    assert isinstance(env.loader, FileSystemLoader)
    assert str(TEMPLATE_DIR) in env.loader.searchpath
    assert env.undefined.__name__ == "StrictUndefined"
    assert {"pole", "verdict"} <= set(env.filters)


def test_filters():
    env = setup_jinja_env()
    assert env.filters["pole"]([0, 1, 4]) == "Ξ[0,1,4]"
    assert env.filters["pole"](["inf", 2]) == "ξ∞[2]"
    assert env.filters["verdict"](True) == "PASS"
    assert env.filters["verdict"](False) == "FAIL"


@pytest.mark.parametrize("name", sorted(REPORT_TEMPLATES.values()))
def test_load_template(name):
    """Test that every built-in report template loads."""
    template = load_template(setup_jinja_env(), name)
    assert template.name == name


def test_load_missing_template():
    with pytest.raises(TemplateNotFound):
        load_template(setup_jinja_env(), "missing.md.j2")


def test_missing_variable_is_an_error(temp_dir):
    """Test that StrictUndefined refuses to render an incomplete context."""
    template = load_template(setup_jinja_env(), REPORT_TEMPLATES["verification"])
    with pytest.raises(UndefinedError):
        generate_report({"title": "Checks"}, template, temp_dir / "report.md")


def test_render_correlator_report(temp_dir, correlator_context):
    output_path = temp_dir / "reports" / "correlators.md"
    render_report("correlators", correlator_context, output_path)

    content = output_path.read_text(encoding="utf-8")
    assert content.startswith("# Correlators of airy (meromorphic mode)")
    assert "## ω(1, 1)" in content
    assert "| Ξ[0,0,4] | 1/16 |" in content
    assert "ω(0, 2)" not in content
    assert "- symmetry: PASS" in content


def test_render_verification_report(temp_dir):
    checks = [
        {"name": "bernoulli_formula", "passed": True, "witness": None},
        {"name": "conjugation", "passed": False, "witness": {"r": 3}},
    ]
    output_path = temp_dir / "verification.md"
    render_report("verification", {"title": "Acceptance", "checks": checks}, output_path)

    content = output_path.read_text(encoding="utf-8")
    assert "- bernoulli_formula: PASS" in content
    assert "- conjugation: FAIL (witness: `{'r': 3}`)" in content
    assert "Overall: FAIL" in content


def test_render_curve_report(temp_dir):
    context = {
        "label": "airy",
        "kind": "meromorphic",
        "curve_hash": "abc123",
        "admissibility": {
            "admissible": True,
            "points": [
                {"orbit": 0, "admissible": True, "reason": "r = 2, s = 3", "flagged": True}
            ],
        },
        "regular": True,
        "separates": {"separates": True, "method": "x and y generate"},
        "points": [
            {
                "orbit": 0,
                "minimal_polynomial": ["0", "1"],
                "kind": "finite",
                "order": 2,
                "s": 3,
                "pole_orders": None,
            }
        ],
        "newton": None,
    }
    output_path = temp_dir / "curve.md"
    render_report("analyze", context, output_path)

    content = output_path.read_text(encoding="utf-8")
    assert "- admissible: PASS" in content
    assert "| 0 | 0, 1 | finite | 2 | 3 | - |" in content
    assert "(flagged)" in content
    assert "Newton polygon" not in content


def test_render_unknown_report_kind(temp_dir):
    with pytest.raises(ValueError):
        render_report("html", {}, temp_dir / "report.md")
