"""
Markdown report renderer.

Curve analyses, correlator tables and verification verdicts are rendered through
Jinja2 templates stored in ``src/templates``.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List

from jinja2 import Environment, FileSystemLoader, Template

logging.basicConfig(
    level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)
logger = logging.getLogger(__name__)

TEMPLATE_DIR = Path(__file__).parent / "templates"
REPORT_TEMPLATES = {
    "analyze": "curve_report.md.j2",
    "correlators": "correlators_report.md.j2",
    "verification": "verification_report.md.j2",
}


def _pole(descriptor: List[Any]) -> str:
    """Readable name of a serialised pole descriptor."""
    if descriptor and descriptor[0] == "inf":
        return f"ξ∞[{descriptor[1]}]"
    orbit, power, order = descriptor
    return f"Ξ[{orbit},{power},{order}]"


def _verdict(passed: bool) -> str:
    return "PASS" if passed else "FAIL"


def setup_jinja_env(template_dir: Path = TEMPLATE_DIR) -> Environment:
    """
    Set up the Jinja2 environment with the given template directory.

    Args:
        template_dir: Path to the directory containing templates.

    Returns:
        Jinja2 Environment with strict undefined and the report filters installed.
    """
    from jinja2 import StrictUndefined

    env = Environment(
        loader=FileSystemLoader(template_dir),
        trim_blocks=True,
        lstrip_blocks=True,
        undefined=StrictUndefined,
        keep_trailing_newline=True,
    )
    env.filters["pole"] = _pole
    env.filters["verdict"] = _verdict
    return env


def load_template(env: Environment, name: str) -> Template:
    """
    Load a template from the Jinja2 environment.

    Raises:
        jinja2.exceptions.TemplateNotFound: If the template doesn't exist.
    """
    return env.get_template(name)


def generate_report(data: Dict[str, Any], template: Template, output_path: Path) -> None:
    """
    Render a report and write it to disk.

    Args:
        data: Template context; every key becomes a template variable.
        template: Jinja2 template to use for rendering.
        output_path: Path where the rendered Markdown should be written.
    """
    rendered = template.render(**data)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, "w", encoding="utf-8") as f:
        f.write(rendered)
    logger.info(f"Report written to {output_path}")


def render_report(kind: str, data: Dict[str, Any], output_path: Path) -> None:
    """
    Render one of the built-in reports.

    Args:
        kind: "analyze", "correlators" or "verification".
        data: Template context.
        output_path: Destination Markdown file.

    Raises:
        ValueError: If ``kind`` names no built-in report.
    """
    if kind not in REPORT_TEMPLATES:
        logger.error(f"Unknown report kind {kind!r}")
        raise ValueError(f"Unknown report kind {kind!r}")
    env = setup_jinja_env()
    generate_report(data, load_template(env, REPORT_TEMPLATES[kind]), output_path)
