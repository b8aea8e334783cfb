"""
hyperlab - numerical laboratory for (disjoint) hypercyclicity of weighted translations.

Each command reads a JSON experiment config, runs one checker or construction on a lattice
model of the group and writes report.json (plus CSV series) into the run directory.
Exit codes: 0 satisfied / success, 2 refuted / exhausted / premise violated, 1 errors.
"""
from __future__ import annotations

import json
import logging
import sys
from pathlib import Path
from typing import Optional

import click

from config import APP_NAME, APP_VERSION
from lab.errors import ConfigFileError, ConfigValidationError, HyperlabError
from logging_config import setup_logging
from services.config_schema import COMMANDS, validate_config
from services.orchestrator import EXIT_ERROR, ExperimentOrchestrator
from storage import load_config_file

logger = logging.getLogger(APP_NAME)


def _fail(payload: dict) -> None:
    click.echo(json.dumps(payload, indent=2, sort_keys=True), err=True)
    sys.exit(EXIT_ERROR)


def run_command(command: str, config_path: Path, out_dir: Optional[Path], mode: Optional[str], seed: Optional[int]) -> int:
    """Validate, run and report one command. Returns the exit code."""
    try:
        raw = load_config_file(config_path)
        cfg = validate_config(raw, command=command, mode=mode, seed=seed)
    except ConfigFileError as e:
        logger.error("Config file error: %s", e)
        _fail({"error": "config_file", "message": str(e)})
    except ConfigValidationError as e:
        logger.error("Config rejected: %s", e)
        _fail({"error": "config_validation", "errors": e.errors})
    try:
        report = ExperimentOrchestrator(cfg).run(out_dir)
    except HyperlabError as e:
        logger.exception("%s failed: %s", command, e)
        _fail({"error": type(e).__name__, "message": str(e)})
    except ArithmeticError as e:
        logger.exception("%s failed: %s", command, e)
        _fail({"error": "arithmetic", "message": str(e)})
    except RuntimeError as e:
        logger.exception("%s failed: %s", command, e)
        _fail({"error": "runtime", "message": str(e)})
    click.echo(json.dumps({"command": command, "status": report["status"], "exit_code": report["exit_code"]}, sort_keys=True))
    return report["exit_code"]


def _register(name: str) -> None:
    @main.command(name=name, help=f"Run the {name} experiment.")
    @click.option("--config", "config_path", required=True, type=click.Path(path_type=Path), help="Experiment config (JSON)")
    @click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), default=None, help="Run directory for report.json and CSV series")
    @click.option("--mode", type=click.Choice(["paper", "one-directional"]), default=None, help="Condition mode for check-dhc")
    @click.option("--seed", type=int, default=None, help="Seed for random test functions")
    def _cmd(config_path: Path, out_dir: Optional[Path], mode: Optional[str], seed: Optional[int]) -> None:
        sys.exit(run_command(name, config_path, out_dir, mode, seed))


@click.group(name=APP_NAME)
@click.version_option(APP_VERSION, prog_name=APP_NAME)
@click.option("--log-level", default=None, help="Override LOG_LEVEL")
def main(log_level: Optional[str]) -> None:
    """Hypercyclicity laboratory for weighted translations on lattice groups."""
    setup_logging(log_level)


for _name in COMMANDS:
    _register(_name)


if __name__ == "__main__":
    main()
