"""Pytest fixtures for hyperlab tests."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Callable

import pytest
from click.testing import CliRunner

from lab.group_lattice import GroupModel
from lab.weights import StepWeight


@pytest.fixture
def z1() -> GroupModel:
    """The integer lattice Z."""
    return GroupModel.integer_lattice(1)


@pytest.fixture
def salas() -> StepWeight:
    """Step weight 2 on x <= 0 and 1/2 on x > 0."""
    return StepWeight(2.0, 0.5, (1,), 0)


@pytest.fixture
def out_dir(tmp_path: Path) -> Path:
    """Return a temporary run directory."""
    path = tmp_path / "run"
    path.mkdir()
    return path


@pytest.fixture
def runner(out_dir: Path):
    """Click CliRunner with the default run directory pointed at a temp directory."""
    import config
    import storage

    # Point config and storage at temp dir so tests don't write into the repo
    original_out_dir = config.OUT_DIR
    config.OUT_DIR = out_dir
    storage.OUT_DIR = out_dir
    try:
        yield CliRunner()
    finally:
        config.OUT_DIR = original_out_dir
        storage.OUT_DIR = original_out_dir


@pytest.fixture
def write_config(tmp_path: Path) -> Callable[[dict[str, Any], str], Path]:
    """Write a config dict as JSON and return its path."""

    def _write(data: dict[str, Any], name: str = "config.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return path

    return _write
