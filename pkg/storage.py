"""Storage: run directories, experiment config files, JSON reports and CSV series."""
from __future__ import annotations

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from config import OUT_DIR
from lab.errors import ConfigFileError

logger = logging.getLogger(__name__)
REPORT_FILE = "report.json"


def ensure_out_dir_ready(out_dir: Optional[Path] = None) -> Path:
    """
    Create the run directory and verify it is writable. Call before a run.
    Returns the path. Raises RuntimeError if the directory cannot be created or written to.
    """
    path = Path(out_dir) if out_dir is not None else OUT_DIR
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise RuntimeError(f"Cannot create run directory {path}: {e}") from e
    probe = path / ".write_check"
    try:
        probe.write_text("")
        probe.unlink(missing_ok=True)
    except OSError as e:
        raise RuntimeError(f"Run directory is not writable: {path}: {e}") from e
    return path


def load_config_file(path: Path) -> dict[str, Any]:
    """Read an experiment config. Raises ConfigFileError on missing, empty or malformed files."""
    path = Path(path)
    try:
        content = path.read_text().strip()
    except OSError as e:
        raise ConfigFileError(f"Cannot read config {path}: {e}") from e
    if not content:
        raise ConfigFileError(f"Config file is empty: {path}")
    try:
        data = json.loads(content)
    except json.JSONDecodeError as e:
        raise ConfigFileError(f"Config {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigFileError(f"Config {path} must hold a JSON object, got {type(data).__name__}")
    return data


def _make_json_safe(obj: Any) -> Any:
    """Return a copy of obj safe for json.dumps (numpy scalars, tuples, non-finite floats)."""
    if hasattr(obj, "isoformat"):  # datetime
        return obj.isoformat()
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {str(k): _make_json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_make_json_safe(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _make_json_safe(obj.tolist())
    return obj


def dump_report(report: dict[str, Any]) -> str:
    """Sorted-key JSON text; identical payloads give identical text."""
    return json.dumps(_make_json_safe(report), indent=2, sort_keys=True) + "\n"


def write_report(out_dir: Path, report: dict[str, Any], name: str = REPORT_FILE) -> Path:
    path = Path(out_dir) / name
    try:
        path.write_text(dump_report(report))
    except OSError as e:
        raise RuntimeError(f"Cannot write report to {path}: {e}") from e
    logger.info("Report written: %s", path)
    return path


def _format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_series(rows: Iterable[Sequence[Any]], columns: Sequence[str], path: Path) -> Path:
    """CSV with a header row; floats use the shortest representation that round-trips."""
    path = Path(path)
    try:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(list(columns))
            for row in rows:
                writer.writerow([_format_cell(v) for v in row])
    except OSError as e:
        raise RuntimeError(f"Cannot write series to {path}: {e}") from e
    return path


def read_series(path: Path) -> tuple[list[str], list[list[str]]]:
    """Header and raw rows of a CSV written by emit_series."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, [])
        return header, [row for row in reader]
