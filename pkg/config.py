"""Application configuration."""
import os
import tempfile
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()


def _resolve_out_dir() -> Path:
    """Resolve HYPERLAB_OUT_DIR: use env if set and writable, else default, else temp fallback."""
    env_val = os.getenv("HYPERLAB_OUT_DIR", "").strip()
    candidates = []
    if env_val:
        candidates.append(Path(env_val).resolve())
    candidates.append(Path(__file__).resolve().parent / "runs")
    candidates.append(Path(tempfile.gettempdir()) / "hyperlab_runs")
    for path in candidates:
        try:
            path.mkdir(parents=True, exist_ok=True)
            probe = path / ".write_check"
            probe.write_text("")
            probe.unlink(missing_ok=True)
            return path
        except OSError:
            continue
    return candidates[-1]  # last resort: temp (may still fail later)


def _int_env(name: str, default: int, minimum: int = 1) -> int:
    raw = os.getenv(name, "").strip()
    try:
        value = int(raw) if raw else default
    except ValueError:
        value = default
    return max(value, minimum)


APP_NAME = "hyperlab"
APP_VERSION = "0.3.0"
REPORT_SCHEMA_VERSION = "v1"

# Default run directory for reports and CSV series (overridden per run with --out)
OUT_DIR = _resolve_out_dir()

# Upper bound on worker threads for data-parallel evaluation (orbit distances)
HYPERLAB_THREADS = _int_env("HYPERLAB_THREADS", 1)

# Numerical tolerances
IDENTITY_TOL = 1e-12
CROSS_CHECK_RTOL = 1e-9
CROSS_CHECK_ATOL = 1e-280

# Defaults filled in by the config validator
DEFAULT_P = 2.0
DEFAULT_N_MAX = 300
DEFAULT_K_MAX = 10

LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
