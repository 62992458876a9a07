"""
Lab Configuration Module
========================

Run configuration for the command-line front end.

Values come from a plain-text config file (``key = value`` per line,
``#`` comments) and from command-line flags; flags win. The effective
configuration is echoed into every report header.
"""

import logging
import os
from dataclasses import dataclass, fields
from typing import Any, Callable, Dict, Optional, Tuple

from .lab_exceptions import ConfigError
from .verification.suite import IDENTITY_IDS

logger = logging.getLogger(__name__)

COMMANDS = ("verify", "decay", "bryant", "report")
MODEL_NAMES = ("cigar", "cigarxr", "euclidean", "euclidean2", "flat_spheres", "bryant")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")
READINGS = ("intrinsic", "ambient")
THREADS_ENV = "SOLITON_LAB_THREADS"


@dataclass
class RunConfig:
    """Every knob of a run, with defaults."""

    command: str = "verify"
    model: str = "cigarxr"

    # Identity suite
    identities: Tuple[str, ...] = IDENTITY_IDS
    points: int = 10
    seed: int = 0
    region: Optional[Tuple[float, float]] = None  # model default when None
    sigmas: Tuple[float, ...] = (-1.0, 0.0, 2.0)
    step: Optional[float] = None  # curvature-scaled default when None
    tolerance: Optional[float] = None  # overrides every identity tolerance
    reading: str = "intrinsic"

    # Outputs
    json: Optional[str] = None
    csv: Optional[str] = None

    # Decay
    quantity: str = "R"
    rmin: Optional[float] = None
    rmax: Optional[float] = None  # also the Bryant profile radius
    n: int = 32
    sigma: float = 0.0
    table_exponents: bool = False
    a: Tuple[float, ...] = (1.0,)
    b: Tuple[float, ...] = (1.0,)

    # Bryant profile
    tol: float = 1e-10
    out: Optional[str] = None

    # Report re-rendering
    input: Optional[str] = None

    # Execution
    threads: int = 0  # 0 = auto
    cache_dir: str = ".cache"
    cache_enabled: bool = True
    log_level: str = "WARNING"

    def __post_init__(self):
        """Validate configuration after initialization."""
        if self.command not in COMMANDS:
            raise ConfigError(f"Unknown command '{self.command}'; valid: {', '.join(COMMANDS)}")
        if self.model not in MODEL_NAMES:
            raise ConfigError(f"Unknown model '{self.model}'; valid: {', '.join(MODEL_NAMES)}")
        unknown = [i for i in self.identities if i not in IDENTITY_IDS]
        if unknown:
            raise ConfigError(f"Unknown identity ids {unknown}; valid ids: {', '.join(IDENTITY_IDS)}")
        if self.points < 0:
            raise ConfigError(f"points must be >= 0, got {self.points}")
        if self.region is not None and not self.region[0] < self.region[1]:
            raise ConfigError(f"region must be increasing, got {self.region}")
        if self.step is not None and self.step <= 0:
            raise ConfigError(f"step must be positive, got {self.step}")
        if self.tolerance is not None and self.tolerance <= 0:
            raise ConfigError(f"tolerance must be positive, got {self.tolerance}")
        if self.reading not in READINGS:
            raise ConfigError(f"reading must be one of {READINGS}, got '{self.reading}'")
        if self.rmin is not None and self.rmin <= 0:
            raise ConfigError(f"rmin must be positive, got {self.rmin}")
        if self.rmax is not None and self.rmax <= 0:
            raise ConfigError(f"rmax must be positive, got {self.rmax}")
        if self.rmin is not None and self.rmax is not None and self.rmin >= self.rmax:
            raise ConfigError(f"rmin must be below rmax, got {self.rmin} >= {self.rmax}")
        if self.n < 8:
            raise ConfigError(f"n must be >= 8, got {self.n}")
        if self.tol <= 0:
            raise ConfigError(f"tol must be positive, got {self.tol}")
        if self.threads < 0:
            raise ConfigError(f"threads must be >= 0, got {self.threads}")
        if self.log_level.upper() not in LOG_LEVELS:
            raise ConfigError(f"log_level must be one of {LOG_LEVELS}, got '{self.log_level}'")
        self.log_level = self.log_level.upper()

    def echo(self) -> Dict[str, str]:
        """Effective configuration as a sorted string map."""
        out = {}
        for f in sorted(fields(self), key=lambda f: f.name):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ",".join(_format(v) for v in value)
            out[f.name] = _format(value)
        return out


def _format(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


# ============================================================================
# Parsing
# ============================================================================

def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: '{text}'")


def _floats(text: str) -> Tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _strs(text: str) -> Tuple[str, ...]:
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _optional_float(text: str) -> Optional[float]:
    return None if text.strip() in ("", "none") else float(text)


def _optional_str(text: str) -> Optional[str]:
    return text.strip() or None


def _region(text: str) -> Optional[Tuple[float, float]]:
    values = _floats(text)
    if not values:
        return None
    if len(values) != 2:
        raise ValueError(f"region needs two numbers, got '{text}'")
    return values[0], values[1]


_CONVERTERS: Dict[str, Callable[[str], Any]] = {
    "command": str.strip,
    "model": str.strip,
    "identities": _strs,
    "points": int,
    "seed": int,
    "region": _region,
    "sigmas": _floats,
    "step": _optional_float,
    "tolerance": _optional_float,
    "reading": str.strip,
    "json": _optional_str,
    "csv": _optional_str,
    "quantity": str.strip,
    "rmin": _optional_float,
    "rmax": _optional_float,
    "n": int,
    "sigma": float,
    "table_exponents": _bool,
    "a": _floats,
    "b": _floats,
    "tol": float,
    "out": _optional_str,
    "input": _optional_str,
    "threads": int,
    "cache_dir": str.strip,
    "cache_enabled": _bool,
    "log_level": str.strip,
}


def normalize_key(key: str) -> str:
    return key.strip().lower().replace("-", "_")


def load_config_file(path: str) -> Dict[str, str]:
    """
    Parse a ``key = value`` file.

    Raises:
        ConfigError: unreadable file, malformed line, or unknown key
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}")

    values: Dict[str, str] = {}
    for number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"Expected 'key = value', got '{raw.strip()}'", number)
        key, value = line.split("=", 1)
        key = normalize_key(key)
        if key not in _CONVERTERS:
            raise ConfigError(f"Unknown config key '{key}'", number)
        values[key] = value.strip()
    logger.debug(f"Loaded {len(values)} config values from {path}")
    return values


def build_run_config(command: str, file_values: Optional[Dict[str, str]] = None,
                     flag_values: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Merge file values and explicitly given flags (flags win) into a RunConfig.

    File values are strings and are converted here; flag values may be
    strings or already typed.
    """
    merged: Dict[str, Any] = {}
    for source in (file_values or {}, flag_values or {}):
        for key, value in source.items():
            key = normalize_key(key)
            if key not in _CONVERTERS:
                raise ConfigError(f"Unknown config key '{key}'")
            if value is None:
                continue
            if isinstance(value, str):
                try:
                    value = _CONVERTERS[key](value)
                except ValueError as e:
                    raise ConfigError(f"Invalid value for '{key}': {e}")
            merged[key] = value
    merged["command"] = command
    return RunConfig(**merged)


def load_thread_cap() -> int:
    """Thread cap from SOLITON_LAB_THREADS; 0 when unset (auto)."""
    raw = os.getenv(THREADS_ENV, "").strip()
    if not raw:
        return 0
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got '{raw}'")
    if cap < 0:
        raise ConfigError(f"{THREADS_ENV} must be >= 0, got {cap}")
    return cap


def effective_workers(config: RunConfig) -> int:
    cap = load_thread_cap()
    workers = config.threads or min(8, os.cpu_count() or 1)
    if cap:
        workers = min(workers, cap)
    return max(1, workers)
