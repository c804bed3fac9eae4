"""Shipped tolerances and environment overrides for the command line tools."""
from __future__ import annotations

import json
import os
from pathlib import Path

DEFAULT_TOLERANCES = {
    "traceFormula": 1e-8,  # |lhs - rhs| / (1 + |lhs|)
    "moment": 1e-9,  # relative
    "algebra": 1e-10,  # relative to sup|phi| * prod ||x_j||_F
    "remainderRoutes": 1e-8,  # trace norm, relative to 1 + ||Delta||_1
    "finiteDifference": 1e-5,  # max entry, h = 1e-3
    "richardsonOrder": 0.25,  # |observed order - 2|
    "identities": 1e-7,
    "kernel": 1e-8,
    "homogeneity": 1e-6,  # relative spread of scaled ratios
    "mass": 1e-8,
}

ENV_THREADS = "SPECSHIFT_THREADS"
ENV_TOL_FILE = "SPECSHIFT_TOL_FILE"


class ConfigError(ValueError):
    pass


def load_tolerances(path: str | Path | None = None) -> dict:
    """Defaults overlaid with a JSON tolerance file (``path`` or ``$SPECSHIFT_TOL_FILE``)."""
    path = path or os.environ.get(ENV_TOL_FILE)
    tol = dict(DEFAULT_TOLERANCES)
    if not path:
        return tol
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read tolerance file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"tolerance file {path}: malformed JSON at line {exc.lineno} column {exc.colno}") from None
    if not isinstance(data, dict):
        raise ConfigError("tolerance file must hold a JSON object")
    for key, value in data.items():
        if key not in tol:
            raise ConfigError(f"unknown tolerance {key!r}")
        if not isinstance(value, (int, float)) or value < 0:
            raise ConfigError(f"tolerance {key!r} must be a non-negative number")
        tol[key] = float(value)
    return tol


def thread_count(flag: int | None = None) -> int:
    if flag is not None:
        return max(1, int(flag))
    env = os.environ.get(ENV_THREADS)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{ENV_THREADS} must be an integer, got {env!r}") from None
    return 1
