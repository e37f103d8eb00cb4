"""Small input-validation helpers shared by the estimators and the CLI."""

from __future__ import annotations

import numpy as np

from .errors import ConfigError


def check_rho_grid(rho_grid) -> np.ndarray:
    """Validate a strictly increasing grid of rho values in (0, 1]."""
    grid = np.asarray(list(rho_grid), dtype=np.float64)
    if grid.size == 0:
        raise ConfigError("rho grid is empty")
    if np.any(grid <= 0.0) or np.any(grid > 1.0):
        raise ConfigError(f"rho values must lie in (0, 1], got {grid.tolist()}")
    if np.any(np.diff(grid) <= 0.0):
        raise ConfigError("rho grid must be strictly increasing")
    return grid


def check_series(ns, *columns) -> None:
    """All columns must be 1-D, the same length as ns, with ns increasing."""
    ns = np.asarray(ns)
    if ns.ndim != 1 or ns.size == 0:
        raise ConfigError("shell index array must be 1-D and nonempty")
    if np.any(np.diff(ns) <= 0):
        raise ConfigError("shell indices must be strictly increasing")
    for col in columns:
        col = np.asarray(col)
        if col.shape != ns.shape:
            raise ConfigError(
                f"series length {col.shape} does not match shells {ns.shape}"
            )


def check_probability(value, name) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"{name} must be in [0, 1], got {value}")
    return value


def check_positive_int(value, name, minimum=1) -> int:
    value = int(value)
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return value
