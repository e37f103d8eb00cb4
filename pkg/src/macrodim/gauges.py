"""Gauge functions used to price covering intervals.

A gauge maps the normalized length x = |Q| / 2^n of a covering interval Q in
shell n to a nonnegative cost.  Two families are supported:

* ``PowerGauge(rho)``: x**rho for 0 < rho <= 1.
* ``SqrtLogGauge()``: sqrt(x * log2(1/x)) for 0 < x <= 1/2.

The power gauge is nondecreasing everywhere.  The sqrt-log gauge increases on
(0, 1/e] but *decreases* on (1/e, 1/2], so covering routines must consider
padding an interval out to the full shell; see ``covering.py``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GaugeDomainError

# Below this length ratio, x**rho is evaluated in log space.  Unreachable for
# shells up to n = 40 but keeps the gauge total over absurd inputs.
_LOG_SPACE_THRESHOLD = 2.0**-512


@dataclass(frozen=True)
class PowerGauge:
    """Cost x**rho.  Defined for x > 0; values above 1 are allowed so that
    block-rounded covers may overrun a shell edge."""

    rho: float

    # nondecreasing on its whole domain, no upper domain limit
    monotone = True
    max_arg = None

    def __post_init__(self):
        if not 0.0 < self.rho <= 1.0:
            raise GaugeDomainError(f"rho must be in (0, 1], got {self.rho}")

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if np.any(x <= 0.0):
            raise GaugeDomainError("power gauge needs positive lengths")
        if np.any(x < _LOG_SPACE_THRESHOLD):
            out = np.exp2(self.rho * np.log2(x))
        else:
            out = x**self.rho
        return out if out.ndim else float(out)

    @property
    def label(self) -> str:
        return f"power:{self.rho:g}"


@dataclass(frozen=True)
class SqrtLogGauge:
    """Cost sqrt(x * log2(1/x)) for 0 < x <= 1/2."""

    monotone = False
    max_arg = 0.5

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        # tolerate float jitter at the right edge only
        if np.any(x <= 0.0) or np.any(x > 0.5 * (1 + 1e-12)):
            raise GaugeDomainError("sqrt-log gauge needs lengths in (0, 1/2]")
        out = np.sqrt(x * np.log2(1.0 / np.minimum(x, 0.5)))
        return out if out.ndim else float(out)

    @property
    def label(self) -> str:
        return "sqrtlog"


GaugeFn = PowerGauge | SqrtLogGauge


def make_gauge(spec: str) -> GaugeFn:
    """Parse a gauge spec string: ``power:<rho>`` (or bare ``<rho>``) or ``sqrtlog``."""
    spec = spec.strip().lower()
    if spec == "sqrtlog":
        return SqrtLogGauge()
    if spec.startswith("power:"):
        spec = spec[len("power:"):]
    try:
        rho = float(spec)
    except ValueError:
        raise GaugeDomainError(f"unrecognized gauge spec {spec!r}") from None
    return PowerGauge(rho)
