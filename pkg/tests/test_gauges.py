"""Gauge evaluation, domains, and the spec strings that name them."""

import numpy as np
import pytest

from macrodim.errors import GaugeDomainError
from macrodim.gauges import PowerGauge, SqrtLogGauge, make_gauge


def test_power_gauge_values():
    assert PowerGauge(0.5)(0.5) == pytest.approx(2.0**-0.5, abs=1e-15)
    assert PowerGauge(0.5)(3.0 / 16.0) == pytest.approx(0.4330127018922193, abs=1e-15)
    assert PowerGauge(1.0)(0.375) == 0.375
    assert PowerGauge(0.7)(1.0 / 8.0) == pytest.approx(2.0**-2.1, rel=1e-14)


def test_power_gauge_allows_overrun_lengths():
    # blocks rounded past the shell edge produce arguments above 1
    assert PowerGauge(0.5)(1.5) == pytest.approx(np.sqrt(1.5))


def test_power_gauge_domain():
    with pytest.raises(GaugeDomainError):
        PowerGauge(0.0)
    with pytest.raises(GaugeDomainError):
        PowerGauge(1.1)
    with pytest.raises(GaugeDomainError):
        PowerGauge(0.5)(0.0)
    with pytest.raises(GaugeDomainError):
        PowerGauge(0.5)(-0.25)


def test_power_gauge_log_space_branch():
    # tiny arguments switch to log-space evaluation but stay consistent
    assert PowerGauge(0.5)(2.0**-600) == pytest.approx(2.0**-300, rel=1e-12)


def test_power_gauge_vectorized():
    g = PowerGauge(0.5)
    out = g(np.array([0.25, 1.0]))
    assert isinstance(out, np.ndarray)
    assert out == pytest.approx([0.5, 1.0])
    assert isinstance(g(0.25), float)


def test_power_gauge_monotone_flag_and_samples():
    g = PowerGauge(0.3)
    assert g.monotone
    xs = np.linspace(1e-4, 1.0, 200)
    assert np.all(np.diff(g(xs)) > 0)


def test_sqrtlog_values():
    g = SqrtLogGauge()
    assert g(0.5) == pytest.approx(np.sqrt(0.5), abs=1e-15)
    assert g(0.25) == pytest.approx(np.sqrt(0.5), abs=1e-15)  # x log2(1/x) ties
    assert g(1.0 / 16.0) == pytest.approx(0.5, abs=1e-15)     # sqrt(4/16)


def test_sqrtlog_domain():
    g = SqrtLogGauge()
    with pytest.raises(GaugeDomainError):
        g(0.0)
    with pytest.raises(GaugeDomainError):
        g(0.51)
    g(0.5 * (1 + 1e-13))  # right-edge jitter tolerated


def test_sqrtlog_peaks_inside_domain():
    # increases up to 1/e, then decreases to the endpoint; this is why the
    # covering DP must consider padding a group out to the full shell
    g = SqrtLogGauge()
    assert not g.monotone
    assert g.max_arg == 0.5
    peak = 1.0 / np.e
    up = np.linspace(1e-4, peak, 100)
    down = np.linspace(peak, 0.5, 100)
    assert np.all(np.diff(g(up)) > 0)
    assert np.all(np.diff(g(down)) < 0)
    assert g(peak) > g(0.5)


def test_make_gauge_specs():
    assert make_gauge("power:0.5") == PowerGauge(0.5)
    assert make_gauge("0.3") == PowerGauge(0.3)
    assert make_gauge(" SQRTLOG ") == SqrtLogGauge()
    assert make_gauge("power:0.5").label == "power:0.5"
    assert make_gauge("sqrtlog").label == "sqrtlog"
    with pytest.raises(GaugeDomainError):
        make_gauge("bogus")
    with pytest.raises(GaugeDomainError):
        make_gauge("power:2")
