import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinfront.errors import ConfigurationError, JunctionPointError
from spinfront.transition_profile import (
    ProfileParams,
    band_bound,
    band_edge,
    eta,
    eta_d1,
    eta_d2,
    eta_d3,
)

PP = ProfileParams(0.2, 0.5)
D = PP.delta


@pytest.mark.parametrize("delta,t_star", [(0.0, 0.5), (-0.1, 0.5), (2 * math.sqrt(3.0), 0.5),
                                          (0.2, 0.0), (0.2, -1.0)])
def test_params_rejected(delta, t_star):
    with pytest.raises(ConfigurationError):
        ProfileParams(delta, t_star)


def test_junction_values():
    assert eta(PP, D / 4) == pytest.approx(-5 * D / 8, abs=1e-15)
    assert eta(PP, D) == pytest.approx(0.0, abs=1e-15)
    assert eta(PP, D / 2) == pytest.approx(-D / 2, abs=1e-15)


def _quartic(z, d):
    return -32 * z ** 4 / d ** 3 + 48 * z ** 3 / d ** 2 - 24 * z ** 2 / d + 5 * z - d


def test_quartic_meets_both_branches():
    assert _quartic(D / 4, D) == pytest.approx(-5 * D / 8, abs=1e-15)
    assert _quartic(D / 2, D) == pytest.approx(-D / 2, abs=1e-15)


def test_first_derivative_examples():
    assert eta_d1(PP, D / 2) == pytest.approx(1.0, abs=1e-14)
    assert eta_d1(PP, 0.0) == 0.0


def test_second_derivative_peak():
    assert eta_d2(PP, 3 * D / 8) == pytest.approx(6 / D, rel=1e-12)


def test_third_derivative_sign():
    z = np.linspace(3 * D / 8, D / 2, 52)[1:-1]
    assert np.all(eta_d3(PP, z) < 0)
    z = np.linspace(D / 4, 3 * D / 8, 52)[1:-1]
    assert np.all(eta_d3(PP, z) > 0)


@pytest.mark.parametrize("z", [D / 4, D / 2])
def test_third_derivative_junction_raises(z):
    with pytest.raises(JunctionPointError):
        eta_d3(PP, z)


def test_derivatives_match_finite_differences():
    z = np.linspace(-0.1, 0.5, 301) + 1e-4  # keep stencils off the junctions
    h = 1e-6
    assert eta_d1(PP, z) == pytest.approx((eta(PP, z + h) - eta(PP, z - h)) / (2 * h), abs=1e-6)
    assert eta_d2(PP, z) == pytest.approx((eta_d1(PP, z + h) - eta_d1(PP, z - h)) / (2 * h),
                                          abs=1e-5)


@pytest.mark.parametrize("f", [eta, eta_d1, eta_d2])
@pytest.mark.parametrize("z", [D / 4, D / 2])
def test_c2_junctions(f, z):
    lo, hi = np.nextafter(z, -1.0), np.nextafter(z, 1.0)
    assert abs(f(PP, hi) - f(PP, lo)) <= 1e-12 / D ** 2


def test_sweep_bounds():
    z = np.linspace(-D, 3 * D, 10_000)
    d1, d2 = eta_d1(PP, z), eta_d2(PP, z)
    assert d1.min() >= 0 and d1.max() <= 1
    assert d2.min() >= 0 and d2.max() <= 6 / D * (1 + 1e-12)
    assert np.all(np.diff(eta(PP, z)) >= 0)


def test_branches_exact():
    z = np.array([D / 2, D, 3 * D])
    assert np.array_equal(eta(PP, z), z - D)
    assert np.all(eta(PP, np.array([-5.0, 0.0, D / 4])) == -0.625 * D)


def test_band():
    edge = band_edge(PP)
    expect = 3 * D / 8 + D / 8 * math.sqrt(1 - D ** 2 / 12)
    assert edge == pytest.approx(expect, rel=1e-15)
    a = band_bound(PP)
    assert 0 < a < 1
    z = np.linspace(D / 4, edge, 2001)[1:]
    s = eta_d1(PP, z)
    assert np.all(s > 0) and np.all(s <= a * (1 + 1e-14))


def test_drift_rate():
    assert PP.drift_rate == pytest.approx(0.1)


def test_scalar_returns_float():
    assert isinstance(eta(PP, 0.3), float)


@given(delta=st.floats(0.01, 1.0), z=st.floats(-2.0, 2.0))
def test_derivative_bounds_property(delta, z):
    pp = ProfileParams(delta, 0.5)
    assert 0.0 <= eta_d1(pp, z) <= 1.0
    assert 0.0 <= eta_d2(pp, z) <= 6 / delta * (1 + 1e-12)
