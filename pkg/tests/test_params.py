import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from warpflow.errors import PoleError
from warpflow.params import FlowParams, Regime, derive_sigma, regime_of, unified_coefficients


@pytest.mark.parametrize(
    "rho, m, expected",
    [(0.0, 1, 1.0), (0.25, 1, 1.0), (0.0, 2, 0.5)],
)
def test_derive_sigma_examples(rho, m, expected):
    assert derive_sigma(rho, m) == pytest.approx(expected, abs=1e-15)


def test_pole_rejected():
    with pytest.raises(PoleError):
        derive_sigma(0.5, 1)
    with pytest.raises(PoleError):
        derive_sigma(1 / 3 + 1e-13, 2)


def test_near_pole_is_accepted_outside_tolerance():
    assert math.isfinite(derive_sigma(0.5 + 1e-9, 1))


@pytest.mark.parametrize("m", range(1, 11))
def test_sigma_at_rho_zero_is_reciprocal_dimension(m):
    assert derive_sigma(0.0, m) == pytest.approx(1 / m, rel=1e-15)


@given(st.floats(-10, 10).filter(lambda r: abs(2 * r - 1) > 1e-6))
def test_sigma_is_one_for_line_fiber(rho):
    assert derive_sigma(rho, 1) == pytest.approx(1.0, rel=1e-9)


@pytest.mark.parametrize(
    "sigma, regime",
    [
        (-1.0, Regime.SUPERLINEAR),
        (0.0, Regime.LINEAR),
        (0.25, Regime.SUBLINEAR),
        (0.5, Regime.CONSTANT_SOURCE),
        (1.0, Regime.SINGULAR),
    ],
)
def test_regime_labels(sigma, regime):
    assert regime_of(sigma) is regime


def test_regime_rejects_nonfinite():
    with pytest.raises(ValueError):
        regime_of(math.nan)


def test_regime_boundaries_along_rho():
    # m = 2: sigma = (1 - 4 rho) / (2 - 6 rho); zero at rho = 1/4, 1/2 at rho = 0
    assert regime_of(derive_sigma(0.25, 2)) is Regime.LINEAR
    assert regime_of(derive_sigma(0.0, 2)) is Regime.CONSTANT_SOURCE
    assert regime_of(derive_sigma(0.2, 2)) is Regime.SUBLINEAR
    assert regime_of(derive_sigma(0.3, 2)) is Regime.SUPERLINEAR
    assert regime_of(derive_sigma(-0.1, 2)) is Regime.SINGULAR


def _exact_regime(rho, m):
    s = (1 - 2 * m * rho) / (m - rho * m * m - m * rho)
    if s < 0:
        return Regime.SUPERLINEAR, s
    if s == 0:
        return Regime.LINEAR, s
    if s < Fraction(1, 2):
        return Regime.SUBLINEAR, s
    if s == Fraction(1, 2):
        return Regime.CONSTANT_SOURCE, s
    return Regime.SINGULAR, s


@given(st.fractions(-2, 2, max_denominator=50), st.integers(1, 6))
def test_regime_matches_exact_rational_sigma(rho, m):
    if (m + 1) * rho == 1:
        return
    expected, s = _exact_regime(rho, m)
    if s not in (0, Fraction(1, 2)) and min(abs(s), abs(s - Fraction(1, 2))) < 1e-9:
        return
    if s in (0, Fraction(1, 2)) and float(rho) != rho:
        return  # boundary values are only exact for dyadic rho
    assert regime_of(derive_sigma(float(rho), m)) is expected


def test_alpha_is_one_minus_two_sigma():
    p = FlowParams(0.1, 3, 2, 1.0)
    assert p.alpha_exp == 1 - 2 * p.sigma
    assert p.a_coeff == pytest.approx(0.6)


def test_unified_coefficients_trivial():
    assert tuple(unified_coefficients(FlowParams(0.0, 2, 1, 0.0), 0.0)) == (0.0, 0.0, 0.0, 0.0)


def test_unified_coefficients_hyperbolic_plane():
    a, b, c, alpha = unified_coefficients(FlowParams(1 / 3, 1, 2, 0.0), -2.0)
    assert (a, b, c, alpha) == pytest.approx((2 / 3, -2 / 3, 0.0, -1.0), abs=1e-15)


def test_unified_coefficients_array_curvature():
    s = np.array([-2.0, 0.0, 4.0])
    _, b, _, _ = unified_coefficients(FlowParams(0.25, 1, 2, 0.0), s)
    np.testing.assert_allclose(b, 0.25 * s)


@given(st.integers(1, 10), st.floats(-5, 5))
def test_ricci_flow_flat_fiber_has_no_sources(m, s_base):
    a, b, c, _ = unified_coefficients(FlowParams(0.0, m, 1, 0.0), s_base)
    assert a == 0 and b == 0 and c == 0


def test_diffusion_coefficient_combination():
    # Delta_phi u - a Delta u with constant phi has coefficient 1 - 2 m rho
    p = FlowParams(0.1, 2, 1, 0.0)
    a, *_ = unified_coefficients(p)
    assert 1 - a == pytest.approx(1 - 2 * p.m * p.rho)


def test_sigma_zero_has_no_change_of_variables():
    with pytest.raises(PoleError):
        unified_coefficients(FlowParams(0.25, 2, 1, 0.0))


def test_bad_dimensions():
    with pytest.raises(ValueError):
        FlowParams(0.0, 0)
    with pytest.raises(ValueError):
        derive_sigma(0.0, 1.5)
