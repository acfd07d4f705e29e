import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from warpflow import ansatz, suites
from warpflow.errors import (
    DeltaViolation,
    DomainError,
    HypothesisViolation,
    NonParabolic,
    UnsupportedModel,
    ValidationError,
)
from warpflow.estimate import (
    CutoffParams,
    EstimateParams,
    RadialModel,
    bound_bracket,
    comparison_check,
    cutoff,
    cutoff_constants,
    evolution_identity_residual,
    evolution_identity_terms,
    gamma_bar,
    log_transform,
    nonlinear_positive_part,
    verify_estimate,
    verify_estimate_scenario,
)
from warpflow.reduced_flow import ScalarTrajectory


def radial(x):
    return np.asarray(x) / np.linalg.norm(x)


# -- parameters -----------------------------------------------------------------


def test_parameter_validation():
    with pytest.raises(ValidationError):
        EstimateParams(p=0.0, q=1.0, delta=0.1, D=1.0)
    with pytest.raises(ValidationError):
        EstimateParams(p=1.0, q=1.0, delta=0.1, D=1.0, R=1.5)
    with pytest.raises(ValidationError):
        EstimateParams(p=1.0, q=1.0, delta=0.1, D=1.0, k1=-1.0)
    with pytest.raises(ValidationError):
        EstimateParams(p=1.0, q=1.0, delta=0.1, D=1.0, T=1.0, t0=0.0, tau=-1.0)
    with pytest.raises(NonParabolic):
        EstimateParams(p=1.0, q=1.0, delta=0.1, D=1.0, a_coeff=1.0)
    with pytest.raises(ValidationError):
        CutoffParams(epsilon=1.0)


def test_windows():
    back = EstimateParams(p=1.0, q=2.0, delta=0.1, D=1.0, T=2.0, t0=1.0)
    assert back.window == (-1.0, 1.0) and back.tau == 1.0
    assert back.elapsed(0.0) == pytest.approx(1.0)
    fwd = EstimateParams(p=1.0, q=2.0, delta=0.1, D=1.0, T=2.0, t0=1.0, mode="forward")
    assert fwd.window == (1.0, 3.0)
    assert fwd.elapsed(1.5) == pytest.approx(1.5)


# -- log transform --------------------------------------------------------------


def test_log_transform_constant():
    h, G = log_transform(np.full(11, 2.0), 1.0, 3.0, 0.1)
    np.testing.assert_array_equal(G, 0.0)
    np.testing.assert_allclose(h, math.log(2.0))


def test_log_transform_gaussian():
    x = np.linspace(-2.0, 2.0, 801)
    h, G = log_transform(np.exp(-(x**2)), 1.0, 1.0, x[1] - x[0])
    np.testing.assert_allclose(h, -(x**2), atol=1e-14)
    np.testing.assert_allclose(G[1:-1], (4 * x**2 / (1 + x**2) ** 2)[1:-1], atol=1e-4)


def test_log_transform_linear_in_p():
    x = np.linspace(0.0, 1.0, 21)
    u = 1 + x
    h1, _ = log_transform(u, 1.0, 5.0, 0.05)
    h2, _ = log_transform(u, 2.0, 5.0, 0.05)
    np.testing.assert_allclose(h2, 2 * h1)


def test_log_transform_metric_scaling():
    x = np.linspace(0.0, 1.0, 21)
    _, g1 = log_transform(1 + x, 1.0, 5.0, 0.05)
    _, g4 = log_transform(1 + x, 1.0, 5.0, 0.05, metric=4.0)
    np.testing.assert_allclose(g4, g1 / 4)


def test_delta_violation():
    with pytest.raises(DeltaViolation):
        log_transform(np.full(5, math.e), 1.0, 1.05, 0.1, delta=0.1)


# -- cut-off --------------------------------------------------------------------


def test_cutoff_examples():
    R, T, t0 = 8.0, 1.0, 0.0
    assert cutoff(0.1 * R, t0, R, t0, t0, T) == (1.0, 0.0, 0.0, 0.0)
    for r in (0.0, 2.0, 5.0, 7.9):
        assert cutoff(r, t0 - T, R, t0, t0, T)[0] == 0.0
    for t in (-1.0, -0.5, 0.0):
        assert cutoff(1.5 * R, t, R, t0, t0, T) == (0.0, 0.0, 0.0, 0.0)


def test_cutoff_derivatives_match_differences():
    R, tau, t0, T = 4.0, -0.2, 0.0, 1.0
    h = 1e-5
    for r, t in [(2.5, -0.5), (3.2, -0.7), (3.9, -0.3)]:
        v, dr, drr, dt = cutoff(r, t, R, tau, t0, T)
        assert dr == pytest.approx((cutoff(r + h, t, R, tau, t0, T)[0] - cutoff(r - h, t, R, tau, t0, T)[0]) / (2 * h), abs=1e-7)
        assert drr == pytest.approx((cutoff(r + h, t, R, tau, t0, T)[1] - cutoff(r - h, t, R, tau, t0, T)[1]) / (2 * h), abs=1e-6)
        assert dt == pytest.approx((cutoff(r, t + h, R, tau, t0, T)[0] - cutoff(r, t - h, R, tau, t0, T)[0]) / (2 * h), abs=1e-7)


@pytest.mark.parametrize("R, tau, t0, T", [(2.0, 0.0, 0.0, 1.0), (4.0, 0.0, 0.0, 1.0), (16.0, -0.5, 1.0, 2.0)])
def test_cutoff_lemma_properties(R, tau, t0, T):
    out = cutoff_constants(R, tau, t0, T)
    assert out["a"] and out["b"] and out["c"] and out["d"]
    assert out["grid"] == (200, 50)
    assert math.isfinite(out["C_time"]) and math.isfinite(out["C_eps"])


def test_cutoff_constants_are_scale_free():
    a = cutoff_constants(4.0, 0.0, 0.0, 1.0)
    b = cutoff_constants(8.0, 0.0, 0.0, 3.0)
    assert a["C_eps"] == pytest.approx(b["C_eps"], rel=1e-12)
    assert a["C_time"] == pytest.approx(b["C_time"], rel=1e-12)


def test_cutoff_constants_regression():
    out = cutoff_constants(4.0, 0.0, 0.0, 1.0)
    assert out["C_time"] == pytest.approx(3.6891, rel=1e-4)
    assert out["C_eps"] == pytest.approx(276.02, rel=1e-4)


# -- Gamma and comparison --------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3, 4])
def test_gamma_flat(n):
    assert gamma_bar(RadialModel("flat", n)) == pytest.approx(n - 1)


@pytest.mark.parametrize("n", [2, 3])
def test_gamma_hyperbolic(n):
    assert gamma_bar(RadialModel("hyperbolic", n)) == pytest.approx((n - 1) / math.tanh(1.0), rel=1e-12)


@pytest.mark.parametrize("n", [2, 3])
def test_gamma_flat_with_radial_drift(n):
    assert gamma_bar(RadialModel("flat", n), radial) == pytest.approx(n - 2, abs=1e-12)


def test_gamma_drift_is_divided_by_abar():
    assert gamma_bar(RadialModel("flat", 3), radial, a_coeff=0.5) == pytest.approx(0.0, abs=1e-12)


def test_gamma_with_directional_drift():
    # phi = x_1 on flat R^2: Delta r - d_r phi = 1 - cos(theta), max 2
    assert gamma_bar(RadialModel("flat", 2), lambda x: np.array([1.0, 0.0])) == pytest.approx(2.0, abs=1e-9)


def test_gamma_unsupported_model():
    with pytest.raises(UnsupportedModel):
        gamma_bar("catalog-slice")
    with pytest.raises(UnsupportedModel):
        RadialModel("spherical", 3)


def test_hyperbolic_geodesics_have_the_right_length():
    model = RadialModel("hyperbolic", 2, scale=2.0)
    for th in (0.3, 1.2, 2.9, -1.0):
        d = np.array([math.cos(th), math.sin(th)])
        x, _ = model.geodesic(d, 1.7)
        assert model.distance(x) == pytest.approx(1.7, rel=1e-10)


def test_comparison_flat():
    for n in (2, 3):
        assert comparison_check(RadialModel("flat", n), k1=0.0, R=6.0) >= 0.0


def test_comparison_hyperbolic():
    n, a = 3, 0.0
    margin = comparison_check(RadialModel("hyperbolic", n), a_coeff=a, k1=(n - 1) * (1 - a), R=8.0)
    assert margin >= 0.0
    assert margin == pytest.approx(14.0, abs=1e-9)


def test_comparison_rejects_understated_bound():
    with pytest.raises(HypothesisViolation):
        comparison_check(RadialModel("flat", 2), k1=-0.1)
    with pytest.raises(HypothesisViolation):
        comparison_check(RadialModel("hyperbolic", 3), k1=1.0, R=4.0)


def test_comparison_with_convex_drift():
    # phi = |x|^2 / 2 on flat R^2 has Hess = I, so k1 = 0 is admissible
    margin = comparison_check(
        RadialModel("flat", 2), phi_grad=lambda x: np.asarray(x), phi_hess=lambda x: np.eye(2), k1=0.0, R=4.0
    )
    assert margin >= 0.0


# -- bracket ----------------------------------------------------------------------


def test_bracket_arithmetic():
    ep = EstimateParams(p=1.0, q=1.0, delta=0.5, D=2.0, R=2.0, T=1.0, t0=0.0)
    br = bound_bracket(ep, 0.0, 1.0)
    assert br.total == pytest.approx(1.5)
    assert br.factor == 1.0


def test_bracket_forward_time_term():
    ep = EstimateParams(p=1.0, q=1.0, delta=0.5, D=2.0, R=2.0, T=1.0, t0=0.0, mode="forward")
    assert bound_bracket(ep, 0.75, 1.0).terms["time"] == pytest.approx(2.0)
    with pytest.raises(DomainError):
        bound_bracket(ep, 1.5, 1.0)


def test_bracket_delta_guard():
    ep = EstimateParams(p=1.0, q=1.0, delta=0.5, D=2.0)
    with pytest.raises(DeltaViolation):
        bound_bracket(ep, 0.0, math.e**0.7)


def test_positive_part_vanishes_for_positive_c():
    # alpha - 1 + p/(q - h) <= 0 everywhere: alpha = 0, p/(q-h) <= 1
    u = np.linspace(0.5, 2.0, 50)
    p, q = 1.0, 2.0 + math.log(2.0)
    assert np.all(0.0 - 1 + p / (q - p * np.log(u)) <= 0)
    assert nonlinear_positive_part(3.0, 0.0, p, q, u) == 0.0
    ep = EstimateParams(p=p, q=q, delta=0.1, D=3.0)
    assert bound_bracket(ep, 0.0, 1.0, c=3.0, alpha=0.0, u_range=(0.5, 2.0)).terms["nonlinear"] == 0.0


def test_positive_part_vanishes_for_negative_c():
    u = np.linspace(0.5, 2.0, 50)
    p, q = 1.0, 1.0 + math.log(2.0)
    assert np.all(2.0 - 1 + p / (q - p * np.log(u)) > 0)
    assert nonlinear_positive_part(-1.0, 2.0, p, q, u) == 0.0
    ep = EstimateParams(p=p, q=q, delta=0.1, D=3.0)
    assert bound_bracket(ep, 0.0, 1.0, c=-1.0, alpha=2.0, u_range=(0.5, 2.0)).terms["nonlinear"] == 0.0


def test_positive_part_present_otherwise():
    assert nonlinear_positive_part(1.0, 2.0, 1.0, 2.0, [1.0]) == pytest.approx(1.5)


@settings(max_examples=200, deadline=None)
@given(
    st.floats(-5, 5),
    st.floats(-3, 3),
    st.floats(0.1, 3),
    st.lists(st.floats(0.2, 5.0), min_size=1, max_size=20),
)
def test_positive_part_sign_rule(c, alpha, p, u_values):
    q = p * math.log(5.0) + 0.5
    u = np.array(u_values)
    s = alpha - 1 + p / (q - p * np.log(u))
    val = nonlinear_positive_part(c, alpha, p, q, u)
    if np.all(np.sign(c) * s <= 0):
        assert val == 0.0
    else:
        assert val > 0.0


@settings(max_examples=100, deadline=None)
@given(st.floats(2.0, 50.0), st.floats(1.0, 10.0), st.floats(0.0, 5.0))
def test_bracket_monotone_in_R(R, factor, gamma):
    ep1 = EstimateParams(p=1.0, q=2.0, delta=0.1, D=2.0, R=R)
    ep2 = EstimateParams(p=1.0, q=2.0, delta=0.1, D=2.0, R=R * factor)
    b1 = bound_bracket(ep1, -0.5, 1.0, gamma=gamma)
    b2 = bound_bracket(ep2, -0.5, 1.0, gamma=gamma)
    assert b2.total <= b1.total + 1e-12


# -- empirical estimate -------------------------------------------------------------


def test_constant_solution_has_zero_ratio():
    x = np.linspace(0.0, 4.0, 41)
    ts = np.linspace(-1.0, 0.0, 5)
    traj = ScalarTrajectory(x, ts, np.full((5, 41), 2.0), np.ones((5, 41)), np.zeros(41))
    ep = EstimateParams(p=1.0, q=2.0, delta=0.1, D=3.0, R=4.0)
    assert verify_estimate(traj, ep, 2.0).sup_ratio == 0.0


def test_heat_estimate_baseline():
    rep = verify_estimate(suites.heat_estimate_trajectory(201), suites.heat_estimate_params(4.0), math.pi / 2)
    assert rep.sup_ratio == pytest.approx(0.1912275, rel=1e-5)
    assert rep.gamma == 0.0


def test_heat_estimate_varies_mildly_with_R():
    traj = suites.heat_estimate_trajectory(201)
    ratios = [verify_estimate(traj, suites.heat_estimate_params(R), math.pi / 2).sup_ratio for R in (4, 8, 16)]
    assert ratios == sorted(ratios)
    assert (ratios[-1] - ratios[0]) / ratios[-1] < 0.25


def test_heat_estimate_requires_bound_D():
    ep = EstimateParams(p=1.0, q=1 + math.log(2.5), delta=1.0, D=1.5, R=4.0, T=0.5, t0=0.5)
    with pytest.raises(HypothesisViolation):
        verify_estimate(suites.heat_estimate_trajectory(101), ep, math.pi / 2)


def test_estimate_checks_drift_convexity():
    x = np.linspace(-2.0, 2.0, 81)
    ts = np.linspace(-1.0, 0.0, 5)
    u = np.full((5, 81), 2.0)
    traj = ScalarTrajectory(x, ts, u, np.ones_like(u), -(x**2))
    ep = EstimateParams(p=1.0, q=2.0, delta=0.1, D=3.0, R=4.0, k1=1.0)
    with pytest.raises(HypothesisViolation):
        verify_estimate(traj, ep, 0.0)


def test_hyperbolic_immortal_baseline():
    sc = ansatz.catalog("hyperbolic-immortal")
    ratios = []
    for R in (4.0, 8.0, 16.0):
        rep = verify_estimate_scenario(sc, suites.hyperbolic_estimate_params(sc, R), suites.HYPERBOLIC_WINDOW, npts=21)
        assert math.isfinite(rep.sup_ratio)
        ratios.append(rep.sup_ratio)
    assert ratios[0] == pytest.approx(0.185876, rel=1e-5)
    assert (max(ratios) - min(ratios)) / max(ratios) < 0.25


def test_hyperbolic_estimate_rejects_small_k1():
    sc = ansatz.catalog("hyperbolic-immortal")
    ep = suites.hyperbolic_estimate_params(sc, 4.0)
    weak = EstimateParams(**{**ep.__dict__, "k1": 0.5})
    with pytest.raises(HypothesisViolation):
        verify_estimate_scenario(sc, weak, suites.HYPERBOLIC_WINDOW, npts=11)


def test_scenario_estimate_needs_hyperbolic_base():
    sc = ansatz.catalog("cosh-einstein")
    ep = EstimateParams(p=1.0, q=3.0, delta=0.1, D=10.0)
    with pytest.raises(UnsupportedModel):
        verify_estimate_scenario(sc, ep, suites.HYPERBOLIC_WINDOW)


# -- evolution identity --------------------------------------------------------------


def _orders(name):
    res = []
    for n in (101, 201, 401):
        traj, ep, kw = suites.identity_case(name, n)
        res.append(evolution_identity_residual(traj, ep, points=suites.identity_points(traj), **kw))
    return [math.log2(a / b) for a, b in zip(res, res[1:])]


def test_identity_constant_field():
    x = np.linspace(0.0, 1.0, 21)
    ts = np.array([0.0, 0.1, 0.2])
    traj = ScalarTrajectory(x, ts, np.full((3, 21), 1.5), np.ones((3, 21)), np.zeros(21))
    ep = EstimateParams(p=1.0, q=2.0, delta=0.1, D=2.0)
    assert evolution_identity_residual(traj, ep) == 0.0
    assert evolution_identity_residual(traj, ep, b=0.3, c=2.0, alpha=0.5) == 0.0


@pytest.mark.parametrize("name", sorted(suites.IDENTITY_SUITES))
def test_identity_converges(name):
    assert min(_orders(name)) >= 1.8


def test_identity_with_variable_potential():
    # u = exp(x^2/2 + t) solves u_t = u'' - x^2 u
    ep = EstimateParams(p=1.0, q=4.0, delta=0.1, D=20.0)
    res, res_no_b = [], []
    for n in (101, 201, 401):
        x = np.linspace(-1.5, 1.5, n)
        ts = 1.0 + 0.5 * (x[1] - x[0]) * np.arange(-1, 2)
        X, T = np.meshgrid(x, ts)
        traj = ScalarTrajectory(x, ts, np.exp(X**2 / 2 + T), np.ones_like(X), 0 * x)
        pts = suites.identity_points(traj)
        res.append(evolution_identity_residual(traj, ep, b=lambda x, t: -(x**2) + 0 * t, points=pts))
        res_no_b.append(evolution_identity_residual(traj, ep, points=pts))
    assert min(math.log2(a / b) for a, b in zip(res, res[1:])) >= 1.8
    assert min(res_no_b) > 0.1


def test_identity_terms_are_reported():
    traj, ep, kw = suites.identity_case("cosh", 101)
    lhs, terms = evolution_identity_terms(traj, ep, **kw)
    assert set(terms) == {"square", "grad_G_gap", "grad_G_p", "metric", "grad_b", "b", "nonlinear", "quartic"}
    assert np.max(np.abs(terms["nonlinear"])) > 0
    assert np.max(np.abs(terms["metric"])) > 0


def test_identity_needs_uniform_snapshots():
    x = np.linspace(0.0, 1.0, 21)
    traj = ScalarTrajectory(x, np.array([0.0, 0.1, 0.3]), np.ones((3, 21)), np.ones((3, 21)), np.zeros(21))
    with pytest.raises(DomainError):
        evolution_identity_residual(traj, EstimateParams(p=1.0, q=2.0, delta=0.1, D=2.0))
