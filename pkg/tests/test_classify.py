import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

import oracles
from warpflow import ansatz
from warpflow.classify import (
    EXPONENT_TOL,
    Classification,
    TypeLabel,
    TypeSample,
    classify,
    classify_scenario,
    default_times,
    kmax_profile,
    rm_norm,
    scenario_horizon,
    sectional_curvatures,
)
from warpflow.errors import DomainError, IncompleteScenario, InsufficientSamples

INF_T = np.geomspace(1.0, 1e3, 24)
FIN_T = 1.0 - np.geomspace(0.999, 1e-4, 24)


def samples(ts, fn):
    return [TypeSample(float(t), float(fn(t))) for t in ts]


# -- |Rm| ---------------------------------------------------------------------------


@pytest.mark.parametrize("name", ["hyperbolic-immortal", "hyperbolic-general", "halfspace-product", "cosh-einstein", "exp-incomplete"])
def test_rm_norm_matches_brute_force(name):
    sc = ansatz.catalog(name)
    lo, hi = sc.sample_box["xi"]
    for xi in np.linspace(lo, hi, 3):
        x = sc.point(xi)
        z = np.concatenate([x, np.zeros(sc.m - 1), [1.0]])
        expected = oracles.rm_norm(oracles.scenario_metric(sc, 0.0), z)
        got = rm_norm(sc.profiles, sc.n, sc.m, sc.fiber_coeff, xi)
        assert got == pytest.approx(expected, rel=1e-5)


def test_constant_curvature_norms():
    # hyperbolic 3-space has |Rm|^2 = 12; the immortal flow has curvatures (-1, -1, +1), same norm
    assert kmax_profile(ansatz.catalog("hyperbolic-immortal"), [0.0])[0].kmax == pytest.approx(math.sqrt(12))
    assert kmax_profile(ansatz.catalog("cosh-einstein"), [0.0])[0].kmax == pytest.approx(math.sqrt(12))


@pytest.mark.parametrize("name", ["hyperbolic-immortal", "hyperbolic-general", "cosh-einstein"])
def test_signed_sectional_curvatures(name):
    # |Rm| cannot see signs, so compare plane by plane: base (if n > 1), axis-fiber, perp-fiber
    sc = ansatz.catalog(name)
    n, m = sc.n, sc.m
    xi = 1.3
    z = np.concatenate([sc.point(xi), np.zeros(m - 1), [1.0]])
    g = oracles.scenario_metric(sc, 0.0)
    e = np.eye(n + m)
    axis = int(np.argmax(sc.frame.axis))
    planes = {"axis-fiber": (e[axis], e[n])}
    if n > 1:
        planes["perp-fiber"] = (e[0], e[n])
        planes["base"] = (e[0], e[axis])
    if m > 1:
        planes["fiber"] = (e[n], e[n + 1])
    listed = sectional_curvatures(sc.profiles, n, m, sc.fiber_coeff, xi)
    assert sum(c for _, c in listed) == (n + m) * (n + m - 1) // 2
    values = [k for k, _ in listed]
    for X, Y in planes.values():
        k = oracles.sectional(g, z, X, Y)
        assert min(abs(k - v) for v in values) < 1e-5


def test_immortal_has_a_positive_mixed_plane():
    sc = ansatz.catalog("hyperbolic-immortal")
    g = oracles.scenario_metric(sc, 0.0)
    z = np.array([0.0, 1.2, 1.0])
    e = np.eye(3)
    assert oracles.sectional(g, z, e[0], e[2]) == pytest.approx(1.0, abs=1e-5)
    assert oracles.sectional(g, z, e[1], e[2]) == pytest.approx(-1.0, abs=1e-5)
    assert oracles.sectional(g, z, e[0], e[1]) == pytest.approx(-1.0, abs=1e-5)


# -- K_max profiles ------------------------------------------------------------------


def test_cosh_profile_follows_homothety():
    sc = ansatz.catalog("cosh-einstein")
    prof = kmax_profile(sc, [0.0, 0.5, 2.0])
    k0 = prof[0].kmax
    for s in prof:
        assert s.kmax == pytest.approx(k0 / (1 + 4 * s.t), rel=1e-14)
    # the homothety shortcut agrees with slice-by-slice evaluation
    sl = max(rm_norm(sc.profiles_at(2.0), 1, 2, sc.fiber_coeff, xi) for xi in np.linspace(-2, 2, 41))
    assert sl == pytest.approx(prof[-1].kmax, rel=1e-12)


def test_static_profile_is_constant():
    prof = kmax_profile(ansatz.catalog("cosh-static"), [0.0, 1.0, 100.0])
    assert prof[0].kmax == prof[1].kmax == prof[2].kmax > 0


def test_immortal_profile_positive_and_decreasing():
    ks = [s.kmax for s in kmax_profile(ansatz.catalog("hyperbolic-immortal"), [0.0, 0.5, 1.0, 5.0])]
    assert all(k > 0 for k in ks)
    assert all(a > b for a, b in zip(ks, ks[1:]))


def test_profile_guards():
    with pytest.raises(IncompleteScenario):
        kmax_profile(ansatz.catalog("exp-incomplete"), [0.0])
    with pytest.raises(DomainError):
        kmax_profile(ansatz.catalog("hyperbolic-ancient"), [0.3])


# -- classification -----------------------------------------------------------------


def test_type_i_blowup():
    res = classify(1.0, samples(FIN_T, lambda t: 1 / (1 - t)))
    assert res.label is TypeLabel.TYPE_I
    assert res.sup_stat == pytest.approx(1.0)


def test_type_iia_blowup():
    assert classify(1.0, samples(FIN_T, lambda t: 1 / (1 - t) ** 2)).label is TypeLabel.TYPE_IIA


def test_type_iii_decay():
    assert classify(math.inf, samples(INF_T, lambda t: 3.0 / (1 + 4 * t))).label is TypeLabel.TYPE_III


def test_type_iib_constant():
    res = classify(math.inf, samples(INF_T, lambda t: 2.0))
    assert res.label is TypeLabel.TYPE_IIB
    assert res.exponent == pytest.approx(1.0)


def test_flat_solution():
    assert classify(math.inf, samples(INF_T, lambda t: 0.0)).label is TypeLabel.TYPE_III


def test_noisy_profile_is_undetermined():
    rng = np.random.default_rng(3)
    res = classify(math.inf, samples(INF_T, lambda t: math.exp(rng.normal(0, 2.0)) / t))
    assert res.label is TypeLabel.UNDETERMINED


def test_insufficient_samples():
    with pytest.raises(InsufficientSamples):
        classify(math.inf, samples(INF_T[:5], lambda t: 1.0))
    with pytest.raises(InsufficientSamples):
        classify(math.inf, samples(np.linspace(1.0, 10.0, 12), lambda t: 1.0))
    with pytest.raises(InsufficientSamples):
        classify(1.0, samples(np.linspace(0.0, 0.9, 12), lambda t: 1.0))
    with pytest.raises(InsufficientSamples):
        classify(math.inf, samples(INF_T[::-1], lambda t: 1.0))


def test_label_consistent_with_horizon():
    fin = classify(1.0, samples(FIN_T, lambda t: 1 / (1 - t)))
    inf = classify(math.inf, samples(INF_T, lambda t: 1 / t))
    assert fin.finite_horizon and fin.label in (TypeLabel.TYPE_I, TypeLabel.TYPE_IIA)
    assert not inf.finite_horizon and inf.label in (TypeLabel.TYPE_III, TypeLabel.TYPE_IIB)
    assert isinstance(fin, Classification)


@settings(max_examples=100, deadline=None)
@given(st.floats(-3, 3), st.floats(1e-3, 1e3), st.floats(0.1, 10))
def test_label_invariant_under_scaling_infinite(beta, lam, k0):
    assume(abs(beta - EXPONENT_TOL) > 1e-6)  # the threshold itself is decided by rounding
    base = samples(INF_T, lambda t: k0 * t ** (beta - 1))
    scaled = [TypeSample(s.t, lam * s.kmax) for s in base]
    a, b = classify(math.inf, base), classify(math.inf, scaled)
    assert a.label is b.label
    assert a.exponent == pytest.approx(b.exponent, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.5, 3), st.floats(1e-3, 1e3))
def test_label_invariant_under_scaling_finite(gamma, lam):
    assume(abs(gamma - 1 - EXPONENT_TOL) > 1e-6)
    base = samples(FIN_T, lambda t: (1 - t) ** -gamma)
    scaled = [TypeSample(s.t, lam * s.kmax) for s in base]
    assert classify(1.0, base).label is classify(1.0, scaled).label


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([-1.0, 0.0, 0.5, 1.0]), st.floats(0.0, 50.0))
def test_time_shift_robustness(beta, shift):
    base = samples(INF_T, lambda t: t ** (beta - 1))
    shifted = [TypeSample(s.t + shift, s.kmax) for s in base]
    ts = np.array([s.t for s in shifted])
    if ts[-1] < 100 * ts[0]:
        return
    assert classify(math.inf, shifted).label is classify(math.inf, base).label


# -- catalog -----------------------------------------------------------------------------


@pytest.mark.parametrize("name", [n for n in ansatz.catalog_names() if ansatz.catalog(n).complete])
def test_catalog_labels(name):
    sc = ansatz.catalog(name)
    assert classify_scenario(sc).label.value == sc.expected_class


def test_cosh_family_types():
    assert classify_scenario(ansatz.catalog("cosh-einstein")).label is TypeLabel.TYPE_III
    assert classify_scenario(ansatz.catalog("cosh-static")).label is TypeLabel.TYPE_IIB


def test_default_times():
    sc = ansatz.catalog("hyperbolic-ancient")
    ts = default_times(sc)
    T = scenario_horizon(sc)
    assert T == pytest.approx(0.25)
    assert np.all(ts < T) and (T - ts[-1]) <= 0.01 * (T - ts[0])
    assert default_times(ansatz.catalog("cosh-einstein"))[-1] == pytest.approx(1e3)
