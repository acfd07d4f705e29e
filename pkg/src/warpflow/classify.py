"""Hamilton-type labels for maximal solutions from curvature-scale samples.

``K_max(t)`` is the sup-norm of the full curvature tensor of the warped
metric. For catalog scenarios it is evaluated from sectional curvatures in
the orthonormal frame adapted to the ansatz axis, where the curvature
operator is diagonal:

* base planes from the Schouten tensor of the conformally flat base;
* mixed planes ``-Hess f(e, e) / f``;
* fiber planes ``(kappa/(m-1) - |grad f|^2) / f^2`` for a space-form fiber
  with ``Ric_F = kappa g_F``.

The sup over space is taken over the scenario's sample window.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, IncompleteScenario, InsufficientSamples

EXPONENT_TOL = 0.1
FIT_RMS_TOL = 0.25
MIN_SAMPLES = 8


class TypeLabel(enum.Enum):
    TYPE_I = "TypeI"
    TYPE_IIA = "TypeIIa"
    TYPE_IIB = "TypeIIb"
    TYPE_III = "TypeIII"
    UNDETERMINED = "Undetermined"


class TypeSample(NamedTuple):
    t: float
    kmax: float


@dataclass(frozen=True)
class Classification:
    """Label plus the evidence behind it.

    ``exponent`` is the fitted log-log slope of ``(T-t) K`` against ``T-t``
    (finite horizon) or of ``t K`` against ``t`` (infinite horizon);
    ``sup_stat`` is the sampled sup of that product.
    """

    label: TypeLabel
    exponent: float
    sup_stat: float
    horizon: float
    fit_rms: float = 0.0

    @property
    def finite_horizon(self):
        return math.isfinite(self.horizon)


def sectional_curvatures(profiles, n, m, kappa, xi):
    """Sectional curvatures and plane multiplicities at ``xi``.

    Returns a list of ``(K, count)`` pairs for the base, mixed and fiber
    planes of ``mu^-2 <,> + f^2 g_F``.
    """
    mu, mu1, mu2 = (float(v) for v in profiles.mu.derivs(np.asarray(xi, dtype=float)))
    f, f1, f2 = (float(v) for v in profiles.f.derivs(np.asarray(xi, dtype=float)))
    out = []
    if n >= 2:
        ric_axis = (n - 2) * mu * mu2 + mu * mu2 - (n - 1) * mu1**2
        ric_perp = mu * mu2 - (n - 1) * mu1**2
        scal = (n - 1) * (2 * mu * mu2 - n * mu1**2)
        if n == 2:
            out.append((scal / 2, 1))
        else:
            shift = scal / (2 * (n - 1))
            p_axis = (ric_axis - shift) / (n - 2)
            p_perp = (ric_perp - shift) / (n - 2)
            out.append((p_axis + p_perp, n - 1))
            out.append((2 * p_perp, (n - 1) * (n - 2) // 2))
    out.append((-(mu**2) * (f2 + mu1 * f1 / mu) / f, m))
    if n >= 2:
        out.append((mu * mu1 * f1 / f, (n - 1) * m))
    if m >= 2:
        out.append(((kappa / (m - 1) - mu**2 * f1**2) / f**2, m * (m - 1) // 2))
    return out


def rm_norm(profiles, n, m, kappa, xi):
    """``|Rm|`` at ``xi`` (each plane contributes four tensor components)."""
    total = sum(count * k * k for k, count in sectional_curvatures(profiles, n, m, kappa, xi))
    return math.sqrt(4 * total)


def kmax_profile(scenario, t_samples, xi_samples=None, n_xi=41):
    """``[TypeSample(t, K_max(t))]`` for a catalog scenario.

    Homothetic scenarios use ``K_max(t) = K_max(0) / a(t)``; the others are
    evaluated slice by slice. ``xi_samples`` defaults to ``n_xi`` points of
    the scenario's sample window.
    """
    where = "classify.kmax_profile"
    if not scenario.complete:
        raise IncompleteScenario(f"{scenario.name} is not complete", where)
    ts = np.asarray(t_samples, dtype=float)
    for t in ts:
        if not scenario.in_time_domain(t):
            raise DomainError(f"t={t:g} outside {scenario.name} time domain {scenario.time_domain}", where)
    if xi_samples is None:
        lo, hi = scenario.sample_box.get("xi", (-1.0, 1.0))
        xi_samples = np.linspace(lo, hi, n_xi)
    n, m, kappa = scenario.n, scenario.m, scenario.fiber_coeff

    def sup_at(profiles):
        return max(rm_norm(profiles, n, m, kappa, xi) for xi in xi_samples)

    if scenario.homothetic:
        k0 = sup_at(scenario.profiles)
        return [TypeSample(float(t), k0 / scenario.scale(t)) for t in ts]
    return [TypeSample(float(t), sup_at(scenario.profiles_at(t))) for t in ts]


def _fit(xs, ys):
    """Least-squares slope of ``log ys`` against ``log xs`` and its rms residual."""
    lx, ly = np.log(xs), np.log(ys)
    slope, icpt = np.polyfit(lx, ly, 1)
    rms = float(np.sqrt(np.mean((ly - (slope * lx + icpt)) ** 2)))
    return float(slope), rms


def classify(horizon, samples, tol=EXPONENT_TOL, rms_tol=FIT_RMS_TOL):
    """Label a maximal solution from ``K_max`` samples.

    ``horizon`` is the maximal time ``T`` (``math.inf`` for immortal
    solutions). Finite horizon: fit the exponent of ``(T-t) K`` as ``t -> T``;
    exponent ``>= -tol`` means bounded (Type I), else Type IIa. Infinite
    horizon: fit ``t K ~ t^beta`` over the later half of the samples;
    ``beta <= tol`` means Type III, else Type IIb. A poor power-law fit gives
    ``Undetermined``.
    """
    where = "classify.classify"
    samples = [TypeSample(float(t), float(k)) for t, k in samples]
    if len(samples) < MIN_SAMPLES:
        raise InsufficientSamples(f"need >= {MIN_SAMPLES} samples, got {len(samples)}", where)
    ts = np.array([s.t for s in samples])
    ks = np.array([s.kmax for s in samples])
    if np.any(np.diff(ts) <= 0):
        raise InsufficientSamples("sample times must be strictly increasing", where)
    if np.any(ks < 0) or not np.all(np.isfinite(ks)):
        raise InsufficientSamples("kmax samples must be finite and nonnegative", where)

    finite = math.isfinite(horizon)
    if finite:
        gaps = horizon - ts
        if np.any(gaps <= 0):
            raise InsufficientSamples("samples must precede the horizon", where)
        if gaps[-1] > 0.01 * gaps[0]:
            raise InsufficientSamples("samples must approach the horizon within 1%", where)
        prod = gaps * ks
        xs = gaps
    else:
        if ts[0] <= 0 or ts[-1] < 100 * ts[0]:
            raise InsufficientSamples("infinite horizon needs positive times spanning two decades", where)
        prod = ts * ks
        xs = ts
    sup_stat = float(np.max(prod))
    if np.all(ks == 0):
        label = TypeLabel.TYPE_I if finite else TypeLabel.TYPE_III
        return Classification(label, 0.0, 0.0, float(horizon))
    if np.any(ks == 0):
        return Classification(TypeLabel.UNDETERMINED, math.nan, sup_stat, float(horizon))

    # the exponent near the end of the range: t -> T, or t -> infinity
    half = slice(len(xs) // 2, None)
    slope, rms = _fit(xs[half], prod[half])
    if rms > rms_tol:
        return Classification(TypeLabel.UNDETERMINED, slope, sup_stat, float(horizon), rms)
    if finite:
        label = TypeLabel.TYPE_I if slope >= -tol else TypeLabel.TYPE_IIA
    else:
        label = TypeLabel.TYPE_III if slope <= tol else TypeLabel.TYPE_IIB
    return Classification(label, slope, sup_stat, float(horizon), rms)


def scenario_horizon(scenario):
    """Maximal time of a catalog scenario (``inf`` when immortal)."""
    return float(scenario.time_domain[1])


def default_times(scenario, count=24):
    """Log-spaced sample times suited to the scenario's horizon."""
    lo, hi = scenario.time_domain
    if math.isfinite(hi):
        start = max(lo, hi - 1.0) if math.isfinite(lo) else hi - 1.0
        span = hi - start
        gaps = np.geomspace(span * 0.999, span * 1e-4, count)
        return hi - gaps
    return np.geomspace(1.0, 1e3, count)


def classify_scenario(scenario, t_samples=None):
    """Classify a catalog scenario from its own ``K_max`` profile."""
    ts = default_times(scenario) if t_samples is None else t_samples
    return classify(scenario_horizon(scenario), kmax_profile(scenario, ts))
