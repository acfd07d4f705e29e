"""Gradient-estimate machinery for ``u_t = Delta_phi u - a Delta u + b u + c u**alpha``.

The estimate bounds ``|grad ln u|`` on a parabolic cylinder by
``C (q - ln u^p) * bracket`` where the bracket collects curvature,
localization, source and nonlinearity terms. The constant ``C`` is never
assumed: :func:`verify_estimate` reports the sampled supremum of
``|grad ln u| / (factor * bracket)`` as an empirical constant.

Also here: the log transform ``h = p ln u``, ``G = |grad h|^2 / (q-h)^2``,
the localizing cut-off, ``Gamma`` (drifted Laplacian of the distance at
radius one) on model geometries, a finite-difference check of the
evolution identity for ``G`` and the weighted Laplacian comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.optimize import minimize_scalar

from . import _fd
from .errors import (
    DeltaViolation,
    DomainError,
    HypothesisViolation,
    NonParabolic,
    PositivityError,
    UnsupportedModel,
    ValidationError,
)
from .geometry import conformal_hessian_matrix, conformal_ricci_matrix, conformal_scalar
from .params import derive_sigma

HYPOTHESIS_TOL = 1e-8


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class CutoffParams:
    """Cut-off construction and the exponent used for property (d)."""

    epsilon: float = 0.5
    smoothness: str = "septic"  # C^3 smoothstep; see module docs

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValidationError("epsilon must lie in (0, 1)", "estimate.CutoffParams")


@dataclass(frozen=True)
class EstimateParams:
    """Constants of the gradient estimate.

    ``mode="backward"`` uses the window ``[t0 - T, t0]``; ``mode="forward"``
    uses ``[t0, t0 + T]`` and the time term ``(t0 + T - t)**-0.5``.
    """

    p: float
    q: float
    delta: float
    D: float
    k1: float = 0.0
    k2: float = 0.0
    R: float = 2.0
    T: float = 1.0
    t0: float = 0.0
    tau: float | None = None
    a_coeff: float = 0.0
    mode: str = "backward"
    cutoff: CutoffParams = field(default_factory=CutoffParams)
    C_report: float | None = None

    def __post_init__(self):
        where = "estimate.EstimateParams"
        if not self.p > 0:
            raise ValidationError("p must be positive", where)
        if not self.delta > 0:
            raise ValidationError("delta must be positive", where)
        if not self.D > 0:
            raise ValidationError("D must be positive", where)
        if self.k1 < 0 or self.k2 < 0:
            raise ValidationError("k1, k2 must be nonnegative", where)
        if self.R < 2:
            raise ValidationError("R must be at least 2", where)
        if not self.T > 0:
            raise ValidationError("T must be positive", where)
        if not self.a_coeff < 1:
            raise NonParabolic(f"a = {self.a_coeff:g} >= 1", where)
        if self.mode not in ("backward", "forward"):
            raise ValidationError(f"unknown mode {self.mode!r}", where)
        if self.tau is None:
            object.__setattr__(self, "tau", self.t0)
        elif not self.t0 - self.T < self.tau <= self.t0:
            raise ValidationError("tau must lie in (t0 - T, t0]", where)

    @property
    def a_bar(self):
        return 1.0 - self.a_coeff

    @property
    def window(self):
        if self.mode == "backward":
            return (self.t0 - self.T, self.t0)
        return (self.t0, self.t0 + self.T)

    def elapsed(self, t):
        """Distance from the open end of the window (the quantity under the root)."""
        t = np.asarray(t, dtype=float)
        if self.mode == "backward":
            return t - self.t0 + self.T
        return self.t0 + self.T - t


# ---------------------------------------------------------------------------
# log transform


def log_transform(u, p, q, dx, metric=1.0, delta=None):
    """Return ``(h, G)`` with ``h = p ln u`` and ``G = |grad h|^2 / (q-h)^2``.

    ``u`` is sampled on a uniform grid of spacing ``dx`` along the last axis
    with metric ``A dx^2``. Raises :class:`DeltaViolation` when ``q - h``
    drops below ``delta`` (default: any nonpositive value).
    """
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0):
        raise PositivityError("u must be positive", "estimate.log_transform")
    h = p * np.log(u)
    gap = q - h
    floor = 0.0 if delta is None else delta
    bad = gap <= 0 if delta is None else gap < floor
    if np.any(bad):
        raise DeltaViolation(f"q - p ln u reaches {np.min(gap):.6g} < delta={floor:g}", "estimate.log_transform")
    metric = np.broadcast_to(np.asarray(metric, dtype=float), u.shape)
    grad_sq = _fd.d1(h, dx) ** 2 / metric
    return h, grad_sq / gap**2


# ---------------------------------------------------------------------------
# cut-off


def _smoothstep(s):
    """C^3 septic step 0 -> 1 on [0, 1] with derivatives up to 2."""
    s = np.clip(s, 0.0, 1.0)
    v = s**4 * (35 - 84 * s + 70 * s**2 - 20 * s**3)
    d1 = 140 * s**3 * (1 - s) ** 3
    d2 = 420 * s**2 * (1 - s) ** 2 * (1 - 2 * s)
    return v, d1, d2


def cutoff(r, t, R, tau, t0, T):
    """Space-time cut-off ``eta(r) * zeta(t)`` and its derivatives.

    ``eta`` is 1 on ``[0, R/2]``, decreases to 0 at ``R`` and vanishes
    beyond. ``zeta`` rises from 0 at ``t0 - T`` to 1 at ``tau`` and stays 1.
    Returns ``(value, d/dr, d^2/dr^2, d/dt)``.
    """
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    half = R / 2
    sv, s1, s2 = _smoothstep((r - half) / half)
    eta, eta1, eta2 = 1 - sv, -s1 / half, -s2 / half**2
    span = tau - t0 + T
    zeta, z1, _ = _smoothstep((t - (t0 - T)) / span)
    z1 = z1 / span
    out = (eta * zeta, eta1 * zeta, eta2 * zeta, eta * z1)
    if out[0].ndim == 0:
        return tuple(float(v) for v in out)
    return out


def cutoff_constants(R, tau, t0, T, epsilon=0.5, nr=200, nt=50, r_max=None):
    """Check the four cut-off properties on an ``nr x nt`` grid.

    Returns a dict with boolean flags ``a``..``d`` and the measured constants
    ``C_time`` (property (c)) and ``C_eps`` (property (d)). Points where the
    cut-off vanishes are checked to have vanishing derivatives instead of
    contributing to a ratio.
    """
    r_max = 1.5 * R if r_max is None else r_max
    rs = np.linspace(0.0, r_max, nr)
    ts = np.linspace(t0 - T, t0, nt)
    rr, tt = np.meshgrid(rs, ts, indexing="ij")
    v, dr, drr, dt = cutoff(rr, tt, R, tau, t0, T)
    tiny = 1e-300
    pos = v > 0
    zero_ok = bool(np.all(dr[~pos] == 0) and np.all(drr[~pos] == 0) and np.all(dt[~pos] == 0))

    prop_a = bool(np.all((v >= 0) & (v <= 1)) and np.all(v[rr >= R] == 0))
    inner = rr <= R / 2
    prop_b = bool(np.all(v[inner & (tt >= tau)] == 1.0) and np.all(dr[inner] == 0))
    span = tau - t0 + T
    c_time = float(np.max(np.abs(dt[pos]) * span / np.sqrt(v[pos] + tiny), initial=0.0))
    prop_c = bool(np.all(v[:, 0] == 0) and zero_ok and np.isfinite(c_time))
    ve = v[pos] ** epsilon
    c1 = float(np.max(np.abs(dr[pos]) * R / ve, initial=0.0))
    c2 = float(np.max(np.abs(drr[pos]) * R**2 / ve, initial=0.0))
    c_eps = max(c1, c2)
    prop_d = bool(np.all(dr <= 0) and zero_ok and np.isfinite(c_eps))
    return {
        "a": prop_a,
        "b": prop_b,
        "c": prop_c,
        "d": prop_d,
        "C_time": c_time,
        "C_eps": c_eps,
        "epsilon": epsilon,
        "grid": (nr, nt),
    }


# ---------------------------------------------------------------------------
# model geometries and Gamma


@dataclass(frozen=True)
class RadialModel:
    """Flat ``scale * <,>`` or hyperbolic ``scale * x_n^-2 <,>`` on a chart of ``R^n``.

    The distance is measured from ``x0`` (default: origin for flat, ``e_n``
    for hyperbolic).
    """

    kind: str
    n: int
    scale: float = 1.0
    x0: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("flat", "hyperbolic"):
            raise UnsupportedModel(f"no radial model {self.kind!r}", "estimate.RadialModel")
        if not self.scale > 0:
            raise ValidationError("scale must be positive", "estimate.RadialModel")
        if self.x0 is None:
            x0 = np.zeros(self.n)
            if self.kind == "hyperbolic":
                x0[-1] = 1.0
            object.__setattr__(self, "x0", tuple(x0))
        elif self.kind == "hyperbolic" and self.x0[-1] <= 0:
            raise DomainError("hyperbolic base point needs x_n > 0", "estimate.RadialModel")

    def lap_r(self, r):
        """Laplacian of the distance function at distance ``r``."""
        r = np.asarray(r, dtype=float)
        s = math.sqrt(self.scale)
        if self.kind == "flat":
            return (self.n - 1) / r
        return (self.n - 1) / s / np.tanh(r / s)

    def ricci_lower_bound(self):
        """Constant ``k`` with ``Ric = k g``."""
        return 0.0 if self.kind == "flat" else -(self.n - 1) / self.scale

    def distance(self, x):
        x = np.asarray(x, dtype=float)
        x0 = np.asarray(self.x0)
        s = math.sqrt(self.scale)
        d2 = np.sum((x - x0) ** 2, axis=-1)
        if self.kind == "flat":
            return s * np.sqrt(d2)
        return s * np.arccosh(1 + d2 / (2 * x[..., -1] * x0[-1]))

    def conformal_w(self, x):
        """``w`` with ``g = e^{2w} <,>`` and its coordinate gradient."""
        x = np.asarray(x, dtype=float)
        grad = np.zeros(self.n)
        w = 0.5 * math.log(self.scale)
        if self.kind == "hyperbolic":
            w -= math.log(x[-1])
            grad[-1] = -1.0 / x[-1]
        return w, grad

    def geodesic(self, unit_dir, r):
        """Point at distance ``r`` along the unit-speed geodesic from ``x0``.

        ``unit_dir`` is a Euclidean unit vector giving the initial direction.
        Returns ``(x, dx/dr)`` in chart coordinates.
        """
        v = np.asarray(unit_dir, dtype=float)
        x0 = np.asarray(self.x0)
        s = math.sqrt(self.scale)
        if self.kind == "flat":
            return x0 + (r / s) * v, v / s
        # hyperbolic geodesics in the vertical plane spanned by v and e_n
        y0 = x0[-1]
        sarc = r / s
        horiz = v.copy()
        horiz[-1] = 0.0
        hn = np.linalg.norm(horiz)
        if hn < 1e-14:
            sign = 1.0 if v[-1] > 0 else -1.0
            y = y0 * math.exp(sign * sarc)
            x = x0.copy()
            x[-1] = y
            vel = np.zeros(self.n)
            vel[-1] = sign * y / s
            return x, vel
        e = horiz / hn
        sin_t, cos_t = hn, v[-1]
        s0 = math.atanh(-cos_t)
        rad = y0 / sin_t
        sig = s0 + sarc
        x = x0 + e * rad * (math.tanh(sig) - math.tanh(s0))
        y = rad / math.cosh(sig)
        x[-1] = y
        vel = e * rad / math.cosh(sig) ** 2
        vel[-1] = -rad * math.tanh(sig) / math.cosh(sig)
        return x, vel / s

    def directions(self, count=720):
        if self.n == 1:
            return np.array([[1.0], [-1.0]])
        if self.n == 2:
            th = np.linspace(0, 2 * np.pi, count, endpoint=False)
            return np.stack([np.cos(th), np.sin(th)], axis=1)
        # Fibonacci points on S^{n-1} projected from S^2, padded for n > 3
        k = np.arange(count) + 0.5
        z = 1 - 2 * k / count
        ph = np.pi * (1 + 5**0.5) * k
        pts = np.stack([np.sqrt(1 - z**2) * np.cos(ph), np.sqrt(1 - z**2) * np.sin(ph), z], axis=1)
        out = np.zeros((count, self.n))
        out[:, -3:] = pts
        return out


def _drifted_lap_r(model, phi_grad, a_bar, unit_dir, r):
    x, vel = model.geodesic(unit_dir, r)
    drift = 0.0 if phi_grad is None else float(np.dot(phi_grad(x), vel)) / a_bar
    return float(model.lap_r(r)) - drift


def _max_over_sphere(model, phi_grad, a_bar, r, count):
    dirs = model.directions(count)
    vals = np.array([_drifted_lap_r(model, phi_grad, a_bar, d, r) for d in dirs])
    k = int(np.argmax(vals))
    best = float(vals[k])
    if model.n == 2 and phi_grad is not None:
        th0 = 2 * np.pi * k / len(dirs)
        step = 2 * np.pi / len(dirs)

        def neg(th):
            return -_drifted_lap_r(model, phi_grad, a_bar, np.array([np.cos(th), np.sin(th)]), r)

        res = minimize_scalar(neg, bounds=(th0 - step, th0 + step), method="bounded", options={"xatol": 1e-10})
        best = max(best, -float(res.fun))
    return best


def gamma_bar(model, phi_grad=None, a_coeff=0.0, count=720):
    """Max over the unit geodesic sphere of ``Delta r - <grad(phi/(1-a)), grad r>``.

    ``model`` is a :class:`RadialModel`; ``phi_grad(x)`` returns the
    coordinate gradient of ``phi`` (``None`` for constant ``phi``).
    """
    if not isinstance(model, RadialModel):
        raise UnsupportedModel(f"unsupported model {type(model).__name__}", "estimate.gamma_bar")
    if not a_coeff < 1:
        raise NonParabolic(f"a = {a_coeff:g} >= 1", "estimate.gamma_bar")
    return _max_over_sphere(model, phi_grad, 1 - a_coeff, 1.0, count)


def _covariant_hessian(model, phi_grad, phi_hess, x):
    """``nabla^2 phi`` for ``g = e^{2w} <,>`` from coordinate derivatives."""
    _, gw = model.conformal_w(x)
    dphi = np.asarray(phi_grad(x), dtype=float)
    hess = np.asarray(phi_hess(x), dtype=float)
    n = model.n
    # Christoffel contraction Gamma^k_ij d_k phi
    corr = np.outer(gw, dphi) + np.outer(dphi, gw) - np.eye(n) * float(gw @ dphi)
    return hess - corr


def comparison_check(model, phi_grad=None, a_coeff=0.0, k1=0.0, R=4.0, radii=None, phi_hess=None, count=360):
    """Worst margin of ``Delta_phibar r <= Gamma + (R-1) k1 / (1-a)`` over ``radii``.

    Verifies the lower bound ``Ric + nabla^2 phibar >= -(k1/(1-a)) g`` first,
    at the sampled points, and raises :class:`HypothesisViolation` if it
    fails (or if ``k1 < 0``).
    """
    where = "estimate.comparison_check"
    if not isinstance(model, RadialModel):
        raise UnsupportedModel(f"unsupported model {type(model).__name__}", where)
    if not a_coeff < 1:
        raise NonParabolic(f"a = {a_coeff:g} >= 1", where)
    a_bar = 1 - a_coeff
    if k1 < 0:
        raise HypothesisViolation(f"k1 = {k1:g} < 0", where)
    radii = np.linspace(1.0, R, 15) if radii is None else np.asarray(radii, dtype=float)
    bound = -k1 / a_bar
    ric = model.ricci_lower_bound()
    dirs = model.directions(min(count, 64) if model.n > 1 else 2)
    for r in radii:
        for d in dirs:
            x, _ = model.geodesic(d, r)
            lam = ric
            if phi_grad is not None and phi_hess is not None:
                w, _ = model.conformal_w(x)
                hess = _covariant_hessian(model, phi_grad, phi_hess, x) / a_bar
                lam = ric + float(np.min(np.linalg.eigvalsh(hess))) * math.exp(-2 * w)
            if lam < bound - HYPOTHESIS_TOL:
                raise HypothesisViolation(
                    f"Ric^phibar eigenvalue {lam:.6g} below {bound:.6g} at r={r:g}", where
                )
    gam = gamma_bar(model, phi_grad, a_coeff, count)
    cap = gam + (R - 1) * k1 / a_bar
    worst = min(cap - _max_over_sphere(model, phi_grad, a_bar, r, count) for r in radii)
    return float(worst)


# ---------------------------------------------------------------------------
# bracket


def nonlinear_positive_part(c, alpha, p, q, u_values):
    """``sup [(alpha - 1 + p/(q - p ln u)) c]^+`` over the given ``u`` samples."""
    u = np.asarray(u_values, dtype=float)
    if c == 0 or u.size == 0:
        return 0.0
    gap = q - p * np.log(u)
    if np.any(gap <= 0):
        raise DeltaViolation("q - p ln u must stay positive", "estimate.nonlinear_positive_part")
    return float(np.max(np.maximum((alpha - 1 + p / gap) * c, 0.0)))


@dataclass(frozen=True)
class Bracket:
    total: float
    factor: float
    terms: dict


def bound_bracket(ep, t, u, b_sup=0.0, grad_b_sup=0.0, c=0.0, alpha=1.0, u_range=None, gamma=0.0):
    """Right-hand side pieces of the estimate at one sample.

    ``u`` is the local value (for ``factor = q - p ln u``); ``u_range`` is
    ``(inf u, sup u)`` over the cylinder, used by the nonlinear term (the
    positive part is monotone in ``u``, so the endpoints suffice).
    """
    where = "estimate.bound_bracket"
    factor = ep.q - ep.p * math.log(u)
    if factor < ep.delta:
        raise DeltaViolation(f"q - p ln u = {factor:.6g} < delta = {ep.delta:g}", where)
    el = float(ep.elapsed(t))
    if el < 0:
        raise DomainError(f"t = {t:g} outside the estimate window {ep.window}", where)
    time_term = math.inf if el == 0 else el**-0.5
    lo, hi = (u, u) if u_range is None else u_range
    pos = nonlinear_positive_part(c, alpha, ep.p, ep.q, [lo, hi])
    upow = max(lo ** ((alpha - 1) / 2), hi ** ((alpha - 1) / 2))
    terms = {
        "k1": math.sqrt(ep.k1),
        "k2": math.sqrt(ep.k2),
        "R": 1.0 / ep.R,
        "time": time_term,
        "gamma": math.sqrt(max(gamma, 0.0) / ep.R),
        "b": math.sqrt(max(b_sup, 0.0)),
        "grad_b": grad_b_sup ** (1.0 / 3.0),
        "nonlinear": math.sqrt(pos) * upow if pos > 0 else 0.0,
    }
    return Bracket(float(sum(terms.values())), float(factor), terms)


# ---------------------------------------------------------------------------
# estimate verification


@dataclass
class EstimateReport:
    sup_ratio: float
    argmax: tuple
    terms: dict
    gamma: float
    n_samples: int
    u_range: tuple


def _field(values, shape):
    return np.broadcast_to(np.asarray(values, dtype=float), shape)


def verify_estimate(traj, ep, x0, b=0.0, c=0.0, alpha=1.0, gamma=None, check_hypotheses=True):
    """Empirical constant of the gradient estimate on a 1-D trajectory.

    ``traj`` is a :class:`~warpflow.reduced_flow.ScalarTrajectory` whose
    snapshot times cover the estimate window. Distances are ``|int sqrt(A)|``
    from ``x0`` at each time. ``b`` may be a scalar or an array shaped like
    ``traj.u``. Returns an :class:`EstimateReport`; ``sup_ratio`` is
    ``max |grad ln u| / (factor * bracket)`` over ``Q_{R/2,T}``.
    """
    where = "estimate.verify_estimate"
    x, ts, u = traj.x, traj.t, traj.u
    if np.any(u <= 0):
        raise PositivityError("u must be positive", where)
    A = _field(traj.metric, u.shape)
    phi = _field(traj.phi, x.shape)
    dx = x[1] - x[0]
    lo, hi = ep.window
    in_win = (ts >= lo - 1e-12) & (ts <= hi + 1e-12)
    if not np.any(in_win):
        raise DomainError("no snapshots inside the estimate window", where)

    i0 = int(np.argmin(np.abs(x - x0)))
    sq = np.sqrt(A)
    arc = cumulative_trapezoid(sq, x, axis=-1, initial=0.0)
    r = np.abs(arc - arc[:, i0 : i0 + 1])
    in_R = (r <= ep.R) & in_win[:, None]
    in_half = (r <= ep.R / 2) & in_win[:, None]

    uQ = u[in_R]
    if np.max(uQ) >= ep.D:
        raise HypothesisViolation(f"sup u = {np.max(uQ):.6g} >= D = {ep.D:g}", where)
    bf = _field(b, u.shape)
    grad_b = np.abs(_fd.d1_4(bf, dx)) / sq
    b_sup = float(np.max(bf[in_R]))
    grad_b_sup = float(np.max(grad_b[in_R]))
    u_range = (float(np.min(uQ)), float(np.max(uQ)))

    if check_hypotheses:
        hess_phi = _fd.d2_4(phi, dx) - _fd.d1_4(A, dx) / (2 * A) * _fd.d1_4(phi, dx)
        lower = (hess_phi / A)[in_R]
        if np.min(lower) < -ep.k1 - HYPOTHESIS_TOL:
            raise HypothesisViolation(f"nabla^2 phi / g reaches {np.min(lower):.6g} < -k1", where)
        if len(ts) > 1:
            At = np.gradient(A, ts, axis=0)
            rate = (At / A)[in_R]
            if np.min(rate) < -2 * ep.k2 - HYPOTHESIS_TOL:
                raise HypothesisViolation(f"d_t g / g reaches {np.min(rate):.6g} < -2 k2", where)

    if gamma is None:
        # in one dimension Delta r = 0 away from x0; only the drift survives
        dphi = _fd.d1_4(phi, dx)
        vals = []
        for k in np.flatnonzero(in_win):
            for side in (-1, 1):
                mask = np.sign(x - x0) == side
                if not np.any(mask) or np.max(r[k][mask]) < 1:
                    continue
                xs, rs = x[mask], r[k][mask]
                order = np.argsort(rs)
                x1 = np.interp(1.0, rs[order], xs[order])
                a1 = np.interp(x1, x, A[k])
                vals.append(-side * np.interp(x1, x, dphi) / (ep.a_bar * math.sqrt(a1)))
        gamma = max(vals) if vals else 0.0

    grad_ln = np.abs(_fd.d1_4(np.log(u), dx)) / sq
    best, arg, terms = 0.0, (float(x0), float(ts[in_win][0])), {}
    for k, i in zip(*np.nonzero(in_half)):
        if ep.elapsed(ts[k]) <= 0:
            continue
        br = bound_bracket(ep, ts[k], u[k, i], b_sup, grad_b_sup, c, alpha, u_range, gamma)
        ratio = grad_ln[k, i] / (br.factor * br.total)
        if ratio > best:
            best, arg, terms = float(ratio), (float(x[i]), float(ts[k])), br.terms
    return EstimateReport(best, arg, terms, float(gamma), int(np.count_nonzero(in_half)), u_range)


def _is_hyperbolic_base(scenario):
    probe = np.array([0.5, 1.0, 2.0, 3.0])
    try:
        mu, mu1, mu2 = scenario.profiles.mu.derivs(probe)
    except DomainError:
        return False
    return np.allclose(mu, probe, atol=1e-13) and np.allclose(mu1, 1) and np.allclose(mu2, 0)


def verify_estimate_scenario(scenario, ep, window, npts=41, times=None, n_gamma_times=5):
    """Empirical estimate constant for a catalog scenario over a hyperbolic base.

    The base at time ``t`` is ``a(t) x_n^-2 <,>``; ``u = f^{1/sigma}`` with
    the time-``t`` warping function. Samples lie on a regular grid of the
    plane spanned by the first coordinate and the ansatz axis through
    ``x0 = e_n``, clipped to the rectangle ``window = ((x1_lo, x1_hi),
    (xn_lo, xn_hi))``. ``D`` must bound ``u`` over that window.
    """
    where = "estimate.verify_estimate_scenario"
    if not _is_hyperbolic_base(scenario) or scenario.frame.axis[-1] != 1.0:
        raise UnsupportedModel(f"{scenario.name}: base is not the hyperbolic chart", where)
    params = scenario.params
    n, m, rho = params.n, params.m, params.rho
    sigma = derive_sigma(rho, m)
    a_coeff = 2 * m * rho
    if abs(a_coeff - ep.a_coeff) > 1e-14:
        raise ValidationError("EstimateParams.a_coeff does not match the scenario", where)
    a_bar = 1 - a_coeff
    c_coef = (m * rho - 1) / (m * sigma) * params.s_fiber
    alpha = 1 - 2 * sigma
    k = scenario.constants.c1_over_c2
    c0 = scenario.constants.c0

    lo_t, hi_t = ep.window
    times = np.linspace(lo_t, hi_t, 11) if times is None else np.asarray(times, dtype=float)
    for t in times:
        if not scenario.in_time_domain(t):
            raise DomainError(f"t = {t:g} outside {scenario.name} time domain", where)

    (x1_lo, x1_hi), (y_lo, y_hi) = window
    x1 = np.linspace(x1_lo, x1_hi, npts)
    y = np.linspace(y_lo, y_hi, npts)
    X1, Y = np.meshgrid(x1, y, indexing="ij")
    pts = np.zeros(X1.shape + (n,))
    pts[..., 0] = X1
    pts[..., -1] = Y
    f_val, f1, _ = scenario.profiles.f.derivs(Y)
    mu_val = Y
    frame = scenario.frame

    # curvature hypotheses, sampled
    scal = float(conformal_scalar(scenario.profiles, n, 1.0))
    for yy in y[:: max(1, npts // 8)]:
        ric = conformal_ricci_matrix(scenario.profiles, frame, yy)
        hphi = conformal_hessian_matrix(scenario.profiles.phi, scenario.profiles, frame, yy)
        g0 = np.eye(n) / yy**2
        for t in times:
            at = float(scenario.scale(t))
            gen = np.linalg.eigvals(np.linalg.solve(at * g0, a_bar * ric + hphi)).real
            if np.min(gen) < -ep.k1 - HYPOTHESIS_TOL:
                raise HypothesisViolation(f"(1-a)Ric + nabla^2 phi reaches {np.min(gen):.6g} g < -k1 g", where)
    for t in times:
        rate = c0 / float(scenario.scale(t))
        if rate < -2 * ep.k2 - HYPOTHESIS_TOL:
            raise HypothesisViolation(f"d_t g = {rate:.6g} g < -2 k2 g", where)

    def phi_grad(x):
        _, p1, _ = scenario.profiles.phi.derivs(np.array(x[-1]))
        out = np.zeros(n)
        out[-1] = float(p1)
        return out

    g_times = np.linspace(times[0], times[-1], n_gamma_times)
    gamma = max(
        gamma_bar(RadialModel("hyperbolic", n, float(scenario.scale(t))), phi_grad, a_coeff) for t in g_times
    )

    records = []
    for t in times:
        at = float(scenario.scale(t))
        ft = at**k * f_val
        u = ft ** (1 / sigma)
        model = RadialModel("hyperbolic", n, at)
        r = model.distance(pts)
        grad_ln = (mu_val / math.sqrt(at)) * np.abs(f1 / f_val) / abs(sigma)
        b = (rho / sigma) * scal / at
        records.append((t, u, r, grad_ln, b))

    uQ = np.concatenate([rec[1][rec[2] <= ep.R].ravel() for rec in records])
    if uQ.size == 0:
        raise DomainError("no samples inside Q_{R,T}", where)
    if np.max(uQ) >= ep.D:
        raise HypothesisViolation(f"sup u = {np.max(uQ):.6g} >= D = {ep.D:g}", where)
    u_range = (float(np.min(uQ)), float(np.max(uQ)))
    b_sup = max(rec[4] for rec in records)

    best, arg, terms, count = 0.0, None, {}, 0
    for t, u, r, grad_ln, _ in records:
        if ep.elapsed(t) <= 0:
            continue
        mask = r <= ep.R / 2
        count += int(np.count_nonzero(mask))
        for idx in zip(*np.nonzero(mask)):
            br = bound_bracket(ep, t, float(u[idx]), b_sup, 0.0, c_coef, alpha, u_range, gamma)
            ratio = float(grad_ln[idx]) / (br.factor * br.total)
            if ratio > best:
                best, arg, terms = ratio, (tuple(pts[idx].tolist()), float(t)), br.terms
    return EstimateReport(best, arg, terms, float(gamma), count, u_range)


# ---------------------------------------------------------------------------
# evolution identity for G


def _time_field(values, shape, ts, x):
    if callable(values):
        return np.asarray(values(x[None, :], ts[:, None]), dtype=float) * np.ones(shape)
    return _field(values, shape)


def evolution_identity_terms(traj, ep, b=0.0, c=0.0, alpha=1.0, steps=None, points=None):
    """Left side and right-side terms of the evolution identity for ``G``.

    Works on a 1-D trajectory with uniform snapshot spacing; spatial
    derivatives are second-order differences and time derivatives are
    centered. Returns ``(lhs, terms)`` arrays over ``steps x points``
    (defaults: interior snapshots, nodes at least three from either end).
    """
    where = "estimate.evolution_identity_residual"
    x, ts, u = traj.x, traj.t, traj.u
    if len(ts) < 3:
        raise DomainError("need at least three snapshots for centered time differences", where)
    dts = np.diff(ts)
    if not np.allclose(dts, dts[0], rtol=1e-9):
        raise DomainError("snapshot times must be uniform", where)
    dt = dts[0]
    dx = x[1] - x[0]
    p, q, a_bar = ep.p, ep.q, ep.a_bar
    A = _field(traj.metric, u.shape)
    phi = _field(traj.phi, x.shape)
    bf = _time_field(b, u.shape, ts, x)

    h, G = log_transform(u, p, q, dx, A, ep.delta)
    gap = q - h
    A1 = _fd.d1(A, dx)
    gam = A1 / (2 * A)
    h1, h2 = _fd.d1(h, dx), _fd.d2(h, dx)
    hess_h = h2 - gam * h1
    grad_h_sq = h1**2 / A
    G1, G2 = _fd.d1(G, dx), _fd.d2(G, dx)
    lap_G = (G2 - gam * G1) / A
    phi1, phi2 = _fd.d1(phi, dx), _fd.d2(phi, dx)
    hess_phi = phi2 - gam * phi1
    b1 = _fd.d1(bf, dx)

    ks = np.arange(1, len(ts) - 1) if steps is None else np.atleast_1d(steps)
    idx = np.arange(3, len(x) - 3) if points is None else np.atleast_1d(points)
    sl = (ks[:, None], idx[None, :])

    G_t = (G[ks + 1] - G[ks - 1]) / (2 * dt)
    A_t = (A[ks + 1] - A[ks - 1]) / (2 * dt)
    g = lambda arr: arr[sl]  # noqa: E731
    lhs = a_bar * g(lap_G) - g(phi1 * G1 / A) - G_t[:, idx]

    Ak, gapk, h1k, Gk = g(A), g(gap), g(h1), g(G)
    dh_dG = g(h1 * G1 / A)
    square = 2 * a_bar * (g(hess_h) / (Ak * gapk) + h1k**2 / (Ak * gapk**2)) ** 2
    metric_term = (A_t[:, idx] + 2 * g(hess_phi)) * (h1k / Ak) ** 2 / gapk**2
    nonlin = np.zeros_like(lhs)
    if c != 0:
        nonlin = -2 * c * (alpha - 1 + p / gapk) * np.exp(g(h) / p * (alpha - 1)) * Gk
    terms = {
        "square": square,
        "grad_G_gap": 2 * a_bar * dh_dG / gapk,
        "grad_G_p": -(2 * a_bar / p) * dh_dG,
        "metric": metric_term,
        "grad_b": -2 * p * g(h1 * b1 / A) / gapk**2,
        "b": -2 * p * g(bf) * g(grad_h_sq) / gapk**3,
        "nonlinear": nonlin,
        "quartic": (2 * a_bar / p) * g(grad_h_sq) ** 2 / gapk**3,
    }
    return lhs, terms


def evolution_identity_residual(traj, ep, b=0.0, c=0.0, alpha=1.0, steps=None, points=None):
    """Max ``|LHS - RHS|`` of the evolution identity for ``G`` (see :func:`evolution_identity_terms`).

    ``b`` may be a scalar, an array shaped like ``traj.u`` or a callable
    ``b(x, t)``.
    """
    lhs, terms = evolution_identity_terms(traj, ep, b, c, alpha, steps, points)
    rhs = sum(terms.values())
    return float(np.max(np.abs(lhs - rhs)))
