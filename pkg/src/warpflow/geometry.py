"""Curvature and differential-operator kernels.

Two families live here:

* closed formulas for the conformally flat base ``g0 = mu(xi)**-2 <,>`` on
  ``R^n`` with ``xi(x) = <x, axis>``, where every quantity reduces to
  derivatives of the one-variable profiles ``mu, f, phi``;
* the block (horizontal / vertical) decomposition of Ricci and scalar
  curvature for a warped product ``g + f^2 g_F`` over an Einstein fiber.

Indices ``i, j`` are zero-based coordinate indices of ``R^n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from . import _fd
from .errors import DomainError, PositivityError

# ---------------------------------------------------------------------------
# profiles


@dataclass(frozen=True)
class Profile:
    """Closed-form scalar profile with analytic first and second derivatives."""

    value: Callable
    d1: Callable
    d2: Callable
    domain: tuple = (-np.inf, np.inf)
    name: str = ""

    kind = "closed"

    def _check(self, xi):
        xi = np.asarray(xi, dtype=float)
        lo, hi = self.domain
        if np.any(xi <= lo) or np.any(xi >= hi):
            raise DomainError(
                f"xi outside profile domain {self.domain} ({self.name or 'profile'})",
                "geometry.Profile",
            )
        return xi

    def __call__(self, xi):
        xi = self._check(xi)
        return np.broadcast_to(self.value(xi), xi.shape).astype(float)

    def derivs(self, xi):
        """Return ``(value, first, second)`` at ``xi``."""
        xi = self._check(xi)
        return tuple(
            np.broadcast_to(fn(xi), xi.shape).astype(float)
            for fn in (self.value, self.d1, self.d2)
        )

    def scaled(self, factor):
        """Profile multiplied by a constant."""
        k = float(factor)
        return Profile(
            lambda x: k * self.value(x),
            lambda x: k * self.d1(x),
            lambda x: k * self.d2(x),
            self.domain,
            self.name,
        )

    @classmethod
    def constant(cls, c, domain=(-np.inf, np.inf)):
        c = float(c)
        zero = lambda x: 0.0 * np.asarray(x)  # noqa: E731
        return cls(lambda x: c + 0.0 * np.asarray(x), zero, zero, domain, f"const({c})")


class SampledProfile:
    """Profile known on a uniform grid.

    Derivatives come from fourth-order centered differences at the nodes;
    off-node values are cubic-spline interpolants of the node data.
    """

    kind = "sampled"

    def __init__(self, xs, values, name=""):
        xs = np.asarray(xs, dtype=float)
        values = np.asarray(values, dtype=float)
        if xs.ndim != 1 or xs.shape != values.shape or xs.size < 6:
            raise ValueError("need matching 1-D arrays with at least 6 nodes")
        h = np.diff(xs)
        if not np.allclose(h, h[0], rtol=1e-10, atol=0):
            raise ValueError("sampled profiles require a uniform grid")
        self.xs, self.values, self.name = xs, values, name
        self.domain = (xs[0], xs[-1])
        self._h = h[0]
        first = _fd.d1_4(values, self._h)
        second = _fd.d2_4(values, self._h)
        self._splines = [CubicSpline(xs, y) for y in (values, first, second)]

    def _check(self, xi):
        xi = np.asarray(xi, dtype=float)
        lo, hi = self.domain
        if np.any(xi < lo) or np.any(xi > hi):
            raise DomainError(f"xi outside sampled range {self.domain}", "geometry.SampledProfile")
        return xi

    def __call__(self, xi):
        return self._splines[0](self._check(xi))

    def derivs(self, xi):
        xi = self._check(xi)
        return tuple(s(xi) for s in self._splines)

    def scaled(self, factor):
        return SampledProfile(self.xs, factor * self.values, self.name)


@dataclass(frozen=True)
class ProfileSet:
    """The triple ``(mu, f, phi)``; all three must be of the same kind."""

    mu: object
    f: object
    phi: object

    def __post_init__(self):
        kinds = {p.kind for p in (self.mu, self.f, self.phi)}
        if len(kinds) != 1:
            raise ValueError("cannot mix closed-form and sampled profiles in one ProfileSet")

    @property
    def kind(self):
        return self.mu.kind


@dataclass(frozen=True)
class AnsatzFrame:
    """Base dimension, unit axis of ``xi(x) = <x, axis>``, and the xi-interval."""

    n: int
    axis: tuple
    domain: tuple = (-np.inf, np.inf)

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        if axis.shape != (self.n,):
            raise ValueError(f"axis must have length n={self.n}")
        if abs(np.linalg.norm(axis) - 1.0) > 1e-14:
            raise ValueError("ansatz axis must be a unit vector")
        object.__setattr__(self, "axis", tuple(axis))

    @classmethod
    def along_last(cls, n, domain=(-np.inf, np.inf)):
        axis = np.zeros(n)
        axis[-1] = 1.0
        return cls(n, tuple(axis), domain)

    def xi(self, x):
        return np.asarray(x, dtype=float) @ np.asarray(self.axis)


def _mu_derivs(profiles, xi):
    mu, mu1, mu2 = profiles.mu.derivs(xi)
    if np.any(mu <= 0):
        raise PositivityError("mu must be positive", "geometry")
    return mu, mu1, mu2


# ---------------------------------------------------------------------------
# conformal-base formulas


def conformal_ricci(profiles, frame, xi, i, j):
    """Component ``(Ric_g0)_ij`` of the conformal metric ``mu**-2 <,>``."""
    mu, mu1, mu2 = _mu_derivs(profiles, xi)
    n, al = frame.n, frame.axis
    delta = 1.0 if i == j else 0.0
    return ((n - 2) * al[i] * al[j] * mu * mu2 + (mu * mu2 - (n - 1) * mu1**2) * delta) / mu**2


def conformal_ricci_matrix(profiles, frame, xi):
    """Full ``n x n`` Ricci matrix at a scalar ``xi``."""
    n = frame.n
    return np.array([[float(conformal_ricci(profiles, frame, xi, i, j)) for j in range(n)] for i in range(n)])


def conformal_scalar(profiles, n, xi):
    """Scalar curvature ``(n-1)[2 mu mu'' - n mu'^2]``."""
    mu, mu1, mu2 = _mu_derivs(profiles, xi)
    return (n - 1) * (2 * mu * mu2 - n * mu1**2)


def conformal_hessian(f_profile, profiles, frame, xi, i, j):
    """Hessian component ``(nabla^2 f)_ij`` in the conformal metric."""
    mu, mu1, _ = _mu_derivs(profiles, xi)
    _, f1, f2 = f_profile.derivs(xi)
    al = frame.axis
    delta = 1.0 if i == j else 0.0
    return al[i] * al[j] * f2 + (2 * al[i] * al[j] - delta) * mu1 * f1 / mu


def conformal_hessian_matrix(f_profile, profiles, frame, xi):
    n = frame.n
    return np.array(
        [[float(conformal_hessian(f_profile, profiles, frame, xi, i, j)) for j in range(n)] for i in range(n)]
    )


def conformal_laplacian(f_profile, profiles, n, xi):
    """Laplacian ``mu^2 [f'' - (n-2) mu'/mu f']``."""
    mu, mu1, _ = _mu_derivs(profiles, xi)
    _, f1, f2 = f_profile.derivs(xi)
    return mu**2 * (f2 - (n - 2) * mu1 * f1 / mu)


def grad_terms(f_profile, phi_profile, profiles, xi):
    """Return ``(<grad f, grad phi>, |grad f|^2)`` in the conformal metric."""
    mu, _, _ = _mu_derivs(profiles, xi)
    _, f1, _ = f_profile.derivs(xi)
    _, p1, _ = phi_profile.derivs(xi)
    return mu**2 * f1 * p1, mu**2 * f1**2


# ---------------------------------------------------------------------------
# warped products


@dataclass(frozen=True)
class BaseCurvature:
    """Base-side data at one point, in coordinate components."""

    metric: np.ndarray
    ric: np.ndarray
    scalar: float
    f: float
    hess_f: np.ndarray
    lap_f: float
    grad_f_sq: float
    hess_phi: np.ndarray = None
    grad_f_phi: float = 0.0

    def __post_init__(self):
        for name in ("metric", "ric", "hess_f"):
            object.__setattr__(self, name, np.atleast_2d(np.asarray(getattr(self, name), dtype=float)))
        if self.hess_phi is None:
            object.__setattr__(self, "hess_phi", np.zeros_like(self.metric))
        else:
            object.__setattr__(self, "hess_phi", np.atleast_2d(np.asarray(self.hess_phi, dtype=float)))


@dataclass(frozen=True)
class WarpedCurvature:
    ric_horizontal: np.ndarray
    ric_vertical_coeff: float
    scalar: float
    metric: np.ndarray = field(repr=False)
    f: float = 1.0
    m: int = 1

    def scalar_from_trace(self):
        """``tr_g(Ric_H) + m * vertical / f^2``; must equal ``scalar``."""
        ginv = np.linalg.inv(self.metric)
        return float(np.sum(ginv * self.ric_horizontal)) + self.m * self.ric_vertical_coeff / self.f**2


def warped_components(base, m, s_fiber, ric_fiber_coeff):
    """Ricci blocks and scalar curvature of ``g + f^2 g_F``.

    ``ric_fiber_coeff`` is the Einstein constant of the fiber
    (``Ric_F = ric_fiber_coeff * g_F``). The vertical Ricci block is returned
    as its coefficient against ``g_F``.
    """
    f = base.f
    if f <= 0:
        raise PositivityError(f"warping function must be positive, got {f}", "geometry.warped_components")
    ric_h = base.ric - (m / f) * base.hess_f
    ric_v = ric_fiber_coeff - (f * base.lap_f + (m - 1) * base.grad_f_sq)
    scalar = (
        base.scalar
        + s_fiber / f**2
        - 2 * m * base.lap_f / f
        - m * (m - 1) * base.grad_f_sq / f**2
    )
    return WarpedCurvature(ric_h, float(ric_v), float(scalar), base.metric, float(f), m)


def conformal_base_data(profiles, frame, xi):
    """Assemble :class:`BaseCurvature` for the conformal base at scalar ``xi``."""
    mu = float(profiles.mu(xi))
    n = frame.n
    gfp, gf2 = grad_terms(profiles.f, profiles.phi, profiles, xi)
    return BaseCurvature(
        metric=np.eye(n) / mu**2,
        ric=conformal_ricci_matrix(profiles, frame, xi),
        scalar=float(conformal_scalar(profiles, n, xi)),
        f=float(profiles.f(xi)),
        hess_f=conformal_hessian_matrix(profiles.f, profiles, frame, xi),
        lap_f=float(conformal_laplacian(profiles.f, profiles, n, xi)),
        grad_f_sq=float(gf2),
        hess_phi=conformal_hessian_matrix(profiles.phi, profiles, frame, xi),
        grad_f_phi=float(gfp),
    )


# ---------------------------------------------------------------------------
# one-dimensional grids with metric g = A(x) dx^2


def laplacian_1d(u, metric, dx):
    """``(1/A)(u'' - A'/(2A) u')`` with second-order differences."""
    metric = np.asarray(metric, dtype=float)
    return (_fd.d2(u, dx) - _fd.d1(metric, dx) / (2 * metric) * _fd.d1(u, dx)) / metric


def drifted_laplacian(u, phi, metric, dx, index=None):
    """``Delta u - <grad phi, grad u>`` on a uniform 1-D grid.

    ``metric`` is the node-wise factor ``A`` of ``g = A dx^2`` (a scalar is
    broadcast). Returns the whole field, or one node when ``index`` is given.
    """
    u = np.asarray(u, dtype=float)
    metric = np.broadcast_to(np.asarray(metric, dtype=float), u.shape)
    if np.any(metric <= 0):
        raise DomainError("metric factor must be positive", "geometry.drifted_laplacian")
    out = laplacian_1d(u, metric, dx) - _fd.d1(phi, dx) * _fd.d1(u, dx) / metric
    return out if index is None else float(out[index])
