"""Scalar parameter algebra for warped Ricci-Bourguignon flows.

A warped metric ``g(t) + f(t)^2 g_F`` over an Einstein fiber ``(F^m, g_F)``
with scalar curvature ``S_F`` evolves by the Ricci-Bourguignon flow with
coupling ``rho`` exactly when ``u = f**(1/sigma)`` solves

    u_t = Delta_phi u - a Delta u + b u + c u**alpha

with the coefficients returned by :func:`unified_coefficients`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import PoleError

#: Distance to the pole ``(m+1) rho = 1`` below which ``rho`` is rejected.
POLE_TOL = 1e-12


class Regime(enum.Enum):
    SUPERLINEAR = "Superlinear"
    LINEAR = "Linear"
    SUBLINEAR = "Sublinear"
    CONSTANT_SOURCE = "ConstantSource"
    SINGULAR = "Singular"


def derive_sigma(rho, m):
    """Return ``sigma = (1 - 2 m rho) / (m - rho m^2 - m rho)``.

    Raises :class:`PoleError` when ``(m+1) rho`` is within ``POLE_TOL`` of 1,
    where ``u = f**(1/sigma)`` is undefined.
    """
    if m < 1 or int(m) != m:
        raise ValueError(f"fiber dimension must be a positive integer, got {m}")
    rho = float(rho)
    if abs((m + 1) * rho - 1.0) < POLE_TOL:
        raise PoleError(f"(m+1)*rho = 1 for m={m}, rho={rho}", "params.derive_sigma")
    return (1.0 - 2.0 * m * rho) / (m - rho * m * m - m * rho)


def regime_of(sigma):
    """Classify the nonlinearity ``u**(1 - 2 sigma)`` by the sign structure of sigma.

    ``sigma == 1/2`` turns the nonlinear term into a constant source and gets
    its own label.
    """
    if not np.isfinite(sigma):
        raise ValueError("sigma must be finite")
    if sigma < 0:
        return Regime.SUPERLINEAR
    if sigma == 0:
        return Regime.LINEAR
    if sigma < 0.5:
        return Regime.SUBLINEAR
    if sigma == 0.5:
        return Regime.CONSTANT_SOURCE
    return Regime.SINGULAR


@dataclass(frozen=True)
class FlowParams:
    """Parameter bundle ``(rho, m, n, S_F)``.

    ``sigma`` and everything derived from it are computed on access, so a
    bundle sitting exactly on the pole is still usable by code that works
    with ``f`` directly (e.g. the coupled base solver).
    """

    rho: float
    m: int
    n: int = 1
    s_fiber: float = 0.0

    def __post_init__(self):
        if self.m < 1 or int(self.m) != self.m:
            raise ValueError(f"m must be a positive integer, got {self.m}")
        if self.n < 1 or int(self.n) != self.n:
            raise ValueError(f"n must be a positive integer, got {self.n}")

    @property
    def sigma(self):
        return derive_sigma(self.rho, self.m)

    @property
    def a_coeff(self):
        return 2.0 * self.m * self.rho

    @property
    def alpha_exp(self):
        return 1.0 - 2.0 * self.sigma

    @property
    def regime(self):
        return regime_of(self.sigma)


class UnifiedCoefficients(NamedTuple):
    """Coefficients of ``u_t = Delta_phi u - a Delta u + b u + c u**alpha``."""

    a: float
    b: object  # float or ndarray, same shape as the supplied S_g
    c: float
    alpha: float


def unified_coefficients(params, s_base=0.0):
    """Map a :class:`FlowParams` and base scalar curvature onto the unified equation.

    ``s_base`` may be a scalar or an array of ``S_g`` samples; ``b`` comes
    back with the same shape.
    """
    sigma = params.sigma
    if sigma == 0.0:
        # u = f**(1/sigma) does not exist; b and c would divide by zero.
        raise PoleError(
            f"sigma = 0 at rho={params.rho}, m={params.m}", "params.unified_coefficients"
        )
    m, rho = params.m, params.rho
    a = 2.0 * m * rho
    b = (rho / sigma) * np.asarray(s_base, dtype=float)
    if b.ndim == 0:
        b = float(b)
    c = (m * rho - 1.0) / (m * sigma) * params.s_fiber
    return UnifiedCoefficients(a, b, c, 1.0 - 2.0 * sigma)
