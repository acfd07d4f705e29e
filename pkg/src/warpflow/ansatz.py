"""Explicit warped solutions from the homothetic conformal ansatz.

Every catalog entry has the form

    gbar(x, t) = a(t) mu(xi)**-2 <,> + a(t)**(2 k) f(xi)**2 g_F,
    a(t) = 1 + c0 t,   k = c1/c2,   xi = <x, axis>,

with a time-independent drift ``phi(xi)`` and an Einstein fiber
``Ric_F = kappa g_F``. For Ricci-flat fibers the flow reduces to three ODEs
in ``xi`` (:func:`residuals`); :func:`flow_residual` instead checks the
flow equation itself through the warped-product curvature blocks, which also
covers the Einstein-fiber scenarios.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFit, DomainError, NoSolution, PositivityError, UnknownScenario
from .geometry import AnsatzFrame, Profile, ProfileSet, conformal_base_data, warped_components
from .params import FlowParams

# ---------------------------------------------------------------------------
# ODE system


@dataclass(frozen=True)
class AnsatzConstants:
    """``c0`` and the ratio ``c1/c2``; only these combinations enter the flow."""

    c0: float
    c1_over_c2: float

    @property
    def c0_c1_over_c2(self):
        return self.c0 * self.c1_over_c2

    @property
    def self_similar(self):
        return self.c1_over_c2 == 0.5

    def scale(self, t):
        return 1.0 + self.c0 * np.asarray(t, dtype=float)

    def time_domain(self):
        """Maximal interval on which ``1 + c0 t > 0``."""
        if self.c0 > 0:
            return (-1.0 / self.c0, np.inf)
        if self.c0 < 0:
            return (-np.inf, -1.0 / self.c0)
        return (-np.inf, np.inf)


def residuals(profiles, n, m, rho, constants, xi):
    """Left-hand sides of the three ansatz equations at ``xi``.

    ``constants`` is an :class:`AnsatzConstants` or a plain
    ``(c0, c0*c1/c2)`` pair. All three returned values vanish exactly when
    the profiles solve the system at ``xi``.
    """
    if isinstance(constants, AnsatzConstants):
        c0, k = constants.c0, constants.c0_c1_over_c2
    else:
        c0, k = constants
    mu, mu1, mu2 = profiles.mu.derivs(xi)
    f, f1, f2 = profiles.f.derivs(xi)
    _, p1, p2 = profiles.phi.derivs(xi)
    if np.any(mu <= 0) or np.any(f <= 0):
        raise PositivityError("mu and f must be positive", "ansatz.residuals")
    M1, M2 = mu1 / mu, mu2 / mu
    F1, F2 = f1 / f, f2 / f

    r1 = (n - 2) * M2 - m * F2 - 2 * m * F1 * M1 + p2 + 2 * M1 * p1
    r2 = (
        (1 - 2 * (n - 1) * rho) * M2
        - (n - 1) * (1 - n * rho) * M1**2
        + m * (1 - 2 * (n - 2) * rho) * M1 * F1
        + 2 * m * rho * F2
        + m * (m - 1) * rho * F1**2
        - M1 * p1
        + c0 / (2 * mu**2)
    )
    r3 = (
        -(1 - 2 * m * rho) * F2
        + (n - 2) * (1 - 2 * m * rho) * M1 * F1
        - (m - 1) * (1 - m * rho) * F1**2
        + p1 * F1
        - 2 * rho * (n - 1) * M2
        + rho * n * (n - 1) * M1**2
        + k / mu**2
    )
    return r1, r2, r3


FIT_TOL = 1e-8


def solve_constants(profiles, n, m, rho, sample_xis, tol=FIT_TOL):
    """Least-squares fit of ``(c0, c0*c1/c2)`` for fixed profiles.

    Both constants enter linearly (through ``c0/(2 mu^2)`` and
    ``c0 c1/(c2 mu^2)``), so the fit is one linear solve over the samples.
    Raises :class:`NoSolution` when the best fit leaves a residual of at least
    ``tol`` anywhere, including in the constant-free first equation.
    """
    xs = np.atleast_1d(np.asarray(sample_xis, dtype=float))
    if xs.size < 2:
        raise ValueError("need at least two sample points")
    r1, r2, r3 = residuals(profiles, n, m, rho, (0.0, 0.0), xs)
    mu = profiles.mu(xs)
    zeros = np.zeros_like(xs)
    A = np.vstack(
        [np.column_stack([1 / (2 * mu**2), zeros]), np.column_stack([zeros, 1 / mu**2])]
    )
    rhs = -np.concatenate([r2, r3])
    sol, _, rank, sv = np.linalg.lstsq(A, rhs, rcond=None)
    if rank < 2 or sv[-1] <= 1e-12 * sv[0]:
        raise DegenerateFit("constant terms are not identifiable from the samples", "ansatz.solve_constants")
    c0, k = (float(v) for v in sol)
    worst = max(np.max(np.abs(r)) for r in residuals(profiles, n, m, rho, (c0, k), xs))
    if not worst < tol:
        raise NoSolution(f"post-fit residual {worst:.3e} >= {tol:g}", worst, "ansatz.solve_constants")
    return c0, k


# ---------------------------------------------------------------------------
# scenarios


@dataclass(frozen=True)
class Scenario:
    """A closed-form warped solution together with its metadata.

    ``sample_box`` bounds the interior samples used for verification:
    ``{"xi": (lo, hi), "t": (lo, hi)}``.
    """

    name: str
    params: FlowParams
    frame: AnsatzFrame
    profiles: ProfileSet
    constants: AnsatzConstants
    fiber_coeff: float = 0.0
    expected_class: str | None = None
    complete: bool = True
    ricci_flat_fiber: bool = True
    sample_box: dict = field(default_factory=dict)
    notes: str = ""

    @property
    def n(self):
        return self.frame.n

    @property
    def m(self):
        return self.params.m

    @property
    def rho(self):
        return self.params.rho

    @property
    def time_domain(self):
        return self.constants.time_domain()

    @property
    def homothetic(self):
        return self.constants.self_similar

    def in_time_domain(self, t):
        lo, hi = self.time_domain
        return lo < t < hi

    def scale(self, t):
        if not self.in_time_domain(t):
            raise DomainError(f"t={t} outside time domain {self.time_domain}", f"ansatz.Scenario[{self.name}]")
        return float(self.constants.scale(t))

    def warp_scale(self, t):
        return self.scale(t) ** self.constants.c1_over_c2

    def profiles_at(self, t):
        """Profiles of the time-``t`` slice: ``mu/sqrt(a)``, ``a**k f``, ``phi``."""
        a = self.scale(t)
        p = self.profiles
        return ProfileSet(p.mu.scaled(a**-0.5), p.f.scaled(a**self.constants.c1_over_c2), p.phi)

    def point(self, xi):
        """A point of ``R^n`` with the given ``xi`` (on the axis line)."""
        return float(xi) * np.asarray(self.frame.axis)

    def metric(self, x, t):
        """Closed-form ``(g_base, f^2)`` at ``(x, t)``.

        ``g_base`` is the ``n x n`` coordinate matrix; the fiber block is
        ``f^2 g_F``.
        """
        xi = self.frame.xi(x)
        a = self.scale(t)
        mu = float(self.profiles.mu(xi))
        f = float(self.profiles.f(xi))
        return a / mu**2 * np.eye(self.n), a ** (2 * self.constants.c1_over_c2) * f**2


def with_perturbation(scenario, f_scale=1.0, c0_scale=1.0):
    """Copy of ``scenario`` with a rescaled warping function and/or ``c0``."""
    p = scenario.profiles
    prof = ProfileSet(p.mu, p.f.scaled(f_scale), p.phi) if f_scale != 1.0 else p
    const = dataclasses.replace(scenario.constants, c0=scenario.constants.c0 * c0_scale)
    return dataclasses.replace(scenario, profiles=prof, constants=const, name=f"{scenario.name}~perturbed")


def is_self_similar(scenario, xis, times, rtol=1e-12):
    """Numerically test whether ``gbar(t)/(1 + c0 t)`` is independent of ``t``."""
    ref = [scenario.metric(scenario.point(xi), 0.0) for xi in xis]
    for t in times:
        a = scenario.scale(t)
        for xi, (g0, w0) in zip(xis, ref):
            g, w = scenario.metric(scenario.point(xi), t)
            if not (np.allclose(g / a, g0, rtol=rtol, atol=0) and np.isclose(w / a, w0, rtol=rtol, atol=0)):
                return False
    return True


# ---------------------------------------------------------------------------
# flow residual


def flow_residual(scenario, x, t, dt_fd=1e-4):
    """Max-norm of ``d/dt gbar + 2 Q`` at ``(x, t)``.

    ``Q = Ric + Hess(phi) - rho S gbar`` is assembled from the horizontal and
    vertical blocks of the warped product; the time derivative is a centered
    difference of the closed-form metric. Mixed components vanish for a
    base-only drift and are not evaluated.
    """
    lo, hi = scenario.time_domain
    if not (lo < t - dt_fd and t + dt_fd < hi):
        raise DomainError(f"t={t} +- {dt_fd} leaves {scenario.time_domain}", "ansatz.flow_residual")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (scenario.n,):
        raise DomainError(f"point must lie in R^{scenario.n}", "ansatz.flow_residual")
    xi = float(scenario.frame.xi(x))

    g_p, w_p = scenario.metric(x, t + dt_fd)
    g_m, w_m = scenario.metric(x, t - dt_fd)
    dg = (g_p - g_m) / (2 * dt_fd)
    dw = (w_p - w_m) / (2 * dt_fd)

    base = conformal_base_data(scenario.profiles_at(t), scenario.frame, xi)
    m, rho = scenario.m, scenario.rho
    wc = warped_components(base, m, m * scenario.fiber_coeff, scenario.fiber_coeff)
    q_h = wc.ric_horizontal + base.hess_phi - rho * wc.scalar * base.metric
    q_v = wc.ric_vertical_coeff + base.f * base.grad_f_phi - rho * wc.scalar * base.f**2
    return max(float(np.max(np.abs(dg + 2 * q_h))), abs(dw + 2 * q_v))


# ---------------------------------------------------------------------------
# catalog


def _log_profile(scale):
    s = float(scale)
    return Profile(lambda x: s * np.log(x), lambda x: s / x, lambda x: -s / x**2, (0.0, np.inf), f"{s}*ln")


def _identity_profile(domain=(0.0, np.inf)):
    return Profile(lambda x: x, lambda x: 1.0 + 0 * x, lambda x: 0 * x, domain, "xi")


def hyperbolic_constants(n, m, rho):
    """``(c0, c0 c1/c2)`` for ``mu = f = xi``, ``phi = 2 m ln xi``."""
    q = n * n - n - 2 * n * m + m * m + 3 * m
    return 2 * ((n + m - 1) - rho * q), -((n + m - 1) + rho * q)


def hyperbolic_scenario(n, m, rho, name=None, expected_class=None, sample_t=(0.0, 1.0)):
    """Hyperbolic base ``x_n**-2 <,>`` warped by ``f = x_n`` over a Ricci-flat fiber."""
    c0, k = hyperbolic_constants(n, m, rho)
    dom = (0.0, np.inf)
    prof = ProfileSet(_identity_profile(dom), _identity_profile(dom), _log_profile(2 * m))
    const = AnsatzConstants(c0, k / c0)
    if expected_class is None:
        expected_class = "TypeIII" if c0 > 0 else "TypeI"
    return Scenario(
        name=name or f"hyperbolic(n={n},m={m},rho={rho:g})",
        params=FlowParams(rho, m, n, 0.0),
        frame=AnsatzFrame.along_last(n, dom),
        profiles=prof,
        constants=const,
        expected_class=expected_class,
        sample_box={"xi": (0.5, 2.0), "t": sample_t},
        notes="mu = f = x_n, phi = 2m ln x_n on the upper half-space; Ricci-flat fiber",
    )


def halfspace_product_scenario(n=3, m=2, rho=0.1):
    """``mu = xi``, ``f = 1``, constant drift: the hyperbolic base times a rescaled fiber."""
    dom = (0.0, np.inf)
    c0 = 2 * (n - 1) * (1 - n * rho)
    prof = ProfileSet(_identity_profile(dom), Profile.constant(1.0, dom), Profile.constant(0.0, dom))
    return Scenario(
        name="halfspace-product",
        params=FlowParams(rho, m, n, 0.0),
        frame=AnsatzFrame.along_last(n, dom),
        profiles=prof,
        constants=AnsatzConstants(c0, -n * rho / (2 * (1 - n * rho))),
        expected_class="TypeIII" if c0 > 0 else None,
        sample_box={"xi": (0.5, 2.0), "t": (0.0, 1.0)},
        notes="half-space R^n_* with mu = xi, f = 1, constant phi",
    )


def exp_incomplete_scenario(axis=(0.6, 0.8)):
    """``mu = e^xi``, ``f = 1 + e^{-2 xi}/2``, ``phi = -e^{-2 xi}/4`` with rho = 1/4.

    The base metric is not complete, so classification skips this entry.
    """
    e = lambda x, k=1.0: k * np.exp(-2 * x)  # noqa: E731
    mu = Profile(np.exp, np.exp, np.exp, name="exp")
    f = Profile(lambda x: 1 + e(x, 0.5), lambda x: e(x, -1.0), lambda x: e(x, 2.0), name="1+e^-2x/2")
    phi = Profile(lambda x: e(x, -0.25), lambda x: e(x, 0.5), lambda x: e(x, -1.0), name="-e^-2x/4")
    return Scenario(
        name="exp-incomplete",
        params=FlowParams(0.25, 1, 2, 0.0),
        frame=AnsatzFrame(2, tuple(axis)),
        profiles=ProfileSet(mu, f, phi),
        constants=AnsatzConstants(1.0, 1.0),
        expected_class=None,
        complete=False,
        sample_box={"xi": (-1.0, 1.0), "t": (0.0, 1.0)},
        notes="incomplete base; excluded from classification",
    )


def cosh_scenario(total_dim=3, rho=0.0, name=None, expected_class=None):
    """``a(t) (dr^2 + cosh^2 r g_H)`` over a hyperbolic fiber ``H^{N-1}``.

    ``h = dr^2 + cosh^2 r g_H`` is Einstein with ``Ric_h = -(N-1) h``, so the
    homothetic family solves the flow with ``a' = 2(N-1)(1 - rho N)``.
    ``rho = 1/N`` makes it static.
    """
    N = int(total_dim)
    if N < 3:
        raise ValueError("need a fiber of dimension >= 2")
    m = N - 1
    kappa = -(m - 1.0)
    zero = Profile.constant(0.0)
    prof = ProfileSet(Profile.constant(1.0), Profile(np.cosh, np.sinh, np.cosh, name="cosh"), zero)
    c0 = 2 * (N - 1) * (1 - rho * N)
    if expected_class is None:
        expected_class = "TypeIII" if c0 > 0 else ("TypeIIb" if c0 == 0 else "TypeI")
    return Scenario(
        name=name or f"cosh(N={N},rho={rho:g})",
        params=FlowParams(rho, m, 1, m * kappa),
        frame=AnsatzFrame(1, (1.0,)),
        profiles=prof,
        constants=AnsatzConstants(c0, 0.5),
        fiber_coeff=kappa,
        expected_class=expected_class,
        ricci_flat_fiber=False,
        sample_box={"xi": (-2.0, 2.0), "t": (0.0, 2.0)},
        notes="f = sqrt(a) cosh r over H^{N-1}; hyperbolic N-space up to the homothety",
    )


CATALOG = {
    "hyperbolic-general": lambda: hyperbolic_scenario(3, 2, 0.1, name="hyperbolic-general", sample_t=(0.2, 1.0)),
    "hyperbolic-immortal": lambda: hyperbolic_scenario(2, 1, 1 / 3, name="hyperbolic-immortal"),
    "hyperbolic-ancient": lambda: hyperbolic_scenario(
        2, 1, 2.0, name="hyperbolic-ancient", expected_class="TypeI", sample_t=(-1.0, 0.0)
    ),
    "halfspace-product": halfspace_product_scenario,
    "exp-incomplete": exp_incomplete_scenario,
    "cosh-einstein": lambda: cosh_scenario(3, 0.0, name="cosh-einstein"),
    "cosh-static": lambda: cosh_scenario(3, 1 / 3, name="cosh-static"),
}


def catalog(name):
    """Build the named catalog scenario."""
    try:
        return CATALOG[name]()
    except KeyError:
        raise UnknownScenario(f"{name!r}; known: {', '.join(CATALOG)}", "ansatz.catalog") from None


def catalog_names():
    return list(CATALOG)
