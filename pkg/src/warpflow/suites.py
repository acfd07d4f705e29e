"""Reference problems with closed-form solutions.

These are the fixed workloads used by the CLI, the demos and the test
suite: the heat reduction on ``[0, pi]``, the cosh family evolved from its
``t = 0`` slice, synthetic trajectories for the evolution identity and the
estimate presets.
"""

from __future__ import annotations

import math

import numpy as np

from .ansatz import catalog
from .estimate import EstimateParams
from .reduced_flow import (
    Boundary,
    CoupledState,
    CoupledTrajectory,
    Grid1D,
    ScalarTrajectory,
    SolverConfig,
    evolve_coupled,
    evolve_scalar,
)

BUILTIN = ("heat",)


# ---------------------------------------------------------------------------
# heat reduction: rho = 0, m = 1, Ricci-flat fiber, flat base


def heat_exact(x, t):
    return np.exp(-t) * np.sin(x)


def heat_positive_exact(x, t):
    """Positive variant ``1 + e^{-t} sin x`` used where ``u > 0`` is required."""
    return 1.0 + np.exp(-t) * np.sin(x)


def heat_trajectory(npts=201, t_end=0.1, output_times=None, positive=False, config=None):
    """Solve ``u_t = u_xx`` on ``[0, pi]`` with Dirichlet data from the exact solution."""
    grid = Grid1D(0.0, math.pi, npts)
    exact = heat_positive_exact if positive else heat_exact
    config = config or SolverConfig(boundary=Boundary.DIRICHLET)
    return evolve_scalar(
        exact(grid.x, 0.0), (0.0, 0.0, 0.0, 1.0), 0.0, 1.0, grid, config, 0.0, t_end, exact, output_times
    )


def heat_coupled(npts=201, t_end=0.1, output_times=None, positive=True, config=None):
    """The same problem through the coupled solver: ``f`` with ``A = 1`` frozen."""
    from .params import FlowParams

    grid = Grid1D(0.0, math.pi, npts)
    exact = heat_positive_exact if positive else heat_exact

    def pinned(x, t):
        return np.ones_like(x), exact(x, t)

    config = config or SolverConfig(boundary=Boundary.DIRICHLET, freeze_metric=True)
    state = CoupledState(0.0, np.ones(npts), exact(grid.x, 0.0), np.zeros(npts), "heat")
    params = FlowParams(0.0, 1, 1, 0.0)
    return evolve_coupled(state, params, t_end, config, grid, pinned, output_times), params


def heat_change_of_variables_case(npts=201, t_mid=0.05, dt_ratio=0.5):
    """Three solver snapshots around ``t_mid``, spaced ``dt_ratio * h`` apart."""
    h = math.pi / (npts - 1)
    ts = t_mid + dt_ratio * h * np.arange(-1, 2)
    traj, params = heat_coupled(npts, ts[-1], ts, positive=True)
    return CoupledTrajectory(traj.x, traj.states[1:]), params


def scale_warping(traj, factor):
    """Copy of a coupled trajectory with ``f`` multiplied by ``factor(x)``."""
    w = factor(traj.x)
    states = [CoupledState(s.t, s.a_field, s.f_field * w, s.phi_field, s.provenance + " (rescaled)") for s in traj.states]
    return CoupledTrajectory(traj.x, states)


# ---------------------------------------------------------------------------
# cosh family


def cosh_exact(scenario):
    """``(A(x, t), f(x, t))`` of a cosh catalog scenario on its 1-D base."""

    def exact(x, t):
        a = scenario.scale(t)
        x = np.asarray(x, dtype=float)
        return np.full_like(x, a), a ** scenario.constants.c1_over_c2 * np.cosh(x)

    return exact


def cosh_trajectory(name="cosh-einstein", npts=401, t_end=1.0, x_lo=-2.0, x_hi=2.0, output_times=None, config=None):
    sc = catalog(name)
    grid = Grid1D(x_lo, x_hi, npts)
    exact = cosh_exact(sc)
    a0, f0 = exact(grid.x, 0.0)
    state = CoupledState(0.0, a0, f0, np.zeros(npts), f"{name} t=0 slice")
    config = config or SolverConfig(boundary=Boundary.DIRICHLET)
    return evolve_coupled(state, sc.params, t_end, config, grid, exact, output_times), sc


# ---------------------------------------------------------------------------
# synthetic trajectories for the evolution identity


def _sampled(ufn, afn, phifn, lo, hi, npts, t_mid, dt):
    x = np.linspace(lo, hi, npts)
    ts = t_mid + dt * np.arange(-1, 2)
    X, Tt = np.meshgrid(x, ts)
    u = ufn(X, Tt)
    a = afn(X, Tt) * np.ones_like(X)
    return ScalarTrajectory(x, ts, u, a, phifn(x) * np.ones_like(x))


IDENTITY_SUITES = {
    # name: (u, A, phi, interval, nonlinear kwargs, estimate constants)
    "heat": (
        lambda x, t: 1 + np.exp(-t) * np.sin(x),
        lambda x, t: 1.0,
        lambda x: 0 * x,
        (0.2, 3.0),
        {},
        dict(p=1.0, q=1 + math.log(2.5), delta=0.1, D=2.5),
    ),
    "gaussian": (
        lambda x, t: np.exp(-(x**2) / (4 * t)) / np.sqrt(t),
        lambda x, t: 1.0,
        lambda x: 0 * x,
        (-2.0, 2.0),
        {},
        dict(p=1.0, q=3.0, delta=0.1, D=2.5),
    ),
    # u = A cosh^2 x with A = 1 + 4t solves u_t = Delta u + 2 on the evolving line
    "cosh": (
        lambda x, t: (1 + 4 * t) * np.cosh(x) ** 2,
        lambda x, t: 1 + 4 * t,
        lambda x: 0 * x,
        (-1.5, 1.5),
        {"c": 2.0, "alpha": 0.0},
        dict(p=0.5, q=3.0, delta=0.1, D=40.0),
    ),
    # u = 2 + exp(x/2 - t/4) solves u_t = u'' - u' (drift phi = x)
    "drift": (
        lambda x, t: 2 + np.exp(x / 2 - t / 4),
        lambda x, t: 1.0,
        lambda x: x,
        (-2.0, 2.0),
        {},
        dict(p=1.0, q=3.0, delta=0.1, D=10.0),
    ),
}


def identity_case(name, npts, t_mid=1.0, dt_ratio=0.5):
    """Trajectory (three snapshots, ``dt = dt_ratio * h``) and its inputs."""
    ufn, afn, phifn, (lo, hi), kw, consts = IDENTITY_SUITES[name]
    h = (hi - lo) / (npts - 1)
    traj = _sampled(ufn, afn, phifn, lo, hi, npts, t_mid, dt_ratio * h)
    return traj, EstimateParams(**consts), kw


def identity_points(traj, count=5):
    """Node indices of ``count`` fixed physical points in the middle of the interval."""
    x = traj.x
    lo, hi = x[0], x[-1]
    targets = np.linspace(lo + 0.3 * (hi - lo), hi - 0.3 * (hi - lo), count)
    return np.array([int(np.argmin(np.abs(x - v))) for v in targets])


# ---------------------------------------------------------------------------
# estimate presets


def heat_estimate_params(R=4.0, T=0.5):
    D = 2.5
    return EstimateParams(p=1.0, q=1 + math.log(D), delta=1.0, D=D, R=R, T=T, t0=T)


def heat_estimate_trajectory(npts=201, T=0.5, nsnap=26):
    return heat_trajectory(npts, T, np.linspace(0.0, T, nsnap), positive=True)


HYPERBOLIC_WINDOW = ((-1.0, 1.0), (math.exp(-0.8), math.exp(0.8)))


def hyperbolic_estimate_params(scenario, R=4.0, T=0.25):
    """Forward-window constants for a hyperbolic catalog scenario.

    ``k1`` is the largest eigenvalue gap of ``(1-a)Ric + Hess phi`` over the
    window (constant on these bases), and ``D`` bounds ``u`` on the window.
    """
    from .geometry import conformal_hessian_matrix, conformal_ricci_matrix
    from .params import derive_sigma

    m, rho = scenario.m, scenario.rho
    a_coeff = 2 * m * rho
    sigma = derive_sigma(rho, m)
    frame, prof = scenario.frame, scenario.profiles
    xi = 1.0
    mat = (1 - a_coeff) * conformal_ricci_matrix(prof, frame, xi) + conformal_hessian_matrix(prof.phi, prof, frame, xi)
    lam = float(np.min(np.linalg.eigvalsh(mat * xi**2)))
    times = np.linspace(0.0, T, 11)
    a_min = min(scenario.scale(t) for t in times)
    k1 = max(0.0, -lam / a_min)
    k2 = max(0.0, -scenario.constants.c0 / (2 * a_min))
    y_lo, y_hi = HYPERBOLIC_WINDOW[1]
    u_max = max(
        (scenario.scale(t) ** scenario.constants.c1_over_c2 * float(prof.f(y))) ** (1 / sigma)
        for t in times
        for y in (y_lo, y_hi)
    )
    D = 1.05 * u_max
    return EstimateParams(
        p=1.0, q=1 + math.log(D), delta=1.0, D=D, k1=k1, k2=k2, R=R, T=T, t0=0.0, mode="forward", a_coeff=a_coeff
    )
