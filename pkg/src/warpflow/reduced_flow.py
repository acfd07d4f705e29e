"""Method-of-lines solvers on one-dimensional bases.

The base is an interval with metric ``g = A(x) dx^2``; in one dimension
``Ric_g`` and ``S_g`` vanish identically, which the right-hand sides below
use directly. Two systems are integrated with explicit Runge-Kutta steps:

* the scalar equation ``u_t = (1-a) Delta u - <grad phi, grad u> + b u + c u**alpha``;
* the coupled evolution of ``(A, f)`` that a warped metric
  ``A dx^2 + f^2 g_F`` must satisfy to move by the Ricci-Bourguignon flow.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _fd
from .errors import CFLViolation, FloorBreach, NonParabolic, PoleError, PositivityError
from .params import derive_sigma


class Integrator(enum.Enum):
    RK4 = "ExplicitRK4"
    EULER = "ExplicitEuler"


class Boundary(enum.Enum):
    DIRICHLET = "DirichletFromExact"
    NEUMANN0 = "Neumann0"


@dataclass(frozen=True)
class Grid1D:
    x_lo: float
    x_hi: float
    npts: int

    def __post_init__(self):
        if self.npts < 5:
            raise ValueError("need at least 5 grid nodes")
        if not self.x_hi > self.x_lo:
            raise ValueError("empty interval")

    @property
    def h(self):
        return (self.x_hi - self.x_lo) / (self.npts - 1)

    @property
    def x(self):
        return np.linspace(self.x_lo, self.x_hi, self.npts)


@dataclass(frozen=True)
class SolverConfig:
    """Time-stepping policy.

    With ``dt=None`` the step is ``cfl * h^2 / D_max`` (``D_max`` the largest
    diffusion coefficient, re-evaluated every step). A fixed ``dt`` is checked
    against ``cfl_limit * h^2 / D_max`` and rejected if larger.
    """

    integrator: Integrator = Integrator.RK4
    boundary: Boundary = Boundary.NEUMANN0
    dt: float | None = None
    cfl: float = 0.4
    cfl_limit: float = 0.5
    u_floor: float = 1e-10
    freeze_metric: bool = False

    def __post_init__(self):
        object.__setattr__(self, "integrator", Integrator(self.integrator))
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        if not 0 < self.cfl <= 0.5:
            raise ValueError("cfl must lie in (0, 0.5]")


@dataclass
class ScalarTrajectory:
    """Snapshots of a scalar field on a fixed grid; ``u[k]`` is the field at ``t[k]``."""

    x: np.ndarray
    t: np.ndarray
    u: np.ndarray
    metric: np.ndarray
    phi: np.ndarray

    @property
    def dx(self):
        return self.x[1] - self.x[0]


@dataclass
class CoupledState:
    t: float
    a_field: np.ndarray
    f_field: np.ndarray
    phi_field: np.ndarray
    provenance: str = ""


@dataclass
class CoupledTrajectory:
    x: np.ndarray
    states: list = field(default_factory=list)

    @property
    def t(self):
        return np.array([s.t for s in self.states])

    @property
    def a(self):
        return np.array([s.a_field for s in self.states])

    @property
    def f(self):
        return np.array([s.f_field for s in self.states])

    @property
    def phi(self):
        return self.states[0].phi_field

    def as_scalar(self, params):
        """Trajectory of ``u = f**(1/sigma)`` with the evolving metric."""
        sigma = params.sigma
        if sigma == 0:
            raise PoleError("sigma = 0", "reduced_flow.CoupledTrajectory.as_scalar")
        return ScalarTrajectory(self.x, self.t, self.f ** (1.0 / sigma), self.a, self.phi)


# ---------------------------------------------------------------------------
# spatial operators


def _reflect(v):
    """Pad with even ghost nodes (zero normal derivative)."""
    return np.concatenate([v[1:2], v, v[-2:-1]])


def _derivs(v, h, neumann):
    if neumann:
        w = _reflect(v)
        return _fd.d1(w, h)[1:-1], _fd.d2(w, h)[1:-1]
    return _fd.d1(v, h), _fd.d2(v, h)


def scalar_rhs(u, coeffs, phi, metric, h, neumann=False):
    """Right-hand side of the unified scalar equation on a 1-D grid."""
    a, b, c, alpha = coeffs
    metric = np.broadcast_to(np.asarray(metric, dtype=float), u.shape)
    phi = np.broadcast_to(np.asarray(phi, dtype=float), u.shape)
    u1, u2 = _derivs(u, h, neumann)
    g1, _ = _derivs(metric, h, neumann)
    p1, _ = _derivs(phi, h, neumann)
    lap = (u2 - g1 / (2 * metric) * u1) / metric
    out = (1 - a) * lap - p1 * u1 / metric + b * u
    if c != 0:
        out = out + c * u**alpha
    return out


def _check_floor(u, floor, interior_only, where, what="u"):
    v = u[1:-1] if interior_only else u
    if not np.all(v > floor):
        raise FloorBreach(f"{what} fell to {np.min(v):.3e} <= floor {floor:g}", where)


def _check_dt(dt, h, dmax, config, where):
    if config.dt is not None and dt > config.cfl_limit * h * h / dmax * (1 + 1e-12):
        raise CFLViolation(
            f"dt={dt:g} exceeds {config.cfl_limit:g} h^2/D = {config.cfl_limit * h * h / dmax:g}", where
        )


def _rk_step(rhs, y, t, dt, integrator):
    if integrator is Integrator.EULER:
        return y + dt * rhs(y, t)
    k1 = rhs(y, t)
    k2 = rhs(y + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = rhs(y + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = rhs(y + dt * k3, t + dt)
    return y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def step_scalar(u, coeffs, phi, metric, grid, config, dt, t=0.0, exact=None):
    """Advance ``u`` by one explicit step of size ``dt``.

    ``exact(x, t)`` supplies boundary values under
    :attr:`Boundary.DIRICHLET`. Raises :class:`NonParabolic` if ``1 - a <= 0``,
    :class:`CFLViolation` if a fixed ``dt`` breaks the CFL policy, and
    :class:`FloorBreach` if any computed node drops to ``config.u_floor``.
    """
    where = "reduced_flow.step_scalar"
    a = coeffs[0]
    if not 1 - a > 0:
        raise NonParabolic(f"1 - a = {1 - a:g} <= 0", where)
    u = np.asarray(u, dtype=float)
    metric = np.broadcast_to(np.asarray(metric, dtype=float), u.shape)
    h = grid.h
    dirichlet = config.boundary is Boundary.DIRICHLET
    _check_dt(dt, h, np.max((1 - a) / metric), config, where)
    _check_floor(u, config.u_floor, dirichlet, where)

    if dirichlet:
        if exact is None:
            raise ValueError("Dirichlet boundary needs an exact(x, t) callable")
        xb = grid.x[[0, -1]]
        ub_new = np.asarray(exact(xb, t + dt), dtype=float)
        rate = (ub_new - u[[0, -1]]) / dt

    def rhs(v, s):
        out = scalar_rhs(v, coeffs, phi, metric, h, neumann=not dirichlet)
        if dirichlet:
            out[[0, -1]] = rate
        return out

    new = _rk_step(rhs, u, t, dt, config.integrator)
    if dirichlet:
        new[[0, -1]] = ub_new
    _check_floor(new, config.u_floor, dirichlet, where)
    return new


def _schedule(t0, t_end, output_times):
    outs = [float(t_end)] if output_times is None else sorted(float(s) for s in output_times)
    if outs[0] < t0 or outs[-1] > t_end + 1e-15:
        raise ValueError("output times must lie in [t0, t_end]")
    return outs


def evolve_scalar(u0, coeffs, phi, metric, grid, config, t0, t_end, exact=None, output_times=None):
    """Integrate the scalar equation from ``t0`` and return the snapshots.

    The initial field is always the first snapshot; ``output_times`` (default
    ``[t_end]``) are hit exactly by shortening the last step before each.
    """
    a = coeffs[0]
    metric = np.broadcast_to(np.asarray(metric, dtype=float), np.shape(u0))
    dmax = float(np.max((1 - a) / metric)) if 1 - a > 0 else 1.0
    dt_nominal = config.dt if config.dt is not None else config.cfl * grid.h**2 / dmax
    u = np.array(u0, dtype=float)
    t = float(t0)
    times, snaps = [t], [u.copy()]
    for t_out in _schedule(t0, t_end, output_times):
        if t_out <= t:
            continue
        nsteps = max(1, math.ceil((t_out - t) / dt_nominal - 1e-9))
        dt = (t_out - t) / nsteps
        for k in range(nsteps):
            u = step_scalar(u, coeffs, phi, metric, grid, config, dt, t, exact)
            t = t + dt if k < nsteps - 1 else t_out
        times.append(t)
        snaps.append(u.copy())
    phi = np.broadcast_to(np.asarray(phi, dtype=float), u.shape).copy()
    return ScalarTrajectory(
        grid.x, np.array(times), np.array(snaps), np.broadcast_to(metric, (len(times),) + u.shape).copy(), phi
    )


# ---------------------------------------------------------------------------
# coupled base system


def coupled_rhs(a_field, f_field, phi, params, h, neumann=False, freeze_metric=False):
    """Time derivatives ``(A_t, f_t)`` of the warped metric ``A dx^2 + f^2 g_F``."""
    m, rho, s_f = params.m, params.rho, params.s_fiber
    A, f = a_field, f_field
    A1, _ = _derivs(A, h, neumann)
    f1, f2 = _derivs(f, h, neumann)
    p1, p2 = _derivs(np.broadcast_to(phi, f.shape), h, neumann)
    gam = A1 / (2 * A)
    hess_f = f2 - gam * f1
    lap_f = hess_f / A
    grad_f_sq = f1**2 / A
    hess_phi = p2 - gam * p1
    f_dot_phi = f1 * p1 / A
    if freeze_metric:
        dA = np.zeros_like(A)
    else:
        bracket = s_f / f**2 - 2 * m * lap_f / f - m * (m - 1) * grad_f_sq / f**2
        dA = (2 * m / f) * hess_f - 2 * hess_phi + 2 * rho * bracket * A
    df = (1 - 2 * m * rho) * lap_f - f_dot_phi
    # skip vanishing terms so a zero of f on a pinned boundary stays harmless
    if m > 1:
        df = df + (1 - m * rho) * (m - 1) * grad_f_sq / f
    if s_f != 0:
        df = df + (m * rho - 1) / m * s_f / f
    return dA, df


def evolve_coupled(state0, params, t_end, config, grid, exact=None, output_times=None):
    """Integrate the coupled ``(A, f)`` system on a 1-D base.

    ``exact(x, t) -> (A, f)`` pins boundary values under
    :attr:`Boundary.DIRICHLET`. ``phi`` is held fixed. Returns a
    :class:`CoupledTrajectory` whose first state is ``state0``.
    """
    where = "reduced_flow.evolve_coupled"
    m, rho = params.m, params.rho
    diff = 1 - 2 * m * rho
    if not diff > 0:
        raise NonParabolic(f"1 - 2 m rho = {diff:g} <= 0", where)
    dirichlet = config.boundary is Boundary.DIRICHLET
    if dirichlet and exact is None:
        raise ValueError("Dirichlet boundary needs an exact(x, t) callable")
    h, x = grid.h, grid.x
    n = grid.npts
    phi = np.asarray(state0.phi_field, dtype=float)
    y = np.concatenate([np.asarray(state0.a_field, float), np.asarray(state0.f_field, float)])
    t = float(state0.t)
    traj = CoupledTrajectory(x, [state0])
    xb = x[[0, -1]]

    def rhs_factory(rate):
        def rhs(v, s):
            dA, df = coupled_rhs(v[:n], v[n:], phi, params, h, not dirichlet, config.freeze_metric)
            if dirichlet:
                dA[[0, -1]], df[[0, -1]] = rate
            return np.concatenate([dA, df])

        return rhs

    for t_out in _schedule(t, t_end, output_times):
        while t < t_out - 1e-14:
            A, f = y[:n], y[n:]
            _check_floor(A, config.u_floor, dirichlet, where, "metric factor")
            _check_floor(f, config.u_floor, dirichlet, where, "warping function")
            dmax = diff * float(np.max(1 / A))
            dt = config.dt if config.dt is not None else config.cfl * h * h / dmax
            _check_dt(dt, h, dmax, config, where)
            last = t + dt >= t_out - 1e-14
            if last:
                dt = t_out - t
            rate = None
            if dirichlet:
                Ab, fb = (np.asarray(v, float) for v in exact(xb, t + dt))
                rate = ((Ab - A[[0, -1]]) / dt, (fb - f[[0, -1]]) / dt)
            y = _rk_step(rhs_factory(rate), y, t, dt, config.integrator)
            if dirichlet:
                y[[0, n - 1]], y[[n, 2 * n - 1]] = Ab, fb
            t = t_out if last else t + dt
        _check_floor(y[:n], config.u_floor, dirichlet, where, "metric factor")
        _check_floor(y[n:], config.u_floor, dirichlet, where, "warping function")
        traj.states.append(CoupledState(t, y[:n].copy(), y[n:].copy(), phi, state0.provenance))
    return traj


# ---------------------------------------------------------------------------
# change of variables and lift


def change_of_variables_residual(traj, params, time_index=None, node_index=None):
    """Max residual of the scalar equation for ``u = f**(1/sigma)``.

    ``traj`` is a :class:`CoupledTrajectory` with uniformly spaced snapshots.
    Time derivatives are centered differences between snapshots; spatial
    operators use fourth-order stencils, so the result measures the
    trajectory's own truncation error rather than the solver's stencil.
    Samples default to all interior snapshots and nodes at least two nodes
    from the boundary.
    """
    sigma = params.sigma
    if sigma == 0:
        raise PoleError("sigma = 0", "reduced_flow.change_of_variables_residual")
    times = traj.t
    if len(times) < 3:
        raise ValueError("need at least three snapshots")
    dts = np.diff(times)
    if not np.allclose(dts, dts[0], rtol=1e-9):
        raise ValueError("snapshots must be uniformly spaced in time")
    dt = dts[0]
    f = traj.f
    if np.any(f <= 0):
        raise PositivityError("f must be positive", "reduced_flow.change_of_variables_residual")
    u = f ** (1.0 / sigma)
    A = traj.a
    h = traj.x[1] - traj.x[0]
    phi = traj.phi

    m, rho = params.m, params.rho
    a = 2 * m * rho
    c = (m * rho - 1) / (m * sigma) * params.s_fiber
    alpha = 1 - 2 * sigma
    # S_g = 0 on a one-dimensional base, so b vanishes.
    ks = range(1, len(times) - 1) if time_index is None else np.atleast_1d(time_index)
    nodes = slice(2, -2) if node_index is None else np.atleast_1d(node_index)
    p1 = _fd.d1_4(phi, h)
    worst = 0.0
    for k in ks:
        ut = (u[k + 1] - u[k - 1]) / (2 * dt)
        u1, u2 = _fd.d1_4(u[k], h), _fd.d2_4(u[k], h)
        A1 = _fd.d1_4(A[k], h)
        lap = (u2 - A1 / (2 * A[k]) * u1) / A[k]
        rhs = (1 - a) * lap - p1 * u1 / A[k]
        if c != 0:
            rhs = rhs + c * u[k] ** alpha
        worst = max(worst, float(np.max(np.abs((ut - rhs)[nodes]))))
    return worst


def lift_drift(params, u_value, phi_value):
    """Drift ``psi = (1 - 2 m rho) m sigma ln u + phi`` of the lift to the product."""
    u = np.asarray(u_value, dtype=float)
    if np.any(u <= 0):
        raise PositivityError("u must be positive", "reduced_flow.lift_drift")
    m, rho = params.m, params.rho
    sigma = derive_sigma(rho, m)
    out = (1 - 2 * m * rho) * m * sigma * np.log(u) + np.asarray(phi_value, dtype=float)
    return float(out) if out.ndim == 0 else out
