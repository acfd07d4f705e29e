"""Finite-difference stencils on uniform 1-D grids (last axis)."""

import numpy as np


def _shifted(u):
    # derivatives ignore constants; the shift makes them exactly zero on flat data
    u = np.asarray(u, dtype=float)
    return u - u[..., :1]


def d1(u, h):
    """Second-order first derivative; one-sided second-order at the ends."""
    u = _shifted(u)
    out = np.empty_like(u)
    out[..., 1:-1] = (u[..., 2:] - u[..., :-2]) / (2 * h)
    out[..., 0] = (-3 * u[..., 0] + 4 * u[..., 1] - u[..., 2]) / (2 * h)
    out[..., -1] = (3 * u[..., -1] - 4 * u[..., -2] + u[..., -3]) / (2 * h)
    return out


def d2(u, h):
    """Second-order second derivative; one-sided second-order at the ends."""
    u = _shifted(u)
    out = np.empty_like(u)
    out[..., 1:-1] = (u[..., 2:] - 2 * u[..., 1:-1] + u[..., :-2]) / h**2
    out[..., 0] = (2 * u[..., 0] - 5 * u[..., 1] + 4 * u[..., 2] - u[..., 3]) / h**2
    out[..., -1] = (2 * u[..., -1] - 5 * u[..., -2] + 4 * u[..., -3] - u[..., -4]) / h**2
    return out


def d1_4(u, h):
    """Fourth-order first derivative; one-sided fourth-order near the ends."""
    u = _shifted(u)
    out = np.empty_like(u)
    out[..., 2:-2] = (
        -u[..., 4:] + 8 * u[..., 3:-1] - 8 * u[..., 1:-3] + u[..., :-4]
    ) / (12 * h)
    # forward/backward 5-point stencils
    fw = np.array([-25, 48, -36, 16, -3]) / (12 * h)
    fw1 = np.array([-3, -10, 18, -6, 1]) / (12 * h)
    out[..., 0] = u[..., :5] @ fw
    out[..., 1] = u[..., :5] @ fw1
    out[..., -1] = -(u[..., -5:][..., ::-1] @ fw)
    out[..., -2] = -(u[..., -5:][..., ::-1] @ fw1)
    return out


def d2_4(u, h):
    """Fourth-order second derivative; one-sided fourth-order near the ends."""
    u = _shifted(u)
    out = np.empty_like(u)
    out[..., 2:-2] = (
        -u[..., 4:] + 16 * u[..., 3:-1] - 30 * u[..., 2:-2] + 16 * u[..., 1:-3] - u[..., :-4]
    ) / (12 * h**2)
    fw = np.array([45, -154, 214, -156, 61, -10]) / (12 * h**2)
    fw1 = np.array([10, -15, -4, 14, -6, 1]) / (12 * h**2)
    out[..., 0] = u[..., :6] @ fw
    out[..., 1] = u[..., :6] @ fw1
    out[..., -1] = u[..., -6:][..., ::-1] @ fw
    out[..., -2] = u[..., -6:][..., ::-1] @ fw1
    return out
