"""Grid-refinement study for the heat reduction and the cosh family."""

import math

import numpy as np

from warpflow import suites


def heat_error(npts, t=0.1):
    traj = suites.heat_trajectory(npts, t)
    return float(np.max(np.abs(traj.u[-1] - suites.heat_exact(traj.x, t))))


def cosh_error(npts, t=0.25):
    traj, sc = suites.cosh_trajectory("cosh-einstein", npts, t)
    ea, ef = suites.cosh_exact(sc)(traj.x, t)
    return max(float(np.max(np.abs(traj.a[-1] / ea - 1))), float(np.max(np.abs(traj.f[-1] / ef - 1))))


def table(label, fn, levels):
    print(label)
    prev = None
    for n in levels:
        err = fn(n)
        rate = "" if prev is None else f"{math.log2(prev / err):6.3f}"
        print(f"  npts={n:4d}  error={err:.3e}  order={rate}")
        prev = err


if __name__ == "__main__":
    table("heat reduction, t = 0.1", heat_error, (51, 101, 201, 401))
    table("cosh-einstein, t = 0.25", cosh_error, (51, 101, 201))
