"""How the gradient-estimate ratio moves with the localization radius."""

import math

from warpflow import ansatz, suites
from warpflow.estimate import cutoff_constants, verify_estimate, verify_estimate_scenario

if __name__ == "__main__":
    traj = suites.heat_estimate_trajectory(201)
    sc = ansatz.catalog("hyperbolic-immortal")
    print("   R   heat    hyperbolic-immortal")
    for R in (2.0, 4.0, 8.0, 16.0, 32.0):
        heat = verify_estimate(traj, suites.heat_estimate_params(R), math.pi / 2).sup_ratio
        hyp = verify_estimate_scenario(sc, suites.hyperbolic_estimate_params(sc, R), suites.HYPERBOLIC_WINDOW, npts=21)
        print(f"{R:5.0f}  {heat:.5f}  {hyp.sup_ratio:.5f}")
    out = cutoff_constants(4.0, 0.0, 0.0, 1.0)
    print(f"cut-off constants: C = {out['C_time']:.4f}, C_1/2 = {out['C_eps']:.2f}")
