"""Numerical toolkit for warped-product Ricci-Bourguignon flows.

Modules: ``params`` (exponents and coefficients), ``geometry`` (curvature
kernels), ``ansatz`` (ODE reduction and the solution catalog),
``reduced_flow`` (1-D solvers), ``estimate`` (gradient-estimate machinery),
``classify`` (Hamilton types) and ``cli``.
"""

from .params import FlowParams, Regime, derive_sigma, regime_of, unified_coefficients

__all__ = ["FlowParams", "Regime", "derive_sigma", "regime_of", "unified_coefficients"]
__version__ = "0.1.0"
