"""Command-line driver: ``warpflow <mode> [--config cfg.yaml] [--scenario NAME] [--out DIR] [--seed N]``.

Each mode writes plot-ready CSV files and a ``summary.json`` into the output
directory. The output directory is taken from ``--out``, then the
``WARPFLOW_OUT`` environment variable, then ``output_dir`` in the config,
then ``./warpflow-out``.

Exit status: 0 success, 1 invalid input, 2 numerical failure, 3 a property
check failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import ansatz, classify, estimate, reduced_flow, suites
from .errors import ConfigError, NumericalFailure, ValidationError, WarpflowError

SCHEMA_VERSION = 1
ENV_OUT = "WARPFLOW_OUT"
DEFAULT_OUT = "warpflow-out"

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_CHECK = 0, 1, 2, 3

MODES = ("catalog", "simulate", "verify-ansatz", "verify-flow", "verify-estimate", "identity-check", "classify")


class PropertyFailure(Exception):
    """A verification ran to completion but missed its tolerance."""


# ---------------------------------------------------------------------------
# config and output


def load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}", "cli.load_config") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}", "cli.load_config") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a mapping", "cli.load_config")
    version = cfg.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, got {version!r}", "cli.load_config")
    return cfg


def resolve_out(args, cfg):
    out = args.out or os.environ.get(ENV_OUT) or cfg.get("output_dir") or DEFAULT_OUT
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def write_summary(out, summary):
    with open(out / "summary.json", "w") as fh:
        json.dump(_jsonable(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _section(cfg, key):
    val = cfg.get(key, {}) or {}
    if not isinstance(val, dict):
        raise ConfigError(f"'{key}' must be a mapping", "cli.run")
    return val


def solver_config(cfg):
    sec = _section(cfg, "solver")
    known = {"integrator", "boundary", "dt", "cfl", "cfl_limit", "u_floor"}
    extra = set(sec) - known - {"npts", "x_lo", "x_hi"}
    if extra:
        raise ConfigError(f"unknown solver keys: {sorted(extra)}", "cli.solver_config")
    kw = {k: sec[k] for k in known if k in sec}
    kw.setdefault("boundary", reduced_flow.Boundary.DIRICHLET)
    try:
        return reduced_flow.SolverConfig(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc), "cli.solver_config") from None


# ---------------------------------------------------------------------------
# modes


def run_catalog(args, cfg, out):
    if args.action == "list":
        rows = []
        for name in ansatz.catalog_names():
            sc = ansatz.catalog(name)
            rows.append((name, sc.n, sc.m, sc.rho, sc.constants.c0, sc.constants.c1_over_c2, sc.expected_class or ""))
            print(f"{name:22s} n={sc.n} m={sc.m} rho={sc.rho:.6g} c0={sc.constants.c0:.6g}")
        write_csv(out / "catalog.csv", ["name", "n", "m", "rho", "c0", "c1_over_c2", "expected_class"], rows)
        return {"mode": "catalog", "entries": ansatz.catalog_names()}
    name = args.name or args.scenario
    if not name:
        raise ConfigError("catalog show needs a scenario name", "cli.catalog")
    sc = ansatz.catalog(name)
    info = {
        "name": sc.name,
        "n": sc.n,
        "m": sc.m,
        "rho": sc.rho,
        "s_fiber": sc.params.s_fiber,
        "fiber_einstein_coeff": sc.fiber_coeff,
        "c0": sc.constants.c0,
        "c1_over_c2": sc.constants.c1_over_c2,
        "time_domain": list(sc.time_domain),
        "axis": list(sc.frame.axis),
        "complete": sc.complete,
        "self_similar": sc.homothetic,
        "expected_class": sc.expected_class,
        "notes": sc.notes,
    }
    print(json.dumps(_jsonable(info), indent=2, sort_keys=True))
    return {"mode": "catalog", "scenario": info}


def run_simulate(args, cfg, out):
    sec = _section(cfg, "simulate")
    ssec = _section(cfg, "solver")
    config = solver_config(cfg)
    name = args.scenario or cfg.get("scenario") or "cosh-einstein"
    t_end = float(sec.get("t_end", 1.0 if name != "heat" else 0.1))
    nout = int(sec.get("n_outputs", 5))
    times = sec.get("output_times") or list(np.linspace(0.0, t_end, nout + 1)[1:])
    npts = int(ssec.get("npts", 401 if name != "heat" else 201))

    if name == "heat":
        grid = reduced_flow.Grid1D(float(ssec.get("x_lo", 0.0)), float(ssec.get("x_hi", math.pi)), npts)
        traj = reduced_flow.evolve_scalar(
            suites.heat_exact(grid.x, 0.0), (0.0, 0.0, 0.0, 1.0), 0.0, 1.0, grid, config, 0.0, t_end,
            suites.heat_exact, times,
        )
        rows, worst = [], 0.0
        for t, u in zip(traj.t, traj.u):
            ex = suites.heat_exact(traj.x, t)
            for xv, uv, ev in zip(traj.x, u, ex):
                rows.append((t, xv, 1.0, uv, uv, uv - ev))
            worst = max(worst, float(np.max(np.abs(u - ex))))
        tol = float(sec.get("tolerance", 1e-4))
    else:
        sc = ansatz.catalog(name)
        if sc.n != 1:
            raise ValidationError(f"simulate needs a one-dimensional base; {name} has n={sc.n}", "cli.simulate")
        x_lo, x_hi = float(ssec.get("x_lo", -2.0)), float(ssec.get("x_hi", 2.0))
        traj, sc = suites.cosh_trajectory(name, npts, t_end, x_lo, x_hi, times, config)
        exact = suites.cosh_exact(sc)
        try:
            inv_sigma = 1.0 / sc.params.sigma
        except WarpflowError:
            inv_sigma = math.nan
        rows, worst = [], 0.0
        for st in traj.states:
            ea, ef = exact(traj.x, st.t)
            rel = np.maximum(np.abs(st.a_field / ea - 1), np.abs(st.f_field / ef - 1))
            u = st.f_field**inv_sigma if math.isfinite(inv_sigma) else np.full_like(st.f_field, math.nan)
            for row in zip(traj.x, st.a_field, st.f_field, u, rel):
                rows.append((st.t, *row))
            worst = max(worst, float(np.max(rel)))
        tol = float(sec.get("tolerance", 1e-3))
    write_csv(out / "trajectory.csv", ["t", "x", "a", "f", "u", "error"], rows)
    passed = worst <= tol
    summary = {"mode": "simulate", "scenario": name, "npts": npts, "t_end": t_end, "max_error": worst,
               "tolerance": tol, "checks": {"accuracy": passed}}
    if not passed:
        raise PropertyFailure(summary)
    return summary


def run_verify_ansatz(args, cfg, out):
    sec = _section(cfg, "verify_ansatz")
    name = args.scenario or cfg.get("scenario") or "hyperbolic-immortal"
    sc = ansatz.catalog(name)
    if not sc.ricci_flat_fiber:
        raise ValidationError(f"{name}: the ansatz ODEs assume a Ricci-flat fiber", "cli.verify_ansatz")
    lo, hi = sc.sample_box["xi"]
    npts = int(sec.get("npts", 50))
    xs = np.geomspace(lo, hi, npts) if lo > 0 else np.linspace(lo, hi, npts)
    tol = float(sec.get("tolerance", 1e-10))
    r1, r2, r3 = ansatz.residuals(sc.profiles, sc.n, sc.m, sc.rho, sc.constants, xs)
    write_csv(out / "residuals.csv", ["xi", "r1", "r2", "r3"], zip(xs, r1, r2, r3))
    worst = float(max(np.max(np.abs(r)) for r in (r1, r2, r3)))
    c0, k = ansatz.solve_constants(sc.profiles, sc.n, sc.m, sc.rho, xs)
    fit_err = max(abs(c0 - sc.constants.c0), abs(k - sc.constants.c0_c1_over_c2))
    checks = {"residual": worst < tol, "constants": fit_err < tol}
    summary = {"mode": "verify-ansatz", "scenario": name, "max_residual": worst, "fitted_c0": c0,
               "fitted_c0_c1_over_c2": k, "catalog_c0": sc.constants.c0, "tolerance": tol, "checks": checks}
    if not all(checks.values()):
        raise PropertyFailure(summary)
    return summary


def run_verify_flow(args, cfg, out):
    sec = _section(cfg, "verify_flow")
    name = args.scenario or cfg.get("scenario") or "hyperbolic-immortal"
    sc = ansatz.catalog(name)
    rng = np.random.default_rng(args.seed if args.seed is not None else int(cfg.get("seed", 0)))
    nsamp = int(sec.get("samples", 20))
    dt_fd = float(sec.get("dt_fd", 1e-4))
    tol = float(sec.get("tolerance", 1e-5))
    xlo, xhi = sc.sample_box["xi"]
    tlo, thi = sc.sample_box["t"]
    rows, worst = [], 0.0
    for _ in range(nsamp):
        x = rng.uniform(-1.0, 1.0, sc.n)
        axis = np.asarray(sc.frame.axis)
        x = x - (x @ axis) * axis + rng.uniform(xlo, xhi) * axis
        t = float(rng.uniform(tlo, thi))
        res = ansatz.flow_residual(sc, x, t, dt_fd)
        rows.append((*x, t, res))
        worst = max(worst, res)
    header = [f"x{i + 1}" for i in range(sc.n)] + ["t", "residual"]
    write_csv(out / "residuals.csv", header, rows)
    summary = {"mode": "verify-flow", "scenario": name, "samples": nsamp, "dt_fd": dt_fd, "max_residual": worst,
               "tolerance": tol, "checks": {"residual": worst < tol}}
    if worst >= tol:
        raise PropertyFailure(summary)
    return summary


def run_verify_estimate(args, cfg, out):
    sec = _section(cfg, "estimate")
    name = args.scenario or cfg.get("scenario") or "heat"
    radii = [float(r) for r in sec.get("R_values", [4.0, 8.0, 16.0])]
    rows = []
    if name == "heat":
        T = float(sec.get("T", 0.5))
        npts = int(sec.get("npts", 201))
        trajs = {npts: suites.heat_estimate_trajectory(npts, T), 2 * npts - 1: suites.heat_estimate_trajectory(2 * npts - 1, T)}
        for res, traj in trajs.items():
            for R in radii:
                rep = estimate.verify_estimate(traj, suites.heat_estimate_params(R, T), math.pi / 2)
                rows.append((res, R, rep.sup_ratio, rep.argmax[0], rep.argmax[1], rep.gamma))
        cut = estimate.cutoff_constants(radii[0], T, T, T)
    else:
        sc = ansatz.catalog(name)
        T = float(sec.get("T", 0.25))
        npts = int(sec.get("npts", 21))
        for res in (npts, 2 * npts - 1):
            for R in radii:
                ep = suites.hyperbolic_estimate_params(sc, R, T)
                rep = estimate.verify_estimate_scenario(sc, ep, suites.HYPERBOLIC_WINDOW, npts=res)
                rows.append((res, R, rep.sup_ratio, rep.argmax[0][-1], rep.argmax[1], rep.gamma))
        cut = estimate.cutoff_constants(radii[0], 0.0, 0.0, T)
    write_csv(out / "estimate.csv", ["npts", "R", "sup_ratio", "argmax_x", "argmax_t", "gamma"], rows)
    coarse = [r[2] for r in rows if r[0] == rows[0][0]]
    fine = [r[2] for r in rows if r[0] != rows[0][0]]
    spread_R = (max(coarse) - min(coarse)) / max(coarse)
    spread_h = max(abs(a - b) / a for a, b in zip(coarse, fine))
    checks = {
        "finite": bool(all(math.isfinite(r) for r in coarse + fine)),
        "R_variation_lt_25pct": spread_R < 0.25,
        "refinement_variation_lt_10pct": spread_h < 0.10,
        "cutoff_a": cut["a"], "cutoff_b": cut["b"], "cutoff_c": cut["c"], "cutoff_d": cut["d"],
    }
    summary = {"mode": "verify-estimate", "scenario": name, "sup_ratio": coarse, "sup_ratio_refined": fine,
               "R_values": radii, "R_variation": spread_R, "refinement_variation": spread_h,
               "cutoff_C_time": cut["C_time"], "cutoff_C_eps": cut["C_eps"], "checks": checks}
    if not all(checks.values()):
        raise PropertyFailure(summary)
    return summary


def run_identity_check(args, cfg, out):
    sec = _section(cfg, "identity")
    names = [args.scenario] if args.scenario else list(sec.get("suites", suites.IDENTITY_SUITES))
    levels = [int(n) for n in sec.get("npts", [101, 201, 401])]
    rows, orders = [], {}
    for name in names:
        if name not in suites.IDENTITY_SUITES:
            raise ConfigError(f"unknown identity suite {name!r}", "cli.identity_check")
        res = []
        for n in levels:
            traj, ep, kw = suites.identity_case(name, n)
            r = estimate.evolution_identity_residual(traj, ep, points=suites.identity_points(traj), **kw)
            rows.append((name, n, traj.dx, r))
            res.append(r)
        orders[name] = min(math.log2(a / b) for a, b in zip(res, res[1:]))
    write_csv(out / "residuals.csv", ["suite", "npts", "h", "residual"], rows)
    checks = {name: o >= 1.8 for name, o in orders.items()}
    summary = {"mode": "identity-check", "orders": orders, "checks": checks}
    if not all(checks.values()):
        raise PropertyFailure(summary)
    return summary


def run_classify(args, cfg, out):
    name = args.scenario or cfg.get("scenario") or "cosh-einstein"
    sc = ansatz.catalog(name)
    ts = classify.default_times(sc)
    samples = classify.kmax_profile(sc, ts)
    result = classify.classify(classify.scenario_horizon(sc), samples)
    write_csv(out / "kmax.csv", ["t", "kmax"], samples)
    label = result.label.value
    summary = {"mode": "classify", "scenario": name, "label": label, "exponent": result.exponent,
               "sup_stat": result.sup_stat, "horizon": result.horizon, "expected": sc.expected_class,
               "checks": {"matches_expected": sc.expected_class in (None, label)}}
    print(f"{name}: {label} (exponent {result.exponent:.4g})")
    if sc.expected_class not in (None, label):
        raise PropertyFailure(summary)
    return summary


RUNNERS = {
    "catalog": run_catalog,
    "simulate": run_simulate,
    "verify-ansatz": run_verify_ansatz,
    "verify-flow": run_verify_flow,
    "verify-estimate": run_verify_estimate,
    "identity-check": run_identity_check,
    "classify": run_classify,
}


# ---------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--out", help=f"output directory (env {ENV_OUT} also accepted)")
    common.add_argument("--seed", type=int, help="seed for sample-point selection")
    common.add_argument("--scenario", help="catalog scenario, or 'heat' for the heat-reduction suite")

    parser = _Parser(prog="warpflow", description="Warped Ricci-Bourguignon flow toolkit")
    sub = parser.add_subparsers(dest="mode", required=True, parser_class=_Parser)
    cat = sub.add_parser("catalog", parents=[common], help="list or show catalog scenarios")
    cat.add_argument("action", choices=("list", "show"))
    cat.add_argument("name", nargs="?")
    for mode in MODES[1:]:
        sub.add_parser(mode, parents=[common])
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None and args.seed < 0:
            raise ConfigError("seed must be nonnegative", "cli.main")
        out = resolve_out(args, cfg)
        summary = RUNNERS[args.mode](args, cfg, out)
        summary["status"] = "ok"
        write_summary(out, summary)
        return EXIT_OK
    except PropertyFailure as exc:
        summary = exc.args[0]
        summary["status"] = "check-failed"
        write_summary(out, summary)
        failed = [k for k, v in summary.get("checks", {}).items() if not v]
        print(f"property check failed in {args.mode}: {', '.join(failed)}", file=sys.stderr)
        return EXIT_CHECK
    except NumericalFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except WarpflowError as exc:
        # NoSolution / DegenerateFit: the profiles failed verification
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
