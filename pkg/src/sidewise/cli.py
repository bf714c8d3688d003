"""Command-line front end: scenario orchestration and artifact emission.

Subcommands: solve-forward, solve-adjoint, hum-control, char-control,
penalized, observability-report, convergence.  Every run emits plot-ready
CSV artifacts and a summary.json carrying the minimal control time, the
explicit observability constant, grid parameters and the content hash of
the canonical config, so identical configs and seeds produce bit-identical
artifacts.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import characteristics as chars
from . import hum_control as hum
from . import observability as obs
from .coefficients import beta, minimal_time, theoretical_observability_constant
from .config import ConfigError, RunConfig
from .profiles import parse_profile
from .wave_solver import (TimeSignal, extract_flux, field_to_binary,
                          field_to_csv, make_grid, solve_adjoint, solve_forward)

_FMT = "%.17g"


def _write_csv(path, header: str, columns):
    rows = np.column_stack(columns)
    np.savetxt(path, rows, delimiter=",", header=header, comments="", fmt=_FMT)


def _write_summary(path, payload: dict):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _base_summary(config: RunConfig, coeff, grid) -> dict:
    return {
        "beta": beta(coeff),
        "min_time": minimal_time(coeff),
        "C1_theoretical": theoretical_observability_constant(coeff),
        "grid": {"L": grid.L, "N": grid.N, "T": grid.T, "M": grid.M,
                 "cfl_safety": grid.cfl_safety},
        "config_hash": config.content_hash(),
    }


def _grid_from_config(config: RunConfig, coeff, n_override=None):
    n = n_override if n_override is not None else config.require("grid", "n", int)
    horizon = config.require("grid", "t", float)
    cfl = config.get("grid", "cfl_safety", 0.9, float)
    return make_grid(coeff, n, horizon, cfl)


def _space_signal(config: RunConfig, key: str, grid, coeff):
    spec = config.get("problem", key, "zero")
    func = parse_profile(spec if "(" in spec or ":" in spec
                         else f"{spec}(length={grid.L})" if spec == "eigenmode" else spec)
    return np.asarray(func(grid.x), dtype=float) + np.zeros(grid.N + 1)


def _time_signal(config: RunConfig, key: str, grid, default="zero",
                 active_from=-np.inf) -> TimeSignal:
    spec = config.get("problem", key, default)
    func = parse_profile(spec)
    return TimeSignal.from_callable(func, 0.0, grid.dt, grid.M + 1,
                                    active_from=active_from)


def _target_signal(config: RunConfig, grid, coeff) -> TimeSignal:
    t_min = minimal_time(coeff)
    t_act = config.get("problem", "t_start", t_min, float)
    cut = grid.time_index(max(t_act, 0.0)) * grid.dt
    kind = config.get("problem", "target", None)
    if kind is None:
        raise ConfigError("[problem] missing required key 'target'")
    if kind.strip() == "factored":
        phi = parse_profile(config.require("problem", "target_phi"))
        q = parse_profile(config.require("problem", "target_q"))
        t = grid.t
        prod = np.asarray(phi(t), dtype=float) * np.asarray(q(t), dtype=float)
        vals = np.gradient(prod, grid.dt)
    else:
        vals = np.asarray(parse_profile(kind)(grid.t), dtype=float) + np.zeros(grid.M + 1)
    vals = vals.copy()
    vals[grid.t < cut - 1e-12 * grid.dt] = 0.0
    return TimeSignal(0.0, grid.dt, vals, active_from=cut)


def _emit_control_artifacts(out_dir, config, coeff, grid, result, target):
    _write_csv(os.path.join(out_dir, "control.csv"), "t,u",
               [result.control_u.times, result.control_u.values])
    flux_t = result.achieved_flux.times
    target_vals = target.values if target.values.size == flux_t.size \
        else target.interp(flux_t)
    err = result.achieved_flux.values - target_vals
    _write_csv(os.path.join(out_dir, "flux.csv"), "t,target,achieved,error",
               [flux_t, target_vals, result.achieved_flux.values, err])
    summary = _base_summary(config, coeff, grid)
    summary.update({
        "iterations": result.iterations,
        "J_history": np.asarray(result.J_history),
        "tracking_error_L2": result.tracking_error_L2,
        "converged": bool(result.converged),
    })
    if result.initial_velocity_residual is not None:
        summary["initial_velocity_residual"] = result.initial_velocity_residual
    _write_summary(os.path.join(out_dir, "summary.json"), summary)
    return summary


def run_scenario(config: RunConfig, out_dir: str, seed: int | None = None) -> int:
    """Execute the configured pipeline; 0 exit status means tracking succeeded."""
    os.makedirs(out_dir, exist_ok=True)
    coeff = config.coefficient_field()
    method = config.get("method", "name", "hum").strip()
    grid = _grid_from_config(config, coeff)
    t_min = minimal_time(coeff)
    threshold = config.get("method", "success_threshold", 1e-2, float)
    tol = config.get("method", "tol", 1e-6, float)
    max_iter = config.get("method", "max_iter", 500, int)

    if method in ("hum", "characteristics") and grid.T <= t_min:
        print(f"refused: horizon T = {grid.T:.6g} is at or below the minimal "
              f"control time L*beta = {t_min:.6g}", file=sys.stderr)
        return 2
    if method == "characteristics" and not coeff.is_unit():
        print("refused: the characteristics method requires rho = a = 1",
              file=sys.stderr)
        return 2

    if method == "hum":
        target = _target_signal(config, grid, coeff)
        y0 = _space_signal(config, "y0", grid, coeff)
        y1 = _space_signal(config, "y1", grid, coeff)
        problem = hum.SidewiseProblem(coeff, grid, target, y0, y1)
        result = hum.minimize_J(problem, max_iter=max_iter, tol=tol)
    elif method == "penalized":
        target = _target_signal(config, grid, coeff)
        y0 = _space_signal(config, "y0", grid, coeff)
        y1 = _space_signal(config, "y1", grid, coeff)
        kappa = config.get("method", "kappa", 1e4, float)
        problem = hum.SidewiseProblem(coeff, grid, target, y0, y1)
        result = hum.penalized_optimal_control(problem, kappa, max_iter=max_iter, tol=tol)
    elif method == "characteristics":
        t_bar = config.get("method", "t_bar", None, float)
        if t_bar is None:
            raise ConfigError("[method] characteristics requires key 't_bar'")
        q_func = parse_profile(config.require("problem", "target"))
        n_q = max(int(np.ceil((grid.T - t_bar) / grid.dt)), 3)
        q = TimeSignal(t_bar, (grid.T - t_bar) / n_q,
                       np.asarray(q_func(t_bar + (grid.T - t_bar) * np.arange(n_q + 1) / n_q),
                                  dtype=float))
        spec = chars.SpliceSpec(grid.L, t_bar, grid.T, q)
        side_grid = chars.make_sidewise_grid(grid.L, grid.T, grid.N, grid.cfl_safety)
        result = chars.build_control(spec, side_grid, tracking_tolerance=threshold)
        target = TimeSignal(0.0, result.achieved_flux.dt,
                            np.where(result.achieved_flux.times >= t_bar,
                                     q_func(result.achieved_flux.times), 0.0))
        grid_rep = make_grid(coeff, grid.N, grid.T, grid.cfl_safety)
        summary = _emit_control_artifacts(out_dir, config, coeff, grid_rep, result, target)
        ok = result.tracking_error_L2 <= threshold
        print(f"tracking error {result.tracking_error_L2:.3e} "
              f"({'ok' if ok else 'above threshold'})")
        return 0 if ok else 1
    else:
        raise ConfigError(f"unknown method {method!r}")

    if config.get("output", "field_dump", False, bool):
        y = solve_forward(coeff, grid, problem.y0, problem.y1, result.control_u,
                          TimeSignal.zeros_like_grid(grid))
        field_to_binary(y, os.path.join(out_dir, "field.bin"))
    _emit_control_artifacts(out_dir, config, coeff, grid, result, target)
    ok = result.tracking_error_L2 <= threshold and result.converged
    print(f"tracking error {result.tracking_error_L2:.3e} in {result.iterations} "
          f"iterations ({'ok' if ok else 'above threshold'})")
    return 0 if ok else 1


def run_solve_forward(config: RunConfig, out_dir: str) -> int:
    os.makedirs(out_dir, exist_ok=True)
    coeff = config.coefficient_field()
    grid = _grid_from_config(config, coeff)
    y0 = _space_signal(config, "y0", grid, coeff)
    y1 = _space_signal(config, "y1", grid, coeff)
    u_left = _time_signal(config, "u_left", grid)
    g_right = _time_signal(config, "g_right", grid)
    y = solve_forward(coeff, grid, y0, y1, u_left, g_right)
    _write_csv(os.path.join(out_dir, "flux.csv"), "t,flux_left,flux_right",
               [grid.t, extract_flux(y, "left").values, extract_flux(y, "right").values])
    field_to_csv(y, os.path.join(out_dir, "field.csv"))
    if config.get("output", "field_dump", False, bool):
        field_to_binary(y, os.path.join(out_dir, "field.bin"))
    _write_summary(os.path.join(out_dir, "summary.json"), _base_summary(config, coeff, grid))
    return 0


def run_solve_adjoint(config: RunConfig, out_dir: str) -> int:
    os.makedirs(out_dir, exist_ok=True)
    coeff = config.coefficient_field()
    grid = _grid_from_config(config, coeff)
    cut = grid.time_index(minimal_time(coeff))
    s0 = _time_signal(config, "s0", grid, default="zero", active_from=cut * grid.dt)
    vals = s0.values.copy()
    vals[:cut + 1] = 0.0
    s0 = TimeSignal(0.0, grid.dt, vals, active_from=cut * grid.dt)
    psi = solve_adjoint(coeff, grid, s0)
    _write_csv(os.path.join(out_dir, "flux.csv"), "t,psi_x_left,psi_x_right",
               [grid.t, extract_flux(psi, "left").values, extract_flux(psi, "right").values])
    field_to_csv(psi, os.path.join(out_dir, "field.csv"))
    if config.get("output", "field_dump", False, bool):
        field_to_binary(psi, os.path.join(out_dir, "field.bin"))
    _write_summary(os.path.join(out_dir, "summary.json"), _base_summary(config, coeff, grid))
    return 0


def run_observability(config: RunConfig, out_dir: str, seed: int | None) -> int:
    os.makedirs(out_dir, exist_ok=True)
    coeff = config.coefficient_field()
    grid = _grid_from_config(config, coeff)
    n_samples = config.get("observability", "n_samples", 50, int)
    n_modes = config.get("observability", "n_modes", 5, int)
    if seed is None:
        seed = config.get("output", "seed", 0, int)
    report = obs.observability_report(coeff, grid, n_samples=n_samples,
                                      seed=seed, n_modes=n_modes)
    payload = _base_summary(config, coeff, grid)
    payload.update({
        "C2_empirical": report.C2_empirical,
        "bound_margin": report.bound_margin,
        "trace_margin": report.trace_margin,
        "velocity_margin": report.velocity_margin,
        "disc_tol": report.disc_tol,
        "violations": report.violations,
        "n_samples": report.n_samples,
        "seed": report.seed,
        "ratios": report.ratios,
    })
    _write_summary(os.path.join(out_dir, "report.json"), payload)
    _write_csv(os.path.join(out_dir, "f_profile.csv"), "x,F",
               [grid.x, report.F_profile])
    _write_csv(os.path.join(out_dir, "ratios.csv"), "sample,ratio",
               [np.arange(report.n_samples), report.ratios])
    print(f"{report.n_samples} samples, max ratio {report.ratios.max():.4f} "
          f"vs C1 = {report.C1_theoretical:.4f}, violations: {report.violations}")
    return 0 if report.violations == 0 else 1


def convergence_study(config: RunConfig, out_dir: str, levels: int,
                      seed: int | None = None) -> int:
    """Rerun the scenario on grids N, 2N, 4N, ...; tabulate error and order."""
    if levels < 3:
        raise ConfigError("convergence study needs at least 3 levels")
    os.makedirs(out_dir, exist_ok=True)
    base_n = config.require("grid", "n", int)
    errors, ns = [], []
    for lvl in range(levels):
        n = base_n * 2 ** lvl
        lvl_cfg = RunConfig({**config.sections,
                             "grid": {**config.sections.get("grid", {}), "n": str(n)}})
        lvl_dir = os.path.join(out_dir, f"level_{lvl}")
        run_scenario(lvl_cfg, lvl_dir, seed)
        with open(os.path.join(lvl_dir, "summary.json")) as fh:
            errors.append(json.load(fh)["tracking_error_L2"])
        ns.append(n)
    orders = [float("nan")]
    for i in range(1, levels):
        if errors[i] > 0 and errors[i - 1] > 0:
            orders.append(float(np.log2(errors[i - 1] / errors[i])))
        else:
            orders.append(float("nan"))
    _write_csv(os.path.join(out_dir, "convergence.csv"), "level,N,tracking_error,order",
               [np.arange(levels), np.asarray(ns, dtype=float),
                np.asarray(errors), np.asarray(orders)])
    for lvl in range(levels):
        print(f"level {lvl}: N = {ns[lvl]:5d}  error = {errors[lvl]:.4e}  "
              f"order = {orders[lvl]:.2f}" if lvl else
              f"level {lvl}: N = {ns[lvl]:5d}  error = {errors[lvl]:.4e}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sidewise",
        description="Boundary-flux tracking controls for the 1-d wave equation")
    parser.add_argument("command", choices=[
        "solve-forward", "solve-adjoint", "hum-control", "char-control",
        "penalized", "observability-report", "convergence"])
    parser.add_argument("--config", required=True, help="scenario config file")
    parser.add_argument("--out", default="out", help="artifact directory")
    parser.add_argument("--seed", type=int, default=None, help="ensemble seed")
    parser.add_argument("--level-count", type=int, default=3,
                        help="levels for the convergence study")
    args = parser.parse_args(argv)

    try:
        config = RunConfig.from_file(args.config)
        if args.command == "solve-forward":
            return run_solve_forward(config, args.out)
        if args.command == "solve-adjoint":
            return run_solve_adjoint(config, args.out)
        if args.command == "observability-report":
            return run_observability(config, args.out, args.seed)
        if args.command == "convergence":
            return convergence_study(config, args.out, args.level_count, args.seed)
        method = {"hum-control": "hum", "char-control": "characteristics",
                  "penalized": "penalized"}[args.command]
        sections = {**config.sections,
                    "method": {**config.sections.get("method", {}), "name": method}}
        return run_scenario(RunConfig(sections), args.out, args.seed)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
