"""Numerical verification of the sidewise observability estimates.

The dual state driven by admissible boundary data at x = L can be bounded by
its slope trace at x = 0: the parity extension about t = T, the sidewise
energy F(x) over shrinking time cones, and the explicit constant from the
coefficients module are all realized on the grid and checked over seeded
ensembles of boundary data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coefficients import (CoefficientField, beta, bounds, minimal_time,
                           theoretical_observability_constant, total_variation)
from .wave_solver import Grid1D, SpaceTimeField, TimeSignal, extract_flux, solve_adjoint


def discretization_allowance(n_cells: int) -> float:
    """Declared tolerance for continuum inequalities tested on a grid.

    Calibrated once against constant-coefficient runs and frozen: 0.15 at
    N = 200, halving as the grid is refined.
    """
    return 0.15 * 200.0 / n_cells


@dataclass
class ObservabilityReport:
    beta: float
    min_time: float
    C1_theoretical: float
    C2_empirical: float
    ratios: np.ndarray
    F_profile: np.ndarray
    bound_margin: float
    trace_margin: float
    velocity_margin: float
    disc_tol: float
    violations: int
    n_samples: int
    seed: int


def extend_parity(field_psi: SpaceTimeField) -> SpaceTimeField:
    """Even reflection about t = T, doubling the time horizon.

    Valid only for fields with zero final Cauchy data; for adjoint solves the
    final row vanishes identically and so does the interior of the row before
    it, which is the grid form of psi(.,T) = psi_t(.,T) = 0.
    """
    grid = field_psi.grid
    v = field_psi.values
    scale = max(float(np.abs(v).max()), 1e-300)
    if np.abs(v[:, -1]).max() > 1e-10 * scale or \
            np.abs(v[1:-1, -2]).max() > 1e-10 * scale:
        raise ValueError("parity extension requires zero final Cauchy data")
    ext = np.concatenate([v, v[:, -2::-1]], axis=1)
    grid_ext = Grid1D(grid.L, grid.N, 2 * grid.T, 2 * grid.M, grid.cfl_safety)
    return SpaceTimeField(grid_ext, ext)


def _time_derivative(values: np.ndarray, dt: float) -> np.ndarray:
    d = np.empty_like(values)
    d[1:-1] = (values[2:] - values[:-2]) / (2 * dt)
    d[0] = (-3 * values[0] + 4 * values[1] - values[2]) / (2 * dt)
    d[-1] = (3 * values[-1] - 4 * values[-2] + values[-3]) / (2 * dt)
    return d


def sidewise_energy(field_ext: SpaceTimeField, coeff: CoefficientField,
                    x_index: int) -> float:
    """F(x_i): energy density at x_i integrated over the cone (b x_i, T' - b x_i).

    Cone endpoints snap inward (shrinking the interval keeps the tested upper
    bounds conservative).  Derivatives are centered, one-sided at the array
    edges; the quadrature is trapezoidal.
    """
    grid = field_ext.grid
    b = beta(coeff)
    x = grid.x[x_index]
    t_lo, t_hi = b * x, grid.T - b * x
    n_lo = int(np.ceil(t_lo / grid.dt - 1e-9))
    n_hi = int(np.floor(t_hi / grid.dt + 1e-9))
    if n_hi - n_lo < 1:
        raise ValueError(f"empty time cone at node {x_index}")
    v = field_ext.values
    psi_t = _time_derivative(v[x_index], grid.dt)[n_lo:n_hi + 1]
    if 0 < x_index < grid.N:
        psi_x = (v[x_index + 1, n_lo:n_hi + 1] - v[x_index - 1, n_lo:n_hi + 1]) / (2 * grid.dx)
    elif x_index == 0:
        psi_x = (-3 * v[0, n_lo:n_hi + 1] + 4 * v[1, n_lo:n_hi + 1]
                 - v[2, n_lo:n_hi + 1]) / (2 * grid.dx)
    else:
        psi_x = (3 * v[-1, n_lo:n_hi + 1] - 4 * v[-2, n_lo:n_hi + 1]
                 + v[-3, n_lo:n_hi + 1]) / (2 * grid.dx)
    rho_i = float(coeff.rho_at(x))
    a_i = float(coeff.a_at(x))
    density = rho_i * psi_t ** 2 + a_i * psi_x ** 2
    return float(0.5 * np.trapezoid(density, dx=grid.dt))


def sidewise_energy_profile(field_ext: SpaceTimeField, coeff: CoefficientField) -> np.ndarray:
    return np.array([sidewise_energy(field_ext, coeff, i)
                     for i in range(field_ext.grid.N + 1)])


def _left_flux_energy(field_ext: SpaceTimeField) -> float:
    """int_0^T psi_x(0,t)^2 dt over the original (unextended) horizon."""
    grid = field_ext.grid
    m_half = grid.M // 2
    flux0 = extract_flux(field_ext, "left").values[:m_half + 1]
    return float(np.trapezoid(flux0 ** 2, dx=grid.dt))


def _bound_rhs(coeff: CoefficientField, field_ext: SpaceTimeField) -> float:
    rho0, _, a0, _ = bounds(coeff)
    tv_rho, tv_a = total_variation(coeff)
    a_at_0 = float(coeff.samples_a[0])
    return a_at_0 * np.exp(tv_rho / rho0 + tv_a / a0) * _left_flux_energy(field_ext)


def check_energy_bound(field_ext: SpaceTimeField, coeff: CoefficientField) -> float:
    """Relative slack of F(x) <= a(0) exp(TV(rho)/rho0 + TV(a)/a0) int psi_x(0,.)^2.

    Returns min over nodes of (rhs - F(x)) / rhs; a value below the negative
    of the declared discretization allowance marks a violation (reported, not
    raised).  A zero field passes by convention.
    """
    rhs = _bound_rhs(coeff, field_ext)
    if rhs <= 0:
        return 0.0 if np.abs(field_ext.values).max() == 0 else -np.inf
    profile = sidewise_energy_profile(field_ext, coeff)
    return float(np.min((rhs - profile) / rhs))


def boundary_trace_margins(field_ext: SpaceTimeField, coeff: CoefficientField,
                           s0: TimeSignal) -> tuple[float, float]:
    """Relative slacks of the trace and velocity bounds at x = L.

    trace:    int_{Lb}^T s0^2       <= (a(0) L^2 / min(rho0,a0)) exp(..) int psi_x(0,.)^2
    velocity: rho(L) int_{Lb}^T s0'^2 <= a(0) exp(..) int psi_x(0,.)^2
    """
    grid = field_ext.grid
    rho0, _, a0, _ = bounds(coeff)
    base = _bound_rhs(coeff, field_ext)
    cut = int(round(s0.active_from / s0.dt)) if np.isfinite(s0.active_from) else 0
    vals = s0.values[cut:]
    lhs_trace = float(np.trapezoid(vals ** 2, dx=s0.dt))
    d = _time_derivative(vals, s0.dt)
    rho_at_l = float(coeff.samples_rho[-1])
    lhs_vel = rho_at_l * float(np.trapezoid(d ** 2, dx=s0.dt))
    rhs_trace = coeff.length ** 2 / min(rho0, a0) * base
    rhs_vel = base
    m_trace = (rhs_trace - lhs_trace) / rhs_trace if rhs_trace > 0 else 0.0
    m_vel = (rhs_vel - lhs_vel) / rhs_vel if rhs_vel > 0 else 0.0
    return float(m_trace), float(m_vel)


def h1_star_norm(s0: TimeSignal) -> float:
    """H^1 norm of the datum over its activity window (L*beta, T).

    The signal must vanish before its activation time; the derivative uses
    centered differences with one-sided second-order stencils at the window
    ends, the quadrature is trapezoidal.
    """
    if not np.isfinite(s0.active_from):
        raise ValueError("signal carries no activation time")
    cut = int(round((s0.active_from - s0.t_start) / s0.dt))
    if np.any(s0.values[:max(cut, 0)] != 0.0):
        raise ValueError("signal must vanish before its activation time")
    vals = s0.values[cut:]
    if vals.size < 4:
        raise ValueError("activity window too short")
    d = _time_derivative(vals, s0.dt)
    return float(np.sqrt(np.trapezoid(vals ** 2 + d ** 2, dx=s0.dt)))


def dual_pairing_factored(s0: TimeSignal, phi: TimeSignal, q: TimeSignal) -> float:
    """Pairing of s0 with the factored target d/dt(phi q): -int s0' phi q dt.

    Valid when phi vanishes at the final time (otherwise the boundary term of
    the integration by parts survives).
    """
    scale = max(np.abs(phi.values).max(), 1e-300)
    if abs(phi.values[-1]) > 1e-9 * scale:
        raise ValueError("phi must vanish at the final time")
    if not np.isfinite(s0.active_from):
        raise ValueError("signal carries no activation time")
    cut = int(round((s0.active_from - s0.t_start) / s0.dt))
    d = np.zeros_like(s0.values)
    d[cut:] = _time_derivative(s0.values[cut:], s0.dt)
    integrand = d * phi.interp(s0.times) * q.interp(s0.times)
    return float(-np.trapezoid(integrand[cut:], dx=s0.dt))


def empirical_observability_ratio(coeff: CoefficientField, grid: Grid1D,
                                  s0: TimeSignal) -> float:
    """Measured ratio ||s0||_{H1(Lb,T)} / ||psi_x(0,.)||_{L2(0,T)} (bounded by C1)."""
    num = h1_star_norm(s0)
    psi = solve_adjoint(coeff, grid, s0)
    flux0 = extract_flux(psi, "left")
    den = float(np.sqrt(np.trapezoid(flux0.values ** 2, dx=grid.dt)))
    if den == 0.0:
        if num == 0.0:
            return 0.0
        raise ValueError("zero boundary observation for nonzero datum (solver failure)")
    return num / den


def sample_boundary_data(coeff: CoefficientField, grid: Grid1D, n_samples: int,
                         seed: int = 0, n_modes: int = 5) -> list[TimeSignal]:
    """Seeded ensemble of admissible data: ramped random Fourier sums on (Lb, T).

    Each sample vanishes up to the snapped cutoff node (linear ramp) and at
    the final time (sine modes), spanning diverse admissible data
    reproducibly.
    """
    rng = np.random.default_rng(seed)
    cut = grid.time_index(minimal_time(coeff))
    if cut >= grid.M - 2:
        raise ValueError("horizon leaves no admissible window above the minimal time")
    t_cut = cut * grid.dt
    width = grid.T - t_cut
    tau = np.clip((grid.t - t_cut) / width, 0.0, None)
    samples = []
    for _ in range(n_samples):
        vals = np.zeros(grid.M + 1)
        for k in range(1, n_modes + 1):
            vals += rng.normal() / k * np.sin(k * np.pi * tau)
        vals *= tau
        vals[:cut + 1] = 0.0
        samples.append(TimeSignal(0.0, grid.dt, vals, active_from=t_cut))
    return samples


def observability_report(coeff: CoefficientField, grid: Grid1D,
                         n_samples: int = 50, seed: int = 0,
                         n_modes: int = 5) -> ObservabilityReport:
    """Ensemble verification of the observability inequalities on one grid.

    For every sample the ratio against C1 is recorded; the energy, trace and
    velocity bounds are checked on the parity-extended adjoint fields and the
    worst-case slacks reported.  The F(x) profile comes from the first
    sample.
    """
    samples = sample_boundary_data(coeff, grid, n_samples, seed, n_modes)
    disc_tol = discretization_allowance(grid.N)
    c1 = theoretical_observability_constant(coeff)
    ratios = np.empty(len(samples))
    margins = np.empty(len(samples))
    trace_margins = np.empty(len(samples))
    vel_margins = np.empty(len(samples))
    profile = None
    for i, s0 in enumerate(samples):
        ratios[i] = empirical_observability_ratio(coeff, grid, s0)
        psi = solve_adjoint(coeff, grid, s0)
        ext = extend_parity(psi)
        margins[i] = check_energy_bound(ext, coeff)
        trace_margins[i], vel_margins[i] = boundary_trace_margins(ext, coeff, s0)
        if profile is None:
            profile = sidewise_energy_profile(ext, coeff)
    worst = min(margins.min(), trace_margins.min(), vel_margins.min())
    violations = int(np.sum(margins < -disc_tol) + np.sum(trace_margins < -disc_tol)
                     + np.sum(vel_margins < -disc_tol)
                     + np.sum(ratios > c1 * (1 + disc_tol)))
    return ObservabilityReport(
        beta=beta(coeff), min_time=minimal_time(coeff), C1_theoretical=c1,
        C2_empirical=float(np.max(1.0 / ratios[ratios > 0])) if np.any(ratios > 0) else 0.0,
        ratios=ratios, F_profile=profile, bound_margin=float(margins.min()),
        trace_margin=float(trace_margins.min()), velocity_margin=float(vel_margins.min()),
        disc_tol=disc_tol, violations=violations, n_samples=len(samples), seed=seed)
