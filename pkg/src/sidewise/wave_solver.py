"""Explicit finite-difference solvers for the controlled and adjoint wave systems.

Solves rho(x) y_tt = (a(x) y_x)_x on [0, L] x [0, T] with Dirichlet data on
both ends, by the three-level leapfrog scheme with harmonic-mean face
coefficients.  The adjoint (backward) problem is handled by time reversal;
the equation is time-reversible, so the same stepper serves both.
"""

from __future__ import annotations

from dataclasses import dataclass
import struct

import numpy as np

from .coefficients import CoefficientField, beta


@dataclass(frozen=True)
class Grid1D:
    """Uniform space-time grid: N cells on [0, L], M steps on [0, T]."""

    L: float
    N: int
    T: float
    M: int
    cfl_safety: float = 0.9

    def __post_init__(self):
        if self.N < 2 or self.M < 2:
            raise ValueError("need N >= 2 and M >= 2")
        if not (0.0 < self.cfl_safety < 1.0):
            raise ValueError("cfl_safety must lie in (0, 1)")

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def dt(self) -> float:
        return self.T / self.M

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.N + 1)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.M + 1)

    def courant_number(self, coeff: CoefficientField) -> float:
        speed = np.sqrt(coeff.a_at(self.x) / coeff.rho_at(self.x))
        return float(self.dt * speed.max() / self.dx)

    def check_cfl(self, coeff: CoefficientField):
        c = self.courant_number(coeff)
        if c > self.cfl_safety * (1.0 + 1e-12):
            raise ValueError(
                f"CFL violation: dt*max(speed)/dx = {c:.6g} exceeds "
                f"cfl_safety = {self.cfl_safety}")

    def time_index(self, t: float) -> int:
        """Nearest time node; cutoff times are snapped to the grid this way."""
        return int(round(t / self.dt))


def make_grid(coeff: CoefficientField, n_cells: int, horizon: float,
              cfl_safety: float = 0.9) -> Grid1D:
    """Grid with the coarsest M satisfying the CFL bound for this field."""
    dx = coeff.length / n_cells
    speed = np.sqrt(coeff.a_at(np.linspace(0, coeff.length, n_cells + 1))
                    / coeff.rho_at(np.linspace(0, coeff.length, n_cells + 1)))
    m = int(np.ceil(horizon * speed.max() / (cfl_safety * dx)))
    return Grid1D(coeff.length, n_cells, horizon, max(m, 2), cfl_safety)


@dataclass(frozen=True)
class TimeSignal:
    """Scalar function of time on a uniform grid, optionally gated in time.

    Values at grid times below ``active_from`` must be exactly zero; this
    encodes boundary data and targets constrained to vanish on an initial
    sub-interval.
    """

    t_start: float
    dt: float
    values: np.ndarray
    active_from: float = -np.inf

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("values must be a 1-d array with >= 2 samples")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if np.isfinite(self.active_from):
            gated = self.times < self.active_from - 1e-12 * self.dt
            if np.any(vals[gated] != 0.0):
                raise ValueError("signal must vanish before its activation time")

    @property
    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.values.size)

    @property
    def t_end(self) -> float:
        return self.t_start + self.dt * (self.values.size - 1)

    @classmethod
    def from_callable(cls, func, t_start: float, dt: float, n_samples: int,
                      active_from: float = -np.inf) -> "TimeSignal":
        t = t_start + dt * np.arange(n_samples)
        vals = np.asarray(func(t), dtype=float) + np.zeros(n_samples)
        if np.isfinite(active_from):
            vals[t < active_from - 1e-12 * dt] = 0.0
        return cls(t_start, dt, vals, active_from)

    @classmethod
    def zeros_like_grid(cls, grid: Grid1D) -> "TimeSignal":
        return cls(0.0, grid.dt, np.zeros(grid.M + 1))

    def zeroed_before(self, index: int, active_from: float) -> "TimeSignal":
        vals = self.values.copy()
        vals[:min(max(index, 0), vals.size)] = 0.0
        return TimeSignal(self.t_start, self.dt, vals, active_from)

    def interp(self, t) -> np.ndarray:
        """Linear interpolation; zero outside the sampled range."""
        return np.interp(t, self.times, self.values, left=0.0, right=0.0)

    def derivative(self) -> np.ndarray:
        """Centered first derivative, one-sided second order at the ends."""
        v, dt = self.values, self.dt
        d = np.empty_like(v)
        d[1:-1] = (v[2:] - v[:-2]) / (2 * dt)
        d[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * dt)
        d[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * dt)
        return d

    def l2_norm(self, t_from: float = -np.inf) -> float:
        """Trapezoidal L2 norm over the sampled range, optionally from t_from."""
        mask = self.times >= t_from - 1e-12 * self.dt
        v = self.values[mask]
        if v.size < 2:
            return 0.0
        return float(np.sqrt(np.trapezoid(v * v, dx=self.dt)))


@dataclass(frozen=True)
class SpaceTimeField:
    """Solution array y(x_i, t_n), shape (N+1, M+1)."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        expected = (self.grid.N + 1, self.grid.M + 1)
        if vals.shape != expected:
            raise ValueError(f"field shape {vals.shape} does not match grid {expected}")


def _face_coefficients(coeff: CoefficientField, grid: Grid1D) -> np.ndarray:
    """Harmonic mean of node samples of a(x) at the N cell faces.

    The harmonic mean keeps the discrete flux continuous across coefficient
    jumps, which is what makes the scheme conservative for rough media.
    """
    a_nodes = coeff.a_at(grid.x)
    return 2.0 * a_nodes[:-1] * a_nodes[1:] / (a_nodes[:-1] + a_nodes[1:])


def _check_signal(sig: TimeSignal, grid: Grid1D, name: str):
    if sig.values.size != grid.M + 1:
        raise ValueError(f"{name}: expected {grid.M + 1} samples, got {sig.values.size}")
    if abs(sig.dt - grid.dt) > 1e-12 * grid.dt or abs(sig.t_start) > 1e-12 * grid.dt:
        raise ValueError(f"{name}: signal must be sampled on the grid's time nodes")


def solve_forward(coeff: CoefficientField, grid: Grid1D,
                  y0: np.ndarray, y1: np.ndarray,
                  u_left: TimeSignal, g_right: TimeSignal) -> SpaceTimeField:
    """Leapfrog solve of rho y_tt = (a y_x)_x with Dirichlet data on both ends.

    y(x, 0) = y0, y_t(x, 0) = y1, y(0, t) = u_left, y(L, t) = g_right.
    The first step is the Taylor start y^1 = y^0 + dt y1 + (dt^2 / 2 rho) (a y0_x)_x.
    Row 0 carries the initial data; boundary values are imposed from step 1 on.
    """
    grid.check_cfl(coeff)
    y0 = np.asarray(y0, dtype=float)
    y1 = np.asarray(y1, dtype=float)
    if y0.shape != (grid.N + 1,) or y1.shape != (grid.N + 1,):
        raise ValueError(f"initial data must have {grid.N + 1} samples")
    _check_signal(u_left, grid, "u_left")
    _check_signal(g_right, grid, "g_right")

    rho = coeff.rho_at(grid.x)[1:-1]
    a_face = _face_coefficients(coeff, grid)
    dx, dt = grid.dx, grid.dt
    u, g = u_left.values, g_right.values

    def div_flux(row):
        flux = a_face * np.diff(row)          # a_{i+1/2} (y_{i+1} - y_i)
        return (flux[1:] - flux[:-1]) / dx ** 2

    y = np.zeros((grid.M + 1, grid.N + 1))
    y[0] = y0
    y[1, 1:-1] = y0[1:-1] + dt * y1[1:-1] + 0.5 * dt ** 2 / rho * div_flux(y0)
    y[1, 0], y[1, -1] = u[1], g[1]
    coef = dt ** 2 / rho
    for n in range(1, grid.M):
        y[n + 1, 1:-1] = 2 * y[n, 1:-1] - y[n - 1, 1:-1] + coef * div_flux(y[n])
        y[n + 1, 0], y[n + 1, -1] = u[n + 1], g[n + 1]
    return SpaceTimeField(grid, y.T.copy())


def solve_adjoint(coeff: CoefficientField, grid: Grid1D, s: TimeSignal) -> SpaceTimeField:
    """Backward wave solve with zero final data, psi(0,.) = 0 and psi(L,.) = s.

    Requires s to vanish on the initial sub-interval up to the snapped
    cutoff node (boundary data of the dual problem must switch on only
    after the minimal control time) and runs the forward stepper on the
    time-reversed data.
    """
    cutoff = grid.time_index(coeff.length * beta(coeff))
    _check_signal(s, grid, "s")
    n_check = min(cutoff + 1, grid.M + 1)
    if np.any(s.values[:n_check] != 0.0):
        raise ValueError(
            "adjoint boundary datum must vanish up to the minimal-time cutoff "
            f"node {cutoff} (t = {cutoff * grid.dt:.6g})")
    s_rev = TimeSignal(0.0, grid.dt, s.values[::-1].copy())
    zeros = np.zeros(grid.N + 1)
    reversed_field = solve_forward(coeff, grid, zeros, zeros,
                                   TimeSignal.zeros_like_grid(grid), s_rev)
    return SpaceTimeField(grid, reversed_field.values[:, ::-1].copy())


def extract_flux(field_y: SpaceTimeField, side: str) -> TimeSignal:
    """Boundary slope y_x at x = 0 ('left') or x = L ('right') per time node.

    One-sided second-order stencil, exact on quadratics in x.
    """
    if field_y.grid.N < 2:
        raise ValueError("flux extraction needs at least two cells")
    v = field_y.values
    dx = field_y.grid.dx
    if side == "right":
        flux = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * dx)
    elif side == "left":
        flux = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * dx)
    else:
        raise ValueError("side must be 'left' or 'right'")
    return TimeSignal(0.0, field_y.grid.dt, flux)


def discrete_energy(field_y: SpaceTimeField, coeff: CoefficientField, n: int) -> float:
    """Discrete energy (1/2) int rho y_t^2 + a y_x^2 dx at time level n.

    Centered time differences, so 1 <= n <= M-1; trapezoidal weights in x.
    """
    grid = field_y.grid
    if not (1 <= n <= grid.M - 1):
        raise ValueError("energy needs an interior time index (centered derivative)")
    v = field_y.values
    dx, dt = grid.dx, grid.dt
    yt = (v[:, n + 1] - v[:, n - 1]) / (2 * dt)
    yx = np.empty(grid.N + 1)
    yx[1:-1] = (v[2:, n] - v[:-2, n]) / (2 * dx)
    yx[0] = (-3 * v[0, n] + 4 * v[1, n] - v[2, n]) / (2 * dx)
    yx[-1] = (3 * v[-1, n] - 4 * v[-2, n] + v[-3, n]) / (2 * dx)
    rho = coeff.rho_at(grid.x)
    a = coeff.a_at(grid.x)
    density = rho * yt ** 2 + a * yx ** 2
    return float(0.5 * np.trapezoid(density, dx=dx))


def field_to_csv(field_y: SpaceTimeField, path):
    """CSV dump: time down the rows, space across the columns."""
    grid = field_y.grid
    header = "t," + ",".join(f"x={xi:.17g}" for xi in grid.x)
    rows = np.column_stack([grid.t, field_y.values.T])
    np.savetxt(path, rows, delimiter=",", header=header, comments="", fmt="%.17g")


def field_to_binary(field_y: SpaceTimeField, path):
    """Compact dump: little-endian header (L, T as f64; N, M as i64), then
    row-major float64 values, rows indexed by space node."""
    grid = field_y.grid
    with open(path, "wb") as fh:
        fh.write(struct.pack("<ddqq", grid.L, grid.T, grid.N, grid.M))
        fh.write(np.ascontiguousarray(field_y.values, dtype="<f8").tobytes())


def field_from_binary(path) -> SpaceTimeField:
    with open(path, "rb") as fh:
        L, T, N, M = struct.unpack("<ddqq", fh.read(32))
        vals = np.frombuffer(fh.read(), dtype="<f8").reshape(N + 1, M + 1)
    return SpaceTimeField(Grid1D(L, N, T, M), vals.copy())
