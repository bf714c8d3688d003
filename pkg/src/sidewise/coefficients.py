"""Piecewise-linear material coefficients for the 1-d wave equation.

The density rho(x) and stiffness a(x) are stored as samples on uniform
nodes over [0, L] and interpreted as piecewise-linear in between.  This
representation makes the total variation and the pointwise bounds exact
and testable; piecewise-constant (jump) coefficients are represented by
a one-cell linear ramp between double nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class CoefficientField:
    """Coefficient pair (rho, a) sampled on uniform nodes of [0, L].

    Both sample arrays must have the same length (>= 2) and strictly
    positive entries; values between nodes are linear interpolants.
    """

    length: float
    samples_rho: np.ndarray
    samples_a: np.ndarray

    def __post_init__(self):
        rho = np.atleast_1d(np.asarray(self.samples_rho, dtype=float))
        a = np.atleast_1d(np.asarray(self.samples_a, dtype=float))
        if rho.size == 1:
            rho = np.repeat(rho, max(a.size, 2))
        if a.size == 1:
            a = np.repeat(a, rho.size)
        object.__setattr__(self, "samples_rho", rho)
        object.__setattr__(self, "samples_a", a)
        if self.length <= 0:
            raise ValueError("length must be positive")
        if rho.shape != a.shape or rho.ndim != 1 or rho.size < 2:
            raise ValueError("rho and a need equal 1-d sample arrays of length >= 2")
        if not (np.all(rho > 0) and np.all(a > 0)):
            raise ValueError("coefficient samples must be strictly positive")
        rho.flags.writeable = False
        a.flags.writeable = False

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.length, self.samples_rho.size)

    def rho_at(self, x) -> np.ndarray:
        return np.interp(x, self.nodes, self.samples_rho)

    def a_at(self, x) -> np.ndarray:
        return np.interp(x, self.nodes, self.samples_a)

    @classmethod
    def constant(cls, length: float, rho: float = 1.0, a: float = 1.0,
                 n_nodes: int = 2) -> "CoefficientField":
        return cls(length, np.full(n_nodes, float(rho)), np.full(n_nodes, float(a)))

    def is_unit(self, tol: float = 1e-12) -> bool:
        """True when rho = a = 1 everywhere (constant-coefficient methods need this)."""
        return (np.max(np.abs(self.samples_rho - 1.0)) <= tol
                and np.max(np.abs(self.samples_a - 1.0)) <= tol)


def bounds(field: CoefficientField):
    """Lower/upper bounds (rho0, rho1, a0, a1) over [0, L].

    Piecewise-linear functions attain their extrema at nodes.
    """
    rho, a = field.samples_rho, field.samples_a
    return float(rho.min()), float(rho.max()), float(a.min()), float(a.max())


def total_variation(field: CoefficientField):
    """Total variation (TV_rho, TV_a) of the piecewise-linear interpolants.

    For a piecewise-linear function this is the exact sum of node-to-node
    jumps, and it is invariant under refinement by linear interpolation.
    """
    tv_rho = float(np.sum(np.abs(np.diff(field.samples_rho))))
    tv_a = float(np.sum(np.abs(np.diff(field.samples_a))))
    return tv_rho, tv_a


def beta(field: CoefficientField) -> float:
    """Largest slowness sup sqrt(rho/a); L*beta is the minimal control time.

    On each segment rho/a is a ratio of two linear functions, which is
    monotone, so the supremum is attained at a node.
    """
    return float(np.sqrt(np.max(field.samples_rho / field.samples_a)))


def minimal_time(field: CoefficientField) -> float:
    """Travel time L*beta of the slowest characteristic across the string."""
    return field.length * beta(field)


def theoretical_observability_constant(field: CoefficientField) -> float:
    """Explicit constant C1 bounding the boundary-data norm by the measured flux.

    C1^2 = (L^2 / min(rho0, a0) + 1 / rho(L)) * a(0)
           * exp(TV(rho)/rho0 + TV(a)/a0).
    """
    rho0, _, a0, _ = bounds(field)
    tv_rho, tv_a = total_variation(field)
    rho_at_l = float(field.samples_rho[-1])
    a_at_0 = float(field.samples_a[0])
    c1_sq = ((field.length ** 2 / min(rho0, a0)) + 1.0 / rho_at_l) \
        * a_at_0 * np.exp(tv_rho / rho0 + tv_a / a0)
    return float(np.sqrt(c1_sq))


def from_csv(length: float, path_rho=None, path_a=None,
             rho: float = 1.0, a: float = 1.0) -> CoefficientField:
    """Build a field from two-column CSV files (x, value), one per coefficient.

    Either coefficient may instead be an inline constant.  The x column must
    be uniform over [0, L]; both coefficients are resampled onto the finer of
    the two node sets (linear resampling, which preserves the interpolant).
    """
    def load(path):
        data = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
        if data.shape[1] != 2:
            raise ValueError(f"{path}: expected two columns (x, value)")
        x, v = data[:, 0], data[:, 1]
        if x.size < 2:
            raise ValueError(f"{path}: need at least two samples")
        dx = np.diff(x)
        if abs(x[0]) > 1e-12 * length or abs(x[-1] - length) > 1e-9 * length:
            raise ValueError(f"{path}: x must span [0, {length}]")
        if np.max(np.abs(dx - dx[0])) > 1e-9 * dx[0]:
            raise ValueError(f"{path}: x samples must be uniform")
        return v

    rho_samples = load(path_rho) if path_rho else np.atleast_1d(float(rho))
    a_samples = load(path_a) if path_a else np.atleast_1d(float(a))
    n = max(rho_samples.size, a_samples.size, 2)
    xs = np.linspace(0.0, length, n)

    def resample(v):
        if v.size == 1:
            return np.full(n, v[0])
        return np.interp(xs, np.linspace(0.0, length, v.size), v)

    return CoefficientField(length, resample(rho_samples), resample(a_samples))
