"""Independent closed-form references for the constant-coefficient wave equation.

These are evaluated straight from the traveling-wave (reflection series)
representation and never touch the finite-difference solvers they check.
"""

import numpy as np


def left_driven_solution(u_func, L, x, t):
    """y(x,t) for zero data, y(0,t)=u(t), y(L,t)=0, unit speed.

    Reflection series y = sum_k u(t - x - 2kL) - u(t - (2L - x) - 2kL),
    with u vanishing for negative arguments.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    out = np.zeros(np.broadcast(x, t).shape)
    k_max = int(np.max(t) / (2 * L)) + 1
    for k in range(k_max + 1):
        arg1 = t - x - 2 * k * L
        arg2 = t - (2 * L - x) - 2 * k * L
        out = out + np.where(arg1 >= 0, u_func(np.maximum(arg1, 0.0)), 0.0)
        out = out - np.where(arg2 >= 0, u_func(np.maximum(arg2, 0.0)), 0.0)
    return out


def left_driven_flux_right(du_func, L, t):
    """y_x(L,t) = -2 sum_k u'(t - L - 2kL) for the left-driven problem."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    k_max = int(np.max(t) / (2 * L)) + 1
    for k in range(k_max + 1):
        arg = t - L - 2 * k * L
        out = out - 2.0 * np.where(arg >= 0, du_func(np.maximum(arg, 0.0)), 0.0)
    return out


def adjoint_flux_left(ds_func, L, T, t):
    """psi_x(0,t) = -2 sum_k s'(t + (2k+1)L) for the backward right-driven problem.

    s is the boundary datum at x = L of the system with zero final data at T;
    ds_func must vanish outside the datum's support.
    """
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    k_max = int(T / (2 * L)) + 1
    for k in range(k_max + 1):
        arg = t + (2 * k + 1) * L
        out = out - 2.0 * np.where(arg <= T, ds_func(np.minimum(arg, T)), 0.0)
    return out


def standing_mode(x, t, L=1.0):
    """Separable eigenmode sin(pi x / L) cos(pi t / L) of the unit-speed string."""
    return np.sin(np.pi * np.asarray(x) / L) * np.cos(np.pi * np.asarray(t) / L)


def standing_mode_energy(L=1.0):
    """(1/2) int rho y_t^2 + a y_x^2 dx of the eigenmode: pi^2 / (4 L) * L-scaling."""
    return np.pi ** 2 / (4.0 * L)


def pulse(t, width=0.4):
    """Smooth compact pulse sin^2(pi t / width) on [0, width] (C^1, bounded y'')."""
    t = np.asarray(t, dtype=float)
    return np.where((t >= 0) & (t <= width), np.sin(np.pi * t / width) ** 2, 0.0)


def pulse_derivative(t, width=0.4):
    t = np.asarray(t, dtype=float)
    return np.where((t >= 0) & (t <= width),
                    np.pi / width * np.sin(2 * np.pi * t / width), 0.0)
