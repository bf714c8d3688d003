"""Named analytic profiles for targets, boundary data and initial data.

Profiles are part of the command-line contract so that scenarios need no
external data files.  A profile spec is either a bare name ("sine") or a
name with keyword parameters ("sine(amplitude=1, period=2, start=1)"),
or "csv:<path>" for tabulated (t, value) data.
"""

from __future__ import annotations

import re

import numpy as np


def _sine(t, amplitude=1.0, period=2.0, start=0.0):
    return amplitude * np.sin(2 * np.pi * (t - start) / period)


def _smoothstep(t, start=0.0, end=1.0, height=1.0):
    s = np.clip((np.asarray(t, dtype=float) - start) / (end - start), 0.0, 1.0)
    return height * s * s * (3 - 2 * s)


def _polynomial(t, coeffs=(0.0, 1.0), start=0.0):
    return np.polynomial.polynomial.polyval(np.asarray(t, dtype=float) - start,
                                            np.asarray(coeffs, dtype=float))


def _bump(t, center=0.0, width=1.0, amplitude=1.0):
    z = (np.asarray(t, dtype=float) - center) / (0.5 * width)
    inside = np.abs(z) < 1.0
    out = np.zeros_like(z)
    out[inside] = amplitude * np.exp(1.0 - 1.0 / (1.0 - z[inside] ** 2))
    return out


def _zero(t):
    return np.zeros_like(np.asarray(t, dtype=float))


def _eigenmode(x, k=1.0, amplitude=1.0, length=1.0):
    return amplitude * np.sin(k * np.pi * np.asarray(x, dtype=float) / length)


_PROFILES = {
    "sine": _sine,
    "smoothstep": _smoothstep,
    "polynomial": _polynomial,
    "bump": _bump,
    "zero": _zero,
    "eigenmode": _eigenmode,
}

_SPEC_RE = re.compile(r"^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$")


def parse_profile(spec: str):
    """Turn a profile spec string into a vectorized callable of one variable."""
    spec = spec.strip()
    if spec.startswith("csv:"):
        path = spec[4:].strip()
        data = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
        xs, vs = data[:, 0], data[:, 1]
        return lambda t: np.interp(t, xs, vs, left=0.0, right=0.0)
    m = _SPEC_RE.match(spec)
    if not m or m.group(1) not in _PROFILES:
        raise ValueError(f"unknown profile spec: {spec!r}")
    func = _PROFILES[m.group(1)]
    kwargs = {}
    if m.group(2):
        for item in m.group(2).split(","):
            if not item.strip():
                continue
            key, _, val = item.partition("=")
            key = key.strip()
            val = val.strip()
            if val.startswith("[") and val.endswith("]"):
                kwargs[key] = [float(v) for v in val[1:-1].split(";") if v.strip()]
            else:
                kwargs[key] = float(val)
    return lambda t: func(t, **kwargs)
