"""Reshaping function A(t) and time-resampling function T(t).

Both live on normalized time t in [-1, 1].
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import PulseKind, PulseParams


class DegenerateGeometryError(ValueError):
    pass


@dataclass(frozen=True)
class ShapingFunction:
    grid: np.ndarray
    samples: np.ndarray
    a_max: float
    c: float | None = None
    a_min: float | None = None
    coeffs: tuple[float, float, float, float] | None = None


@dataclass(frozen=True)
class ResamplingFunction:
    tau1: float
    tau2: float
    grid: np.ndarray
    samples: np.ndarray


def linear_segment(a_max, r1, w, t):
    """Linear part of the TR-FOCI shaping function on [-1, w-1]."""
    t = np.asarray(t, dtype=float)
    if np.any(t < -1.0) or np.any(t > w - 1.0):
        raise ValueError("t outside the linear segment [-1, w-1]")
    return a_max * (1.0 - r1 * (t + 1.0) / w)


def polynomial_coefficients(c, r2, r3, r4, r5, w):
    """Return ``(a_min, b1, b2, b3, b4)`` for the curved segment.

    The coefficients are chosen so the even polynomial meets the linear
    segment at t = w - 1, i.e. sum(b_k (w-1)^(2k)) = c - a_min.
    """
    if w == 1.0:
        raise DegenerateGeometryError("w = 1 leaves no room for the curved segment")
    a_min = r2 * c
    d = c - a_min
    u2 = (w - 1.0) ** 2
    b1 = r3 * d / u2
    b2 = r4 * (1.0 - r3) * d / u2 ** 2
    b3 = r5 * (1.0 - r4) * (1.0 - r3) * d / u2 ** 3
    b4 = (1.0 - r5) * (1.0 - r4) * (1.0 - r3) * d / u2 ** 4
    return a_min, b1, b2, b3, b4


def _curved_segment(t, a_min, b):
    t2 = t * t
    # Horner in t^2
    return a_min + t2 * (b[0] + t2 * (b[1] + t2 * (b[2] + t2 * b[3])))


def assemble_trfoci_shaping(p: PulseParams, grid) -> ShapingFunction:
    """Piecewise linear / even-polynomial / mirrored-linear shaping function."""
    if p.kind is not PulseKind.TRFOCI:
        raise ValueError("TR-FOCI parameters required")
    t = np.asarray(grid, dtype=float)
    a_max, w, r1 = p.a_max, p.w, p.r1
    c = a_max * (1.0 - r1)
    a_min, *b = polynomial_coefficients(c, p.r2, p.r3, p.r4, p.r5, w)
    s = np.abs(t)
    # evaluating through |t| makes the result exactly even; boundary ties go
    # to the linear segment
    linear = s >= 1.0 - w
    out = np.empty_like(t)
    out[linear] = a_max * (1.0 - r1 * (1.0 - s[linear]) / w)
    out[~linear] = _curved_segment(s[~linear], a_min, b)
    return ShapingFunction(t, out, a_max, c, a_min, tuple(b))


def assemble_cfoci_shaping(p: PulseParams, grid) -> ShapingFunction:
    """cosh(beta t) capped at a_max."""
    if p.kind is not PulseKind.CFOCI:
        raise ValueError("C-FOCI parameters required")
    if p.a_max < 1.0:
        raise ValueError("a_max must be >= 1 for the cap to intersect cosh")
    t = np.asarray(grid, dtype=float)
    return ShapingFunction(t, np.minimum(np.cosh(p.beta * np.abs(t)), p.a_max), p.a_max)


def cfoci_plateau_start(a_max: float, beta: float) -> float:
    """|t| beyond which the C-FOCI shaping function sits on its cap."""
    return float(np.arccosh(a_max) / beta)


def resample_time(tau1, tau2, grid) -> ResamplingFunction:
    """Odd quintic time map with T(-1) = -1, T(0) = 0, T(1) = 1."""
    if tau1 < 0 or tau2 < 0:
        raise ValueError("tau1 and tau2 must be non-negative")
    t = np.asarray(grid, dtype=float)
    s = np.abs(t)
    s2 = s * s
    val = s * (1.0 + s2 * (tau2 + s2 * tau1)) / (tau1 + tau2 + 1.0)
    return ResamplingFunction(tau1, tau2, t, np.copysign(val, t))


def shaping_for(p: PulseParams, grid) -> np.ndarray:
    """A(t) samples for any pulse family (HSC has A = 1)."""
    if p.kind is PulseKind.TRFOCI:
        return assemble_trfoci_shaping(p, grid).samples
    if p.kind is PulseKind.CFOCI:
        return assemble_cfoci_shaping(p, grid).samples
    return np.ones_like(np.asarray(grid, dtype=float))


def time_map_for(p: PulseParams, grid) -> np.ndarray:
    if p.kind is PulseKind.TRFOCI:
        return resample_time(p.tau1, p.tau2, grid).samples
    return np.asarray(grid, dtype=float).copy()
