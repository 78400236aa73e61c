"""Pulse synthesis: sech/tanh envelopes reshaped by A(t), physical scaling,
and slice-select gradient calibration."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .model import (HardwareLimits, PhysicalConstants, PulseParams,
                    PulseWaveforms, SequenceConfig, symmetric_grid,
                    validate_params)
from .shaping import shaping_for, time_map_for

#: B1 level used when measuring the slice width for calibration (uT).
CALIBRATION_B1 = 7.0


class NoZeroCrossingError(RuntimeError):
    """The simulated profile never crosses mz = 0 (no inversion)."""


@dataclass(frozen=True)
class GradientCalibration:
    g_initial: float       # mT/m
    measured_width: float  # mm
    g_final: float         # mT/m
    capped: bool

    def as_dict(self) -> dict:
        return {"g_initial_mt_per_m": self.g_initial,
                "measured_width_mm": self.measured_width,
                "g_max_mt_per_m": self.g_final,
                "capped": self.capped}


def generate_envelopes(p: PulseParams, grid):
    """Normalized amplitude, frequency and gradient envelopes.

    Returns ``(b1, freq, grad)`` with b1 = A sech(beta T), freq =
    -A mu beta tanh(beta T) and grad = A. ``b1`` is *not* peak-normalized here.
    """
    t = np.asarray(grid, dtype=float)
    a = shaping_for(p, t)
    bt = p.beta * time_map_for(p, t)
    b1 = a / np.cosh(bt)
    freq = -a * (p.mu * p.beta) * np.tanh(bt)
    return b1, freq, a


def to_physical(envelopes, cfg: SequenceConfig, g_max: float,
                params: PulseParams | None = None) -> PulseWaveforms:
    """Scale normalized envelopes to seconds, hertz and mT/m.

    The B1 envelope is normalized to unit peak, so a B1 level of X uT means a
    peak RF amplitude of X uT. The gradient is scaled so its peak equals
    ``g_max``.
    """
    if not g_max > 0:
        raise ValueError("g_max must be positive")
    b1, freq, grad = (np.asarray(e, dtype=float) for e in envelopes)
    T = cfg.pulse_length
    time_axis = symmetric_grid(len(b1), 0.5 * T)
    peak_b1 = np.max(b1)
    peak_a = np.max(grad)
    return PulseWaveforms(
        time_axis=time_axis,
        b1_envelope=b1 / peak_b1,
        freq_offset=freq / (math.pi * T),
        gradient=grad * (g_max / peak_a),
        g_max=float(g_max),
        params=params,
        slice_thickness=cfg.slice_thickness,
        meta={"b1_envelope_peak": float(peak_b1)},
    )


def initial_gradient(p: PulseParams, slice_thickness: float) -> float:
    """G'_max = 1.15 a_max mu beta / SL, in mT/m for SL in mm."""
    if not slice_thickness > 0:
        raise ValueError("slice thickness must be positive")
    return 1.15 * p.product / slice_thickness


def enforce_limits(p: PulseParams, lim: HardwareLimits) -> list[str]:
    """Product-cap check used by the fitness path; empty list means ok."""
    if p.product > lim.product_cap:
        return [f"product a_max*mu*beta = {p.product:.6g} exceeds cap {lim.product_cap:g}"]
    return []


def zero_crossing_width(z, mz) -> float:
    """Distance between the outermost sign changes of ``mz``.

    Each crossing is located by linear interpolation between the bracketing
    samples.
    """
    z = np.asarray(z, dtype=float)
    mz = np.asarray(mz, dtype=float)
    neg = mz < 0
    flips = np.flatnonzero(neg[:-1] != neg[1:])
    if len(flips) < 2:
        raise NoZeroCrossingError("profile does not cross mz = 0 twice")

    def cross(i):
        return z[i] - mz[i] * (z[i + 1] - z[i]) / (mz[i + 1] - mz[i])

    return float(cross(flips[-1]) - cross(flips[0]))


def calibration_window(p: PulseParams, cfg: SequenceConfig, g_initial: float,
                       consts: PhysicalConstants = PhysicalConstants()) -> np.ndarray:
    """Positions wide enough to contain both zero crossings at ``g_initial``.

    Half-width is the larger of the evaluation FOV width and the full
    bandwidth-predicted slab width.
    """
    sweep_hz = p.product / (math.pi * cfg.pulse_length)
    bw_width = 2.0 * sweep_hz / (consts.gamma_bar * 1e-6 * g_initial)
    return symmetric_grid(cfg.n_positions, max(cfg.fov_width, bw_width))


def build_waveforms(p: PulseParams, cfg: SequenceConfig, g_max: float) -> PulseWaveforms:
    return to_physical(generate_envelopes(p, cfg.normalized_time()), cfg, g_max, p)


def calibrate_gradient(p: PulseParams, cfg: SequenceConfig,
                       lim: HardwareLimits = HardwareLimits(),
                       simulate: Callable | None = None,
                       consts: PhysicalConstants = PhysicalConstants(),
                       b1_level: float = CALIBRATION_B1) -> GradientCalibration:
    """One corrective rescaling of G'_max from the simulated slice width.

    ``simulate(wf, b1_level, positions)`` must return mz samples; it defaults
    to :func:`trfoci.bloch.simulate_mz`.
    """
    if simulate is None:
        from .bloch import simulate_mz

        def simulate(wf, level, z):
            return simulate_mz(wf, level, z, consts=consts)

    g0 = initial_gradient(p, cfg.slice_thickness)
    wf = build_waveforms(p, cfg, g0)
    z = calibration_window(p, cfg, g0, consts)
    width = zero_crossing_width(z, simulate(wf, b1_level, z))
    g = g0 * width / cfg.slice_thickness
    capped = g > lim.g_max_limit
    return GradientCalibration(g0, width, lim.g_max_limit if capped else g, bool(capped))


def design_pulse(p: PulseParams, cfg: SequenceConfig,
                 lim: HardwareLimits = HardwareLimits(),
                 consts: PhysicalConstants = PhysicalConstants(),
                 check: bool = True) -> tuple[PulseWaveforms, GradientCalibration]:
    """Validate, calibrate and return physical waveforms for ``p``."""
    if check:
        bad = validate_params(p, lim)
        if bad:
            raise ValueError("; ".join(bad))
    cal = calibrate_gradient(p, cfg, lim, consts=consts)
    return build_waveforms(p, cfg, cal.g_final), cal
