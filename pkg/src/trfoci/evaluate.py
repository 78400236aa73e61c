"""Profile accuracy metrics: IPA, WIPA and integrated IPA."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bloch import InversionProfile, simulate_mz
from .model import (HardwareLimits, PhysicalConstants, PulseKind, PulseParams,
                    PulseWaveforms, SequenceConfig, validate_params)
from .pulsegen import NoZeroCrossingError, build_waveforms, calibrate_gradient

IPA_SCALE = 1000.0
ZERO_ERROR_GUARD = 1e-9


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class IdealProfile:
    target: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return len(self.target)


@dataclass
class FitnessReport:
    ipa_at_levels: dict[float, float]
    wipa: float
    integrated_ipa: float | None = None
    profile_cache: dict = field(default_factory=dict)


def ideal_profile(cfg: SequenceConfig, edge_deweight: bool = False) -> IdealProfile:
    """-1 inside the central half of the grid, +1 outside.

    With ``edge_deweight`` the samples within 5% of the FOV of either slab edge
    get zero weight, which stops the score from rewarding edge sharpness.
    """
    n = cfg.n_positions
    offset = np.abs(np.arange(n) - (n - 1) // 2)
    edge = (n - 1) // 4
    target = np.where(offset <= edge, -1.0, 1.0)
    weights = np.ones(n)
    if edge_deweight:
        band = 0.05 * (n - 1)
        weights[np.abs(offset - edge) <= band] = 0.0
    return IdealProfile(target, weights)


def ipa(profile, ideal: IdealProfile) -> float:
    """1000 / weighted sum of squared deviations from the ideal profile."""
    v = profile.mz if isinstance(profile, InversionProfile) else np.asarray(profile, dtype=float)
    if len(v) != ideal.n:
        raise GridMismatchError(f"profile has {len(v)} samples, ideal has {ideal.n}")
    err = float(np.sum(ideal.weights * (ideal.target - v) ** 2))
    return IPA_SCALE / max(err, ZERO_ERROR_GUARD)


def wipa(ipa1, ipa2, ipa3, l1, l2, l3) -> float:
    """Weighted IPA; the lowest B1 level carries the largest weight L3/sum."""
    if not (0 < l1 < l2 < l3):
        raise ValueError("levels must satisfy 0 < L1 < L2 < L3")
    return (ipa1 * l3 + ipa2 * l2 + ipa3 * l1) / (l1 + l2 + l3)


def b1_range(start=0.0, stop=10.0, step=0.1) -> np.ndarray:
    if not step > 0:
        raise ValueError("step must be positive")
    count = int(round((stop - start) / step)) + 1
    return start + step * np.arange(count)


def ipa_curve(wf: PulseWaveforms, cfg: SequenceConfig, levels=None,
              ideal: IdealProfile | None = None,
              consts: PhysicalConstants = PhysicalConstants()):
    """IPA at each B1 level (defaults to 0..10 uT in 0.1 uT steps)."""
    levels = b1_range() if levels is None else np.asarray(levels, dtype=float)
    ideal = ideal_profile(cfg) if ideal is None else ideal
    z = cfg.positions()
    values = np.array([ipa(simulate_mz(wf, b, z, consts=consts), ideal) for b in levels])
    return levels, values


def integrated_ipa(curve) -> float:
    """Trapezoidal area under an (levels, ipa) curve."""
    levels, values = (np.asarray(c, dtype=float) for c in curve)
    if len(levels) < 2:
        raise ValueError("need at least two curve samples")
    return float(np.sum(0.5 * (values[1:] + values[:-1]) * np.diff(levels)))


def evaluate_waveforms(wf: PulseWaveforms, cfg: SequenceConfig,
                       ideal: IdealProfile | None = None,
                       consts: PhysicalConstants = PhysicalConstants(),
                       keep_profiles: bool = False) -> FitnessReport:
    ideal = ideal_profile(cfg) if ideal is None else ideal
    z = cfg.positions()
    ipas = {}
    cache = {}
    for level in cfg.b1_eval_levels:
        mz = simulate_mz(wf, level, z, consts=consts)
        ipas[level] = ipa(mz, ideal)
        if keep_profiles:
            cache[level] = InversionProfile(z, mz, level)
    return FitnessReport(ipas, wipa(*ipas.values(), *cfg.b1_eval_levels), None, cache)


@dataclass(frozen=True)
class WipaFitness:
    """Picklable vector -> WIPA map used by the optimizer.

    Each call validates the vector, calibrates the gradient and evaluates
    the three B1 levels. Invalid vectors (range, product cap, or no zero
    crossing at the calibration level) score 0.
    """

    kind: PulseKind
    cfg: SequenceConfig = SequenceConfig()
    limits: HardwareLimits = HardwareLimits()
    consts: PhysicalConstants = PhysicalConstants()
    edge_deweight: bool = False

    def params(self, vector) -> PulseParams:
        return PulseParams(self.kind, tuple(vector))

    def design(self, vector):
        p = self.params(vector)
        if validate_params(p, self.limits):
            return None, None
        try:
            cal = calibrate_gradient(p, self.cfg, self.limits, consts=self.consts)
        except NoZeroCrossingError:
            return None, None
        return build_waveforms(p, self.cfg, cal.g_final), cal

    def report(self, vector) -> FitnessReport | None:
        wf, _ = self.design(vector)
        if wf is None:
            return None
        return evaluate_waveforms(wf, self.cfg, ideal_profile(self.cfg, self.edge_deweight),
                                  self.consts)

    def __call__(self, vector) -> float:
        rep = self.report(vector)
        return 0.0 if rep is None else rep.wipa

    def integrated(self, vector, levels=None) -> float:
        wf, _ = self.design(vector)
        if wf is None:
            return 0.0
        ideal = ideal_profile(self.cfg, self.edge_deweight)
        return integrated_ipa(ipa_curve(wf, self.cfg, levels, ideal, self.consts))
