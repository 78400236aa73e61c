"""Inversion-efficiency fits of S(TI) = S0 * (1 - K * exp(-TI / T1))."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

MAX_ITER = 200
XTOL = 1e-8


class FitError(RuntimeError):
    pass


class NonConvergenceError(FitError):
    pass


class DegenerateDataError(FitError):
    pass


class InsufficientSamplesError(FitError):
    pass


@dataclass(frozen=True)
class RecoverySeries:
    ti: np.ndarray      # s
    signal: np.ndarray
    position: str | None = None

    def __post_init__(self):
        ti = np.asarray(self.ti, dtype=float)
        s = np.asarray(self.signal, dtype=float)
        object.__setattr__(self, "ti", ti)
        object.__setattr__(self, "signal", s)
        if ti.shape != s.shape or ti.ndim != 1:
            raise ValueError("ti and signal must be 1-D arrays of equal length")
        if len(ti) < 4:
            raise InsufficientSamplesError("insufficient samples (need at least 4)")
        if np.any(ti <= 0) or np.any(np.diff(ti) <= 0):
            raise ValueError("inversion times must be positive and strictly increasing")


@dataclass(frozen=True)
class EfficiencyFit:
    s0: float
    k: float
    t1: float
    residual: float
    converged: bool = True
    degenerate: bool = False


def recovery_model(ti, s0, k, t1):
    return s0 * (1.0 - k * np.exp(-np.asarray(ti, dtype=float) / t1))


def _jacobian(x, ti, _s):
    s0, k, t1 = x
    e = np.exp(-ti / t1)
    return np.column_stack([1.0 - k * e, -s0 * e, -s0 * k * e * ti / t1 ** 2])


def _residuals(x, ti, s):
    return recovery_model(ti, *x) - s


def default_start(series: RecoverySeries) -> tuple[float, float, float]:
    s = series.signal
    smax = float(np.max(s))
    return smax, 1.0 - float(np.min(s)) / smax, float(np.median(series.ti))


def fit_recovery(series: RecoverySeries, start=None) -> EfficiencyFit:
    """Damped least-squares (Levenberg-Marquardt) fit with analytic Jacobian.

    A constant signal carries no recovery: it is reported as K = 0 with
    ``degenerate=True`` and T1 left at the median TI (unidentifiable).
    """
    s = series.signal
    if np.all(s == s[0]):
        if s[0] <= 0:
            raise DegenerateDataError("constant non-positive signal")
        return EfficiencyFit(float(s[0]), 0.0, float(np.median(series.ti)), 0.0, True, True)
    x0 = default_start(series) if start is None else tuple(start)
    if not x0[0] > 0:
        raise DegenerateDataError("maximum signal must be positive")
    res = least_squares(_residuals, x0, jac=_jacobian, method="lm",
                        args=(series.ti, s), xtol=XTOL, ftol=1e-15, gtol=1e-15,
                        max_nfev=MAX_ITER * 4, x_scale="jac")
    if res.status <= 0:
        raise NonConvergenceError(f"fit did not converge: {res.message}")
    s0, k, t1 = (float(v) for v in res.x)
    if not (s0 > 0 and t1 > 0):
        raise NonConvergenceError("fit converged to non-physical S0 or T1")
    return EfficiencyFit(s0, k, t1, float(np.linalg.norm(res.fun)))


def null_time(k: float, t1: float) -> float:
    """TI where the model signal crosses zero, T1 * ln(K)."""
    return float(t1 * np.log(k))


def efficiency_profile(mz) -> np.ndarray:
    """Simulated inversion efficiency K = 1 - mz (2 for full inversion)."""
    return 1.0 - np.asarray(mz, dtype=float)
