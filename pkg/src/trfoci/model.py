"""Domain types, unit conventions and hardware limits.

Units used throughout the package: seconds, hertz, microtesla (B1 levels),
millitesla/meter (gradients) and millimeters (slice geometry).
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, fields, asdict
from typing import Sequence

import numpy as np


class PulseKind(str, enum.Enum):
    HSC = "hsc"
    CFOCI = "cfoci"
    TRFOCI = "trfoci"


PARAM_NAMES: dict[PulseKind, tuple[str, ...]] = {
    PulseKind.HSC: ("mu", "beta"),
    PulseKind.CFOCI: ("a_max", "mu", "beta"),
    PulseKind.TRFOCI: ("a_max", "w", "r1", "r2", "r3", "r4", "r5",
                       "mu", "beta", "tau1", "tau2"),
}

# (low, high, low_open, high_open) per coordinate. These are the search
# bounds used by the optimizer as well as the validation ranges.
_TR_RANGES = {
    "a_max": (1.0, 30.0, True, True),
    "w": (0.0, 1.0, True, True),
    "r1": (0.0, 1.0, False, False),
    "r2": (0.0, 1.0, False, False),
    "r3": (0.0, 1.0, False, False),
    "r4": (0.0, 1.0, False, False),
    "r5": (0.0, 1.0, False, False),
    "mu": (0.5, 10.0, True, True),
    "beta": (1.0, 10.0, True, True),
    "tau1": (0.0, 5.0, False, False),
    "tau2": (0.0, 5.0, False, False),
}
PARAM_RANGES: dict[PulseKind, dict[str, tuple[float, float, bool, bool]]] = {
    PulseKind.TRFOCI: _TR_RANGES,
    PulseKind.CFOCI: {
        "a_max": (1.0, 30.0, False, True),
        "mu": _TR_RANGES["mu"],
        "beta": _TR_RANGES["beta"],
    },
    PulseKind.HSC: {"mu": _TR_RANGES["mu"], "beta": _TR_RANGES["beta"]},
}


def search_bounds(kind: PulseKind) -> tuple[np.ndarray, np.ndarray]:
    """Closed lower/upper bounds for each coordinate of ``kind``."""
    kind = PulseKind(kind)
    ranges = PARAM_RANGES[kind]
    lo = np.array([ranges[n][0] for n in PARAM_NAMES[kind]])
    hi = np.array([ranges[n][1] for n in PARAM_NAMES[kind]])
    return lo, hi


@dataclass(frozen=True)
class PulseParams:
    """A tagged parameter vector.

    ``values`` holds the coordinates in the canonical order given by
    ``PARAM_NAMES[kind]``; named attribute access (``p.a_max``, ``p.tau2``)
    is provided on top.
    """

    kind: PulseKind
    values: tuple[float, ...]

    def __post_init__(self):
        kind = PulseKind(self.kind)
        object.__setattr__(self, "kind", kind)
        vals = tuple(float(v) for v in self.values)
        if len(vals) != len(PARAM_NAMES[kind]):
            raise ValueError(
                f"{kind.value} expects {len(PARAM_NAMES[kind])} parameters, got {len(vals)}"
            )
        object.__setattr__(self, "values", vals)

    def __getattr__(self, name):
        # only reached for names that are not real attributes
        names = PARAM_NAMES.get(self.__dict__.get("kind"), ())
        if name in names:
            return self.values[names.index(name)]
        if name == "a_max" and self.__dict__.get("kind") is PulseKind.HSC:
            return 1.0
        raise AttributeError(name)

    @classmethod
    def hsc(cls, mu: float, beta: float) -> "PulseParams":
        return cls(PulseKind.HSC, (mu, beta))

    @classmethod
    def cfoci(cls, a_max: float, mu: float, beta: float) -> "PulseParams":
        return cls(PulseKind.CFOCI, (a_max, mu, beta))

    @classmethod
    def trfoci(cls, *values: float) -> "PulseParams":
        return cls(PulseKind.TRFOCI, tuple(values))

    @property
    def names(self) -> tuple[str, ...]:
        return PARAM_NAMES[self.kind]

    @property
    def product(self) -> float:
        """a_max * mu * beta (a_max is 1 for HSC)."""
        return self.a_max * self.mu * self.beta

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values))

    def replace(self, **changes: float) -> "PulseParams":
        d = self.as_dict()
        unknown = set(changes) - set(d)
        if unknown:
            raise KeyError(f"unknown parameters for {self.kind.value}: {sorted(unknown)}")
        d.update(changes)
        return PulseParams(self.kind, tuple(d[n] for n in self.names))

    def to_json(self) -> str:
        # repr() round-trips doubles exactly
        return json.dumps({"kind": self.kind.value, "params": list(self.values)})

    @classmethod
    def from_json(cls, text: str) -> "PulseParams":
        d = json.loads(text)
        return cls(PulseKind(d["kind"]), tuple(d["params"]))


@dataclass(frozen=True)
class HardwareLimits:
    g_max_limit: float = 33.0        # mT/m
    freq_sweep_limit: float = 50e3   # Hz
    product_cap: float = 2050.0

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f"{f.name} must be strictly positive")


@dataclass(frozen=True)
class PhysicalConstants:
    gamma_bar: float = 42.577e6  # Hz/T, proton

    def __post_init__(self):
        if not self.gamma_bar > 0:
            raise ValueError("gamma_bar must be positive")


@dataclass(frozen=True)
class SequenceConfig:
    """Pulse timing, slab geometry and evaluation B1 levels.

    ``fov_width`` defaults to twice the slice thickness and ``b1_eval_levels``
    to (3, 5, 7) microtesla.
    """

    pulse_length: float = 13e-3          # s
    slice_thickness: float = 5.0         # mm
    n_time_samples: int = 200
    fov_width: float | None = None       # mm
    n_positions: int = 1001
    b1_eval_levels: tuple[float, float, float] = (3.0, 5.0, 7.0)  # uT

    def __post_init__(self):
        if self.fov_width is None:
            object.__setattr__(self, "fov_width", 2.0 * self.slice_thickness)
        object.__setattr__(self, "b1_eval_levels",
                           tuple(float(x) for x in self.b1_eval_levels))
        if not self.pulse_length > 0:
            raise ValueError("pulse_length must be positive")
        if self.n_time_samples < 2:
            raise ValueError("n_time_samples must be >= 2")
        if not self.slice_thickness > 0:
            raise ValueError("slice_thickness must be positive")
        if self.fov_width < self.slice_thickness:
            raise ValueError("fov_width must be >= slice_thickness")
        if self.n_positions < 3 or self.n_positions % 2 == 0:
            raise ValueError("n_positions must be odd and >= 3")
        l1, l2, l3 = self.b1_eval_levels
        if not (0 < l1 < l2 < l3):
            raise ValueError("b1_eval_levels must satisfy 0 < L1 < L2 < L3")

    @classmethod
    def with_levels(cls, l1: float, l3: float, **kw) -> "SequenceConfig":
        return cls(b1_eval_levels=(l1, 0.5 * (l1 + l3), l3), **kw)

    @property
    def dt(self) -> float:
        return self.pulse_length / (self.n_time_samples - 1)

    def normalized_time(self) -> np.ndarray:
        return symmetric_grid(self.n_time_samples, 1.0)

    def positions(self, fov_factor: float = 1.0) -> np.ndarray:
        return symmetric_grid(self.n_positions, 0.5 * self.fov_width * fov_factor)

    def replace(self, **changes) -> "SequenceConfig":
        d = asdict(self)
        if "slice_thickness" in changes and "fov_width" not in changes:
            d["fov_width"] = None
        d.update(changes)
        return SequenceConfig(**d)


def symmetric_grid(n: int, half_width: float) -> np.ndarray:
    """``n`` uniform points on [-half_width, half_width], exactly antisymmetric."""
    k = np.arange(n, dtype=float)
    return (2.0 * k - (n - 1)) / (n - 1) * half_width


@dataclass(frozen=True)
class PulseWaveforms:
    time_axis: np.ndarray       # s
    b1_envelope: np.ndarray     # dimensionless, peak 1
    freq_offset: np.ndarray     # Hz
    gradient: np.ndarray        # mT/m
    g_max: float                # mT/m
    params: PulseParams | None = None
    slice_thickness: float | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        n = len(self.time_axis)
        for name in ("b1_envelope", "freq_offset", "gradient"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} length does not match time_axis")

    @property
    def n(self) -> int:
        return len(self.time_axis)

    @property
    def pulse_length(self) -> float:
        return float(self.time_axis[-1] - self.time_axis[0])

    @property
    def dt(self) -> float:
        return self.pulse_length / (self.n - 1)

    def with_gradient(self, gradient: np.ndarray) -> "PulseWaveforms":
        g = np.asarray(gradient, dtype=float)
        return PulseWaveforms(self.time_axis, self.b1_envelope, self.freq_offset,
                              g, float(np.max(g)), self.params,
                              self.slice_thickness, dict(self.meta))


def _range_violation(name: str, value: float, spec: tuple[float, float, bool, bool]) -> str | None:
    lo, hi, lo_open, hi_open = spec
    bad_lo = value <= lo if lo_open else value < lo
    bad_hi = value >= hi if hi_open else value > hi
    if bad_lo or bad_hi or math.isnan(value):
        return f"{name} out of range"
    return None


def validate_params(p: PulseParams, lim: HardwareLimits | None = None) -> list[str]:
    """Return every violated range or cap; an empty list means the vector is valid."""
    violations = []
    ranges = PARAM_RANGES[p.kind]
    for name, value in zip(p.names, p.values):
        msg = _range_violation(name, value, ranges[name])
        if msg:
            violations.append(msg)
    if lim is not None and p.product > lim.product_cap:
        violations.append(
            f"product a_max*mu*beta = {p.product:.6g} exceeds cap {lim.product_cap:g}"
        )
    return violations


def waveform_violations(wf: PulseWaveforms, lim: HardwareLimits) -> list[str]:
    """Hardware checks on realized waveforms (sweep and gradient amplitude)."""
    out = []
    if np.max(np.abs(wf.freq_offset)) > lim.freq_sweep_limit:
        out.append("frequency sweep exceeds limit")
    if np.max(wf.gradient) > lim.g_max_limit * (1 + 1e-12):
        out.append("gradient exceeds limit")
    return out
