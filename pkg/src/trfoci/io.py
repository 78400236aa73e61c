"""Pulse descriptors, run configuration and fixed-format CSV/JSON output."""
from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .model import HardwareLimits, PulseKind, PulseParams, PulseWaveforms, SequenceConfig
from .optimizer import GaConfig


class InputError(ValueError):
    """Malformed user input (maps to exit code 2)."""


def fmt(x) -> str:
    """9 significant digits, '.' decimal separator."""
    return format(float(x), ".9g")


def write_csv(path, header, columns) -> None:
    cols = [np.asarray(c) for c in columns]
    lines = [",".join(header)]
    for row in zip(*cols):
        lines.append(",".join(fmt(v) for v in row))
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("ascii"))


def write_json(path, obj) -> None:
    Path(path).write_bytes((json.dumps(obj, indent=2, sort_keys=True) + "\n").encode("utf-8"))


# ---- sequence / limits <-> JSON -------------------------------------------------

_SEQ_ALIASES = {"T_ms": ("pulse_length", 1e3), "SL_mm": ("slice_thickness", 1.0),
                "fov_mm": ("fov_width", 1.0), "b1_eval_levels_ut": ("b1_eval_levels", None)}


def sequence_from_dict(d: dict | None, base: SequenceConfig | None = None) -> SequenceConfig:
    values = {} if base is None else asdict(base)
    if base is not None and d and ("SL_mm" in d or "slice_thickness" in d) \
            and "fov_mm" not in d and "fov_width" not in d:
        values["fov_width"] = None
    valid = {f.name for f in fields(SequenceConfig)}
    for key, val in (d or {}).items():
        if key in _SEQ_ALIASES:
            name, scale = _SEQ_ALIASES[key]
            values[name] = val if scale is None else val / scale
        elif key in valid:
            values[key] = val
        else:
            raise InputError(f"unknown sequence field {key!r}")
    try:
        return SequenceConfig(**values)
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from exc


def sequence_to_dict(cfg: SequenceConfig) -> dict:
    return {"T_ms": cfg.pulse_length * 1e3, "SL_mm": cfg.slice_thickness,
            "n_time_samples": cfg.n_time_samples, "fov_mm": cfg.fov_width,
            "n_positions": cfg.n_positions, "b1_eval_levels_ut": list(cfg.b1_eval_levels)}


def limits_from_dict(d: dict | None, base: HardwareLimits = HardwareLimits()) -> HardwareLimits:
    values = asdict(base)
    for key, val in (d or {}).items():
        if key not in values:
            raise InputError(f"unknown limits field {key!r}")
        values[key] = val
    try:
        return HardwareLimits(**values)
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from exc


# ---- pulse descriptors ---------------------------------------------------------

@dataclass(frozen=True)
class PulseDescriptor:
    params: PulseParams
    sequence: SequenceConfig = SequenceConfig()
    limits: HardwareLimits = HardwareLimits()
    edge_deweight: bool = False

    def to_dict(self) -> dict:
        return {"kind": self.params.kind.value, "params": list(self.params.values),
                "sequence": sequence_to_dict(self.sequence),
                "limits": asdict(self.limits), "edge_deweight": self.edge_deweight}

    @classmethod
    def from_dict(cls, d: dict) -> "PulseDescriptor":
        try:
            kind = PulseKind(d["kind"])
            params = PulseParams(kind, tuple(float(v) for v in d["params"]))
        except (KeyError, ValueError, TypeError) as exc:
            raise InputError(f"bad pulse descriptor: {exc}") from exc
        return cls(params, sequence_from_dict(d.get("sequence")),
                   limits_from_dict(d.get("limits")), bool(d.get("edge_deweight", False)))


def load_descriptor(path) -> PulseDescriptor:
    try:
        d = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read descriptor {path}: {exc}") from exc
    return PulseDescriptor.from_dict(d)


def fixture_descriptor(name: str) -> PulseDescriptor:
    from .fixtures import UnknownFixtureError, load_fixture
    try:
        fx = load_fixture(name)
    except UnknownFixtureError as exc:
        raise InputError(str(exc)) from exc
    return PulseDescriptor(fx.params, fx.sequence, HardwareLimits(), fx.edge_deweight)


# ---- waveform CSV ----------------------------------------------------------------

WAVEFORM_HEADER = ("t_s", "b1_norm", "freq_hz", "grad_mt_per_m")


def write_waveform_csv(path, wf: PulseWaveforms) -> None:
    write_csv(path, WAVEFORM_HEADER,
              (wf.time_axis, wf.b1_envelope, wf.freq_offset, wf.gradient))


def read_waveform_csv(path, slice_thickness: float) -> PulseWaveforms:
    rows = _read_rows(path, WAVEFORM_HEADER)
    if len(rows) < 2:
        raise InputError("waveform file needs at least two samples")
    arr = np.array(rows, dtype=float)
    return PulseWaveforms(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3],
                          float(arr[:, 3].max()), None, slice_thickness)


def _read_rows(path, header, parse=float):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    reader = csv.reader(text.splitlines())
    try:
        head = next(reader)
    except StopIteration:
        raise InputError(f"{path}: empty file") from None
    if tuple(h.strip() for h in head) != tuple(header):
        raise InputError(f"{path}: expected header {','.join(header)}")
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise InputError(f"{path}:{lineno}: expected {len(header)} fields")
        try:
            rows.append([float(v) for v in row])
        except ValueError:
            raise InputError(f"{path}:{lineno}: non-numeric field") from None
    return rows


def read_recovery_csv(path) -> dict[str, tuple[list[float], list[float]]]:
    """Group ``position,TI_s,signal`` rows by position (first-seen order)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    reader = csv.reader(text.splitlines())
    try:
        head = next(reader)
    except StopIteration:
        raise InputError(f"{path}: empty file") from None
    if [h.strip() for h in head] != ["position", "TI_s", "signal"]:
        raise InputError(f"{path}: expected header position,TI_s,signal")
    series: dict[str, tuple[list[float], list[float]]] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 3:
            raise InputError(f"{path}:{lineno}: expected 3 fields")
        try:
            ti, sig = float(row[1]), float(row[2])
        except ValueError:
            raise InputError(f"{path}:{lineno}: non-numeric field") from None
        pos = row[0].strip()
        series.setdefault(pos, ([], []))
        series[pos][0].append(ti)
        series[pos][1].append(sig)
    if not series:
        raise InputError(f"{path}: no data rows")
    return series


# ---- run configuration -----------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    sequence: SequenceConfig = SequenceConfig()
    limits: HardwareLimits = HardwareLimits()
    ga: GaConfig = GaConfig()
    family: str = "trfoci"
    edge_deweight: bool = False
    output_dir: str = "."
    workers: int = 1

    def to_dict(self) -> dict:
        """Provenance record; output_dir and workers do not affect results and are omitted."""
        return {"family": self.family, "edge_deweight": self.edge_deweight,
                "sequence": sequence_to_dict(self.sequence), "limits": asdict(self.limits),
                "ga": asdict(self.ga)}


ENV_OUTDIR = "TRFOCI_OUTDIR"
ENV_WORKERS = "TRFOCI_WORKERS"


def resolve_run_config(file_cfg: dict | None = None, flags: dict | None = None,
                       environ=os.environ) -> RunConfig:
    """Merge defaults <- config file <- environment <- command-line flags.

    ``file_cfg`` and ``flags`` share one layout: top-level ``family``,
    ``edge_deweight``, ``output_dir``, ``workers`` plus nested ``sequence``,
    ``limits`` and ``ga`` dicts. ``None`` values in ``flags`` are ignored.
    """
    layers = [file_cfg or {}]
    env = {}
    if environ.get(ENV_OUTDIR):
        env["output_dir"] = environ[ENV_OUTDIR]
    if environ.get(ENV_WORKERS):
        env["workers"] = int(environ[ENV_WORKERS])
    layers.append(env)
    layers.append(_drop_none(flags or {}))

    seq, lim, ga = SequenceConfig(), HardwareLimits(), asdict(GaConfig())
    top = {"family": "trfoci", "edge_deweight": False, "output_dir": ".", "workers": 1}
    for layer in layers:
        seq = sequence_from_dict(layer.get("sequence"), seq)
        lim = limits_from_dict(layer.get("limits"), lim)
        for key, val in (layer.get("ga") or {}).items():
            if key not in ga:
                raise InputError(f"unknown ga field {key!r}")
            ga[key] = val
        for key in top:
            if key in layer:
                top[key] = layer[key]
        unknown = set(layer) - set(top) - {"sequence", "limits", "ga"}
        if unknown:
            raise InputError(f"unknown config fields {sorted(unknown)}")
    try:
        ga_cfg = GaConfig(**ga)
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    try:
        PulseKind(top["family"])
    except ValueError:
        raise InputError(f"unknown family {top['family']!r}") from None
    return RunConfig(seq, lim, ga_cfg, top["family"], bool(top["edge_deweight"]),
                     str(top["output_dir"]), int(top["workers"]))


def _drop_none(d):
    out = {}
    for k, v in d.items():
        if isinstance(v, dict):
            v = _drop_none(v)
            if v:
                out[k] = v
        elif v is not None:
            out[k] = v
    return out
