"""Command-line interface: generate, simulate, sweep, optimize, fit."""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import bloch
from .evaluate import WipaFitness, b1_range, ideal_profile, integrated_ipa, ipa_curve
from .fitting import FitError, RecoverySeries, fit_recovery
from .io import (InputError, PulseDescriptor, fixture_descriptor, fmt, load_descriptor,
                 read_recovery_csv, read_waveform_csv, resolve_run_config,
                 sequence_to_dict, write_csv, write_json, write_waveform_csv)
from .model import PulseKind, SequenceConfig, validate_params
from .pulsegen import NoZeroCrossingError, design_pulse

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE = 0, 2, 3

log = logging.getLogger("trfoci")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _outdir(args) -> Path:
    out = args.output or os.environ.get("TRFOCI_OUTDIR") or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _descriptor(args) -> PulseDescriptor:
    if getattr(args, "fixture", None):
        desc = fixture_descriptor(args.fixture)
    elif getattr(args, "descriptor", None):
        desc = load_descriptor(args.descriptor)
    else:
        raise InputError("give a pulse descriptor file or --fixture NAME")
    if getattr(args, "slice_mm", None):
        desc = PulseDescriptor(desc.params, desc.sequence.replace(slice_thickness=args.slice_mm),
                               desc.limits, desc.edge_deweight)
    bad = validate_params(desc.params, desc.limits)
    if bad:
        raise InputError("invalid pulse: " + "; ".join(bad))
    return desc


def _design(desc: PulseDescriptor):
    try:
        return design_pulse(desc.params, desc.sequence, desc.limits)
    except NoZeroCrossingError as exc:
        raise InputError(f"calibration failed: {exc}") from exc


def _echo(out: Path, command: str, resolved: dict) -> None:
    write_json(out / f"{command}_config.json", {"command": command, **resolved})


def _label(level: float) -> str:
    return format(level, "g")


# ---- subcommands ---------------------------------------------------------------

def cmd_generate(args) -> int:
    desc = _descriptor(args)
    out = _outdir(args)
    _echo(out, "generate", {"pulse": desc.to_dict()})
    wf, cal = _design(desc)
    write_waveform_csv(out / "waveform.csv", wf)
    write_json(out / "calibration.json", cal.as_dict())
    print(json.dumps(cal.as_dict()))
    return EXIT_OK


def _simulation_source(args):
    if args.waveform:
        if not args.slice_mm:
            raise InputError("--waveform needs --slice-mm")
        wf = read_waveform_csv(args.waveform, args.slice_mm)
        seq = SequenceConfig(pulse_length=wf.pulse_length, slice_thickness=args.slice_mm,
                             n_time_samples=wf.n)
        return wf, seq, {"waveform_file": str(args.waveform), "SL_mm": args.slice_mm}
    desc = _descriptor(args)
    wf, _ = _design(desc)
    return wf, desc.sequence, {"pulse": desc.to_dict()}


def cmd_simulate(args) -> int:
    wf, seq, source = _simulation_source(args)
    out = _outdir(args)
    _echo(out, "simulate", {**source, "b1_ut": args.b1, "fov_factor": args.fov_factor,
                            "distort_rate": args.distort_rate, "offres_hz": args.offres_hz})
    if args.distort_rate is not None:
        wf = bloch.distort_gradient(wf, args.distort_rate)
    z = seq.positions(args.fov_factor)
    for level in args.b1:
        mz = bloch.simulate_mz(wf, level, z, args.offres_hz)
        write_csv(out / f"profile_b1_{_label(level)}ut.csv", ("z_mm", "mz"), (z, mz))
    return EXIT_OK


def cmd_sweep(args) -> int:
    wf, seq, source = _simulation_source(args)
    if not args.step > 0:
        raise InputError("--step must be positive")
    out = _outdir(args)
    _echo(out, "sweep", {**source, "start": args.start, "stop": args.stop, "step": args.step})
    deweight = getattr(args, "edge_deweight", False)
    curve = ipa_curve(wf, seq, b1_range(args.start, args.stop, args.step),
                      ideal_profile(seq, deweight))
    write_csv(out / "ipa_curve.csv", ("b1_ut", "ipa"), curve)
    summary = {"integrated_ipa": float(fmt(integrated_ipa(curve))),
               "n_samples": len(curve[0])}
    write_json(out / "sweep_summary.json", summary)
    print(json.dumps(summary))
    return EXIT_OK


def cmd_optimize(args) -> int:
    from .optimizer import optimize

    file_cfg = {}
    if args.config:
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from exc
    flags = {
        "family": args.family, "edge_deweight": args.edge_deweight or None,
        "output_dir": args.output, "workers": args.workers,
        "sequence": {"SL_mm": args.slice_mm, "T_ms": args.length_ms,
                     "b1_eval_levels_ut": args.b1_levels},
        "ga": {"seed": args.seed, "pool_size": args.pool, "pairs": args.pairs,
               "n_mutants": args.mutants, "window": args.window,
               "threshold": args.threshold, "n_finalists": args.finalists,
               "hill_samples": args.hill_samples},
    }
    run = resolve_run_config(file_cfg, flags)
    out = Path(run.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    _echo(out, "optimize", run.to_dict())

    kind = PulseKind(run.family)
    fitness = WipaFitness(kind, run.sequence, run.limits, edge_deweight=run.edge_deweight)
    log_path = out / "generations.jsonl"
    log_path.write_bytes(b"")

    def on_generation(rec):
        with open(log_path, "ab") as fh:
            fh.write((json.dumps(rec) + "\n").encode())

    result = optimize(kind, fitness, run.ga, run.workers, on_generation)
    finalists = [{"vector": list(c.vector), "wipa": c.wipa, "integrated_ipa": s}
                 for c, s in zip(result.climbed, result.integrated)]
    write_json(out / "finalists.json", finalists)
    if not result.best.valid:
        print("no feasible candidate found", file=sys.stderr)
        return EXIT_INFEASIBLE
    best = PulseDescriptor(fitness.params(result.best.vector), run.sequence, run.limits,
                           run.edge_deweight)
    write_json(out / "best_pulse.json", best.to_dict())
    print(json.dumps({"best_wipa": result.best.wipa, "best_vector": list(result.best.vector)}))
    return EXIT_OK


def cmd_fit(args) -> int:
    groups = read_recovery_csv(args.input)
    out_path = Path(args.output) if args.output else _outdir(args) / "efficiency.csv"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["position,S0,K,T1,residual"]
    failures = 0
    for pos, (ti, sig) in groups.items():
        try:
            f = fit_recovery(RecoverySeries(np.array(ti), np.array(sig), pos))
            lines.append(",".join([pos, fmt(f.s0), fmt(f.k), fmt(f.t1), fmt(f.residual)]))
        except (FitError, ValueError) as exc:
            failures += 1
            print(f"position {pos}: {exc}", file=sys.stderr)
            lines.append(",".join([pos, "nan", "nan", "nan", "nan"]))
    out_path.write_bytes(("\n".join(lines) + "\n").encode("ascii"))
    return EXIT_INPUT if failures == len(groups) else EXIT_OK


# ---- parser --------------------------------------------------------------------

def _add_pulse_source(p, waveform=False):
    p.add_argument("descriptor", nargs="?", help="pulse descriptor JSON")
    p.add_argument("--fixture", help="use a published fixture, e.g. trfoci_5mm_13ms")
    p.add_argument("--slice-mm", type=float, help="override slice thickness (mm)")
    if waveform:
        p.add_argument("--waveform", help="waveform CSV written by 'generate'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trfoci", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="synthesize and calibrate a pulse")
    _add_pulse_source(p)
    p.add_argument("-o", "--output", help="output directory")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("simulate", help="inversion profiles at given B1 levels")
    _add_pulse_source(p, waveform=True)
    p.add_argument("--b1", type=_floats, default=[4.0, 7.0, 13.0], help="levels in uT")
    p.add_argument("--fov-factor", type=float, default=1.0)
    p.add_argument("--distort-rate", type=float, help="gradient distortion decay rate (1/s)")
    p.add_argument("--offres-hz", type=float, default=0.0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="IPA versus B1 curve")
    _add_pulse_source(p, waveform=True)
    p.add_argument("--start", type=float, default=0.0)
    p.add_argument("--stop", type=float, default=10.0)
    p.add_argument("--step", type=float, default=0.1)
    p.add_argument("--edge-deweight", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("optimize", help="genetic-algorithm pulse optimization")
    p.add_argument("--config", help="run configuration JSON")
    p.add_argument("--family", choices=[k.value for k in PulseKind if k is not PulseKind.HSC])
    p.add_argument("--seed", type=int)
    p.add_argument("--slice-mm", type=float)
    p.add_argument("--length-ms", type=float)
    p.add_argument("--b1-levels", type=_floats)
    p.add_argument("--pool", type=int)
    p.add_argument("--pairs", type=int)
    p.add_argument("--mutants", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--finalists", type=int)
    p.add_argument("--hill-samples", type=int)
    p.add_argument("--edge-deweight", action="store_true")
    p.add_argument("--workers", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("fit", help="inversion-efficiency fit of recovery data")
    p.add_argument("input", help="CSV with position,TI_s,signal rows")
    p.add_argument("-o", "--output", help="output CSV path")
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
