"""Compare the compiled and numpy rotation kernels on the published 5 mm TR-FOCI pulse.

    python benchmarks/bench_bloch.py [--repeat N]
"""
import argparse
import time

import numpy as np

from trfoci import _kernels_py
from trfoci.bloch import _drive
from trfoci.fixtures import load_fixture
from trfoci.pulsegen import build_waveforms, initial_gradient

try:
    from trfoci._bloch_ext import propagate as compiled
except ImportError:
    compiled = None


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--fixture", default="trfoci_5mm_13ms")
    args = ap.parse_args()

    fx = load_fixture(args.fixture)
    wf = build_waveforms(fx.params, fx.sequence, initial_gradient(fx.params, fx.sequence.slice_thickness))
    z = fx.sequence.positions()
    drive = _drive(wf, 7.0, 0.0, __import__("trfoci").PhysicalConstants())

    results = {}
    for name, fn in (("numpy", _kernels_py.propagate), ("compiled", compiled)):
        if fn is None:
            print(f"{name:9s} unavailable")
            continue
        fn(*drive, z, wf.dt)
        t0 = time.perf_counter()
        for _ in range(args.repeat):
            m = fn(*drive, z, wf.dt)
        dt = (time.perf_counter() - t0) / args.repeat
        results[name] = m
        print(f"{name:9s} {dt * 1e3:8.2f} ms per profile ({wf.n} samples x {len(z)} positions)")
    if len(results) == 2:
        diff = np.max(np.abs(results["numpy"] - results["compiled"]))
        print(f"max |numpy - compiled| = {diff:.3g}")


if __name__ == "__main__":
    main()
