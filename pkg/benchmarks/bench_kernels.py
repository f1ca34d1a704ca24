"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--side 300] [--t 200]
"""

import argparse
import time

import numpy as np

from competition_lab import _pykernels, lpp, tasep
from competition_lab._backend import kernels
from competition_lab.model import Params, hashed_weights, sample_initial_interface
from competition_lab.rng import RngStream


def _best(fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_passage(side):
    stream = RngStream(1)
    prof = sample_initial_interface(Params(0.8, 0.2), side, stream)
    weights = hashed_weights(stream)
    field = lpp.compute_passage_times(prof, weights, top=side)
    cells = field.interior_count
    out = {}
    for name, mod in (("compiled", kernels), ("python", _pykernels)):
        saved, lpp.kernels = lpp.kernels, mod
        try:
            out[name] = _best(lambda: lpp.compute_passage_times(prof, weights, top=side), 1 if mod is _pykernels else 3)
        finally:
            lpp.kernels = saved
    return cells, out


def bench_tasep(t):
    p = Params(0.8, 0.2)
    half = tasep.window_half_width(t)
    lo, v = tasep.initial_configuration(p, half, tasep.GUARD, RngStream(2))
    obs = np.array([0.0, t])
    out = {}
    events = 0
    for name, mod in (("compiled", kernels), ("python", _pykernels)):
        def run():
            nonlocal events
            events = mod.tasep_run(v.copy(), -lo, 99, t, obs, tasep.GUARD, False)[2]
        out[name] = _best(run, 1 if mod is _pykernels else 3)
    return events, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--side", type=int, default=300)
    ap.add_argument("--t", type=float, default=200.0)
    args = ap.parse_args()
    print(f"compiled backend in use: {kernels is not _pykernels}")
    cells, res = bench_passage(args.side)
    print(f"passage sweep, {cells} cells: " + ", ".join(
        f"{k} {v:.3f}s ({1e9 * v / cells:.0f} ns/cell)" for k, v in res.items())
        + f", speedup {res['python'] / res['compiled']:.0f}x")
    events, res = bench_tasep(args.t)
    print(f"exclusion run, {events} events: " + ", ".join(
        f"{k} {v:.3f}s ({1e9 * v / events:.0f} ns/event)" for k, v in res.items())
        + f", speedup {res['python'] / res['compiled']:.0f}x")


if __name__ == "__main__":
    main()
