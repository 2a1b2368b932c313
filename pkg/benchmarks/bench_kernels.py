#!/usr/bin/env python3
"""Benchmark the compiled serpentine kernel against the NumPy reference.

Runs the same simulation on both backends, reports throughput, and verifies
the outputs are bit-identical — the compiled kernel is an optimization, never
a behavior change. Exits nonzero if the outputs differ or the compiled
kernel is not installed.

Usage: python benchmarks/bench_kernels.py [--trials N] [--seed S] [--repeat R]
"""
from __future__ import annotations

import argparse
import os
import sys
import time

from ajscc._kernels import have_compiled
from ajscc.analytic import NoiseModel
from ajscc.curve import build_config
from ajscc.dist import DiscreteBoundaryGaussian, Uniform
from ajscc.mc import Analog, Digital, SimulationSpec, run


def _time_run(spec: SimulationSpec, backend: str, repeat: int):
    best = float("inf")
    report = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        report = run(spec, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, report


def _signature(report):
    """Everything the simulation reports, for exact comparison."""
    return (
        report.mse_per_dim,
        report.mse_sum,
        report.ci_halfwidth,
        tuple(sorted(report.crossing_counts.items())),
        report.multi_crossing_count,
        report.none_count,
        report.lsc_event_count,
        report.rsc_event_count,
    )


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=2_000_000)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--repeat", type=int, default=3,
                    help="timing repetitions; best of R is reported")
    args = ap.parse_args()

    if not have_compiled():
        print("compiled kernel not installed; nothing to compare", file=sys.stderr)
        return 1

    config = build_config(3, [1.0, 1.0, 1.0], [10, 10], 1000.0)
    cases = {
        "analog, uniform sources": SimulationSpec(
            config=config,
            noise=NoiseModel(sigma_n=0.05),
            sources=(Uniform(0.0, 1.0), Uniform(0.0, 1.0), Uniform(0.0, 1.0)),
            sensor=Analog(),
            trials=args.trials,
            seed=args.seed,
        ),
        "digital(5), clipped-normal dim 1": SimulationSpec(
            config=config,
            noise=NoiseModel(sigma_n=0.05),
            sources=(DiscreteBoundaryGaussian(0.0, 1.0, 0.5, 0.2),
                     Uniform(0.0, 1.0), Uniform(0.0, 1.0)),
            sensor=Digital(n_bits=5),
            trials=args.trials,
            seed=args.seed,
        ),
    }

    threads = os.environ.get("AJSCC_THREADS", "(unset)")
    print(f"trials per case: {args.trials:,}   seed: {args.seed}   "
          f"best of {args.repeat}   AJSCC_THREADS={threads}")
    print(f"{'case':<36} {'python':>12} {'cython':>12} {'speedup':>8}  match")

    all_match = True
    for name, spec in cases.items():
        t_py, r_py = _time_run(spec, "python", args.repeat)
        t_cy, r_cy = _time_run(spec, "cython", args.repeat)
        match = _signature(r_py) == _signature(r_cy)
        all_match = all_match and match
        rate_py = args.trials / t_py / 1e6
        rate_cy = args.trials / t_cy / 1e6
        print(f"{name:<36} {t_py:>9.3f} s  {t_cy:>9.3f} s  {t_py / t_cy:>7.2f}x"
              f"  {'bit-identical' if match else 'MISMATCH'}")
        print(f"{'':<36} {rate_py:>8.1f} M/s {rate_cy:>9.1f} M/s")

    if not all_match:
        print("backend outputs differ", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
