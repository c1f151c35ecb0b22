#!/usr/bin/env python3
"""Benchmark the compiled stepping kernels against the NumPy fallback.

Times the four preset-scale workloads (50,000 steps on a 41-node grid)
with both backends and reports the speedup.  Run from the repo root:

    python benchmarks/bench_kernels.py [--steps N]
"""

import argparse
import importlib.util
import time

import numpy as np

from schrkit.harness import presets
from schrkit.rdsolver import _kernels_py
from schrkit.rdsolver.kernels import pack_params

HAVE_COMPILED = importlib.util.find_spec("schrkit.rdsolver._kernels") is not None
if HAVE_COMPILED:
    from schrkit.rdsolver import _kernels

DX = 0.05

CASES = [
    ("basic / explicit", presets.params_basic_endemic,
     (30.0, 10.0, 5.0, 0.0), "run_explicit"),
    ("basic / imex", presets.params_basic_endemic,
     (30.0, 10.0, 5.0, 0.0), "run_imex"),
    ("extended / explicit", presets.params_extended_endemic,
     (30.0, 10.0, 3.0, 5.0, 3.0, 0.0), "run_explicit"),
    ("extended / imex", presets.params_extended_endemic,
     (30.0, 10.0, 3.0, 5.0, 3.0, 0.0), "run_imex"),
]


def _time_case(module, kernel_name, params, init, nsteps, repeats=3):
    pv = pack_params(params)
    kernel = getattr(module, kernel_name)
    best = np.inf
    for _ in range(repeats):
        u = np.ascontiguousarray(
            np.tile(np.asarray(init)[:, None], (1, 41)))
        t0 = time.perf_counter()
        status, steps, _ = kernel(u, pv, params.d, DX, 1e-2, nsteps, 1e-12)
        elapsed = time.perf_counter() - t0
        assert status == 0 and steps == nsteps
        best = min(best, elapsed)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=50_000,
                    help="time steps per case (default: 50000, the "
                         "preset workload)")
    args = ap.parse_args()

    print(f"{args.steps} steps, 41 nodes, best of 3")
    print(f"{'case':<22}{'numpy':>12}{'compiled':>12}{'speedup':>10}")
    for label, pfun, init, kern in CASES:
        p = pfun()
        t_py = _time_case(_kernels_py, kern, p, init, args.steps)
        if HAVE_COMPILED:
            t_c = _time_case(_kernels, kern, p, init, args.steps)
            print(f"{label:<22}{t_py:>10.3f}s{t_c:>10.4f}s"
                  f"{t_py / t_c:>9.1f}x")
        else:
            print(f"{label:<22}{t_py:>10.3f}s{'n/a':>12}{'n/a':>10}")
    if not HAVE_COMPILED:
        print("\ncompiled extension not built: install with "
              "`pip install -e . --no-build-isolation`")


if __name__ == "__main__":
    main()
