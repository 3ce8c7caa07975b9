"""Compare the compiled and pure estimator kernels on the default problem.

Run as: python3 benchmarks/bench_kernels.py [--trials 300]
"""

import argparse
import time

import numpy as np

from beamspace_sd import (BeamspaceTransform, make_combiner, sample_channel,
                          simulate_measurement, to_beamspace)
from beamspace_sd import _kernels_py

try:
    from beamspace_sd import _kernels
except ImportError:
    _kernels = None


def make_problem(seed, n=256, q=96, k=16, l=2, noise=0.05):
    transform = BeamspaceTransform.build(n)
    comb = make_combiner(np.random.default_rng([seed, 0]), n, q, block_size=k)
    ch = sample_channel(np.random.default_rng([seed, 1]), n, l)
    hb = to_beamspace(ch, transform)
    z = simulate_measurement(hb, comb, noise, np.random.default_rng([seed, 2])).z
    return comb.matrix, z


def bench(fn, reps):
    best = np.inf
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(reps):
            fn()
        best = min(best, (time.perf_counter() - t0) / reps)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=300,
                        help="repetitions per timing sample")
    args = parser.parse_args()

    w, z = make_problem(seed=7)
    backends = [("python", _kernels_py)]
    if _kernels is not None:
        backends.insert(0, ("cython", _kernels))
    else:
        print("compiled backend not built; timing the pure backend only")

    rows = []
    for name, mod in backends:
        t_sd = bench(lambda: mod.sd_core(w, z, 3, 8), args.trials)
        t_omp = bench(lambda: mod.omp_core(w, z, 24), max(args.trials // 4, 1))
        rows.append((name, t_sd, t_omp))
        print(f"{name:>7s}  sd_core {1e6 * t_sd:9.1f} us   "
              f"omp_core {1e6 * t_omp:9.1f} us")

    if len(rows) == 2:
        print(f"speedup  sd_core {rows[1][1] / rows[0][1]:9.2f} x    "
              f"omp_core {rows[1][2] / rows[0][2]:9.2f} x")


if __name__ == "__main__":
    main()
