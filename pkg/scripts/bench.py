"""Timing benchmarks for the long BBM run and the accurate NLS run."""

import sys

from fourier_relax.experiments import BENCH_CASES, perf_bench

for case in sys.argv[1:] or list(BENCH_CASES):
    rep = perf_bench(case)
    print(f"{case}: median {rep.median:.2f}s over {len(rep.times)} runs, {rep.steps} steps, "
          f"final L2 error {rep.final_error:.2e}")
    print("   ", rep.metadata)
