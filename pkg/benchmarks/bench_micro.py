"""Compare the compiled and interpreted micro-simulator cores.

Runs the fixed-timestep core over every ordering of a bundled benchmark on
both bundled device profiles and reports wall time for the numba-compiled
path and the pure-Python fallback (the one selected by setting
``OFFSIM_DISABLE_NUMBA``).

Usage: python benchmarks/bench_micro.py [--dt MS] [--benchmark NAME]
"""

import argparse
import time
from itertools import permutations

import numpy as np

from offsim._micro import HAVE_NUMBA, _micro_core_nb, _micro_core_py
from offsim.cli import load_profile_arg
from offsim.model import stage_times
from offsim.workload import load_bk_benchmark


def run_sweep(core, cases, dt):
    start = time.perf_counter()
    checksum = 0.0
    for t_htd, t_k, t_dth, dma2, sigma in cases:
        _, _, makespan = core(t_htd, t_k, t_dth, dma2, sigma, dt)
        checksum += makespan
    return time.perf_counter() - start, checksum


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dt", type=float, default=0.001, help="tick size in ms")
    parser.add_argument("--benchmark", default="BK50", help="bundled benchmark name")
    args = parser.parse_args()

    tasks = list(load_bk_benchmark(args.benchmark).tasks)
    cases = []
    for profile_name in ("1dma", "2dma"):
        profile = load_profile_arg(profile_name)
        durations = [stage_times(t, profile) for t in tasks]
        for perm in permutations(range(len(tasks))):
            triples = [durations[i] for i in perm]
            cases.append(
                (
                    np.array([d[0] for d in triples]),
                    np.array([d[1] for d in triples]),
                    np.array([d[2] for d in triples]),
                    profile.dma_engines == 2,
                    profile.overlap_sigma,
                )
            )

    print(f"{args.benchmark}: {len(cases)} orderings at dt={args.dt} ms")
    py_s, py_sum = run_sweep(_micro_core_py, cases, args.dt)
    print(f"python fallback: {py_s * 1e3:8.1f} ms  (checksum {py_sum:.3f})")
    if not HAVE_NUMBA:
        print("numba not installed; compiled path skipped")
        return
    run_sweep(_micro_core_nb, cases[:1], args.dt)  # trigger JIT outside timing
    nb_s, nb_sum = run_sweep(_micro_core_nb, cases, args.dt)
    print(f"numba compiled:  {nb_s * 1e3:8.1f} ms  (checksum {nb_sum:.3f})")
    if abs(py_sum - nb_sum) > 1e-6:
        raise SystemExit("checksum mismatch between compiled and fallback cores")
    print(f"speedup: {py_s / nb_s:.1f}x")


if __name__ == "__main__":
    main()
