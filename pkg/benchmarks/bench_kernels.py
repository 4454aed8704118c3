"""Time the numba and numpy backends of the oracle and walk kernels.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from permreach import _kernels
from permreach.oracle import GeneratorSpec, _encode, random_aban


def best_of(fn, repeat):
    fn()  # warm-up, includes compilation for the jitted path
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def bfs_case(n, seed):
    net = random_aban(GeneratorSpec(n, 3, 2, 1.0, seed))
    args = [np.asarray(a, dtype=np.int64) for a in _encode(net)]
    # an unreachable goal bit forces a full sweep of the reachable set
    gm, gv = np.int64(1 << n), np.int64(1 << n)
    return (n, np.int64(0), *args, gm, gv)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if _kernels.bfs_reach_numba is None:
        raise SystemExit("numba is not installed")
    print(f"{'kernel':<28}{'numba (ms)':>12}{'numpy (ms)':>12}{'ratio':>8}")
    for n in (10, 14, 18):
        case = bfs_case(n, 1)
        a = best_of(lambda: _kernels.bfs_reach_numba(*case), args.repeat)
        b = best_of(lambda: _kernels.bfs_reach_numpy(*case), args.repeat)
        print(f"{f'bfs n={n}':<28}{a * 1e3:>12.2f}{b * 1e3:>12.2f}{b / a:>8.1f}")
    for n, runs in ((10, 10_000), (30, 2_000)):
        a = best_of(lambda: _kernels.walk_steps_numba(n, runs, np.uint64(0)), args.repeat)
        b = best_of(lambda: _kernels.walk_steps_numpy(n, runs, 0), args.repeat)
        print(f"{f'walk n={n} runs={runs}':<28}{a * 1e3:>12.2f}{b * 1e3:>12.2f}{b / a:>8.1f}")


if __name__ == "__main__":
    main()
