"""Throughput of the numba and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--batch 100000] [--repeat 5]

Each kernel is run once to trigger compilation, then timed best-of-repeat.
The last block times a full Lipschitz verification run, which is what the
``verify`` command spends its time on.
"""
import argparse
import time

import numpy as np

from simplex_strength import kernels
from simplex_strength.verify import TrialConfig, run_lipschitz_suite


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(batch, rng):
    for n in (2, 3, 5):
        pts = rng.uniform(-1, 1, size=(batch, n + 1, n))
        hats = kernels.NUMPY.hat_matrices(kernels.NUMPY.pairwise_distances(pts))
        yield f"det_lu n={n}", lambda b, h=hats: b.det_lu(h)
        yield f"distances+hat+det n={n}", lambda b, p=pts: b.det_lu(b.hat_matrices(b.pairwise_distances(p)))
        yield f"edge_det n={n}", lambda b, p=pts: b.edge_det(p)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--batch", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--trials", type=int, default=50_000, help="trials for the Lipschitz run")
    args = ap.parse_args()

    names = sorted(kernels.BACKENDS)
    if "numba" not in names:
        print("numba is not installed; only the numpy backend is timed")
    rng = np.random.default_rng(0)

    print(f"{'kernel':<26}" + "".join(f"{b:>12}" for b in names) + ("     speedup" if len(names) > 1 else ""))
    for label, fn in cases(args.batch, rng):
        t = {b: best_of(lambda: fn(kernels.BACKENDS[b]), args.repeat) for b in names}
        row = f"{label:<26}" + "".join(f"{t[b] * 1e3:>10.1f}ms" for b in names)
        if len(names) > 1:
            row += f"{t['numpy'] / t['numba']:>11.1f}x"
        print(row)

    cfg = TrialConfig(2, args.trials, 0)
    saved = kernels.active
    t = {}
    try:
        for b in names:
            kernels.active = kernels.BACKENDS[b]
            t[b] = best_of(lambda: run_lipschitz_suite(cfg), max(1, args.repeat // 2))
    finally:
        kernels.active = saved
    row = f"{'lipschitz suite n=2':<26}" + "".join(f"{t[b] * 1e3:>10.1f}ms" for b in names)
    if len(names) > 1:
        row += f"{t['numpy'] / t['numba']:>11.1f}x"
    print(row)


if __name__ == "__main__":
    main()
