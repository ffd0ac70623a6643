"""Compare the numba kernels against the pure-numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat 5]

Times the two hot kernels on bootstrap-sized batches, then a full
``bootstrap_test`` under each backend (run in a subprocess, since the backend
is fixed at import time).
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from hgauss import _accel

END_TO_END = """
import time
from hgauss import GaussianMeasure, bootstrap_test, make_grid
from hgauss.simulation import gen_null
g = make_grid(101)
s = gen_null("wiener", {n}, g, 1)
q = GaussianMeasure(g)
bootstrap_test(s, q, M=50, B=19, method="{method}")  # warm-up / JIT
t = time.perf_counter()
bootstrap_test(s, q, M=1000, B=200, method="{method}")
print(time.perf_counter() - t)
"""


def best_of(fn, repeat):
    fn()  # compile / warm caches
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernel_table(repeat):
    rng = np.random.default_rng(0)
    rows = []
    for n, M in [(50, 1000), (100, 1000)]:
        proj = rng.normal(size=(25, n, M))
        rows.append((f"vn_batch        25x{n}x{M}",
                     best_of(lambda: _accel.vn_batch_numpy(proj), repeat),
                     best_of(lambda: _accel.vn_batch_numba(proj), repeat)))
    for n in (50, 100):
        y = rng.normal(size=(25, n, n)) / 10
        gram = np.einsum("bjk,blk->bjl", y, y)
        rows.append((f"pair_exp_sum    25x{n}x{n}",
                     best_of(lambda: _accel.pair_exp_sum_numpy(gram), repeat),
                     best_of(lambda: _accel.pair_exp_sum_numba(gram), repeat)))
    return rows


def end_to_end(backend, n, method):
    out = subprocess.run([sys.executable, "-c", END_TO_END.format(n=n, method=method)],
                         env=dict(os.environ, HG_BACKEND=backend),
                         capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _accel.HAS_NUMBA:
        sys.exit("numba is not installed; nothing to compare")

    print(f"{'kernel':32s} {'numpy (s)':>10s} {'numba (s)':>10s} {'speedup':>8s}")
    for name, t_np, t_nb in kernel_table(args.repeat):
        print(f"{name:32s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.2f}")

    print(f"\n{'bootstrap_test, B=200':32s} {'numpy (s)':>10s} {'numba (s)':>10s} {'speedup':>8s}")
    for n, method in [(50, "closed_form"), (100, "closed_form"), (50, "monte_carlo")]:
        t_np, t_nb = end_to_end("numpy", n, method), end_to_end("numba", n, method)
        print(f"{f'n={n} {method}':32s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.2f}")


if __name__ == "__main__":
    main()
