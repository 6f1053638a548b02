"""Compare the numba and numpy implementations of the hot kernels.

Run with ``python3 benchmarks/bench_kernels.py [--repeat R]``. Each kernel is
warmed up once (which also triggers numba compilation) and then timed as the
best of R runs. Results from both backends are checked for agreement.
"""
import argparse
import time

import numpy as np

from kltest import _kernels as K
from kltest._backend import HAVE_NUMBA
from kltest.exponent import _simplex_grid
from kltest.oracle import enumerate_types, log_factorials, log_type_probabilities


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases():
    p, q = np.array([0.8, 0.2]), np.array([0.2, 0.8])
    n = 1500
    types = enumerate_types(n, 2)
    tab = K.log2_table(n)
    lf = log_factorials(n)
    lp, lq = log_type_probabilities(types, p, lf), log_type_probabilities(types, q, lf)
    T = types.shape[0]
    no = np.zeros(T, dtype=np.bool_)
    scan = (types, tab, float(n), lp, lp, lp, lq, 0.2, K.FORWARD, no, no, 0, T)
    yield f"pair_scan (n={n}, d=2, {T * T:,} pairs)", "pair_scan", scan

    rng = np.random.default_rng(0)
    n3 = 60
    cx = rng.multinomial(n3, [0.5, 0.3, 0.2], size=200_000).astype(np.int64)
    cy = rng.multinomial(n3, [0.2, 0.3, 0.5], size=200_000).astype(np.int64)
    tab3 = K.log2_table(n3)
    yield "pair_stats (200k trials, n=60, d=3)", "pair_stats", (cx, cy, tab3, float(n3), K.MIN)
    yield "law_stats (200k trials, n=60, d=3)", "law_stats", (cx, tab3, n3, np.log2([0.2, 0.3, 0.5]))

    m = 1000
    F = _simplex_grid(m, 3)
    lp3, lq3 = np.log2([0.6, 0.3, 0.1]), np.log2([0.1, 0.3, 0.6])
    yield f"grid_sum_kl ({F.shape[0]:,} points, d=3)", "grid_sum_kl", (F, lp3, lq3)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        print("numba is not installed; only the numpy backend can run")
    print(f"{'kernel':45s} {'numpy [s]':>10s} {'numba [s]':>10s} {'speedup':>8s}")
    for label, name, a in cases():
        t_np, r_np = best_of(lambda: getattr(K, "np_" + name)(*a), args.repeat)
        if HAVE_NUMBA:
            t_nb, r_nb = best_of(lambda: getattr(K, "nb_" + name)(*a), args.repeat)
            np.testing.assert_allclose(np.asarray(r_nb, dtype=float), np.asarray(r_np, dtype=float),
                                       rtol=1e-9, atol=1e-12)
            print(f"{label:45s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:7.1f}x")
        else:
            print(f"{label:45s} {t_np:10.4f} {'-':>10s} {'-':>8s}")


if __name__ == "__main__":
    main()
