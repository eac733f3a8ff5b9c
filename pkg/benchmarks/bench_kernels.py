"""Time the hot kernels under both backends.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel runs once to warm up (numba compiles on first call), then
the best of ``--repeat`` runs is reported.
"""

import argparse
import time

import numpy as np

from fracthit import kernels
from fracthit.finite import random_instance
from fracthit.gallery import GalleryInstance, comb_polygon, comb_guards
from fracthit.geometry.rational import Q
from fracthit.mwu import compute_schedule


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    inst = random_instance(16, 32, 0.3, 1)
    inc = inst.incidence
    s = compute_schedule(0.25, 0.01, 0.25, inst.growth_exponent, 4)
    w0 = np.ones(inc.shape[0])
    yield "mwu_finite 16x32", lambda: kernels.mwu_finite(inc, w0, s.eps, s.T, 0.01 * w0.sum(), s.t_max)

    ginst = GalleryInstance(comb_polygon(3), opt_upper=3)
    gs = compute_schedule(0.25, 0.05, 0.25, ginst.growth_exponent, 3)
    eng = ginst.mwu_engine(gs)
    for p in comb_guards(3) + [(Q(1, 2), 2), (Q(9, 2), 2), (Q(5, 2), 1)]:
        eng.register(p)
    ref = eng._dist()

    def pool():
        kernels.pool_batch(eng.indptr, eng.cells_of, eng.area, eng.deg.copy(), eng.mult.copy(), gs.T,
                           gs.eps, 0.05 * eng.total_measure, 0, gs.t_max, 0.0, 0.0, ref, 20000)

    yield f"pool_batch {len(eng.area)} cells, 20000 steps", pool

    big = (np.random.default_rng(0).random((400, 60)) < 0.2).astype(np.uint8)
    big[:, 0] = 1
    sample = np.random.default_rng(1).integers(0, 400, 200_000)
    yield "dual_counts 200k x 60", lambda: kernels.dual_counts(big, sample)
    yield "greedy_cover 400x60", lambda: kernels.greedy_cover(big)
    masks = [int(sum(1 << j for j in np.flatnonzero(r))) for r in inc]
    yield "min_hitting_mask 16 pts", lambda: kernels.min_hitting_mask(masks, 16)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    a = ap.parse_args()
    backends = ["numpy"] + (["numba"] if kernels.HAVE_NUMBA else [])
    print(f"{'kernel':<36}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, fn in cases():
        row = []
        for b in backends:
            kernels.BACKEND = b
            row.append(best_of(fn, a.repeat))
        sp = f"{row[0] / row[-1]:>9.1f}x" if len(row) > 1 else ""
        print(f"{name:<36}" + "".join(f"{t * 1e3:>10.2f}ms" for t in row) + sp)


if __name__ == "__main__":
    main()
