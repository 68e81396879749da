"""Benchmark: compiled core vs NumPy fallback on the sequential hot loops.

Run as `python benchmarks/bench_core.py`.  The ensemble simulator itself is
BLAS-batched across paths in both modes and is reported for context.
"""
import time

import numpy as np

from rhl._core import COMPILED, UniformBuffer, fallback

if COMPILED:
    from rhl._core import _ckernels as compiled
else:
    compiled = None


def timeit(fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rows = []
    rng = np.random.default_rng(1)

    n = 8192
    phi = rng.uniform(0.0, 1.0, n)
    rows.append(("resolvent_forward", f"n={n}",
                 timeit(lambda: fallback.resolvent_forward(phi, 0.95, 0.01)),
                 timeit(lambda: compiled.resolvent_forward(phi, 0.95, 0.01)) if compiled else None))

    n = 4096
    w = rng.uniform(0.0, 0.01, n)
    u = np.full(n, 0.5)
    rows.append(("riccati_exponent_forward", f"n={n}",
                 timeit(lambda: fallback.riccati_exponent_forward(w, u, 1e8)),
                 timeit(lambda: compiled.riccati_exponent_forward(w, u, 1e8)) if compiled else None))

    n = 2048
    b = np.full(n, 1.0)
    z = rng.standard_normal(n) * 32.0
    rows.append(("volterra_path", f"n={n}",
                 timeit(lambda: fallback.volterra_path(b, w[:n], z)),
                 timeit(lambda: compiled.volterra_path(b, w[:n], z)) if compiled else None))

    def thin(impl):
        rng_loc = np.random.Generator(np.random.Philox(np.random.SeedSequence(7)))
        uni = UniformBuffer(rng_loc)
        empty = np.zeros((0, 2))
        return impl.hawkes_thinning(400.0, 0.05, 0.1, 0.97, 0.98,
                                    fallback.KIND_PARETO, 0.6, empty,
                                    fallback.KIND_PARETO, 0.8, empty,
                                    0.02, 1.0, uni, 10**7)

    rows.append(("hawkes_thinning (pareto exact)", "T=400",
                 timeit(lambda: thin(fallback), repeat=2),
                 timeit(lambda: thin(compiled), repeat=2) if compiled else None))

    print(f"compiled extension available: {COMPILED}\n")
    print(f"{'kernel':36s} {'size':10s} {'fallback [s]':>14s} {'compiled [s]':>14s} {'speedup':>9s}")
    for name, size, t_fb, t_c in rows:
        if t_c is None:
            print(f"{name:36s} {size:10s} {t_fb:14.4f} {'n/a':>14s} {'':>9s}")
        else:
            print(f"{name:36s} {size:10s} {t_fb:14.4f} {t_c:14.4f} {t_fb / t_c:8.1f}x")

    # context: the batched ensemble path (BLAS in both modes)
    from rhl.analytics import LimitParams
    from rhl.sve import MomentConsumer, build_scheme, run_ensemble
    p = LimitParams(0.6, 0.8, coupling=0.5)
    scheme = build_scheme(p, 2.0**-10, 1024)
    t0 = time.perf_counter()
    run_ensemble(p, scheme, 2000, 3, [MomentConsumer(scheme)])
    dt = time.perf_counter() - t0
    print(f"\nbatched ensemble reference: 2000 paths x 1024 steps in {dt:.2f} s "
          f"(BLAS-bound, mode-independent)")


if __name__ == "__main__":
    main()
