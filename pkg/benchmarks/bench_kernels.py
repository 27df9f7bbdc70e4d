"""Compare the numba and numpy backends of the correlator integrand.

    python benchmarks/bench_kernels.py [--nodes 21000] [--repeat 5]

Reports the best-of-``repeat`` wall time for one batched integrand call and
for a full equal-time correlation matrix, plus the largest difference
between the two backends.  The numba timings exclude compilation, which is
triggered by a warm-up call.
"""

import argparse
import time

import numpy as np

from heatchain import steady
from heatchain._jit import NUMBA_ENABLED
from heatchain._kernels import KernelParams, evaluate
from heatchain.model import chain_config


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=21000, help="frequency nodes per integrand call")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not NUMBA_ENABLED:
        raise SystemExit("numba backend disabled (HEATCHAIN_NUMBA=0 or numba missing); nothing to compare")

    cfg = chain_config(k=1.8, T=0.27, dT_over_T=0.95, DT_over_T=0.0, delta_omega=0.5)
    params = KernelParams.from_config(cfg)
    w = np.linspace(1e-3, 60.0, args.nodes)
    tau = 1.3

    out = {b: evaluate(w, tau, params, backend=b) for b in ("numba", "numpy")}  # warm-up
    diff = np.max(np.abs(out["numba"] - out["numpy"])) / np.max(np.abs(out["numpy"]))
    print(f"integrand, {args.nodes} nodes x 54 channels (relative max diff {diff:.1e})")
    ref = None
    for b in ("numba", "numpy"):
        t = best_time(lambda: evaluate(w, tau, params, backend=b), args.repeat)
        ref = ref or t
        print(f"  {b:6s} {t * 1e3:9.2f} ms   x{t / ref:.1f}")

    print("correlation matrices at tau = 1.3 (adaptive quadrature, cache cleared)")
    ref = None
    results = {}
    for b in ("numba", "numpy"):

        def run():
            steady.clear_cache()
            results[b] = steady.correlation_matrices(cfg, tau, backend=b)

        t = best_time(run, args.repeat)
        ref = ref or t
        print(f"  {b:6s} {t * 1e3:9.2f} ms   x{t / ref:.1f}")
    print(f"  max |C_numba - C_numpy| = {np.max(np.abs(results['numba'].C - results['numpy'].C)):.1e}")


if __name__ == "__main__":
    main()
