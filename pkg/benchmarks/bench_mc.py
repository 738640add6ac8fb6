"""Benchmark: compiled Monte-Carlo kernel vs the pure-numpy fallback.

Times the per-sample frame orthonormalization + diagonal tilt exponent on
the acceptance-scale workload (N = 400, two tilts) and a larger one, checks
that both kernels produce the same exponents, and reports the end-to-end
estimator time per backend.

Run:  python benchmarks/bench_mc.py [--samples 20000]
"""

import argparse
import time

import numpy as np

from sphint._backend import available_backends
from sphint import MCConfig, ThetaSpec, Semicircle, quantiles, mc_spherical


def time_kernel(kernel, z, eta, thetas, pref, repeats=3):
    best = float("inf")
    out = None
    for _ in range(repeats):
        zc = z.copy()
        t0 = time.perf_counter()
        out = kernel.exponents_diag(zc, eta, thetas, pref)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=20_000)
    args = ap.parse_args()

    backends = available_backends()
    print(f"available kernels: {', '.join(backends)}")
    rng = np.random.default_rng(0)

    for n, m, label in ((400, 2, "acceptance scale"), (2000, 4, "large frames")):
        batch = min(args.samples, 512)
        z = rng.standard_normal((batch, n, m))
        eta = np.sort(rng.standard_normal(n))
        thetas = np.linspace(1.5, 0.5, m)
        pref = n / 2.0
        print(f"\nexponents_diag, N={n}, frames={m}, batch={batch} ({label}):")
        results = {}
        for name, kernel in backends.items():
            dt, out = time_kernel(kernel, z, eta, thetas, pref)
            results[name] = out
            rate = batch / dt
            print(f"  {name:9s} {dt * 1e3:8.2f} ms/batch  ({rate:,.0f} samples/s)")
        if len(results) == 2:
            gap = np.max(np.abs(results["python"] - results["compiled"]))
            print(f"  max |python - compiled| = {gap:.2e}")

    # end-to-end estimator on the acceptance-3 configuration
    bulk = quantiles(Semicircle(), 398)
    diag = np.sort(np.concatenate([bulk, [2.6, 3.0]]))
    thetas = ThetaSpec(top=(1.5, 1.0))
    print(f"\nmc_spherical end to end, N=400, samples={args.samples}:")
    import sphint._backend as backend_mod
    import sphint.randmat as randmat_mod

    for name, kernel in backends.items():
        old = backend_mod.kernel
        backend_mod.kernel = kernel
        randmat_mod.kernel = kernel
        try:
            t0 = time.perf_counter()
            est = mc_spherical(diag, thetas, MCConfig(n=400, samples=args.samples, seed=7))
            dt = time.perf_counter() - t0
            print(f"  {name:9s} {dt:6.2f} s   estimate {est.estimate:.6f} +- {est.stderr:.6f}")
        finally:
            backend_mod.kernel = old
            randmat_mod.kernel = old


if __name__ == "__main__":
    main()
