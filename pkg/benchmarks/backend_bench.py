"""Compare the numba and numpy solver backends on representative systems.

Runs the same assembled systems through both PCG backends and reports
per-solve timings and the solution agreement.  Invoke from the repo root:

    python3 benchmarks/backend_bench.py [--n 16 32] [--alpha 2 3]
"""

import argparse
import time

import numpy as np

from combdrive import (
    AnisotropicCoeffs,
    CombParams,
    RefineSpec,
    assemble,
    build_physical_domain,
    build_rescaled_domain,
    generate_mesh,
)
from combdrive import kernels


def bench(params, label):
    systems = []
    for name, domain, coeffs in (
        ("rescaled", build_rescaled_domain(params),
         AnisotropicCoeffs.rescaled(params)),
        ("physical", build_physical_domain(params),
         AnisotropicCoeffs.physical()),
    ):
        mesh = generate_mesh(domain, RefineSpec())
        systems.append((name, assemble(mesh, coeffs)))

    for name, system in systems:
        sols = {}
        print(f"{label} {name}: {system.n_free} unknowns")
        for backend in ("numba", "numpy"):
            if backend == "numba" and not kernels.HAS_NUMBA:
                print("  numba: unavailable")
                continue
            # warm once so jit compilation stays out of the timing
            kernels.pcg(system.A, system.b, tol=1e-2, max_iter=5,
                        backend=backend)
            best = float("inf")
            for _ in range(3):
                t0 = time.perf_counter()
                x, iters, res = kernels.pcg(system.A, system.b, tol=1e-10,
                                            max_iter=200_000, backend=backend)
                best = min(best, time.perf_counter() - t0)
            sols[backend] = x
            print(f"  {backend:6s}: {best * 1e3:9.2f} ms   "
                  f"{iters} iters   relres {res:.2e}")
        if len(sols) == 2:
            diff = float(np.max(np.abs(sols["numba"] - sols["numpy"])))
            print(f"  max |numba - numpy| = {diff:.3e}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[16, 32])
    ap.add_argument("--alpha", type=float, nargs="+", default=[2.0, 3.0])
    args = ap.parse_args()
    for alpha in args.alpha:
        for n in args.n:
            params = CombParams(0.2, 0.4, 0.6, 0.8, 1.0, 1.0, 4.0, 5.0,
                                alpha, n)
            bench(params, f"alpha={alpha:g} n={n}")


if __name__ == "__main__":
    main()
