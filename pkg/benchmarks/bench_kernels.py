"""Compare the compiled and NumPy kernels on a quartic N = 40 sized workload.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from orbitdens import kernels, stencils


def workloads(rng):
    n, k_max = 2001, 200
    orbit = (rng.uniform(0, 300, (n, 2)), rng.uniform(0.5, 1.5, (n, 2)), 72.3, 1.589, k_max)
    half = 4
    dens = (rng.normal(size=(2900 + 2 * half, 40)), np.ones(40), stencils.central_weights(1, half),
            stencils.central_weights(2, half))
    return {"orbit_sum (2001 x, k_max 200)": (kernels.orbit_sum, orbit),
            "stencil_densities (2900 x 40 states)": (kernels.stencil_densities, dens)}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(1)
    backends = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])
    print(f"default backend: {kernels.BACKEND}")
    for name, (fn, inputs) in workloads(rng).items():
        times = {}
        for b in backends:
            times[b] = min(timeit.repeat(lambda: fn(*inputs, backend=b), number=1, repeat=args.repeat))
        line = ", ".join(f"{b} {t * 1e3:8.2f} ms" for b, t in times.items())
        if "cython" in times:
            line += f", speedup {times['python'] / times['cython']:.1f}x"
        print(f"{name:40s} {line}")


if __name__ == "__main__":
    main()
