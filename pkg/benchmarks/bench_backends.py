"""Kernel benchmark: compiled extension vs pure-numpy reference backend.

Times each hot kernel and a full Helmholtz solve on a few grid sizes and
prints the per-call time plus the speedup of the compiled backend.

Usage: python3 benchmarks/bench_backends.py [--sizes 64 128 256] [--repeats 20]
"""

import argparse
import time

import numpy as np

from chemfv import backends


def time_call(fn, repeats):
    fn()  # warm up
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_size(n, repeats):
    rng = np.random.default_rng(0)
    u = rng.random((n, n)) + 0.1
    v = rng.random((n, n)) + 0.3
    h = 1.0 / n
    ref = backends.get_backend("reference")
    results = {}
    for name, be in [("reference", ref)] + (
        [("compiled", backends.get_backend("compiled"))]
        if backends.HAVE_COMPILED else []
    ):
        fx, fy, _, _ = be.chem_flux(u, v, 2.0, 0.5, h, h)
        x0 = np.zeros_like(u)
        cases = {
            "laplacian": lambda be=be: be.laplacian(u, h, h),
            "gradient_squared": lambda be=be: be.gradient_squared(v, h, h),
            "chem_flux": lambda be=be: be.chem_flux(u, v, 2.0, 0.5, h, h),
            "flux_divergence": lambda be=be: be.flux_divergence(fx, fy, h, h),
            "cg_helmholtz": lambda be=be: be.cg_helmholtz(
                100.0, u, x0.copy(), 1e-10, 10 * 2 * n, h, h),
        }
        results[name] = {k: time_call(fn, repeats) for k, fn in cases.items()}
    return results


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256])
    ap.add_argument("--repeats", type=int, default=20)
    args = ap.parse_args()

    if not backends.HAVE_COMPILED:
        print("compiled backend unavailable; timing reference only")
    for n in args.sizes:
        res = bench_size(n, args.repeats)
        print(f"\ngrid {n}x{n} (best of {args.repeats}, seconds per call)")
        header = f"{'kernel':<18}{'reference':>12}"
        if "compiled" in res:
            header += f"{'compiled':>12}{'speedup':>10}"
        print(header)
        for kernel, t_ref in res["reference"].items():
            line = f"{kernel:<18}{t_ref:>12.3e}"
            if "compiled" in res:
                t_c = res["compiled"][kernel]
                line += f"{t_c:>12.3e}{t_ref / t_c:>9.1f}x"
            print(line)


if __name__ == "__main__":
    main()
