"""Compare the compiled and pure-Python solver kernels.

Times the per-block kernels on a synthetic cache and full BSBL solves on the
s0 phantom, once per available backend::

    python benchmarks/bench_kernels.py --size 64 --repeat 5
"""

import argparse
import time

import numpy as np

from scanthz.acquisition import acquire_scan, gen_gaussian_complex, m_for_cr
from scanthz.bsbl import SolveOptions, kernels, solve_bmmv
from scanthz.phantoms import builtin_spec, gen_phantom


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def _synthetic_cache(g, d, cols, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((g, d, d)) + 1j * rng.standard_normal((g, d, d))
    s = a @ np.conj(np.swapaxes(a, 1, 2)) + np.eye(d)
    q = 3 * (rng.standard_normal((g, d, cols)) + 1j * rng.standard_normal((g, d, cols)))
    gamma = np.where(rng.random(g) < 0.3, rng.uniform(0.5, 2.0, g), 0.0)
    return s, q, np.full(g, d, dtype=np.int64), gamma


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=64)
    ap.add_argument("--cr", type=float, default=0.5)
    ap.add_argument("--block", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    n = args.size
    s, q, sizes, gamma = _synthetic_cache(n // args.block, args.block, n)
    x = gen_phantom(builtin_spec("s0", n))
    phi = gen_gaussian_complex(m_for_cr(n, args.cr), n, 0)
    y = acquire_scan(phi, x)
    opts = SolveOptions(block_size=args.block, transform="dft")

    results = {}
    for name in kernels.available():
        prev = kernels.use(name)
        try:
            k = _best(lambda: kernels.block_candidates(s, q, sizes, gamma, n), args.repeat * 20)
            full = _best(lambda: solve_bmmv(y, phi, opts), args.repeat)
        finally:
            kernels.use(prev)
        results[name] = (k, full)

    print(f"n={n} cr={args.cr} block={args.block} (best of {args.repeat})")
    print(f"{'backend':>10}  {'kernel_ms':>10}  {'solve_ms':>10}")
    for name, (k, full) in results.items():
        print(f"{name:>10}  {k * 1e3:10.3f}  {full * 1e3:10.3f}")
    if len(results) == 2:
        kc, fc = results["compiled"]
        kp, fp = results["python"]
        print(f"speed-up of compiled: kernels {kp / kc:.1f}x, full solve {fp / fc:.1f}x")
    else:
        print("compiled kernels not built; only the python backend was timed")


if __name__ == "__main__":
    main()
