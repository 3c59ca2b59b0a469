"""Time the compiled and numpy evolution kernels on identical inputs.

    python benchmarks/bench_kernels.py [--repeat 5] [--steps 500]
"""
import argparse
import time

import numpy as np

from qigsim import _pykernels, kernels
from qigsim.killweb import killweb_config, run_killweb


def inputs(n, T, seed=0):
    rng = np.random.default_rng(seed)
    K = (rng.random((n, n)) < 0.4).astype(float)
    np.fill_diagonal(K, 1)
    psis = rng.normal(size=(T + 1, n)) + 1j * rng.normal(size=(T + 1, n))
    psis /= np.linalg.norm(psis, axis=1, keepdims=True)
    ups = np.abs(np.einsum("ti,tj->tij", psis[:T], psis[:T].conj()))
    return K / np.trace(K), K, ups, psis


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--steps", type=int, default=500)
    args = ap.parse_args()

    backends = {name: kernels.get_backend(name) for name in kernels.available_backends()}
    print(f"backends: {', '.join(backends)}")
    print(f"{'case':<28}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for n in (4, 10, 32, 64):
        for full in (False, True):
            args_ = inputs(n, args.steps)
            row = {b: best_of(lambda m=m: m.masked_evolve(*args_, 0.7, 0.7, 25, full), args.repeat)
                   for b, m in backends.items()}
            speed = row["python"] / row["cython"] if "cython" in row else float("nan")
            label = f"kernel n={n} full={full}"
            print(f"{label:<28}" + "".join(f"{row[b] * 1e3:>10.2f}ms" for b in backends) + f"{speed:>9.2f}x")
    for full in (False, True):
        row = {b: best_of(lambda b=b: run_killweb(killweb_config(steps=args.steps), full=full, backend=b), args.repeat)
               for b in backends}
        speed = row["python"] / row["cython"] if "cython" in row else float("nan")
        label = f"run_killweb full={full}"
        print(f"{label:<28}" + "".join(f"{row[b] * 1e3:>10.2f}ms" for b in backends) + f"{speed:>9.2f}x")
    # sanity: same numbers from both
    if "cython" in backends:
        a = backends["cython"].masked_evolve(*inputs(10, 200), 0.7, 0.7, 25, True)
        b = _pykernels.masked_evolve(*inputs(10, 200), 0.7, 0.7, 25, True)
        print(f"max two-norm difference: {np.max(np.abs(a[0] - b[0])):.2e}")


if __name__ == "__main__":
    main()
