"""Time GF(2) elimination with each available backend.

    python3 benchmarks/bench_gf2.py [--sizes 128,256,512,1024] [--repeat 3]

Prints one row per (backend, size) with the best wall time and checks that
all backends return the same reduced matrix.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from entinv import gf2


def best_time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="128,256,512,1024")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(args.seed)
    backends = gf2.available_backends()
    default = gf2.BACKEND
    print(f"{'backend':<8} {'size':>6} {'seconds':>10} {'speedup':>8}")
    try:
        for n in sizes:
            mat = rng.integers(0, 2, (n, 2 * n), dtype=np.uint8)
            times, results = {}, {}
            for name in backends:
                gf2.set_backend(name)
                times[name] = best_time(lambda: gf2.rref(mat), args.repeat)
                results[name] = gf2.rref(mat)
            ref = results[backends[0]]
            for name in backends:
                red, piv = results[name]
                if not (np.array_equal(red, ref[0]) and np.array_equal(piv, ref[1])):
                    raise SystemExit(f"backend {name} disagrees at size {n}")
            base = times.get("python", max(times.values()))
            for name in backends:
                print(f"{name:<8} {n:>6} {times[name]:>10.4f} {base / times[name]:>7.1f}x")
    finally:
        gf2.set_backend(default)


if __name__ == "__main__":
    main()
