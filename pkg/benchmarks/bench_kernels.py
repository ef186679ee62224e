"""Compare the numba and pure-numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat 5]

Both backends are imported side by side, so the INTERCW_DISABLE_NUMBA flag is
irrelevant here. Outputs are also checked for agreement.
"""

import argparse
import time

import numpy as np

from intercw.field import MERSENNE_61
from intercw.kernels import _numba, _numpy

MODULI = {"q=13": 13, "q=2^61-1": MERSENNE_61}


def workloads(q: int, rng: np.random.Generator):
    a = rng.integers(0, q, size=1_000_000, dtype=np.uint64)
    b = rng.integers(0, q, size=1_000_000, dtype=np.uint64)
    x = rng.integers(0, q, size=(200, 200), dtype=np.uint64)
    y = rng.integers(0, q, size=(200, 200), dtype=np.uint64)
    r = rng.integers(0, q, size=(64, 128), dtype=np.uint64)
    batch = rng.integers(0, q, size=(50_000, 2, 2), dtype=np.uint64)
    return {
        "mulmod 1e6": lambda k: k.mulmod(a, b, q),
        "matmul 200x200": lambda k: k.matmul_mod(x, y, q),
        "rref 64x128": lambda k: k.rref_mod(r, q)[0],
        "batch_rank 5e4 x 2x2": lambda k: k.batch_rank_mod(batch, q),
    }


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    print(f"{'workload':<24}{'modulus':<12}{'numpy s':>10}{'numba s':>10}{'speedup':>9}")
    for label, q in MODULI.items():
        for name, fn in workloads(q, rng).items():
            ref, got = fn(_numpy), fn(_numba)  # first numba call also compiles
            if not np.array_equal(ref, got):
                raise SystemExit(f"backends disagree on {name} at {label}")
            t_np = best_of(lambda: fn(_numpy), args.repeat)
            t_nb = best_of(lambda: fn(_numba), args.repeat)
            print(f"{name:<24}{label:<12}{t_np:>10.4f}{t_nb:>10.4f}{t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
