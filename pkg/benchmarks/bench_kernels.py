"""Compare the numba and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--limit N] [--repeat R]

Both backends are imported from the same module, so one run times both
regardless of FROBDENS_BACKEND.  Outputs are checked for equality first.
"""
import argparse
import sys
import time

import numpy as np

from frobdens import kernels

# lowest coefficient first, as the kernels expect
POLYS = {"x^3-2": [-2, 0, 0, 1], "x^5-x-1": [-1, -1, 0, 0, 0, 1]}


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def run(limit: int, repeat: int, out=sys.stdout) -> list[tuple]:
    if not kernels.HAVE_NUMBA:
        print("numba is not installed; nothing to compare", file=out)
        return []
    kernels.warmup()
    base = kernels.base_primes(int(limit**0.5) + 1)
    rows = []

    a = kernels.sieve_segment_numpy(2, limit, base)
    b = kernels.sieve_segment_numba(2, limit, base)
    assert np.array_equal(a, b), "sieve backends disagree"
    rows.append((f"sieve [2, {limit})",
                 best_of(lambda: kernels.sieve_segment_numpy(2, limit, base), repeat),
                 best_of(lambda: kernels.sieve_segment_numba(2, limit, base), repeat)))

    primes = a[a > 151][: max(1, limit // 50)]  # above every ramified prime
    for name, coeffs in POLYS.items():
        a = kernels.cycle_counts_numpy(primes, coeffs)
        b = kernels.cycle_counts_numba(primes, coeffs)
        assert np.array_equal(a, b), f"cycle count backends disagree on {name}"
        rows.append((f"cycle counts {name}, {len(primes)} primes",
                     best_of(lambda: kernels.cycle_counts_numpy(primes, coeffs), repeat),
                     best_of(lambda: kernels.cycle_counts_numba(primes, coeffs), repeat)))

    print(f"{'kernel':<40}{'numpy s':>10}{'numba s':>10}{'ratio':>8}", file=out)
    for name, t_np, t_nb in rows:
        print(f"{name:<40}{t_np:>10.4f}{t_nb:>10.4f}{t_np / t_nb:>8.1f}", file=out)
    return rows


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--limit", type=int, default=2_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    run(args.limit, args.repeat)
    return 0


if __name__ == "__main__":
    sys.exit(main())
