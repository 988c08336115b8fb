#!/usr/bin/env python3
"""Benchmark the LCS kernels: numba @njit vs the pure-numpy fallback.

    python benchmarks/bench_lcs.py [--pairs 2000] [--min-len 8] [--max-len 64]

The same random token-id pairs are timed through both implementations
(first njit call is excluded as compilation). Selecting the fallback at
package import time instead is done with SUMLOOP_DISABLE_NUMBA=1.
"""

import argparse
import time

import numpy as np

from sumloop.metrics._kernels import _lcs_length_numpy, _lcs_length_scalar


def make_pairs(n_pairs: int, min_len: int, max_len: int, vocab: int, seed: int):
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(n_pairs):
        la = int(rng.integers(min_len, max_len + 1))
        lb = int(rng.integers(min_len, max_len + 1))
        pairs.append(
            (
                rng.integers(0, vocab, size=la).astype(np.int32),
                rng.integers(0, vocab, size=lb).astype(np.int32),
            )
        )
    return pairs


def time_kernel(kernel, pairs) -> tuple[float, int]:
    start = time.perf_counter()
    checksum = 0
    for a, b in pairs:
        checksum += kernel(a, b)
    return time.perf_counter() - start, checksum


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--pairs", type=int, default=2000)
    parser.add_argument("--min-len", type=int, default=8)
    parser.add_argument("--max-len", type=int, default=64)
    parser.add_argument("--vocab", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    pairs = make_pairs(args.pairs, args.min_len, args.max_len, args.vocab, args.seed)

    try:
        from numba import njit

        jit_kernel = njit(cache=True)(_lcs_length_scalar)
        t0 = time.perf_counter()
        jit_kernel(*pairs[0])  # compile
        compile_s = time.perf_counter() - t0
    except ImportError:
        jit_kernel = None
        compile_s = 0.0

    numpy_s, numpy_sum = time_kernel(_lcs_length_numpy, pairs)
    print(f"pure numpy : {numpy_s*1e3:9.1f} ms  ({args.pairs} pairs, checksum {numpy_sum})")

    if jit_kernel is None:
        print("numba not available; fallback is the only path")
        return

    numba_s, numba_sum = time_kernel(jit_kernel, pairs)
    assert numba_sum == numpy_sum, "kernel mismatch"
    print(f"numba njit : {numba_s*1e3:9.1f} ms  (+{compile_s*1e3:.0f} ms one-time compile)")
    print(f"speedup    : {numpy_s / numba_s:9.1f}x")


if __name__ == "__main__":
    main()
