"""LCS length kernels.

The longest-common-subsequence DP is the one hot numeric loop in the
package: it runs once per (prediction, reference) pair, for every test
example, at every iteration of every run in a campaign. Two
implementations are provided:

* a numba ``@njit`` scalar kernel (default), and
* a pure-numpy row-scan fallback, selected by setting the environment
  variable ``SUMLOOP_DISABLE_NUMBA=1`` before import (also used
  automatically when numba is unavailable).

Both operate on int32 token-id arrays and agree exactly; see
``benchmarks/bench_lcs.py`` for a timing comparison.

The numpy fallback uses the monotone form of the recurrence
``row[j] = max(prev[j], prev[j-1] + match, row[j-1])``, whose trailing
dependency is a prefix maximum, i.e. ``np.maximum.accumulate``.
"""

from __future__ import annotations

import os

import numpy as np


def _lcs_length_numpy(a: np.ndarray, b: np.ndarray) -> int:
    m, n = a.shape[0], b.shape[0]
    if m == 0 or n == 0:
        return 0
    prev = np.zeros(n + 1, dtype=np.int32)
    row = np.empty(n + 1, dtype=np.int32)
    for i in range(m):
        row[0] = 0
        np.maximum(prev[1:], prev[:-1] + (b == a[i]), out=row[1:])
        np.maximum.accumulate(row, out=row)
        prev, row = row, prev
    return int(prev[n])


def _lcs_length_scalar(a: np.ndarray, b: np.ndarray) -> int:
    m, n = a.shape[0], b.shape[0]
    prev = np.zeros(n + 1, dtype=np.int32)
    row = np.zeros(n + 1, dtype=np.int32)
    for i in range(m):
        ai = a[i]
        for j in range(1, n + 1):
            if b[j - 1] == ai:
                row[j] = prev[j - 1] + 1
            elif prev[j] >= row[j - 1]:
                row[j] = prev[j]
            else:
                row[j] = row[j - 1]
        prev, row = row, prev
    return int(prev[n])


def _want_numba() -> bool:
    return os.environ.get("SUMLOOP_DISABLE_NUMBA", "") not in ("1", "true", "yes")


USING_NUMBA = False

if _want_numba():
    try:
        from numba import njit

        lcs_length = njit(cache=True)(_lcs_length_scalar)
        USING_NUMBA = True
    except ImportError:
        lcs_length = _lcs_length_numpy
else:
    lcs_length = _lcs_length_numpy
