"""Deterministic 64-bit random number generation (splitmix64).

Every randomized step in this package (pool splits, random selection,
oracle noise) draws from the splitmix64 generator defined here, so any
run is reproducible from its integer seed alone, and a re-implementation
in another language can match byte-for-byte.

Algorithms, fixed for all components:

* splitmix64 core (Vigna's reference constants): state advances by
  0x9E3779B97F4A7C15; output mixes with the 30/27/31 shift-xor-multiply
  sequence.
* ``uniform``: top 53 bits of one draw scaled by 2**-53, in [0, 1).
* ``below(n)``: unbiased bounded integer via rejection sampling on the
  largest multiple of n below 2**64.
* ``shuffle``: Fisher-Yates, descending index, ``j = below(i + 1)``.
* ``sample(seq, k)``: partial Fisher-Yates over a copy; result order is
  the swap order.
* ``derive_seed``: SHA-256 over "base|label|label..." (UTF-8), top 8
  bytes big-endian. Used to give independent, named substreams.
"""

from __future__ import annotations

import hashlib

_MASK = (1 << 64) - 1


class SplitMix64:
    """splitmix64 stream seeded with a 64-bit integer."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return (z ^ (z >> 31)) & _MASK

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * (2.0**-53)

    def below(self, n: int) -> int:
        """Unbiased integer in [0, n)."""
        if n <= 0:
            raise ValueError("below() needs n >= 1")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            draw = self.next_u64()
            if draw < limit:
                return draw % n

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample(self, seq: list, k: int) -> list:
        """k distinct elements via partial Fisher-Yates, in swap order."""
        if k < 0 or k > len(seq):
            raise ValueError(f"sample size {k} out of range for {len(seq)} items")
        pool = list(seq)
        for i in range(k):
            j = i + self.below(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]


def derive_seed(base: int, *labels: str) -> int:
    """Named substream seed: SHA-256 of "base|label..." truncated to 64 bits."""
    text = "|".join([str(int(base)), *labels])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")
