"""Seeded pseudorandom stream with a portable, bit-exact definition.

The generator is splitmix64: state advances by the golden-gamma constant
0x9E3779B97F4A7C15 and each output is the finalized mix of the new state.
All arithmetic is unsigned 64-bit (mod 2**64), so the draw sequence for a
given seed is identical on every platform and Python version.
"""

from __future__ import annotations

from typing import Sequence, TypeVar

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15

T = TypeVar("T")


class Rng:
    """splitmix64 stream seeded with a 64-bit unsigned integer."""

    def __init__(self, seed: int) -> None:
        if seed < 0:
            raise ValueError("seed must be a non-negative integer")
        self._state = seed & _MASK64
        self.seed = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n), by rejection to avoid modulo bias."""
        if n <= 0:
            raise ValueError("randrange() bound must be positive")
        limit = ((1 << 64) // n) * n
        while True:
            value = self.next_u64()
            if value < limit:
                return value % n

    def choice(self, seq: Sequence[T]) -> T:
        if not seq:
            raise IndexError("choice() from an empty sequence")
        return seq[self.randrange(len(seq))]

    def sample(self, seq: Sequence[T], k: int) -> list[T]:
        """k distinct elements via a partial Fisher-Yates shuffle."""
        if k < 0 or k > len(seq):
            raise ValueError("sample() size out of range")
        pool = list(seq)
        for i in range(k):
            j = i + self.randrange(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]

    def uniform(self, lo: float, hi: float) -> float:
        """Float in [lo, hi) from the top 53 bits of one draw."""
        return lo + (hi - lo) * ((self.next_u64() >> 11) * (2.0**-53))
