"""Pinned pseudo-random source for dealer initialization.

xoshiro256** (Blackman & Vigna) seeded through SplitMix64. Doubles take the
top 53 bits of each output, so a seed yields the same variates on every
platform and Python version.
"""

from __future__ import annotations

ALGORITHM_ID = "xoshiro256starstar+splitmix64/v1"

_MASK = (1 << 64) - 1


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK


def splitmix64(state: int) -> tuple[int, int]:
    """Return (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


class Xoshiro256:
    def __init__(self, seed: int):
        if not 0 <= seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        sm = seed
        s = []
        for _ in range(4):
            sm, out = splitmix64(sm)
            s.append(out)
        self._s = s

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & _MASK, 7) * 9) & _MASK
        t = (s[1] << 17) & _MASK
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self) -> float:
        """Uniform double on [0, 1) with 53 bits of resolution."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def symmetric(self, half_width: float) -> float:
        """Uniform double on the open interval (-half_width, half_width)."""
        while True:
            u = self.random()
            if u != 0.0:
                return half_width * (2.0 * u - 1.0)
