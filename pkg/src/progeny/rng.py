"""Seedable 64-bit RNG with per-replicate substreams.

Replicate i of a run draws from an xoshiro256++ generator whose state is
derived from (master_seed, i) by a splitmix64 hash, so streams are
independent by construction and a replicate's results depend only on the
master seed and its own index, never on scheduling.

This pure-Python implementation is the reference; the numba simulation
kernel inlines bit-identical uint64 arithmetic (see ssa._kernel), which the
backend cross-tests assert draw for draw.
"""

from __future__ import annotations

import math

__all__ = ["Xoshiro256", "stream_state", "splitmix64_mix"]

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_DOUBLE_SCALE = 1.0 / (1 << 53)


def splitmix64_mix(z: int) -> int:
    """The splitmix64 finalizer: a bijective 64-bit mix."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _splitmix64_next(state: int) -> tuple[int, int]:
    state = (state + _GOLDEN) & _MASK
    return state, splitmix64_mix(state)


def stream_state(master_seed: int, index: int) -> tuple[int, int, int, int]:
    """Derive the 4-word xoshiro256++ state for substream `index`."""
    sm = splitmix64_mix(master_seed) ^ splitmix64_mix((index + 1) * _GOLDEN)
    sm, s0 = _splitmix64_next(sm)
    sm, s1 = _splitmix64_next(sm)
    sm, s2 = _splitmix64_next(sm)
    sm, s3 = _splitmix64_next(sm)
    if s0 == s1 == s2 == s3 == 0:  # forbidden all-zero state
        s0 = _GOLDEN
    return s0, s1, s2, s3


def _rotl(v: int, k: int) -> int:
    return ((v << k) | (v >> (64 - k))) & _MASK


class Xoshiro256:
    """xoshiro256++ with splitmix64-seeded substreams."""

    __slots__ = ("s0", "s1", "s2", "s3")

    def __init__(self, master_seed: int, index: int = 0):
        self.s0, self.s1, self.s2, self.s3 = stream_state(master_seed, index)

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self.s0, self.s1, self.s2, self.s3
        result = (_rotl((s0 + s3) & _MASK, 23) + s0) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self.s0, self.s1, self.s2, self.s3 = s0, s1, s2, s3
        return result

    def uniform(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * _DOUBLE_SCALE

    def exponential(self, rate: float) -> float:
        """Exponential waiting time with the given rate (> 0)."""
        return -math.log1p(-self.uniform()) / rate

    def bernoulli(self, p: float) -> bool:
        return self.uniform() < p
