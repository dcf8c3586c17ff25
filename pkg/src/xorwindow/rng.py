"""Portable deterministic randomness: splitmix64 and xoshiro256++.

Every randomized artifact in this package is a pure function of a 64-bit
seed.  Streams for trial i are derived as ``mix64(master ^ GOLDEN * i)``
(splitmix64's finalizer), so trial outcomes never depend on scheduling or
on how many trials ran before them.  The same two algorithms are
re-implemented inside the compiled kernels (:mod:`xorwindow._fast`); a unit
test pins the two implementations to each other bit for bit.

References: Steele, Lea & Flood (splitmix64); Blackman & Vigna
(xoshiro256++).
"""

from __future__ import annotations

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15  # 2^64 / golden ratio, the splitmix64 increment


def mix64(x: int) -> int:
    """splitmix64 finalizer: a bijective 64-bit scrambler."""
    z = x & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def derive_seed(base: int, i: int) -> int:
    """Seed for the i-th stream below ``base``; independent of other streams."""
    return mix64((base ^ (GOLDEN * i)) & MASK64)


def splitmix64_next(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns (new_state, output)."""
    state = (state + GOLDEN) & MASK64
    return state, mix64_raw(state)


def mix64_raw(z: int) -> int:
    # Same finalizer as mix64 but callers pass the already-incremented state.
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256PP:
    """xoshiro256++ with splitmix64 state expansion from one 64-bit seed."""

    __slots__ = ("s0", "s1", "s2", "s3")

    def __init__(self, seed: int):
        st = seed & MASK64
        st, self.s0 = splitmix64_next(st)
        st, self.s1 = splitmix64_next(st)
        st, self.s2 = splitmix64_next(st)
        st, self.s3 = splitmix64_next(st)
        if self.s0 == self.s1 == self.s2 == self.s3 == 0:
            self.s0 = GOLDEN  # all-zero state is the one forbidden state

    def next_u64(self) -> int:
        result = (_rotl((self.s0 + self.s3) & MASK64, 23) + self.s0) & MASK64
        t = (self.s1 << 17) & MASK64
        self.s2 ^= self.s0
        self.s3 ^= self.s1
        self.s1 ^= self.s2
        self.s0 ^= self.s3
        self.s2 ^= t
        self.s3 = _rotl(self.s3, 45)
        return result

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) via bitmask rejection (no modulo bias)."""
        if n <= 0:
            raise ValueError("below() requires n >= 1")
        mask = (1 << (n - 1).bit_length()) - 1 if n > 1 else 0
        while True:
            v = self.next_u64() & mask
            if v < n:
                return v

    def bit(self) -> int:
        return self.next_u64() & 1
