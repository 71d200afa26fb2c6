"""Seedable randomness with bit-level accounting.

The generator is xoshiro256** (Blackman and Vigna), a 4 x 64-bit state
PRNG with well-studied statistical quality, seeded by expanding a single
64-bit seed through SplitMix64.  Both algorithms are frozen here on
purpose: the Monte Carlo harness re-implements the exact same word stream
inside compiled kernels, and tests assert bit-for-bit agreement between
the two, so the sequence for a given seed must never change.

All randomness is consumed as a stream of fair bits.  Each 64-bit word is
drained least-significant bit first; ``bits_consumed`` counts how many
bits have been handed out.  The two primitive draws:

* ``bernoulli_pow2(u)`` returns True with probability exactly 2**-u by
  scanning for u consecutive one bits, stopping at the first zero.  It
  consumes at most u bits per call and 2 in expectation, and is exact for
  every u (including u beyond float precision).
* ``rademacher()`` maps one bit to +1 (bit 1) or -1 (bit 0).

``next_u64`` assembles 64 bits from the same stream, used where a uniform
64-bit comparison is needed.

References:
    https://prng.di.unimi.it/
"""

from __future__ import annotations

from .errors import InvalidParam

__all__ = ["RandomSource"]

_MASK64 = (1 << 64) - 1
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15


def _splitmix64(z: int) -> tuple[int, int]:
    """One SplitMix64 step: returns (new state, output word)."""
    z = (z + _SPLITMIX_GAMMA) & _MASK64
    w = z
    w = ((w ^ (w >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    w = ((w ^ (w >> 27)) * 0x94D049BB133111EB) & _MASK64
    w = w ^ (w >> 31)
    return z, w


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class RandomSource:
    """A seeded bit stream backed by xoshiro256**."""

    __slots__ = ("_s0", "_s1", "_s2", "_s3", "_bitbuf", "_bitsleft", "bits_consumed")

    def __init__(self, seed: int):
        seed = int(seed) & _MASK64
        z = seed
        z, self._s0 = _splitmix64(z)
        z, self._s1 = _splitmix64(z)
        z, self._s2 = _splitmix64(z)
        z, self._s3 = _splitmix64(z)
        if not (self._s0 | self._s1 | self._s2 | self._s3):  # pragma: no cover
            self._s3 = 1
        self._bitbuf = 0
        self._bitsleft = 0
        self.bits_consumed = 0

    def _next_word(self) -> int:
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        result = (_rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        return result

    def next_bit(self) -> int:
        """One fair bit, least-significant first from the current word."""
        if self._bitsleft == 0:
            self._bitbuf = self._next_word()
            self._bitsleft = 64
        bit = self._bitbuf & 1
        self._bitbuf >>= 1
        self._bitsleft -= 1
        self.bits_consumed += 1
        return bit

    def next_u64(self) -> int:
        """64 bits from the stream, assembled least-significant first."""
        value = 0
        taken = 0
        while taken < 64:
            if self._bitsleft == 0:
                self._bitbuf = self._next_word()
                self._bitsleft = 64
            take = min(64 - taken, self._bitsleft)
            value |= (self._bitbuf & ((1 << take) - 1)) << taken
            self._bitbuf >>= take
            self._bitsleft -= take
            taken += take
        self.bits_consumed += 64
        return value

    def bernoulli_pow2(self, u: int) -> bool:
        """True with probability exactly 2**-u; consumes at most u bits."""
        if u < 0:
            raise InvalidParam(f"exponent must be nonnegative, got {u}")
        for _ in range(u):
            if not self.next_bit():
                return False
        return True

    def rademacher(self) -> int:
        """A uniform sign: +1 or -1, one bit consumed."""
        return 1 if self.next_bit() else -1

    def getstate(self) -> tuple[int, int, int, int, int, int, int]:
        """Full internal state, suitable for exact resume via setstate."""
        return (
            self._s0,
            self._s1,
            self._s2,
            self._s3,
            self._bitbuf,
            self._bitsleft,
            self.bits_consumed,
        )

    def setstate(self, state: tuple[int, int, int, int, int, int, int]) -> None:
        s0, s1, s2, s3, bitbuf, bitsleft, consumed = state
        if not 0 <= bitsleft <= 64:
            raise InvalidParam(f"bit buffer level out of range: {bitsleft}")
        self._s0 = s0 & _MASK64
        self._s1 = s1 & _MASK64
        self._s2 = s2 & _MASK64
        self._s3 = s3 & _MASK64
        self._bitbuf = bitbuf & _MASK64
        self._bitsleft = bitsleft
        self.bits_consumed = consumed
