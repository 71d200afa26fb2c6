"""Reference counters the shared-scale design is measured against.

``MorrisCounter`` is the classic single approximate counter: it stores an
index r and estimates a * ((1 + 1/a)**r - 1), incrementing r with
probability (1 + 1/a)**-r.  The acceptance probability is maintained as a
double and drawn by comparing one uniform 64-bit word against
floor(p * 2**64); the grid error per draw is below 2**-52, immaterial at
the stream sizes the harness runs, and the compiled kernels reproduce the
exact same arithmetic so compiled and interpreted runs agree bit for bit.

``DMorrisCounter`` is d independent Morris counters sharing one
randomness source (draws interleave in call order).  Its space grows as
d * log2 log2 n because every coordinate pays for its own index range;
``d_morris_space_bits`` reports that figure.

``NaiveSharedCounter`` shares a scale across coordinates but stores each
mantissa entry in a fixed range [0, cap], scaling up whenever an entry
pushes past the cap.  It is cheap and unbiased but its error guarantee
collapses when the count vector is dense in small entries: with
cap < sqrt(d) / 3 there are streams on which its relative error exceeds
1/sqrt(2).  The harness demonstrates this with its adversarial stream.
The variable-length-coded counter in ``counter`` exists to fix exactly
this failure.
"""

from __future__ import annotations

import math

from .errors import BadCoordinate, InvalidParam
from .randomness import RandomSource

__all__ = [
    "MorrisCounter",
    "DMorrisCounter",
    "NaiveSharedCounter",
    "morris_space_bits",
    "d_morris_space_bits",
]

_TWO64 = 18446744073709551616.0  # 2.0 ** 64, exact


class MorrisCounter:
    """One approximate counter storing only an index."""

    __slots__ = ("accuracy", "_index", "_p", "_ratio", "_source")

    def __init__(self, accuracy: int, source: RandomSource):
        if accuracy < 1:
            raise InvalidParam(f"accuracy must be at least 1, got {accuracy}")
        self.accuracy = accuracy
        self._index = 0
        self._p = 1.0  # (a / (a + 1)) ** index, kept incrementally
        self._ratio = accuracy / (accuracy + 1)
        self._source = source

    @property
    def index(self) -> int:
        return self._index

    def increment(self) -> None:
        if self._index > 0:
            # nothing is drawn at index 0, where the probability is 1
            word = self._source.next_u64()
            if word >= int(self._p * _TWO64):
                return
        self._index += 1
        self._p *= self._ratio

    def estimate(self) -> float:
        a = self.accuracy
        return a * ((1.0 + 1.0 / a) ** self._index - 1.0)


class DMorrisCounter:
    """d independent Morris counters over one randomness source."""

    __slots__ = ("dim", "_counters")

    def __init__(self, dim: int, accuracy: int, seed: int):
        if dim < 1:
            raise InvalidParam(f"dimension must be at least 1, got {dim}")
        source = RandomSource(seed)
        self.dim = dim
        self._counters = [MorrisCounter(accuracy, source) for _ in range(dim)]

    @property
    def indexes(self) -> tuple[int, ...]:
        return tuple(c.index for c in self._counters)

    def increment(self, j: int) -> None:
        if not 1 <= j <= self.dim:
            raise BadCoordinate(f"coordinate {j} outside [1, {self.dim}]")
        self._counters[j - 1].increment()

    def query(self) -> list[float]:
        return [c.estimate() for c in self._counters]


class NaiveSharedCounter:
    """Shared scale, fixed-width mantissa entries in [0, cap]."""

    __slots__ = ("dim", "cap", "_scale", "_mantissa", "_source")

    def __init__(self, dim: int, cap: int, seed: int):
        if dim < 1:
            raise InvalidParam(f"dimension must be at least 1, got {dim}")
        if cap < 1:
            raise InvalidParam(f"cap must be at least 1, got {cap}")
        self.dim = dim
        self.cap = cap
        self._scale = 0
        self._mantissa = [0] * dim
        self._source = RandomSource(seed)

    @property
    def scale(self) -> int:
        return self._scale

    @property
    def mantissa(self) -> tuple[int, ...]:
        return tuple(self._mantissa)

    def increment(self, j: int) -> None:
        if not 1 <= j <= self.dim:
            raise BadCoordinate(f"coordinate {j} outside [1, {self.dim}]")
        if not self._source.bernoulli_pow2(self._scale):
            return
        idx = j - 1
        self._mantissa[idx] += 1
        if self._mantissa[idx] > self.cap:
            self._scale += 1
            mantissa = self._mantissa
            for k in range(self.dim):
                v = mantissa[k]
                if v & 1:
                    v = (v + self._source.rademacher()) >> 1
                else:
                    v >>= 1
                mantissa[k] = v

    def query(self) -> list[int]:
        shift = self._scale
        return [v << shift for v in self._mantissa]


def morris_space_bits(stream_limit: int, accuracy: int) -> int:
    """Bits for one Morris counter: ceil(log2 log2 n) + ceil(log2(1 + a))."""
    if stream_limit < 2:
        raise InvalidParam(f"stream limit must be at least 2, got {stream_limit}")
    if accuracy < 1:
        raise InvalidParam(f"accuracy must be at least 1, got {accuracy}")
    index_bits = math.ceil(math.log2(math.log2(stream_limit)))
    return index_bits + accuracy.bit_length()


def d_morris_space_bits(stream_limit: int, dim: int, accuracy: int) -> int:
    """Bits for d independent Morris counters."""
    if dim < 1:
        raise InvalidParam(f"dimension must be at least 1, got {dim}")
    return dim * morris_space_bits(stream_limit, accuracy)
