"""Self-delimiting integer codes over the three-symbol alphabet {0, 1, |}.

Every nonnegative integer k gets a code that carries its own terminator, so
vectors can be stored as plain concatenation with no length prefix:

    k = 0   ->  "|"
    k >= 1  ->  binary expansion of (k - 1), then "|"

The first eight codes::

    k       0    1     2     3      4      5       6       7
    code    |    0|    1|    10|    11|    100|    101|    110|

The binary part never has a leading zero except for the single digit "0"
(the code for k = 1), which is what makes decoding unambiguous.

``code_len`` gives the symbol count of a code without materializing it:
code_len(0) = 1, code_len(1) = 2, and code_len(k) = 2 + floor(log2(k - 1))
for k >= 2.  Key growth facts used elsewhere in the package, all of which
are exercised exhaustively by the test suite:

* code_len_vec(v) <= 2 * len(v) + sum(log2(1 + x) for x in v)
* bumping one entry by 1 adds at most one symbol
* halving every entry (floor) removes at most 2 symbols per entry
* if some entry is >= 3, halving every entry (ceil) removes at least one
  symbol overall

A symbol string can be packed into bits by treating it as a base-3 numeral
(0 -> 0, 1 -> 1, | -> 2, first symbol most significant).  m symbols always
fit in ceil(m * log2 3) bits, which is the figure ``packed_bit_length``
reports.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ArityMismatch, InvalidParam, MalformedCode

__all__ = [
    "SYM_ZERO",
    "SYM_ONE",
    "SYM_SEP",
    "PackedSymbols",
    "encode_int",
    "decode_int",
    "code_len",
    "encode_vec",
    "decode_vec",
    "code_len_vec",
    "pack_bits",
    "unpack_bits",
    "packed_bit_length",
]

SYM_ZERO = "0"
SYM_ONE = "1"
SYM_SEP = "|"

_SYMBOL_TO_DIGIT = {SYM_ZERO: 0, SYM_ONE: 1, SYM_SEP: 2}
_DIGIT_TO_SYMBOL = (SYM_ZERO, SYM_ONE, SYM_SEP)


def encode_int(k: int) -> str:
    """Return the code for a single nonnegative integer."""
    if k < 0:
        raise InvalidParam(f"cannot encode negative value {k}")
    if k == 0:
        return SYM_SEP
    return format(k - 1, "b") + SYM_SEP


def code_len(k: int) -> int:
    """Symbol count of encode_int(k), computed without building the string."""
    if k < 0:
        raise InvalidParam(f"cannot encode negative value {k}")
    if k == 0:
        return 1
    # len(binary of k-1) + separator; binary of 0 is the single digit "0"
    return 1 + max(1, (k - 1).bit_length())


def decode_int(s: str, offset: int = 0) -> tuple[int, int]:
    """Decode one integer starting at ``offset``.

    Returns (value, symbols consumed).  Raises MalformedCode if no
    terminator appears before the string ends, if an unknown symbol shows
    up, or if the binary part has an illegal leading zero.
    """
    if offset < 0 or offset >= len(s):
        raise MalformedCode(f"offset {offset} out of range for {len(s)} symbols")
    end = s.find(SYM_SEP, offset)
    if end < 0:
        raise MalformedCode(f"no terminator after offset {offset}")
    bits = s[offset:end]
    if not bits:
        return 0, 1
    for ch in bits:
        if ch not in (SYM_ZERO, SYM_ONE):
            raise MalformedCode(f"unexpected symbol {ch!r} at offset {offset}")
    if len(bits) > 1 and bits[0] == SYM_ZERO:
        raise MalformedCode(f"leading zero in code at offset {offset}")
    return int(bits, 2) + 1, len(bits) + 1


def encode_vec(values: Sequence[int]) -> str:
    """Concatenate the codes of all entries, in order."""
    return "".join(encode_int(k) for k in values)


def code_len_vec(values: Iterable[int]) -> int:
    """Total symbol count of encode_vec(values)."""
    return sum(code_len(k) for k in values)


def decode_vec(s: str, d: int) -> tuple[int, ...]:
    """Decode exactly ``d`` concatenated codes; the string must hold no more.

    Raises ArityMismatch when the string runs out early or has trailing
    symbols after the d-th code.
    """
    if d < 0:
        raise InvalidParam(f"vector arity must be nonnegative, got {d}")
    out = []
    offset = 0
    for i in range(d):
        if offset >= len(s):
            raise ArityMismatch(f"expected {d} codes, found {i}")
        value, used = decode_int(s, offset)
        out.append(value)
        offset += used
    if offset != len(s):
        raise ArityMismatch(f"expected {d} codes, found more ({len(s) - offset} trailing symbols)")
    return tuple(out)


def packed_bit_length(num_symbols: int) -> int:
    """Bits needed to pack ``num_symbols`` symbols: ceil(m * log2 3), exactly."""
    if num_symbols < 0:
        raise InvalidParam(f"symbol count must be nonnegative, got {num_symbols}")
    if num_symbols == 0:
        return 0
    # 3**m - 1 is the largest base-3 value on m digits; its bit length equals
    # ceil(m * log2 3) because 3**m is never a power of two for m >= 1.
    return (3**num_symbols - 1).bit_length()


@dataclass(frozen=True)
class PackedSymbols:
    """A symbol string packed radix-3 into bytes.

    ``payload`` is the base-3 value of the string (first symbol most
    significant), big-endian, occupying ceil(packed_bit_length / 8) bytes.
    ``num_symbols`` must be kept alongside the payload because leading
    zero-symbols are significant.
    """

    num_symbols: int
    payload: bytes

    @property
    def bit_length(self) -> int:
        return packed_bit_length(self.num_symbols)


def pack_bits(s: str) -> PackedSymbols:
    """Pack a symbol string into a radix-3 numeral."""
    value = 0
    for ch in s:
        try:
            digit = _SYMBOL_TO_DIGIT[ch]
        except KeyError:
            raise MalformedCode(f"unexpected symbol {ch!r}") from None
        value = value * 3 + digit
    nbytes = (packed_bit_length(len(s)) + 7) // 8
    return PackedSymbols(len(s), value.to_bytes(nbytes, "big"))


def unpack_bits(packed: PackedSymbols) -> str:
    """Invert pack_bits exactly."""
    value = int.from_bytes(packed.payload, "big")
    out = []
    for _ in range(packed.num_symbols):
        value, digit = divmod(value, 3)
        out.append(_DIGIT_TO_SYMBOL[digit])
    if value:
        raise MalformedCode("payload larger than the recorded symbol count allows")
    return "".join(reversed(out))
