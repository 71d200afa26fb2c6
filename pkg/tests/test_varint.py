"""Unit tests for the three-symbol integer code."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from veccount import varint
from veccount.errors import ArityMismatch, InvalidParam, MalformedCode

# Frozen code table for k = 0..7.  These exact strings are the contract;
# everything else in the module is derived from them.
CODE_TABLE = {
    0: "|",
    1: "0|",
    2: "1|",
    3: "10|",
    4: "11|",
    5: "100|",
    6: "101|",
    7: "110|",
}


def test_code_table():
    for k, code in CODE_TABLE.items():
        assert varint.encode_int(k) == code
        assert varint.code_len(k) == len(code)
        assert varint.decode_int(code) == (k, len(code))


def test_vector_concatenation_example():
    assert varint.encode_vec((3, 0, 4, 0, 1)) == "10||11||0|"
    assert varint.decode_vec("10||11||0|", 5) == (3, 0, 4, 0, 1)


def test_decode_at_offset():
    # offset 3 lands on the second code of "10||11||0|", which is "|"
    assert varint.decode_int("10||11||0|", 3) == (0, 1)


def test_decode_vec_trace_row():
    assert varint.decode_vec("110|11|10||", 4) == (7, 4, 3, 0)


def test_code_len_vec_scale_trigger_example():
    assert varint.code_len_vec((6, 5, 2, 2)) == 12
    assert varint.encode_vec((6, 4, 2, 2)) == "101|11|1|1|"


def test_closed_form_matches_materialized_length():
    for k in range(20000):
        assert varint.code_len(k) == len(varint.encode_int(k))


def test_round_trip_small_range():
    for k in range(20000):
        code = varint.encode_int(k)
        assert varint.decode_int(code) == (k, len(code))


def test_growth_properties_small_range():
    """Spot-check of the four length facts; the full sweep runs in acceptance."""
    psi = varint.code_len
    for k in range(50000):
        assert 2 ** max(psi(k) - 2, 0) <= k + 1  # psi(k) <= 2 + log2(1+k)
        assert psi(k + 1) <= psi(k) + 1
        assert psi(k // 2) >= psi(k) - 2
        if k >= 3:
            assert psi((k + 1) // 2) <= psi(k) - 1
        else:
            assert psi((k + 1) // 2) <= psi(k)


def test_decode_errors():
    with pytest.raises(MalformedCode):
        varint.decode_int("10")  # no terminator
    with pytest.raises(MalformedCode):
        varint.decode_int("01|")  # leading zero
    with pytest.raises(MalformedCode):
        varint.decode_int("1x|")  # foreign symbol
    with pytest.raises(MalformedCode):
        varint.decode_int("|", 5)  # offset out of range
    with pytest.raises(InvalidParam):
        varint.encode_int(-1)
    with pytest.raises(InvalidParam):
        varint.code_len(-3)


def test_decode_vec_arity_errors():
    with pytest.raises(ArityMismatch):
        varint.decode_vec("10||", 3)  # too few codes
    with pytest.raises(ArityMismatch):
        varint.decode_vec("10||11|", 2)  # trailing symbols


def test_pack_bits_examples():
    empty = varint.pack_bits("")
    assert empty.num_symbols == 0
    assert empty.payload == b""
    assert empty.bit_length == 0

    sep = varint.pack_bits("|")
    assert sep.bit_length == 2
    assert int.from_bytes(sep.payload, "big") == 2

    assert varint.packed_bit_length(12) == 20


def test_pack_bits_preserves_leading_zeros():
    s = "00|1"
    assert varint.unpack_bits(varint.pack_bits(s)) == s


def test_unpack_rejects_oversized_payload():
    with pytest.raises(MalformedCode):
        varint.unpack_bits(varint.PackedSymbols(1, b"\x09"))  # 9 >= 3**1


vectors = st.lists(st.integers(min_value=0, max_value=2**40), min_size=0, max_size=12)


@given(vectors)
def test_vector_round_trip_property(v):
    s = varint.encode_vec(v)
    assert varint.decode_vec(s, len(v)) == tuple(v)
    assert varint.code_len_vec(v) == len(s)


@given(st.text(alphabet="01|", max_size=60))
@settings(max_examples=200)
def test_pack_round_trip_property(s):
    packed = varint.pack_bits(s)
    assert varint.unpack_bits(packed) == s
    assert len(packed.payload) == (packed.bit_length + 7) // 8
