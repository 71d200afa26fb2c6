"""Counter behavior: config derivation, increments, scale-ups, snapshots."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from veccount import (
    BadCoordinate,
    CorruptState,
    CounterConfig,
    InvalidParam,
    StreamOverflow,
    Trigger,
    VectorCounter,
    space_bits,
)
from veccount.varint import code_len_vec, encode_vec


def small_config(dim=4, budget=12, cap=64, trigger=Trigger.INCLUSIVE):
    return CounterConfig(
        stream_limit=10**6,
        dim=dim,
        rel_error=0.0,
        accuracy=1,
        symbol_budget=budget,
        scale_cap=cap,
        trigger=trigger,
    )


# --- configuration derivation ---------------------------------------------


def test_derive_frozen_example():
    config = CounterConfig.derive(10**6, 4, 0.3)
    assert config.accuracy == 23  # ceil(2 / 0.09)
    assert config.symbol_budget == 35  # 16 + ceil(4 * log2(24))
    assert config.scale_cap == 18
    assert not config.deterministic


def test_derive_scale_cap_tracks_stream_length():
    assert CounterConfig.derive(10**4, 4, 0.3).scale_cap == 12
    assert CounterConfig.derive(10**6, 4, 0.3).scale_cap == 18


def test_derive_huge_stream_limit():
    # the cap formula is arranged so integer stream limits beyond float
    # range still derive cleanly
    config = CounterConfig.derive(2**1024, 1, 0.1)
    assert config.scale_cap > 1000
    assert config.symbol_budget == 12


def test_deterministic_mode_threshold():
    assert CounterConfig.derive(2, 1, 0.25).deterministic  # 2 <= 4
    assert CounterConfig.derive(4, 1, 0.25).deterministic  # boundary: 4 <= 4
    assert not CounterConfig.derive(5, 1, 0.25).deterministic


def test_derive_rejects_bad_sigma():
    for sigma in (0.0, -0.1, 1.0 / 3.0, 0.34, 1.0):
        with pytest.raises(InvalidParam):
            CounterConfig.derive(100, 4, sigma)


def test_derive_rejects_bad_sizes():
    with pytest.raises(InvalidParam):
        CounterConfig.derive(0, 4, 0.3)
    with pytest.raises(InvalidParam):
        CounterConfig.derive(100, 0, 0.3)


def test_config_rejects_budget_below_3d():
    with pytest.raises(InvalidParam):
        small_config(dim=4, budget=11)


def test_accuracy_at_least_18_inside_sigma_range():
    # a = ceil(2/sigma^2) >= 18 whenever sigma < 1/3
    for sigma in (0.05, 0.1, 0.2, 0.3, 0.333):
        assert CounterConfig.derive(100, 1, sigma).accuracy >= 18


# --- basic counting --------------------------------------------------------


def test_fresh_counter_queries_zero():
    counter = VectorCounter(small_config(), seed=1)
    assert counter.query() == [0, 0, 0, 0]
    assert counter.scale == 0
    assert counter.code_symbols == 4


def test_tracks_exactly_before_first_scale_up():
    counter = VectorCounter(small_config(), seed=1)
    for j in (1, 2, 1, 3, 1, 4, 2):
        counter.increment(j)
    assert counter.scale == 0
    assert counter.mantissa == (3, 2, 1, 1)
    assert counter.query() == [3, 2, 1, 1]


def test_bad_coordinate():
    counter = VectorCounter(small_config(), seed=1)
    with pytest.raises(BadCoordinate):
        counter.increment(0)
    with pytest.raises(BadCoordinate):
        counter.increment(5)


def test_stream_overflow():
    config = CounterConfig(
        stream_limit=5, dim=1, rel_error=0.0, accuracy=1, symbol_budget=8, scale_cap=8
    )
    counter = VectorCounter(config, seed=1)
    for _ in range(5):
        counter.increment(1)
    with pytest.raises(StreamOverflow):
        counter.increment(1)


# --- the worked scale-up ----------------------------------------------------


def build_state(counter, values):
    """Drive a scale-zero counter to mantissa ``values`` via increments."""
    for j, v in enumerate(values, start=1):
        for _ in range(v):
            counter.increment(j)
    assert counter.mantissa == tuple(values)
    assert counter.scale == 0


def test_inclusive_trigger_worked_example():
    # (6,4,2,2) has code length 11; one more hit on coordinate 2 reaches
    # the budget 12 and fires the inclusive trigger
    counter = VectorCounter(small_config(), seed=3)
    build_state(counter, (6, 4, 2, 2))
    assert counter.code_symbols == 11
    counter.increment(2)
    assert counter.scale == 1
    assert counter.scale_ups == 1
    mant = counter.mantissa
    assert mant[0] == 3  # 6 is even: exact halving
    assert mant[1] in (2, 3)  # 5 rounds on a fair sign
    assert mant[2] == 1 and mant[3] == 1
    assert 5 <= counter.code_symbols <= 12  # within [m*+1-2d, m*]
    assert code_len_vec(mant) == counter.code_symbols
    assert counter.query() == [2 * v for v in mant]


def test_worked_example_code_length():
    assert code_len_vec((3, 3, 1, 1)) == 10


def test_odd_entry_rounds_fairly():
    # 5/2 rounds to 3 or 2 with equal probability on a fresh sign
    counter = VectorCounter(small_config(dim=1, budget=3), seed=8)
    ups = 0
    trials = 10**6
    for _ in range(trials):
        counter._scale = 0
        counter._mantissa = [5]
        counter._code_symbols = 4
        counter._scale_up()
        assert counter.mantissa[0] in (2, 3)
        ups += counter.mantissa[0] == 3
    freq = ups / trials
    assert abs(freq - 0.5) < 3 * math.sqrt(0.25 / trials)


def test_even_vector_halves_deterministically():
    counter = VectorCounter(small_config(dim=2, budget=6), seed=5)
    counter._scale = 0
    counter._mantissa = [4, 2]
    counter._code_symbols = code_len_vec((4, 2))
    before = counter.rng.bits_consumed
    counter._scale_up()
    assert counter.mantissa == (2, 1)
    assert counter.rng.bits_consumed == before  # no signs drawn


def test_strict_trigger_fires_only_past_budget():
    counter = VectorCounter(small_config(trigger=Trigger.STRICT), seed=3)
    build_state(counter, (6, 4, 2, 2))
    counter.increment(2)  # code length reaches 12 exactly: no strict fire
    assert counter.scale == 0
    assert counter.mantissa == (6, 5, 2, 2)


# --- query ------------------------------------------------------------------


def test_query_shifts_by_scale():
    counter = VectorCounter(small_config(), seed=1)
    counter._scale = 3
    counter._mantissa = [7, 4, 3, 0]
    counter._code_symbols = code_len_vec((7, 4, 3, 0))
    assert counter.query() == [56, 32, 24, 0]
    assert encode_vec(counter.mantissa) == "110|11|10||"


# --- fail state --------------------------------------------------------------


def test_fail_state_is_absorbing():
    config = CounterConfig(
        stream_limit=10**6, dim=1, rel_error=0.0, accuracy=1,
        symbol_budget=3, scale_cap=1, trigger=Trigger.STRICT,
    )
    counter = VectorCounter(config, seed=2)
    for _ in range(5):  # the fifth hit pushes the code length past 3
        counter.increment(1)
    assert counter.failed
    assert counter.scale == config.scale_cap
    assert counter.query() == [0]
    frozen = counter.mantissa
    for _ in range(20):
        counter.increment(1)  # consumed silently
    assert counter.failed and counter.mantissa == frozen
    assert counter.query() == [0]


# --- deterministic mode -------------------------------------------------------


def test_deterministic_mode_counts_exactly():
    counter = VectorCounter.create(3, 2, 0.3, seed=9)  # 3 <= 1/0.3 fails... 3 <= 3.33
    assert counter.config.deterministic
    counter.increment(1)
    counter.increment(1)
    counter.increment(2)
    assert counter.query() == [2, 1]
    assert counter.rng.bits_consumed == 0  # no randomness in this mode
    assert counter.scale == 0


# --- invariants (property test) ----------------------------------------------


@given(
    dim=st.integers(1, 5),
    budget_slack=st.integers(0, 6),
    cap=st.integers(2, 6),
    trigger=st.sampled_from([Trigger.STRICT, Trigger.INCLUSIVE]),
    seed=st.integers(0, 2**32),
    data=st.data(),
)
@settings(max_examples=60, deadline=None)
def test_invariants_on_random_streams(dim, budget_slack, cap, trigger, seed, data):
    budget = 3 * dim + budget_slack
    config = CounterConfig(
        stream_limit=10**6, dim=dim, rel_error=0.0, accuracy=1,
        symbol_budget=budget, scale_cap=cap, trigger=trigger,
    )
    counter = VectorCounter(config, seed=seed)
    stream = data.draw(st.lists(st.integers(1, dim), max_size=120))
    slack = int(trigger)
    last_scale = 0
    for j in stream:
        ups_before = counter.scale_ups
        counter.increment(j)
        assert counter.scale_ups - ups_before <= 1  # at most one per increment
        assert counter.scale >= last_scale  # never decreases
        last_scale = counter.scale
        assert counter.code_symbols == code_len_vec(counter.mantissa)
        if not counter.failed:
            assert counter.code_symbols <= budget - slack
            assert counter.query() == [v << counter.scale for v in counter.mantissa]
        else:
            assert counter.scale == cap
            assert counter.query() == [0] * dim


# --- space accounting ---------------------------------------------------------


def test_space_bits_fields():
    budget = space_bits(small_config(budget=12, cap=12))
    assert budget.v_bits == 12
    assert budget.packed_v_bits == 20  # ceil(12 * log2 3)
    assert budget.u_bits == 4  # ceil(log2(12 + 1))
    assert budget.total == budget.u_bits + budget.v_bits


def test_space_grows_only_in_scale_bits():
    # doubly-exponential stream growth moves only the scale side
    small = space_bits(CounterConfig.derive(2**32, 1, 0.1))
    large = space_bits(CounterConfig.derive(2**1024, 1, 0.1))
    assert small.v_bits == large.v_bits
    assert large.total - small.total == large.u_bits - small.u_bits
    assert large.u_bits > small.u_bits


def test_doubling_dimension_roughly_doubles_v_bits():
    one = space_bits(CounterConfig.derive(10**6, 8, 0.1))
    two = space_bits(CounterConfig.derive(10**6, 16, 0.1))
    assert abs(two.v_bits - 2 * one.v_bits) <= 2


# --- unbiasedness (Monte Carlo through the compiled mirror) -------------------


def test_mean_estimate_matches_truth():
    np = pytest.importorskip("numpy")
    kern = pytest.importorskip("veccount._kernels")
    config = CounterConfig.derive(1000, 4, 0.3)
    rstream = __import__("random").Random(77)
    stream = np.array([rstream.randint(1, 4) for _ in range(1000)], dtype=np.int64)
    x = np.bincount(stream, minlength=5)[1:]
    trials = 10**5
    out_scale = np.zeros(trials, np.int64)
    out_mant = np.zeros((trials, 4), np.int64)
    out_failed = np.zeros(trials, np.bool_)
    kern.run_veccount_trials(
        stream, 4, config.symbol_budget, config.scale_cap, False,
        np.uint64(123), 0, trials, out_scale, out_mant, out_failed,
    )
    est = np.ldexp(out_mant.astype(np.float64), out_scale[:, None])
    est[out_failed] = 0.0
    mean = est.mean(axis=0)
    stderr = est.std(axis=0, ddof=1) / math.sqrt(trials)
    assert np.all(np.abs(mean - x) <= 4 * stderr)


# --- snapshots -----------------------------------------------------------------


def feed(counter, jseq):
    for j in jseq:
        counter.increment(j)


def test_round_trip_fresh():
    counter = VectorCounter.create(1000, 3, 0.2, seed=5)
    clone = VectorCounter.deserialize(counter.serialize())
    assert clone.config == counter.config
    assert clone.mantissa == counter.mantissa
    assert clone.query() == counter.query()


def test_round_trip_resumes_identically():
    stream = [1 + (k * 7 + 3) % 4 for k in range(2000)]
    original = VectorCounter.create(4000, 4, 0.25, seed=42)
    feed(original, stream[:900])
    blob = original.serialize()
    restored = VectorCounter.deserialize(blob)
    assert restored.increments == 900
    feed(original, stream[900:])
    feed(restored, stream[900:])
    assert restored.scale == original.scale
    assert restored.mantissa == original.mantissa
    assert restored.failed == original.failed
    assert restored.query() == original.query()
    assert restored.rng.getstate() == original.rng.getstate()
    assert restored.serialize() == original.serialize()


def test_round_trip_deterministic_mode():
    counter = VectorCounter.create(3, 2, 0.3, seed=1)
    feed(counter, [1, 2])
    clone = VectorCounter.deserialize(counter.serialize())
    assert clone.config.deterministic
    assert clone.query() == [1, 1]
    clone.increment(2)
    assert clone.query() == [1, 2]


def test_round_trip_failed_counter():
    config = CounterConfig(
        stream_limit=100, dim=1, rel_error=0.0, accuracy=1,
        symbol_budget=3, scale_cap=1,
    )
    counter = VectorCounter(config, seed=2)
    feed(counter, [1] * 6)
    assert counter.failed
    clone = VectorCounter.deserialize(counter.serialize())
    assert clone.failed
    assert clone.query() == [0]


def test_deserialize_rejects_garbage():
    with pytest.raises(CorruptState):
        VectorCounter.deserialize(b"not a snapshot at all")
    with pytest.raises(CorruptState):
        VectorCounter.deserialize(b"")


def test_deserialize_rejects_corruption():
    blob = VectorCounter.create(1000, 3, 0.2, seed=5).serialize()
    flipped = bytearray(blob)
    flipped[len(blob) // 2] ^= 0x40
    with pytest.raises(CorruptState):
        VectorCounter.deserialize(bytes(flipped))
    with pytest.raises(CorruptState):
        VectorCounter.deserialize(blob[:-9])
    with pytest.raises(CorruptState):
        VectorCounter.deserialize(blob + b"\x00")


def test_deserialize_rejects_unknown_version():
    import struct
    import zlib

    blob = VectorCounter.create(1000, 3, 0.2, seed=5).serialize()
    body = bytearray(blob[:-4])
    body[4:6] = struct.pack("<H", 999)
    patched = bytes(body) + struct.pack("<I", zlib.crc32(bytes(body)))
    with pytest.raises(CorruptState):
        VectorCounter.deserialize(patched)


def test_deserialize_rejects_wrong_magic():
    blob = VectorCounter.create(1000, 3, 0.2, seed=5).serialize()
    with pytest.raises(CorruptState):
        VectorCounter.deserialize(b"XXXX" + blob[4:])
