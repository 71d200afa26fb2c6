"""Reference counters: Morris, d-fold Morris, naive shared scale."""

import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from veccount import (
    BadCoordinate,
    DMorrisCounter,
    InvalidParam,
    MorrisCounter,
    NaiveSharedCounter,
    RandomSource,
    d_morris_space_bits,
    morris_space_bits,
)

_TWO64 = 2.0**64


# --- single Morris counter ---------------------------------------------------


def test_fresh_estimate_is_zero():
    counter = MorrisCounter(100, RandomSource(1))
    assert counter.index == 0
    assert counter.estimate() == 0.0


def test_first_increment_always_lands():
    source = RandomSource(1)
    counter = MorrisCounter(100, source)
    counter.increment()
    assert counter.index == 1
    assert counter.estimate() == pytest.approx(1.0, rel=1e-12)
    assert source.bits_consumed == 0  # index 0 accepts without drawing


def test_estimate_formula():
    counter = MorrisCounter(8, RandomSource(1))
    counter._index = 5
    assert counter.estimate() == pytest.approx(8 * (1.125**5 - 1))


def test_rejects_bad_accuracy():
    with pytest.raises(InvalidParam):
        MorrisCounter(0, RandomSource(1))


def test_matches_direct_transcription():
    # oracle: the textbook update loop written out against the same bit
    # stream, accepting when the 64-bit word falls below floor(p * 2**64)
    seed, accuracy, steps = 99, 5, 400
    counter = MorrisCounter(accuracy, RandomSource(seed))
    for _ in range(steps):
        counter.increment()

    rng = RandomSource(seed)
    index, p = 0, 1.0
    for _ in range(steps):
        if index == 0 or rng.next_u64() < int(p * _TWO64):
            index += 1
            p *= accuracy / (accuracy + 1)
    assert counter.index == index


# --- d-fold Morris -----------------------------------------------------------


def test_d1_equals_single_counter():
    stream = [1] * 300
    dm = DMorrisCounter(1, 7, seed=4)
    single = MorrisCounter(7, RandomSource(4))
    for j in stream:
        dm.increment(j)
        single.increment()
    assert dm.indexes == (single.index,)
    assert dm.query() == [single.estimate()]


def test_coordinates_share_one_draw_sequence():
    # a second transcription oracle, now with interleaved coordinates
    seed, accuracy, dim = 11, 6, 3
    stream = [1 + (k * 5) % dim for k in range(500)]
    dm = DMorrisCounter(dim, accuracy, seed=seed)
    for j in stream:
        dm.increment(j)

    rng = RandomSource(seed)
    index = [0] * dim
    p = [1.0] * dim
    for j in stream:
        i = j - 1
        if index[i] == 0 or rng.next_u64() < int(p[i] * _TWO64):
            index[i] += 1
            p[i] *= accuracy / (accuracy + 1)
    assert dm.indexes == tuple(index)


def test_dmorris_bad_coordinate():
    dm = DMorrisCounter(2, 5, seed=1)
    with pytest.raises(BadCoordinate):
        dm.increment(0)
    with pytest.raises(BadCoordinate):
        dm.increment(3)


def test_kernel_unbiased_and_variance_in_window():
    kern = pytest.importorskip("veccount._kernels")
    accuracy, n, trials = 100, 10**4, 10**5
    stream = np.ones(n, np.int64)
    out_index = np.zeros((trials, 1), np.int64)
    kern.run_dmorris_trials(stream, 1, accuracy, np.uint64(17), 0, trials, out_index)
    est = accuracy * ((1.0 + 1.0 / accuracy) ** out_index[:, 0].astype(np.float64) - 1.0)
    stderr = est.std(ddof=1) / math.sqrt(trials)
    assert abs(est.mean() - n) <= 4 * stderr
    # var(estimate) = x(x-1)/(2a), so relative variance sits near 1/(2a)
    rel_var = est.var(ddof=1) / n**2
    assert 0.25 / accuracy < rel_var < 1.0 / accuracy


def test_kernel_matches_interpreted_counters():
    kern = pytest.importorskip("veccount._kernels")
    dim, accuracy = 4, 9
    stream = np.array([1 + (k * 7) % dim for k in range(800)], np.int64)
    trials = 6
    out_index = np.zeros((trials, dim), np.int64)
    kern.run_dmorris_trials(stream, dim, accuracy, np.uint64(5), 0, trials, out_index)
    for t in range(trials):
        dm = DMorrisCounter(dim, accuracy, seed=5 + t)
        for j in stream:
            dm.increment(int(j))
        assert dm.indexes == tuple(out_index[t])


# --- naive shared-scale counter ----------------------------------------------


def test_naive_counts_exactly_until_cap():
    counter = NaiveSharedCounter(2, cap=3, seed=1)
    for _ in range(3):
        counter.increment(1)
    assert counter.scale == 0
    assert counter.mantissa == (3, 0)
    counter.increment(1)  # 4 > 3 triggers the shared halving
    assert counter.scale == 1
    assert counter.mantissa == (2, 0)
    assert counter.query() == [4, 0]


def test_naive_validation():
    with pytest.raises(InvalidParam):
        NaiveSharedCounter(0, cap=3, seed=1)
    with pytest.raises(InvalidParam):
        NaiveSharedCounter(2, cap=0, seed=1)
    counter = NaiveSharedCounter(2, cap=3, seed=1)
    with pytest.raises(BadCoordinate):
        counter.increment(3)


@given(seed=st.integers(0, 2**32), cap=st.integers(1, 6), data=st.data())
@settings(max_examples=50, deadline=None)
def test_naive_mantissa_stays_in_range(seed, cap, data):
    dim = data.draw(st.integers(1, 4))
    counter = NaiveSharedCounter(dim, cap=cap, seed=seed)
    for j in data.draw(st.lists(st.integers(1, dim), max_size=150)):
        counter.increment(j)
        assert all(0 <= v <= cap for v in counter.mantissa)
        assert counter.query() == [v << counter.scale for v in counter.mantissa]


def test_naive_kernel_matches_interpreted():
    kern = pytest.importorskip("veccount._kernels")
    dim, cap = 3, 4
    stream = np.array([1 + (k * 11) % dim for k in range(600)], np.int64)
    trials = 6
    out_scale = np.zeros(trials, np.int64)
    out_mant = np.zeros((trials, dim), np.int64)
    kern.run_naive_trials(stream, dim, cap, np.uint64(21), 0, trials, out_scale, out_mant)
    for t in range(trials):
        counter = NaiveSharedCounter(dim, cap=cap, seed=21 + t)
        for j in stream:
            counter.increment(int(j))
        assert counter.scale == out_scale[t]
        assert counter.mantissa == tuple(out_mant[t])


def test_naive_kernel_unbiased():
    kern = pytest.importorskip("veccount._kernels")
    dim, cap, trials = 4, 10, 10**5
    rstream = random.Random(31)
    stream = np.array([rstream.randint(1, dim) for _ in range(500)], np.int64)
    x = np.bincount(stream, minlength=dim + 1)[1:]
    out_scale = np.zeros(trials, np.int64)
    out_mant = np.zeros((trials, dim), np.int64)
    kern.run_naive_trials(stream, dim, cap, np.uint64(77), 0, trials, out_scale, out_mant)
    est = np.ldexp(out_mant.astype(np.float64), out_scale[:, None])
    stderr = est.std(axis=0, ddof=1) / math.sqrt(trials)
    assert np.all(np.abs(est.mean(axis=0) - x) <= 4 * stderr)


# --- space accounting ---------------------------------------------------------


def test_morris_space_formula():
    # ceil(log2 log2 n) index bits plus ceil(log2(1 + a)) payload bits
    assert morris_space_bits(2**32, 200) == 5 + 8
    assert morris_space_bits(2**40, 200) == 6 + 8
    assert morris_space_bits(2, 1) == 0 + 1


def test_d_morris_space_is_linear_in_d():
    assert d_morris_space_bits(2**40, 4, 200) == 56
    assert d_morris_space_bits(2**40, 1, 200) == 14


def test_space_monotone_in_stream_length():
    values = [morris_space_bits(n, 50) for n in (2**4, 2**8, 2**16, 2**32, 2**64)]
    assert values == sorted(values)


def test_space_validation():
    with pytest.raises(InvalidParam):
        morris_space_bits(1, 5)
    with pytest.raises(InvalidParam):
        morris_space_bits(100, 0)
    with pytest.raises(InvalidParam):
        d_morris_space_bits(100, 0, 5)
