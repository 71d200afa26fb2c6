"""Compiled trial loops for the Monte Carlo harness.

Every kernel here reproduces, bit for bit, what the pure-Python classes
in ``counter`` and ``baselines`` would do with a RandomSource seeded the
same way: same xoshiro256** word stream, same least-significant-first bit
order, same draw order (bernoulli bits, then one sign bit per odd entry
in ascending coordinate order during a scale-up, whole 64-bit words for
the Morris acceptance test).  The test suite asserts that agreement on
real streams; if a kernel and its reference ever disagree, the kernel is
wrong.

Mantissa entries, scales, and stream indices are int64 here, which is
ample for desk-scale experiments (the reference classes carry arbitrary
precision).  Keep this module import-light: numba compilation is paid on
first call and cached on disk next to the package.
"""

import numpy as np
from numba import njit

_U64 = np.uint64

_GAMMA = _U64(0x9E3779B97F4A7C15)
_MIX1 = _U64(0xBF58476D1CE4E5B9)
_MIX2 = _U64(0x94D049BB133111EB)
_TWO64 = 18446744073709551616.0


@njit(inline="always")
def _splitmix_next(z):
    z = z + _GAMMA
    w = z
    w = (w ^ (w >> _U64(30))) * _MIX1
    w = (w ^ (w >> _U64(27))) * _MIX2
    w = w ^ (w >> _U64(31))
    return z, w


@njit(inline="always")
def _seed_state(seed):
    z = seed
    z, s0 = _splitmix_next(z)
    z, s1 = _splitmix_next(z)
    z, s2 = _splitmix_next(z)
    z, s3 = _splitmix_next(z)
    if (s0 | s1 | s2 | s3) == _U64(0):
        s3 = _U64(1)
    return s0, s1, s2, s3


@njit(inline="always")
def _rotl(x, k):
    return (x << _U64(k)) | (x >> _U64(64 - k))


@njit(inline="always")
def _xoshiro_next(s0, s1, s2, s3):
    result = _rotl(s1 * _U64(5), 7) * _U64(9)
    t = s1 << _U64(17)
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, 45)
    return result, s0, s1, s2, s3


@njit(inline="always")
def _code_len64(k):
    if k == 0:
        return 1
    m = k - 1
    if m == 0:
        return 2
    n = 0
    while m > 0:
        m >>= 1
        n += 1
    return 1 + n


@njit(cache=True, nogil=True)
def run_veccount_trials(
    stream, dim, budget, cap, inclusive, base_seed, t0, t1, out_scale, out_mantissa, out_failed
):
    """Shared-scale counter trials t0..t1, one seed per trial index."""
    for t in range(t0, t1):
        s0, s1, s2, s3 = _seed_state(base_seed + _U64(t))
        bitbuf = _U64(0)
        bitsleft = 0
        scale = 0
        failed = False
        mant = out_mantissa[t]
        psi = dim
        for i in range(stream.size):
            if failed:
                continue
            # bernoulli with probability 2**-scale, at most `scale` bits
            ok = True
            r = scale
            while r > 0:
                if bitsleft == 0:
                    bitbuf, s0, s1, s2, s3 = _xoshiro_next(s0, s1, s2, s3)
                    bitsleft = 64
                bit = bitbuf & _U64(1)
                bitbuf >>= _U64(1)
                bitsleft -= 1
                if bit == _U64(0):
                    ok = False
                    break
                r -= 1
            if not ok:
                continue
            j = stream[i] - 1
            grown = mant[j] + 1
            mant[j] = grown
            psi += _code_len64(grown) - _code_len64(grown - 1)
            if inclusive:
                fire = psi >= budget
            else:
                fire = psi > budget
            if fire:
                if scale + 1 >= cap:
                    scale = cap
                    failed = True
                else:
                    scale += 1
                    total = 0
                    for k in range(dim):
                        v = mant[k]
                        if v & 1:
                            if bitsleft == 0:
                                bitbuf, s0, s1, s2, s3 = _xoshiro_next(s0, s1, s2, s3)
                                bitsleft = 64
                            bit = bitbuf & _U64(1)
                            bitbuf >>= _U64(1)
                            bitsleft -= 1
                            if bit == _U64(1):
                                v = (v + 1) >> 1
                            else:
                                v = (v - 1) >> 1
                        else:
                            v >>= 1
                        mant[k] = v
                        total += _code_len64(v)
                    psi = total
        out_scale[t] = scale
        out_failed[t] = failed


@njit(cache=True, nogil=True)
def run_dmorris_trials(stream, dim, accuracy, base_seed, t0, t1, out_index):
    """d independent Morris counters per trial, one shared bit stream."""
    ratio = accuracy / (accuracy + 1.0)
    for t in range(t0, t1):
        s0, s1, s2, s3 = _seed_state(base_seed + _U64(t))
        bitbuf = _U64(0)
        bitsleft = 0
        index = out_index[t]
        p = np.ones(dim, np.float64)
        for i in range(stream.size):
            j = stream[i] - 1
            if index[j] > 0:
                # assemble 64 bits, least significant first
                value = _U64(0)
                taken = 0
                while taken < 64:
                    if bitsleft == 0:
                        bitbuf, s0, s1, s2, s3 = _xoshiro_next(s0, s1, s2, s3)
                        bitsleft = 64
                    take = 64 - taken
                    if take > bitsleft:
                        take = bitsleft
                    if take == 64:
                        chunk = bitbuf
                        bitbuf = _U64(0)
                    else:
                        chunk = bitbuf & ((_U64(1) << _U64(take)) - _U64(1))
                        bitbuf >>= _U64(take)
                    value |= chunk << _U64(taken)
                    bitsleft -= take
                    taken += take
                if value >= _U64(p[j] * _TWO64):
                    continue
            index[j] += 1
            p[j] *= ratio


@njit(cache=True, nogil=True)
def run_naive_trials(stream, dim, cap, base_seed, t0, t1, out_scale, out_mantissa):
    """Fixed-width shared-scale counter trials."""
    for t in range(t0, t1):
        s0, s1, s2, s3 = _seed_state(base_seed + _U64(t))
        bitbuf = _U64(0)
        bitsleft = 0
        scale = 0
        mant = out_mantissa[t]
        for i in range(stream.size):
            ok = True
            r = scale
            while r > 0:
                if bitsleft == 0:
                    bitbuf, s0, s1, s2, s3 = _xoshiro_next(s0, s1, s2, s3)
                    bitsleft = 64
                bit = bitbuf & _U64(1)
                bitbuf >>= _U64(1)
                bitsleft -= 1
                if bit == _U64(0):
                    ok = False
                    break
                r -= 1
            if not ok:
                continue
            j = stream[i] - 1
            mant[j] += 1
            if mant[j] > cap:
                scale += 1
                for k in range(dim):
                    v = mant[k]
                    if v & 1:
                        if bitsleft == 0:
                            bitbuf, s0, s1, s2, s3 = _xoshiro_next(s0, s1, s2, s3)
                            bitsleft = 64
                        bit = bitbuf & _U64(1)
                        bitbuf >>= _U64(1)
                        bitsleft -= 1
                        if bit == _U64(1):
                            v = (v + 1) >> 1
                        else:
                            v = (v - 1) >> 1
                    else:
                        v >>= 1
                    mant[k] = v
        out_scale[t] = scale


@njit(cache=True, nogil=True)
def count_bernoulli(seed, exponent, draws):
    """Successes of bernoulli_pow2(exponent) over ``draws`` calls, one seed."""
    s0, s1, s2, s3 = _seed_state(_U64(seed))
    bitbuf = _U64(0)
    bitsleft = 0
    hits = 0
    for _ in range(draws):
        ok = True
        r = exponent
        while r > 0:
            if bitsleft == 0:
                bitbuf, s0, s1, s2, s3 = _xoshiro_next(s0, s1, s2, s3)
                bitsleft = 64
            bit = bitbuf & _U64(1)
            bitbuf >>= _U64(1)
            bitsleft -= 1
            if bit == _U64(0):
                ok = False
                break
            r -= 1
        if ok:
            hits += 1
    return hits


@njit(cache=True, nogil=True)
def sum_rademacher(seed, draws):
    """Sum of ``draws`` fair signs, one seed."""
    s0, s1, s2, s3 = _seed_state(_U64(seed))
    bitbuf = _U64(0)
    bitsleft = 0
    total = 0
    for _ in range(draws):
        if bitsleft == 0:
            bitbuf, s0, s1, s2, s3 = _xoshiro_next(s0, s1, s2, s3)
            bitsleft = 64
        bit = bitbuf & _U64(1)
        bitbuf >>= _U64(1)
        bitsleft -= 1
        if bit == _U64(1):
            total += 1
        else:
            total -= 1
    return total
