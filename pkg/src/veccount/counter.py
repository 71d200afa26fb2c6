"""The shared-scale vector counter.

State is a scale counter ``scale`` (a small integer, call it U) and a
mantissa vector V of d nonnegative integers.  The estimate of the true
count vector x is 2**U * V.  An increment of coordinate j bumps V_j with
probability 2**-U; when the three-symbol code of V outgrows its symbol
budget, a scale-up halves every entry (odd entries round up or down on a
fresh fair sign, keeping the estimate unbiased) and U grows by one.

Configurations are derived from three user-facing numbers: the maximum
stream length n, the dimension d, and the Euclidean relative error target
sigma in (0, 1/3).  Derived quantities:

* accuracy      a  = ceil(2 / sigma^2)
* symbol_budget M  = 4d + ceil(d * log2(1 + a))
* scale_cap     C  = ceil(log2(2 / sigma^2) + log2(n / (a d) + 1))

The scale counter is stored truncated: a scale-up that would reach the cap
instead parks the counter in a failed state whose queries return the zero
vector.  The probability of ever failing is at most sigma^2 / 2, which is
already folded into the error budget.  When n <= 1/sigma the configuration
flips to deterministic mode and the counter just keeps d exact tallies; no
randomness is consumed there.

Two scale-up triggers exist.  STRICT (the default) scales when the code
length exceeds the budget; INCLUSIVE scales when it reaches the budget,
which is the convention used by the worked trace in the CLI.  Both keep
the code length within budget at all times and fire at most once per
increment, provided the budget is at least 3d (enforced).

``space_bits`` reports the bit budget of the representation.  The scale
side is ceil(log2(C + 1)) bits (the +1 folds in the failed state).  For
the mantissa two accountings are exposed: ``v_bits`` equals the symbol
budget M, the information content of the code space (valid concatenated
codes of total length <= M number about 2**M), and ``packed_v_bits`` is
the ceil(M * log2 3) cost of storing the symbols radix-3 packed.  The
``total`` used in space comparisons is u_bits + v_bits.

Snapshots: ``serialize`` emits a little-endian binary image (magic
"VCNT", format version, every config field, the full counter state
including the exact tallies in deterministic mode, the randomness state,
and a trailing CRC32).  ``deserialize`` restores it exactly, so feeding
the rest of a stream to a restored counter is indistinguishable from
never having paused.
"""

from __future__ import annotations

import enum
import math
import struct
import zlib
from dataclasses import dataclass

from .errors import BadCoordinate, CorruptState, InvalidParam, StreamOverflow
from .randomness import RandomSource
from .varint import code_len, code_len_vec, packed_bit_length

__all__ = ["Trigger", "CounterConfig", "SpaceBudget", "space_bits", "VectorCounter"]

_MAX_U64 = (1 << 64) - 1

_MAGIC = b"VCNT"
_VERSION = 1


class Trigger(enum.IntEnum):
    """When a scale-up fires, relative to the symbol budget."""

    STRICT = 0  # code length > budget
    INCLUSIVE = 1  # code length >= budget


@dataclass(frozen=True)
class CounterConfig:
    """Frozen parameters of one counter instance.

    Build with :meth:`derive` for the standard parameterization; direct
    construction is allowed for custom budgets (the CLI trace command uses
    it) and validates only the structural requirements.
    """

    stream_limit: int
    dim: int
    rel_error: float
    accuracy: int
    symbol_budget: int
    scale_cap: int
    trigger: Trigger = Trigger.STRICT
    deterministic: bool = False

    def __post_init__(self):
        if self.stream_limit < 1:
            raise InvalidParam(f"stream limit must be at least 1, got {self.stream_limit}")
        if self.dim < 1:
            raise InvalidParam(f"dimension must be at least 1, got {self.dim}")
        if self.rel_error < 0:
            raise InvalidParam(f"relative error target must be nonnegative, got {self.rel_error}")
        if self.accuracy < 1:
            raise InvalidParam(f"accuracy must be at least 1, got {self.accuracy}")
        if self.symbol_budget < 3 * self.dim:
            raise InvalidParam(
                f"symbol budget {self.symbol_budget} is below 3 * dim = {3 * self.dim}; "
                "single scale-ups could no longer restore the budget"
            )
        if self.scale_cap < 1:
            raise InvalidParam(f"scale cap must be at least 1, got {self.scale_cap}")
        if not isinstance(self.trigger, Trigger):
            raise InvalidParam(f"trigger must be a Trigger, got {self.trigger!r}")

    @classmethod
    def derive(
        cls,
        stream_limit: int,
        dim: int,
        rel_error: float,
        trigger: Trigger = Trigger.STRICT,
    ) -> "CounterConfig":
        """Standard parameterization for a given (n, d, sigma) target."""
        if stream_limit < 1:
            raise InvalidParam(f"stream limit must be at least 1, got {stream_limit}")
        if dim < 1:
            raise InvalidParam(f"dimension must be at least 1, got {dim}")
        if not 0.0 < rel_error < 1.0 / 3.0:
            raise InvalidParam(f"relative error target must lie in (0, 1/3), got {rel_error}")
        accuracy = math.ceil(2.0 / (rel_error * rel_error))
        symbol_budget = 4 * dim + math.ceil(dim * math.log2(1 + accuracy))
        # log2(n / (a d) + 1) written as log2(n + a d) - log2(a d) so that
        # stream limits beyond float range still work
        ad = accuracy * dim
        scale_cap = math.ceil(
            math.log2(2.0 / (rel_error * rel_error))
            + math.log2(stream_limit + ad)
            - math.log2(ad)
        )
        scale_cap = max(1, scale_cap)
        deterministic = stream_limit <= 1.0 / rel_error
        return cls(
            stream_limit=stream_limit,
            dim=dim,
            rel_error=rel_error,
            accuracy=accuracy,
            symbol_budget=symbol_budget,
            scale_cap=scale_cap,
            trigger=trigger,
            deterministic=deterministic,
        )


@dataclass(frozen=True)
class SpaceBudget:
    """Bit accounting for one configuration (see module docstring)."""

    u_bits: int
    v_bits: int
    total: int
    packed_v_bits: int


def space_bits(config: CounterConfig) -> SpaceBudget:
    """Bit budget of the counter representation for ``config``."""
    u_bits = max(1, config.scale_cap.bit_length())  # ceil(log2(cap + 1))
    v_bits = config.symbol_budget
    return SpaceBudget(
        u_bits=u_bits,
        v_bits=v_bits,
        total=u_bits + v_bits,
        packed_v_bits=packed_bit_length(config.symbol_budget),
    )


class VectorCounter:
    """A d-dimensional approximate counter with one shared scale."""

    __slots__ = (
        "_config",
        "_rng",
        "_scale",
        "_mantissa",
        "_code_symbols",
        "_failed",
        "_seen",
        "_scale_ups",
        "_exact",
    )

    def __init__(self, config: CounterConfig, seed: int):
        self._config = config
        self._rng = RandomSource(seed)
        self._scale = 0
        self._mantissa = [0] * config.dim
        self._code_symbols = config.dim  # every entry is 0, one symbol each
        self._failed = False
        self._seen = 0
        self._scale_ups = 0
        self._exact = [0] * config.dim if config.deterministic else None

    @classmethod
    def create(
        cls,
        stream_limit: int,
        dim: int,
        rel_error: float,
        seed: int,
        trigger: Trigger = Trigger.STRICT,
    ) -> "VectorCounter":
        """Build a counter from the user-facing (n, d, sigma) parameters."""
        return cls(CounterConfig.derive(stream_limit, dim, rel_error, trigger), seed)

    @property
    def config(self) -> CounterConfig:
        return self._config

    @property
    def scale(self) -> int:
        return self._scale

    @property
    def mantissa(self) -> tuple[int, ...]:
        return tuple(self._mantissa)

    @property
    def failed(self) -> bool:
        return self._failed

    @property
    def increments(self) -> int:
        return self._seen

    @property
    def scale_ups(self) -> int:
        return self._scale_ups

    @property
    def code_symbols(self) -> int:
        """Current code length of the mantissa vector, maintained incrementally."""
        return self._code_symbols

    @property
    def rng(self) -> RandomSource:
        return self._rng

    def increment(self, j: int) -> None:
        """Count one occurrence of coordinate j (1-based)."""
        if not 1 <= j <= self._config.dim:
            raise BadCoordinate(f"coordinate {j} outside [1, {self._config.dim}]")
        if self._seen >= self._config.stream_limit:
            raise StreamOverflow(
                f"counter was configured for at most {self._config.stream_limit} increments"
            )
        self._seen += 1
        if self._exact is not None:
            self._exact[j - 1] += 1
            return
        if self._failed:
            return
        if not self._rng.bernoulli_pow2(self._scale):
            return
        idx = j - 1
        grown = self._mantissa[idx] + 1
        self._mantissa[idx] = grown
        self._code_symbols += code_len(grown) - code_len(grown - 1)
        budget = self._config.symbol_budget
        if self._config.trigger is Trigger.STRICT:
            fire = self._code_symbols > budget
        else:
            fire = self._code_symbols >= budget
        if fire:
            self._scale_up()
            assert self._failed or self._code_symbols <= budget - int(self._config.trigger)

    def _scale_up(self) -> None:
        self._scale_ups += 1
        if self._scale + 1 >= self._config.scale_cap:
            self._scale = self._config.scale_cap
            self._failed = True
            return
        self._scale += 1
        total = 0
        mantissa = self._mantissa
        for k in range(self._config.dim):
            v = mantissa[k]
            if v & 1:
                v = (v + self._rng.rademacher()) >> 1
            else:
                v >>= 1
            mantissa[k] = v
            total += code_len(v)
        self._code_symbols = total

    def query(self) -> list[int]:
        """Unbiased estimate of the count vector (exact in deterministic mode)."""
        if self._exact is not None:
            return list(self._exact)
        if self._failed:
            return [0] * self._config.dim
        shift = self._scale
        return [v << shift for v in self._mantissa]

    # --- snapshots -----------------------------------------------------

    def serialize(self) -> bytes:
        """Binary snapshot: config, state, randomness, CRC32."""
        cfg = self._config
        for name, value in (
            ("stream limit", cfg.stream_limit),
            ("scale cap", cfg.scale_cap),
            ("accuracy", cfg.accuracy),
            ("symbol budget", cfg.symbol_budget),
        ):
            if value > _MAX_U64:
                raise InvalidParam(f"{name} {value} does not fit the 64-bit snapshot format")
        parts = [struct.pack("<4sH", _MAGIC, _VERSION)]
        parts.append(
            struct.pack(
                "<QQdQQQQQ",
                cfg.stream_limit,
                cfg.dim,
                cfg.rel_error,
                cfg.accuracy,
                cfg.symbol_budget,
                cfg.scale_cap,
                int(cfg.trigger),
                int(cfg.deterministic),
            )
        )
        parts.append(struct.pack("<QQQ", self._seen, self._scale, cfg.dim))
        parts.append(struct.pack(f"<{cfg.dim}Q", *self._mantissa))
        flags = (1 if self._failed else 0) | (2 if self._exact is not None else 0)
        parts.append(struct.pack("<B", flags))
        if self._exact is not None:
            parts.append(struct.pack(f"<{cfg.dim}Q", *self._exact))
        parts.append(struct.pack("<Q", self._scale_ups))
        s0, s1, s2, s3, bitbuf, bitsleft, consumed = self._rng.getstate()
        parts.append(struct.pack("<QQQQQBQ", s0, s1, s2, s3, bitbuf, bitsleft, consumed))
        body = b"".join(parts)
        return body + struct.pack("<I", zlib.crc32(body))

    @classmethod
    def deserialize(cls, blob: bytes) -> "VectorCounter":
        """Restore a counter from :meth:`serialize` output, byte-exactly."""
        if len(blob) < 10:
            raise CorruptState("snapshot too short")
        magic, version = struct.unpack_from("<4sH", blob, 0)
        if magic != _MAGIC:
            raise CorruptState(f"bad magic {magic!r}")
        if version != _VERSION:
            raise CorruptState(f"unsupported snapshot version {version}")
        body, tail = blob[:-4], blob[-4:]
        (crc,) = struct.unpack("<I", tail)
        if zlib.crc32(body) != crc:
            raise CorruptState("checksum mismatch")
        try:
            offset = 6
            (limit, dim, rel_error, accuracy, budget, cap, trig, det) = struct.unpack_from(
                "<QQdQQQQQ", blob, offset
            )
            offset += struct.calcsize("<QQdQQQQQ")
            seen, scale, dim2, = struct.unpack_from("<QQQ", blob, offset)
            offset += 24
            if dim2 != dim:
                raise CorruptState(f"dimension fields disagree: {dim} vs {dim2}")
            mantissa = list(struct.unpack_from(f"<{dim}Q", blob, offset))
            offset += 8 * dim
            (flags,) = struct.unpack_from("<B", blob, offset)
            offset += 1
            exact = None
            if flags & 2:
                exact = list(struct.unpack_from(f"<{dim}Q", blob, offset))
                offset += 8 * dim
            (scale_ups,) = struct.unpack_from("<Q", blob, offset)
            offset += 8
            rng_state = struct.unpack_from("<QQQQQBQ", blob, offset)
            offset += struct.calcsize("<QQQQQBQ")
            if offset != len(body):
                raise CorruptState(f"{len(body) - offset} unexpected trailing bytes")
        except struct.error as exc:
            raise CorruptState(f"truncated snapshot: {exc}") from None
        if trig not in (0, 1):
            raise CorruptState(f"unknown trigger code {trig}")
        try:
            config = CounterConfig(
                stream_limit=limit,
                dim=dim,
                rel_error=rel_error,
                accuracy=accuracy,
                symbol_budget=budget,
                scale_cap=cap,
                trigger=Trigger(trig),
                deterministic=bool(det),
            )
        except InvalidParam as exc:
            raise CorruptState(f"snapshot config invalid: {exc}") from None
        if bool(det) != (exact is not None):
            raise CorruptState("deterministic flag disagrees with stored tallies")
        counter = cls(config, seed=0)
        counter._seen = seen
        counter._scale = scale
        counter._mantissa = mantissa
        counter._code_symbols = code_len_vec(mantissa)
        counter._failed = bool(flags & 1)
        counter._scale_ups = scale_ups
        counter._exact = exact
        counter._rng.setstate(rng_state)
        return counter
