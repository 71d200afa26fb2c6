"""Seeded Monte Carlo experiments over the counter and its baselines.

An experiment fixes one input stream and replays it through many
independently seeded counter instances.  The stream is generated once from
the experiment's base seed; trial t then uses seed ``base_seed + t``.  Both
choices make every number this module produces a pure function of the
spec, byte for byte, regardless of thread count.

The trial loops themselves live in ``_kernels`` (numba); they are exact
mirrors of the pure-Python classes and the test suite holds them to that.
The kernels release the GIL, so multiple threads can work disjoint trial
ranges of the shared output arrays.  Numba is imported lazily on the first
``run_trials`` call to keep plain library imports fast.

Stream files come in two shapes.  Text: a header line ``d=<dim>`` followed
by one 1-based coordinate per line.  Binary: raw little-endian uint32
coordinates with no header, so the dimension must come from elsewhere.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .counter import CounterConfig, Trigger
from .errors import InvalidParam, StreamFileError
from .randomness import RandomSource

__all__ = [
    "AdversarialStream",
    "CategoricalStream",
    "ExperimentSpec",
    "FileStream",
    "TrialStats",
    "generate_stream",
    "read_stream_file",
    "run_trials",
    "true_counts",
    "write_stream_file",
]

ALGOS = ("veccount", "dmorris", "naive")


@dataclass(frozen=True)
class CategoricalStream:
    """``length`` i.i.d. draws over [1, dim] with the given probabilities."""

    dim: int
    probs: tuple[float, ...]
    length: int

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidParam(f"dimension must be at least 1, got {self.dim}")
        if len(self.probs) != self.dim:
            raise InvalidParam(f"{len(self.probs)} probabilities for dimension {self.dim}")
        if any(p < 0.0 for p in self.probs):
            raise InvalidParam("probabilities must be nonnegative")
        total = math.fsum(self.probs)
        if abs(total - 1.0) > 1e-12:
            raise InvalidParam(f"probabilities sum to {total!r}, not 1")
        if self.length < 1:
            raise InvalidParam(f"stream length must be at least 1, got {self.length}")


@dataclass(frozen=True)
class AdversarialStream:
    """The stream that breaks fixed-width shared-scale counters.

    Coordinate 1 is hit round(2**spread) * accuracy times, then coordinates
    2..dim once each.  The burst drives the shared scale high enough that
    the trailing singletons are essentially never recorded.
    """

    dim: int
    spread: float
    accuracy: int

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidParam(f"dimension must be at least 1, got {self.dim}")
        if self.accuracy < 1:
            raise InvalidParam(f"accuracy must be at least 1, got {self.accuracy}")
        if self.hot_count < 1:
            raise InvalidParam(f"spread {self.spread} leaves coordinate 1 with no increments")

    @property
    def hot_count(self) -> int:
        return round(2.0**self.spread) * self.accuracy

    @property
    def length(self) -> int:
        return self.hot_count + self.dim - 1


@dataclass(frozen=True)
class FileStream:
    """A stream read verbatim from a file (see module docstring for formats)."""

    path: str
    binary: bool = False
    dim: int | None = None  # required for binary files, cross-checked for text


def generate_stream(source, seed: int) -> np.ndarray:
    """Materialize a stream source as an int64 array of 1-based coordinates.

    Only categorical sources consume the seed; the other two are already
    fully determined.
    """
    if isinstance(source, CategoricalStream):
        cum = np.cumsum(np.asarray(source.probs, dtype=np.float64))
        cum[-1] = 1.0
        rng = RandomSource(seed)
        u = np.empty(source.length, dtype=np.float64)
        for i in range(source.length):
            # 53-bit uniform in [0, 1), so the right edge is never hit
            u[i] = (rng.next_u64() >> 11) * 2.0**-53
        return np.searchsorted(cum, u, side="right").astype(np.int64) + 1
    if isinstance(source, AdversarialStream):
        head = np.full(source.hot_count, 1, dtype=np.int64)
        tail = np.arange(2, source.dim + 1, dtype=np.int64)
        return np.concatenate([head, tail])
    if isinstance(source, FileStream):
        _, stream = read_stream_file(source.path, binary=source.binary, dim=source.dim)
        return stream
    raise InvalidParam(f"unknown stream source {source!r}")


def true_counts(stream: np.ndarray, dim: int) -> np.ndarray:
    """Exact tally vector of a 1-based coordinate stream."""
    counts = np.bincount(stream, minlength=dim + 1)
    if counts.size > dim + 1:
        raise InvalidParam(f"stream contains coordinates beyond dimension {dim}")
    return counts[1:].astype(np.int64)


def read_stream_file(path: str, binary: bool = False, dim: int | None = None):
    """Load a stream file, returning ``(dim, int64 coordinate array)``."""
    try:
        if binary:
            if dim is None:
                raise StreamFileError(f"{path}: binary streams need an explicit dimension")
            with open(path, "rb") as fh:
                raw = fh.read()
            if len(raw) % 4:
                raise StreamFileError(f"{path}: length {len(raw)} is not a multiple of 4 bytes")
            stream = np.frombuffer(raw, dtype="<u4").astype(np.int64)
            bad = np.flatnonzero((stream < 1) | (stream > dim))
            if bad.size:
                i = int(bad[0])
                raise StreamFileError(
                    f"{path}: entry {i} is coordinate {int(stream[i])}, outside [1, {dim}]"
                )
            return dim, stream
        with open(path, "r", encoding="ascii") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise StreamFileError(f"{path}: {exc.strerror or exc}") from None
    if not lines or not lines[0].startswith("d="):
        raise StreamFileError(f"{path}:1: expected a 'd=<dim>' header line")
    try:
        header_dim = int(lines[0][2:])
    except ValueError:
        raise StreamFileError(f"{path}:1: bad dimension {lines[0][2:]!r}") from None
    if header_dim < 1:
        raise StreamFileError(f"{path}:1: dimension must be at least 1, got {header_dim}")
    if dim is not None and dim != header_dim:
        raise StreamFileError(f"{path}: header says d={header_dim}, caller expected d={dim}")
    values = []
    for lineno, line in enumerate(lines[1:], start=2):
        text = line.strip()
        if not text:
            continue
        try:
            j = int(text)
        except ValueError:
            raise StreamFileError(f"{path}:{lineno}: not a coordinate: {text!r}") from None
        if not 1 <= j <= header_dim:
            raise StreamFileError(
                f"{path}:{lineno}: coordinate {j} outside [1, {header_dim}]"
            )
        values.append(j)
    return header_dim, np.asarray(values, dtype=np.int64)


def write_stream_file(path: str, dim: int, stream, binary: bool = False) -> None:
    """Write a coordinate stream in the text or binary file format."""
    arr = np.asarray(stream, dtype=np.int64)
    if arr.size and (arr.min() < 1 or arr.max() > dim):
        raise InvalidParam(f"stream coordinates must lie in [1, {dim}]")
    if binary:
        with open(path, "wb") as fh:
            fh.write(arr.astype("<u4").tobytes())
        return
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"d={dim}\n")
        for j in arr:
            fh.write(f"{int(j)}\n")


@dataclass(frozen=True)
class ExperimentSpec:
    """One reproducible experiment: an algorithm, a stream, seeds, trials."""

    algo: str
    stream_limit: int
    dim: int
    rel_error: float
    trials: int
    base_seed: int
    source: CategoricalStream | AdversarialStream | FileStream
    trigger: Trigger = Trigger.STRICT
    naive_cap: int | None = None
    threads: int | None = None

    def __post_init__(self):
        if self.algo not in ALGOS:
            raise InvalidParam(f"algo must be one of {ALGOS}, got {self.algo!r}")
        if self.trials < 1:
            raise InvalidParam(f"trial count must be at least 1, got {self.trials}")
        if self.algo == "naive":
            if self.naive_cap is None or self.naive_cap < 1:
                raise InvalidParam("the naive counter needs a per-entry cap of at least 1")
        elif self.naive_cap is not None:
            raise InvalidParam(f"naive_cap does not apply to algo {self.algo!r}")
        if self.threads is not None and self.threads < 1:
            raise InvalidParam(f"thread count must be at least 1, got {self.threads}")
        src_dim = getattr(self.source, "dim", None)
        if src_dim is not None and src_dim != self.dim:
            raise InvalidParam(f"source dimension {src_dim} != experiment dimension {self.dim}")


@dataclass(frozen=True)
class TrialStats:
    """Summary of one experiment.

    ``mse`` is the mean squared Euclidean error E|est - x|^2 over trials and
    ``relative_mse`` divides it by |x|^2.  Standard errors are over trials.
    ``u_histogram`` counts final scale values (for the Morris baseline, the
    largest per-coordinate index).  Failed trials contribute zero estimates
    and sit at the scale cap in the histogram.
    """

    trials: int
    x: tuple[int, ...]
    mean_estimate: tuple[float, ...]
    mean_estimate_stderr: tuple[float, ...]
    mse: float
    mse_stderr: float
    relative_mse: float
    relative_mse_stderr: float
    fail_count: int
    u_histogram: dict[int, int] = field(compare=False)


def _thread_count(spec: ExperimentSpec) -> int:
    if spec.threads is not None:
        return spec.threads
    env = os.environ.get("VECCOUNT_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise InvalidParam(f"VECCOUNT_THREADS={env!r} is not an integer") from None
        if n < 1:
            raise InvalidParam(f"VECCOUNT_THREADS must be at least 1, got {n}")
        return n
    return min(os.cpu_count() or 1, 8)


def _run_ranges(fn, trials: int, threads: int) -> None:
    """Run ``fn(t0, t1)`` over a partition of range(trials)."""
    workers = min(threads, trials)
    if workers <= 1:
        fn(0, trials)
        return
    bounds = [trials * k // workers for k in range(workers + 1)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(fn, a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a
        ]
        for future in futures:
            future.result()


def run_trials(spec: ExperimentSpec) -> TrialStats:
    """Run the experiment and summarize it.  Deterministic given the spec."""
    from . import _kernels  # deferred: numba import and compilation are slow

    stream = generate_stream(spec.source, spec.base_seed)
    if stream.size < 1:
        raise InvalidParam("experiment stream is empty")
    if stream.size > spec.stream_limit:
        raise InvalidParam(
            f"stream has {stream.size} increments, limit is {spec.stream_limit}"
        )
    x = true_counts(stream, spec.dim)
    trials, dim = spec.trials, spec.dim
    threads = _thread_count(spec)
    seed = np.uint64(spec.base_seed & ((1 << 64) - 1))
    fail_count = 0

    if spec.algo == "veccount":
        config = CounterConfig.derive(spec.stream_limit, dim, spec.rel_error, spec.trigger)
        if config.deterministic:
            estimates = np.tile(x.astype(np.float64), (trials, 1))
            u_values = np.zeros(trials, dtype=np.int64)
        else:
            out_scale = np.zeros(trials, dtype=np.int64)
            out_mant = np.zeros((trials, dim), dtype=np.int64)
            out_failed = np.zeros(trials, dtype=np.bool_)
            inclusive = config.trigger is Trigger.INCLUSIVE
            _run_ranges(
                lambda t0, t1: _kernels.run_veccount_trials(
                    stream, dim, config.symbol_budget, config.scale_cap, inclusive,
                    seed, t0, t1, out_scale, out_mant, out_failed,
                ),
                trials, threads,
            )
            estimates = np.ldexp(out_mant.astype(np.float64), out_scale[:, None])
            estimates[out_failed] = 0.0
            u_values = out_scale
            fail_count = int(out_failed.sum())
    elif spec.algo == "dmorris":
        if not 0.0 < spec.rel_error:
            raise InvalidParam(f"relative error target must be positive, got {spec.rel_error}")
        accuracy = math.ceil(2.0 / (spec.rel_error * spec.rel_error))
        out_index = np.zeros((trials, dim), dtype=np.int64)
        _run_ranges(
            lambda t0, t1: _kernels.run_dmorris_trials(
                stream, dim, accuracy, seed, t0, t1, out_index
            ),
            trials, threads,
        )
        estimates = accuracy * ((1.0 + 1.0 / accuracy) ** out_index.astype(np.float64) - 1.0)
        u_values = out_index.max(axis=1)
    else:
        out_scale = np.zeros(trials, dtype=np.int64)
        out_mant = np.zeros((trials, dim), dtype=np.int64)
        _run_ranges(
            lambda t0, t1: _kernels.run_naive_trials(
                stream, dim, spec.naive_cap, seed, t0, t1, out_scale, out_mant
            ),
            trials, threads,
        )
        estimates = np.ldexp(out_mant.astype(np.float64), out_scale[:, None])
        u_values = out_scale

    errors = estimates - x.astype(np.float64)
    squared = np.einsum("ij,ij->i", errors, errors)
    mse = float(squared.mean())
    norm2 = float(np.dot(x.astype(np.float64), x.astype(np.float64)))
    if trials > 1:
        mse_stderr = float(squared.std(ddof=1) / math.sqrt(trials))
        mean_stderr = estimates.std(axis=0, ddof=1) / math.sqrt(trials)
    else:
        mse_stderr = 0.0
        mean_stderr = np.zeros(dim)
    values, counts = np.unique(u_values, return_counts=True)
    return TrialStats(
        trials=trials,
        x=tuple(int(v) for v in x),
        mean_estimate=tuple(float(v) for v in estimates.mean(axis=0)),
        mean_estimate_stderr=tuple(float(v) for v in mean_stderr),
        mse=mse,
        mse_stderr=mse_stderr,
        relative_mse=mse / norm2,
        relative_mse_stderr=mse_stderr / norm2,
        fail_count=fail_count,
        u_histogram={int(v): int(c) for v, c in zip(values, counts)},
    )
