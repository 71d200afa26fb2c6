"""Command line front end.

Subcommands:

* ``run``         feed a stream file through one counter, print the estimate
* ``trace``       step-by-step state log of a small counter on a random stream
* ``experiment``  seeded Monte Carlo trials, summary statistics as TSV
* ``bounds``      state-count lower bound vs implementation bits as TSV
* ``cover``       exhaustive check that reachable estimates cover a norm shell

Everything on stdout is machine readable (space-separated vectors or
tab-separated tables); human prose goes to stderr.  Exit codes: 0 on
success, 2 for stream file problems, 3 for bad parameters.  All commands
are deterministic given their arguments.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .analysis import reachable_estimates, state_space_lower_bound, verify_cover
from .baselines import DMorrisCounter, NaiveSharedCounter
from .counter import CounterConfig, Trigger, VectorCounter, space_bits
from .errors import (
    ArityMismatch,
    BadCoordinate,
    BudgetExceeded,
    InvalidParam,
    MalformedCode,
    StreamFileError,
    StreamOverflow,
)
from .harness import (
    AdversarialStream,
    CategoricalStream,
    ExperimentSpec,
    generate_stream,
    read_stream_file,
    run_trials,
)
from .varint import encode_vec

__all__ = ["main", "console_entry"]

_TRIGGERS = {"strict": Trigger.STRICT, "inclusive": Trigger.INCLUSIVE}


class _Parser(argparse.ArgumentParser):
    """argparse, but usage errors exit 3 instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(3, f"{self.prog}: error: {message}\n")


def _parse_dist(text: str) -> tuple[float, ...]:
    try:
        weights = [float(part) for part in text.split(",")]
    except ValueError:
        raise InvalidParam(f"bad distribution {text!r}") from None
    if not weights or any(w < 0 for w in weights):
        raise InvalidParam(f"distribution weights must be nonnegative: {text!r}")
    total = math.fsum(weights)
    if total <= 0:
        raise InvalidParam("distribution weights sum to zero")
    return tuple(w / total for w in weights)


def _print_vector(values) -> None:
    print(" ".join(str(v) for v in values))


# --- run -----------------------------------------------------------------


def cmd_run(args) -> int:
    if args.algo != "veccount" and args.state_out:
        raise InvalidParam("--state-out only applies to the veccount algorithm")
    if args.algo == "naive" and args.a_naive is None:
        raise InvalidParam("the naive algorithm needs --a-naive")
    dim, stream = read_stream_file(args.stream, binary=args.binary, dim=args.d)
    if stream.size > args.n:
        raise StreamFileError(
            f"{args.stream}: {stream.size} increments exceed the configured limit {args.n}"
        )
    trigger = _TRIGGERS[args.trigger]
    if args.algo == "veccount":
        counter = VectorCounter.create(args.n, dim, args.sigma, args.seed, trigger)
    elif args.algo == "dmorris":
        if not 0.0 < args.sigma:
            raise InvalidParam(f"sigma must be positive, got {args.sigma}")
        counter = DMorrisCounter(dim, math.ceil(2.0 / args.sigma**2), args.seed)
    else:
        counter = NaiveSharedCounter(dim, args.a_naive, args.seed)
    for j in stream:
        counter.increment(int(j))
    _print_vector(counter.query())
    if args.state_out:
        with open(args.state_out, "wb") as fh:
            fh.write(counter.serialize())
    return 0


# --- trace ---------------------------------------------------------------


def cmd_trace(args) -> int:
    probs = _parse_dist(args.dist)
    if len(probs) != args.d:
        raise InvalidParam(f"{len(probs)} weights for dimension {args.d}")
    config = CounterConfig(
        stream_limit=args.steps,
        dim=args.d,
        rel_error=0.0,
        accuracy=1,
        symbol_budget=args.mstar,
        scale_cap=64,
        trigger=Trigger.INCLUSIVE,
        deterministic=False,
    )
    stream = generate_stream(
        CategoricalStream(args.d, probs, args.steps), seed=args.seed
    )
    counter = VectorCounter(config, seed=args.seed + 1)
    truth = [0] * args.d

    def row() -> str:
        mant = counter.mantissa
        return " | ".join(
            (
                str(counter.scale),
                " ".join(str(v) for v in mant),
                " ".join(str(v) for v in counter.query()),
                " ".join(str(v) for v in truth),
                encode_vec(mant),
            )
        )

    print("U | V | estimate | x | encoded", file=sys.stderr)
    print(row())
    for j in stream:
        before = (counter.scale, counter.mantissa)
        counter.increment(int(j))
        truth[int(j) - 1] += 1
        if (counter.scale, counter.mantissa) != before:
            print(row())
    return 0


# --- experiment ----------------------------------------------------------

_SPEC_KEYS = (
    "algo", "n", "d", "sigma", "trials", "seed",
    "dist", "adversarial", "a_naive", "trigger", "threads",
)


def _read_spec_file(path: str) -> dict:
    values = {}
    try:
        with open(path, "r", encoding="ascii") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise InvalidParam(f"{path}: {exc.strerror or exc}") from None
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        key, sep, value = text.partition("=")
        key = key.strip()
        if not sep or key not in _SPEC_KEYS:
            raise InvalidParam(f"{path}:{lineno}: expected '<key>=<value>' with key in {_SPEC_KEYS}")
        values[key] = value.strip()
    return values


def _build_experiment(args) -> ExperimentSpec:
    raw = _read_spec_file(args.spec) if args.spec else {}
    # command line flags override spec file entries
    def pick(key, flag, cast):
        if flag is not None:
            return flag
        if key in raw:
            try:
                return cast(raw[key])
            except ValueError:
                raise InvalidParam(f"bad value for {key}: {raw[key]!r}") from None
        return None

    algo = pick("algo", args.algo, str) or "veccount"
    n = pick("n", args.n, int)
    d = pick("d", args.d, int)
    sigma = pick("sigma", args.sigma, float)
    trials = pick("trials", args.trials, int)
    seed = pick("seed", args.seed, int)
    dist = pick("dist", args.dist, str)
    adversarial = pick("adversarial", args.adversarial, str)
    a_naive = pick("a_naive", args.a_naive, int)
    trigger = pick("trigger", args.trigger, str) or "strict"
    threads = pick("threads", args.threads, int)
    for name, value in (("--n", n), ("--d", d), ("--trials", trials), ("--seed", seed)):
        if value is None:
            raise InvalidParam(f"{name} is required (flag or spec file)")
    if algo != "naive" and sigma is None:
        raise InvalidParam("--sigma is required (flag or spec file)")
    if algo not in ("veccount", "dmorris", "naive"):
        raise InvalidParam(f"unknown algorithm {algo!r}")
    if trigger not in _TRIGGERS:
        raise InvalidParam(f"trigger must be strict or inclusive, got {trigger!r}")
    if dist is not None and adversarial is not None:
        raise InvalidParam("--dist and --adversarial are mutually exclusive")
    if adversarial is not None:
        parts = adversarial.split(",")
        if len(parts) != 2:
            raise InvalidParam(f"expected --adversarial <spread>,<accuracy>, got {adversarial!r}")
        try:
            source = AdversarialStream(d, float(parts[0]), int(parts[1]))
        except ValueError:
            raise InvalidParam(f"bad --adversarial value {adversarial!r}") from None
    else:
        probs = _parse_dist(dist) if dist is not None else tuple([1.0 / d] * d)
        if len(probs) != d:
            raise InvalidParam(f"{len(probs)} weights for dimension {d}")
        source = CategoricalStream(d, probs, n)
    return ExperimentSpec(
        algo=algo,
        stream_limit=n,
        dim=d,
        rel_error=0.0 if sigma is None else sigma,
        trials=trials,
        base_seed=seed,
        source=source,
        trigger=_TRIGGERS[trigger],
        naive_cap=a_naive,
        threads=threads,
    )


def cmd_experiment(args) -> int:
    stats = run_trials(_build_experiment(args))
    hist = " ".join(f"{u}:{c}" for u, c in sorted(stats.u_histogram.items()))
    rows = (
        ("trials", str(stats.trials)),
        ("x", " ".join(str(v) for v in stats.x)),
        ("mean_estimate", " ".join(repr(v) for v in stats.mean_estimate)),
        ("mean_estimate_stderr", " ".join(repr(v) for v in stats.mean_estimate_stderr)),
        ("mse", repr(stats.mse)),
        ("mse_stderr", repr(stats.mse_stderr)),
        ("relative_mse", repr(stats.relative_mse)),
        ("relative_mse_stderr", repr(stats.relative_mse_stderr)),
        ("fail_count", str(stats.fail_count)),
        ("u_histogram", hist),
    )
    for key, value in rows:
        print(f"{key}\t{value}")
    return 0


# --- bounds --------------------------------------------------------------


def _parse_list(text: str, cast, flag: str) -> list:
    try:
        return [cast(part) for part in text.split(",")]
    except ValueError:
        raise InvalidParam(f"bad {flag} list {text!r}") from None


def cmd_bounds(args) -> int:
    ns = _parse_list(args.n, int, "--n")
    ds = _parse_list(args.d, int, "--d")
    sigmas = _parse_list(args.sigma, float, "--sigma")
    print("n\td\tsigma\tlower_bits\timpl_bits\tratio")
    for n in ns:
        for d in ds:
            for sigma in sigmas:
                _, lower_bits = state_space_lower_bound(n, d, sigma)
                impl_bits = space_bits(CounterConfig.derive(n, d, sigma)).total
                print(
                    f"{n}\t{d}\t{sigma!r}\t{lower_bits!r}\t{impl_bits}\t"
                    f"{lower_bits / impl_bits!r}"
                )
    return 0


# --- cover ---------------------------------------------------------------


def _shell_targets(dim: int, lo: float, hi: float, budget: int = 50_000_000) -> np.ndarray:
    """Nonnegative integer points with Euclidean norm in [lo, hi]."""
    hi_sq = hi * hi
    lo_sq = lo * lo
    points = []
    coords = [0] * dim

    def walk(pos: int, norm_sq: int) -> None:
        if pos == dim:
            if norm_sq >= lo_sq:
                points.append(tuple(coords))
                if len(points) > budget:
                    raise InvalidParam("target shell holds too many lattice points")
            return
        limit = int(math.isqrt(int(hi_sq - norm_sq)))
        for v in range(limit + 1):
            coords[pos] = v
            walk(pos + 1, norm_sq + v * v)

    walk(0, 0)
    return np.asarray(points, dtype=np.int64)


def cmd_cover(args) -> int:
    config = CounterConfig.derive(args.max_increments, args.d, args.sigma)
    lo = math.sqrt(args.d) / args.sigma
    hi = args.max_increments / math.sqrt(args.d)
    if lo > hi:  # checked before the (possibly expensive) state enumeration
        raise InvalidParam(
            f"empty target shell: sqrt(d)/sigma = {lo:.3f} exceeds "
            f"max_increments/sqrt(d) = {hi:.3f}"
        )
    estimates = reachable_estimates(config, args.max_increments)
    targets = _shell_targets(args.d, lo, hi)
    level = 4.0 * args.sigma
    report = verify_cover(
        np.asarray(sorted(estimates), dtype=np.float64), targets, level
    )
    rows = (
        ("covered", "true" if report.covered else "false"),
        ("level", repr(report.level)),
        ("worst_ratio", repr(report.worst_ratio)),
        ("worst_point", " ".join(str(v) for v in report.worst_point)),
        ("num_estimates", str(report.num_estimates)),
        ("num_targets", str(report.num_targets)),
    )
    for key, value in rows:
        print(f"{key}\t{value}")
    return 0


# --- wiring --------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="veccount", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="feed a stream file through one counter")
    p.add_argument("--stream", required=True, help="stream file path")
    p.add_argument("--n", required=True, type=int, help="configured stream limit")
    p.add_argument("--d", required=True, type=int, help="dimension")
    p.add_argument("--sigma", required=True, type=float, help="relative error target")
    p.add_argument("--seed", required=True, type=int, help="randomness seed")
    p.add_argument("--algo", choices=("veccount", "dmorris", "naive"), default="veccount")
    p.add_argument("--a-naive", type=int, help="per-entry cap for the naive counter")
    p.add_argument("--binary", action="store_true", help="stream file is raw uint32")
    p.add_argument("--trigger", choices=tuple(_TRIGGERS), default="strict")
    p.add_argument("--state-out", help="write a binary counter snapshot here")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("trace", help="log every state change of a small counter")
    p.add_argument("--d", required=True, type=int)
    p.add_argument("--mstar", required=True, type=int, help="symbol budget")
    p.add_argument("--dist", required=True, help="comma separated coordinate weights")
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--steps", required=True, type=int, help="number of increments")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("experiment", help="Monte Carlo trials, stats as TSV")
    p.add_argument("--spec", help="key=value file; flags override it")
    p.add_argument("--algo", choices=("veccount", "dmorris", "naive"))
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--dist", help="comma separated coordinate weights")
    p.add_argument("--adversarial", help="<spread>,<accuracy> burst stream")
    p.add_argument("--a-naive", dest="a_naive", type=int)
    p.add_argument("--trigger", choices=tuple(_TRIGGERS))
    p.add_argument("--threads", type=int)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("bounds", help="lower bound vs implementation bits")
    p.add_argument("--n", required=True, help="comma separated stream limits")
    p.add_argument("--d", required=True, help="comma separated dimensions")
    p.add_argument("--sigma", required=True, help="comma separated error targets")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("cover", help="check estimate coverage of a norm shell")
    p.add_argument("--d", required=True, type=int)
    p.add_argument("--sigma", required=True, type=float)
    p.add_argument("--max-increments", required=True, type=int)
    p.set_defaults(func=cmd_cover)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:  # argparse help/usage paths
        code = exc.code
        return code if isinstance(code, int) else 0 if code is None else 3
    except (StreamFileError, MalformedCode, ArityMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (InvalidParam, BadCoordinate, BudgetExceeded, StreamOverflow) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def console_entry() -> None:
    raise SystemExit(main())
