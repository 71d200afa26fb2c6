"""Covering checks, reachable-state enumeration, and space lower bounds.

A counter with multiplicative error sigma can only answer queries from
the (finite) set of estimates its states can produce, so that estimate
set must form a multiplicative covering of every count vector the counter
handles.  This module makes that argument executable in both directions:

* ``reachable_estimates`` enumerates every (scale, mantissa) state the
  counter can reach within a given number of increments, across all
  random outcomes, and collects the estimate vectors.
* ``verify_cover`` brute-force checks that a candidate set R covers a
  target set A at level sigma: max over x in A of min over y in R of
  |x - y| / |x| must stay below sigma.
* ``shell_cover_lower_bound`` and ``state_space_lower_bound`` evaluate
  the matching counting bounds: any sigma-covering of the norm shell
  alpha <= |x| <= beta needs at least (1/3) 2^-d sigma^-d ln(beta/(e alpha))
  points, so any correct counter needs at least
  (1/3) 2^-d (4 sigma)^-d ln(n / (e sigma^-1 d)) states.  Both bounds use
  the natural logarithm and clamp at their trivial values (0 points, 1
  state) when the shell or stream is too small to force anything.
* ``countmin_epsilon_requirement`` states what a Count-Min sketch would
  need for the same guarantee: its per-coordinate additive error
  eps * n turns into a d^2 eps^2 |x|^2 Euclidean bound, so eps must be
  sigma / d, i.e. the sketch pays a factor d where this counter does not.

Everything here is exact, deterministic, and single-threaded; the
enumeration carries a node budget and reports partial results through
``BudgetExceeded`` when a configuration is too rich to exhaust.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .counter import CounterConfig, Trigger
from .errors import BudgetExceeded, EmptyR, InvalidParam
from .varint import code_len_vec

__all__ = [
    "CoverReport",
    "verify_cover",
    "reachable_estimates",
    "shell_cover_lower_bound",
    "state_space_lower_bound",
    "countmin_epsilon_requirement",
]


@dataclass(frozen=True)
class CoverReport:
    """Outcome of a brute-force covering check."""

    covered: bool
    worst_ratio: float
    worst_point: tuple[float, ...]
    level: float
    num_estimates: int
    num_targets: int


def verify_cover(
    estimates: Iterable[Sequence[float]],
    targets: Iterable[Sequence[float]],
    level: float,
) -> CoverReport:
    """Check that ``estimates`` is a ``level``-multiplicative cover of ``targets``.

    Exact brute force: every target is compared against every estimate.
    Targets must be nonzero vectors; the estimate set must be nonempty.
    """
    r = np.asarray(list(estimates), dtype=np.float64)
    a = np.asarray(list(targets), dtype=np.float64)
    if r.size == 0:
        raise EmptyR("estimate set is empty")
    if a.size == 0:
        raise InvalidParam("target set is empty")
    if r.ndim == 1:
        r = r[:, None]
    if a.ndim == 1:
        a = a[:, None]
    if r.shape[1] != a.shape[1]:
        raise InvalidParam(f"dimension mismatch: estimates {r.shape[1]}, targets {a.shape[1]}")
    norms = np.sqrt(np.einsum("ij,ij->i", a, a))
    if not np.all(norms > 0):
        raise InvalidParam("targets must all be nonzero")

    r_sq = np.einsum("ij,ij->i", r, r)
    worst_ratio = -1.0
    worst_idx = 0
    # chunk the targets so the pairwise distance block stays small
    chunk = max(1, int(2**24 // max(1, r.shape[0])))
    for start in range(0, a.shape[0], chunk):
        block = a[start : start + chunk]
        block_sq = np.einsum("ij,ij->i", block, block)
        d_sq = block_sq[:, None] + r_sq[None, :] - 2.0 * (block @ r.T)
        np.maximum(d_sq, 0.0, out=d_sq)
        nearest = np.sqrt(d_sq.min(axis=1)) / norms[start : start + chunk]
        pos = int(np.argmax(nearest))
        if nearest[pos] > worst_ratio:
            worst_ratio = float(nearest[pos])
            worst_idx = start + pos
    return CoverReport(
        covered=bool(worst_ratio < level),
        worst_ratio=worst_ratio,
        worst_point=tuple(float(v) for v in a[worst_idx]),
        level=float(level),
        num_estimates=int(r.shape[0]),
        num_targets=int(a.shape[0]),
    )


def _scale_up_outcomes(grown: tuple[int, ...]) -> list[tuple[int, ...]]:
    """All mantissa vectors one scale-up can produce from ``grown``."""
    odd = [k for k, v in enumerate(grown) if v & 1]
    floor_half = [v >> 1 for v in grown]
    outcomes = []
    for rounded_up in itertools.product((0, 1), repeat=len(odd)):
        halved = floor_half.copy()
        for pos, up in zip(odd, rounded_up):
            halved[pos] += up
        outcomes.append(tuple(halved))
    return outcomes


def reachable_estimates(
    config: CounterConfig,
    max_increments: int,
    node_budget: int = 10**7,
) -> set[tuple[int, ...]]:
    """Every estimate vector reachable within ``max_increments`` increments.

    Breadth-first search over (scale, mantissa) states, branching over both
    outcomes of every probabilistic update and every sign choice of every
    scale-up.  States are deduplicated, failed states are dropped, and the
    search raises BudgetExceeded (carrying the partial estimate set) if it
    visits more than ``node_budget`` states.
    """
    if max_increments < 0:
        raise InvalidParam(f"increment horizon must be nonnegative, got {max_increments}")
    if node_budget < 1:
        raise InvalidParam(f"node budget must be positive, got {node_budget}")
    if config.deterministic:
        raise InvalidParam("deterministic configurations have nothing to enumerate")

    depth = min(max_increments, config.stream_limit)
    budget = config.symbol_budget
    inclusive = config.trigger is Trigger.INCLUSIVE
    dim = config.dim

    start = (0, (0,) * dim)
    visited = {start}
    estimates = {start[1]}
    frontier = [start]
    for _ in range(depth):
        if not frontier:
            break
        next_frontier = []
        for scale, mantissa in frontier:
            for j in range(dim):
                grown = mantissa[:j] + (mantissa[j] + 1,) + mantissa[j + 1 :]
                symbols = code_len_vec(grown)
                fire = symbols >= budget if inclusive else symbols > budget
                if not fire:
                    successors = [(scale, grown)]
                elif scale + 1 >= config.scale_cap:
                    continue  # failed state: absorbing, excluded from estimates
                else:
                    successors = [(scale + 1, halved) for halved in _scale_up_outcomes(grown)]
                for state in successors:
                    if state in visited:
                        continue
                    visited.add(state)
                    if len(visited) > node_budget:
                        raise BudgetExceeded(
                            f"node budget {node_budget} exhausted", frozenset(estimates)
                        )
                    estimates.add(tuple(v << state[0] for v in state[1]))
                    next_frontier.append(state)
        frontier = next_frontier
    return estimates


def _pow_int(base: float, exponent: int) -> float:
    """base**exponent by squaring.

    Unlike libm pow, every step here commutes with power-of-two scaling of
    the base, so halving sigma scales the covering bound by exactly 2**d.
    """
    result = 1.0
    x = base
    e = exponent
    while e:
        if e & 1:
            result *= x
        x *= x
        e >>= 1
    return result


def shell_cover_lower_bound(alpha: float, beta: float, dim: int, sigma: float) -> float:
    """Minimum size of a sigma-multiplicative cover of the shell alpha <= |x| <= beta.

    (1/3) * 2**-d * sigma**-d * ln(beta / (e * alpha)), clamped below at 0.
    """
    if not 0 < alpha < beta:
        raise InvalidParam(f"need 0 < alpha < beta, got alpha={alpha}, beta={beta}")
    if dim < 1:
        raise InvalidParam(f"dimension must be at least 1, got {dim}")
    if not 0.0 < sigma < 1.0 / 3.0:
        raise InvalidParam(f"sigma must lie in (0, 1/3), got {sigma}")
    value = (1.0 / 3.0) * (math.log(beta / alpha) - 1.0) * _pow_int(1.0 / (2.0 * sigma), dim)
    return max(0.0, value)


def state_space_lower_bound(stream_limit: int, dim: int, sigma: float) -> tuple[float, float]:
    """Minimum number of states of any correct counter, and its log2.

    (1/3) * 2**-d * (4 sigma)**-d * ln(n / (e * sigma**-1 * d)), clamped
    below at one state (zero bits).  Returns (states, bits).
    """
    if dim < 1:
        raise InvalidParam(f"dimension must be at least 1, got {dim}")
    if not 0.0 < sigma < 1.0 / 3.0:
        raise InvalidParam(f"sigma must lie in (0, 1/3), got {sigma}")
    if stream_limit < 8:  # below e**2 the shell argument has no room
        raise InvalidParam(f"stream limit must be at least 8, got {stream_limit}")
    # ln(n / (e sigma^-1 d)) = ln(n) - 1 - ln(sigma^-1 d), safe for huge n
    log_term = math.log(stream_limit) - 1.0 - math.log(dim / sigma)
    if log_term <= 0.0:
        return 1.0, 0.0
    log2_states = (
        math.log2(1.0 / 3.0) - dim * math.log2(8.0 * sigma) + math.log2(log_term)
    )
    if log2_states <= 0.0:
        return 1.0, 0.0
    states = 2.0**log2_states if log2_states < 1024 else math.inf
    return states, log2_states


def countmin_epsilon_requirement(dim: int, sigma: float) -> float:
    """The additive-error parameter a Count-Min sketch would need: sigma / d."""
    if dim < 1:
        raise InvalidParam(f"dimension must be at least 1, got {dim}")
    if sigma <= 0:
        raise InvalidParam(f"sigma must be positive, got {sigma}")
    return sigma / dim
