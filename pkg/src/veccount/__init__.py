"""Approximate d-dimensional counting with a shared scale counter.

The package keeps an integer vector x under increments while storing only a
single scale counter and a short, variable-length coded relative vector.
Queries return an unbiased estimate whose Euclidean relative error is
controlled: E|est - x|^2 <= sigma^2 |x|^2 for the configured sigma.

Modules:

* ``varint``     three-symbol self-delimiting integer codes
* ``randomness`` seedable bit-level randomness (xoshiro256**)
* ``counter``    the shared-scale vector counter itself
* ``baselines``  Morris counters, d independent Morris counters, and the
                 fixed-width shared-scale counter they improve on
* ``analysis``   covering checks, reachable-state enumeration, lower bounds
* ``harness``    seeded Monte Carlo experiment driver
* ``cli``        command line front end (``veccount ...``)
"""

from .analysis import (
    CoverReport,
    countmin_epsilon_requirement,
    reachable_estimates,
    shell_cover_lower_bound,
    state_space_lower_bound,
    verify_cover,
)
from .baselines import (
    DMorrisCounter,
    MorrisCounter,
    NaiveSharedCounter,
    d_morris_space_bits,
    morris_space_bits,
)
from .counter import CounterConfig, SpaceBudget, Trigger, VectorCounter, space_bits
from .errors import (
    ArityMismatch,
    BadCoordinate,
    BudgetExceeded,
    CorruptState,
    EmptyR,
    InvalidParam,
    MalformedCode,
    StreamFileError,
    StreamOverflow,
    VeccountError,
)
from .harness import (
    AdversarialStream,
    CategoricalStream,
    ExperimentSpec,
    FileStream,
    TrialStats,
    generate_stream,
    read_stream_file,
    run_trials,
    true_counts,
    write_stream_file,
)
from .randomness import RandomSource

__version__ = "0.1.0"

__all__ = [
    "AdversarialStream",
    "ArityMismatch",
    "BadCoordinate",
    "BudgetExceeded",
    "CategoricalStream",
    "CorruptState",
    "CounterConfig",
    "CoverReport",
    "DMorrisCounter",
    "EmptyR",
    "ExperimentSpec",
    "FileStream",
    "InvalidParam",
    "MalformedCode",
    "MorrisCounter",
    "NaiveSharedCounter",
    "RandomSource",
    "SpaceBudget",
    "StreamFileError",
    "StreamOverflow",
    "TrialStats",
    "Trigger",
    "VeccountError",
    "VectorCounter",
    "countmin_epsilon_requirement",
    "d_morris_space_bits",
    "generate_stream",
    "morris_space_bits",
    "reachable_estimates",
    "read_stream_file",
    "run_trials",
    "shell_cover_lower_bound",
    "space_bits",
    "state_space_lower_bound",
    "true_counts",
    "verify_cover",
    "write_stream_file",
]
