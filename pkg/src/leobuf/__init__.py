"""Buffer-overflow analysis for LEO satellites with and without inter-satellite links.

Three buffer regimes are modeled: independent satellites (no ISL), one ideal
pooled virtual queue, and MQLA-ISL min-max packet reallocation. The
effective-bandwidth layer predicts their tail exponents; the simulator and the
exact single-satellite solver measure them.
"""

from .allocation import (
    AllocationDecision,
    PolicyKind,
    allocation_objective,
    expected_next_load,
    integerize,
    mqla_allocate,
)
from .config import parse_config, serialize_config
from .effbw import (
    QosSolution,
    lmgf_arrival,
    lmgf_departure,
    overflow_bound,
    required_buffer,
    solve_qos_exponent,
    virtual_queue_exponent,
)
from .errors import (
    ConfigError,
    DegenerateChainError,
    InstabilityError,
    NoBracketError,
    SumMismatchError,
    ThresholdMismatchError,
    TruncationWarning,
    UntrackedThresholdError,
)
from .experiments import ExperimentKind, ExperimentSpec, run_experiment
from .oracle import (
    TruncatedChainSpec,
    brute_force_allocation,
    oracle_overflow,
    single_leo_stationary,
)
from .sim import (
    ConstellationConfig,
    MeasureEpoch,
    OverflowStats,
    QueueStateVector,
    estimate_overflow,
    estimate_overflow_replicated,
    merge_stats,
    replication_runs,
    run_replications,
    run_simulation,
)
from .stochastic import (
    ChannelState,
    GilbertElliottParams,
    PoissonArrivalParams,
    sample_arrivals,
    stability_margin,
    stationary_distribution,
    step_channel,
)

__version__ = "0.1.0"
