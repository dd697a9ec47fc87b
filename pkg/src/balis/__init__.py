"""Balanced independent sets in dense random bipartite graphs.

Seeded graph sampling, the two-stage online greedy, exact small-n oracles,
log-space moment formulas, and correlated-family experiments, with a CLI
harness for reproducible Monte Carlo sweeps.
"""

from .errors import ConfigError, GraphFormatError, GuardError, UnrevealedPairError
from .graph import BalancedSet, BipartiteGraph, generate_graph, load_graph, save_graph
from .greedy import Decision, GreedyConfig, TwoStageGreedy, stage_one_decision, stage_two_decision, two_stage
from .moments import (
    MomentReport,
    build_moment_report,
    first_moment_crossing,
    log_first_moment,
    overlap_exponent,
    second_moment_ratio,
)
from .ogp import (
    CorrelatedFamily,
    ForbiddenTupleQuery,
    SuccessEstimate,
    build_family,
    count_forbidden_tuples,
    estimate_success_probability,
    overlap_histogram,
    overlap_profile,
    threshold_stopping_time,
)
from .oracle import (
    OracleResult,
    common_non_neighbors,
    count_balanced_independent_sets,
    enumerate_balanced_independent_sets,
    exists_balanced_independent_set,
    max_balanced_independent_set,
)
from .params import Params, Thresholds, compute_thresholds, is_gamma_balanced
from .runtime import (
    ArrivalPolicy,
    LedgerView,
    RevealedLedger,
    RunTrace,
    arrival_order,
    ledger_at,
    next_arrival,
    run_online,
)
from .seeds import Seed, derive_subseed

__version__ = "0.1.0"
