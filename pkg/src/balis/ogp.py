"""Correlated graph families, stopping times, and overlap structure probes.

A correlated family pins everything an algorithm has revealed on a base
graph by some step T: every copy agrees with the base on all cross pairs
whose endpoints were both exposed, while all remaining pairs are resampled
independently per copy. Because the bundled algorithms are deterministic
given the revealed ledger and their seed, all copies replay the base run
exactly through step T.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from .errors import ConfigError, GuardError
from .graph import BalancedSet, BipartiteGraph, GraphProvenance, generate_graph
from .params import Params, is_gamma_balanced
from .runtime import ArrivalPolicy, RevealedLedger, RunTrace, ledger_at, run_online
from .oracle import enumerate_balanced_independent_sets
from .seeds import Seed, derive_subseed

MAX_FORBIDDEN_N = 8
MAX_FORBIDDEN_M = 2
MAX_HISTOGRAM_N = 20


@dataclass(frozen=True)
class CorrelatedFamily:
    base: BipartiteGraph
    T: int
    m: int
    ledger: RevealedLedger
    copies: tuple[BipartiteGraph, ...]


@dataclass(frozen=True)
class ForbiddenTupleQuery:
    """Side counts a forbidden tuple must exhibit inside the exposed set:
    ``a`` are the per-copy total sizes, ``beta`` the exposed count off the
    ``eta`` side."""

    a: tuple[int, ...]
    beta: int
    eta: str

    def __post_init__(self) -> None:
        if self.eta not in ("L", "R"):
            raise ConfigError(f"eta must be 'L' or 'R', got {self.eta!r}")
        if self.beta < 0:
            raise ConfigError(f"beta must be nonnegative, got {self.beta}")
        if not self.a:
            raise ConfigError("a must list one target size per copy")

    def validate_membership(self, params: Params, alpha_comp: float) -> None:
        """Check a_i against the admissible window [(1+eps)*alpha_comp, 2n]."""
        lo = (1.0 + params.epsilon) * alpha_comp
        for a_i in self.a:
            if not lo <= a_i <= 2 * params.n:
                raise ConfigError(
                    f"a_i = {a_i} outside the admissible window [{lo}, {2 * params.n}]"
                )


@dataclass(frozen=True)
class SuccessEstimate:
    p_hat_s: float
    p_hat_e: float
    trials: int
    m: int
    k: int
    stderr_s: float
    stderr_e: float


def build_family(
    g: BipartiteGraph,
    algorithm,
    policy: ArrivalPolicy,
    params: Params,
    T: int,
    m: int,
    seed: Seed,
    *,
    run_seed: Seed | None = None,
    base_trace: RunTrace | None = None,
) -> CorrelatedFamily:
    """m graph copies sharing the base run's revealed ledger at step T.

    Copy 1 is the base graph itself. Copies 2..m keep the base status on
    every pair with both endpoints exposed by step T and resample everything
    else independently from the sub-seed ("copy", i).
    """
    n = g.n
    if not 1 <= T <= 2 * n:
        raise ConfigError(f"T must lie in [1, {2 * n}], got {T}")
    if m < 1:
        raise ConfigError(f"m must be >= 1, got {m}")
    if run_seed is None:
        run_seed = derive_subseed(seed, "run", 0)
    if base_trace is None:
        base_trace = run_online(g, algorithm, policy, params, run_seed)
    ledger = ledger_at(base_trace, g, T)

    copies: list[BipartiteGraph] = [g]
    if m > 1:
        base_words = g.words
        exposed_l = ledger.exposed_l_ids()
        mask_words = _mask_to_words(ledger.exposed_r, n)
        inv_mask = ~mask_words
        gen_params = Params(n, g.provenance.p if g.provenance.p is not None else params.p,
                            params.gamma, params.epsilon, params.mu)
        for i in range(2, m + 1):
            fresh = generate_graph(gen_params, derive_subseed(seed, "copy", i))
            w = fresh.words.copy()
            for u in exposed_l:
                w[u] = (w[u] & inv_mask) | (base_words[u] & mask_words)
            copies.append(
                BipartiteGraph.from_words(
                    n, w, GraphProvenance(gen_params.p, None, "derived")
                )
            )
    return CorrelatedFamily(g, T, m, ledger, tuple(copies))


def _mask_to_words(mask: int, n: int) -> np.ndarray:
    nw = (n + 63) // 64
    return np.frombuffer(mask.to_bytes(8 * nw, "little"), dtype=np.uint64).copy()


def threshold_stopping_time(trace: RunTrace, tau_target: int) -> int:
    """First step at which either side's accepted count reaches the target,
    clamped to 2n when the target is never reached."""
    if tau_target < 1:
        raise ConfigError(f"tau target must be >= 1, got {tau_target}")
    two_n = 2 * trace.n
    for t in range(1, two_n + 1):
        if max(trace.sizes_l[t - 1], trace.sizes_r[t - 1]) >= tau_target:
            return t
    return two_n


def overlap_profile(first: BalancedSet, second: BalancedSet) -> tuple[int, int]:
    """Sizes of the per-side intersections of two candidate sets."""
    return (
        (first.l_mask & second.l_mask).bit_count(),
        (first.r_mask & second.r_mask).bit_count(),
    )


def overlap_histogram(
    g: BipartiteGraph, gamma: float, alpha: int, size_slack: int, *, max_sets: int = 5000
) -> dict[tuple[int, int], int]:
    """Pairwise overlap profiles over all gamma-balanced independent sets
    with size in [alpha - size_slack, alpha] (unordered distinct pairs)."""
    if g.n > MAX_HISTOGRAM_N:
        raise GuardError(f"overlap histogram is limited to n <= {MAX_HISTOGRAM_N}, got {g.n}")
    if size_slack < 0:
        raise ConfigError(f"size_slack must be nonnegative, got {size_slack}")
    sets = []
    for s in enumerate_balanced_independent_sets(g, gamma, alpha - size_slack, alpha):
        sets.append(s)
        if len(sets) > max_sets:
            raise GuardError(f"more than {max_sets} qualifying sets; tighten the size window")
    hist: Counter[tuple[int, int]] = Counter()
    for a, b in combinations(sets, 2):
        hist[overlap_profile(a, b)] += 1
    return dict(hist)


def estimate_success_probability(
    params: Params,
    algorithm,
    policy: ArrivalPolicy,
    m: int,
    k: int,
    trials: int,
    seed: Seed,
    *,
    tau_target: int | None = None,
) -> SuccessEstimate:
    """Monte Carlo frequency of the all-copies event.

    Per trial: sample a base graph, run the algorithm to get the stopping
    time, build the family there, run the same algorithm (same run seed) on
    every copy, and record whether all m outputs reach size k versus whether
    the base output alone does.
    """
    if trials < 1:
        raise ConfigError(f"trials must be >= 1, got {trials}")
    if m < 1:
        raise ConfigError(f"m must be >= 1, got {m}")
    hits_s = hits_e = 0
    for i in range(trials):
        trial_seed = derive_subseed(seed, "trial", i)
        g = generate_graph(params, derive_subseed(trial_seed, "graph", 0))
        run_seed = derive_subseed(trial_seed, "run", 0)
        base_trace = run_online(g, algorithm, policy, params, run_seed, tau_target=tau_target)
        tau = base_trace.threshold_time
        family = build_family(
            g, algorithm, policy, params, tau, m, trial_seed,
            run_seed=run_seed, base_trace=base_trace,
        )
        sizes = [base_trace.final_size]
        for copy in family.copies[1:]:
            sizes.append(run_online(copy, algorithm, policy, params, run_seed).final_size)
        if sizes[0] >= k:
            hits_e += 1
        if all(s >= k for s in sizes):
            hits_s += 1
    p_s = hits_s / trials
    p_e = hits_e / trials
    return SuccessEstimate(
        p_hat_s=p_s,
        p_hat_e=p_e,
        trials=trials,
        m=m,
        k=k,
        stderr_s=(p_s * (1 - p_s) / trials) ** 0.5,
        stderr_e=(p_e * (1 - p_e) / trials) ** 0.5,
    )


def count_forbidden_tuples(
    family: CorrelatedFamily, query: ForbiddenTupleQuery, gamma: float, tau_target: int
) -> int:
    """Exact count of m-tuples (I_1, ..., I_m), one gamma-balanced independent
    set per copy, that agree inside the exposed vertex set and show the
    prescribed side counts there: |I ∩ exposed ∩ eta| = tau_target and
    |I ∩ exposed \\ eta| = beta, with |I_i| = a_i.

    Counts by enumerating the common exposed part J and multiplying the
    per-copy extension counts over the unexposed vertices.
    """
    n = family.base.n
    if n > MAX_FORBIDDEN_N:
        raise GuardError(f"forbidden-tuple counting is limited to n <= {MAX_FORBIDDEN_N}")
    if family.m > MAX_FORBIDDEN_M:
        raise GuardError(f"forbidden-tuple counting is limited to m <= {MAX_FORBIDDEN_M}")
    if len(query.a) != family.m:
        raise ConfigError(f"query lists {len(query.a)} sizes for m = {family.m} copies")
    if tau_target < 0:
        raise ConfigError(f"tau target must be nonnegative, got {tau_target}")

    ledger = family.ledger
    if query.eta == "L":
        eta_ids, off_ids = ledger.exposed_l_ids(), ledger.exposed_r_ids()
    else:
        eta_ids, off_ids = ledger.exposed_r_ids(), ledger.exposed_l_ids()
    if tau_target > len(eta_ids) or query.beta > len(off_ids):
        return 0

    copy_rows = [copy.row_ints() for copy in family.copies]
    full = (1 << n) - 1
    free_l = full & ~ledger.exposed_l
    free_r = full & ~ledger.exposed_r

    total = 0
    for eta_pick in combinations(eta_ids, tau_target):
        for off_pick in combinations(off_ids, query.beta):
            if query.eta == "L":
                j_l, j_r = eta_pick, off_pick
            else:
                j_l, j_r = off_pick, eta_pick
            j_l_mask = _ids_to_mask(j_l)
            j_r_mask = _ids_to_mask(j_r)
            # the exposed part is identical across copies by construction,
            # so its internal independence can be checked once on the base
            if not _independent(copy_rows[0], j_l, j_r_mask):
                continue
            product = 1
            for rows, a_i in zip(copy_rows, query.a):
                product *= _extension_count(
                    rows, n, gamma, a_i, j_l_mask, j_r_mask, free_l, free_r
                )
                if product == 0:
                    break
            total += product
    return total


def _ids_to_mask(ids) -> int:
    mask = 0
    for i in ids:
        mask |= 1 << i
    return mask


def _independent(rows: list[int], l_ids, r_mask: int) -> bool:
    return all(not (rows[u] & r_mask) for u in l_ids)


def _extension_count(
    rows: list[int],
    n: int,
    gamma: float,
    target_size: int,
    j_l_mask: int,
    j_r_mask: int,
    free_l: int,
    free_r: int,
) -> int:
    """Number of ways to extend the exposed part J with unexposed vertices to
    a gamma-balanced independent set of the target size in this copy."""
    j_l = j_l_mask.bit_count()
    j_r = j_r_mask.bit_count()
    need = target_size - j_l - j_r
    if need < 0:
        return 0
    # free L vertices compatible with J's R part
    eligible_l = [u for u in _bits(free_l) if not (rows[u] & j_r_mask)]
    # common non-neighbor mask of an L set, restricted to free R vertices
    base_r = free_r
    for u in _bits(j_l_mask):
        base_r &= ~rows[u]

    total = 0
    for size_l in range(0, min(len(eligible_l), need) + 1):
        size_r = need - size_l
        if not is_gamma_balanced(j_l + size_l, j_r + size_r, gamma):
            continue
        for pick in combinations(eligible_l, size_l):
            allowed = base_r
            for u in pick:
                allowed &= ~rows[u]
            c = allowed.bit_count()
            if c >= size_r:
                total += comb(c, size_r)
    return total


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low
