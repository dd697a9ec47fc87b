"""Online execution model: arrival policies, revealed-edge views, run traces.

A run processes all 2n vertices in some arrival order. When a vertex arrives,
the statuses of its edges to every previously exposed vertex become part of
the revealed ledger, and only then does the algorithm make its irrevocable
accept/reject decision. Algorithms never touch the graph directly: they get a
:class:`LedgerView` capability that serves exactly the revealed pairs and
raises on anything else.

Vertices are addressed by global ids: L is 0..n-1 and R is n..2n-1.
"""

from __future__ import annotations

import json
from array import array
from dataclasses import dataclass
from typing import Callable, Protocol, runtime_checkable

from .errors import ConfigError, UnrevealedPairError
from .graph import BalancedSet, BipartiteGraph
from .params import Params, compute_thresholds, log_base_b, snap_floor
from .seeds import Seed, derive_subseed

ARRIVAL_KINDS = ("uniform-random", "l-first", "r-first", "alternating", "fixed-sequence")


def side_of(vid: int, n: int) -> str:
    return "L" if vid < n else "R"


def local_id(vid: int, n: int) -> int:
    return vid if vid < n else vid - n


@dataclass(frozen=True)
class ArrivalPolicy:
    """How the next vertex is chosen. All builtin kinds are functions of the
    policy (and, for uniform-random, a sub-seed) only, never of the graph."""

    kind: str
    n: int
    payload: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in ARRIVAL_KINDS:
            raise ConfigError(f"unknown arrival policy {self.kind!r}; choose from {ARRIVAL_KINDS}")
        if self.kind == "fixed-sequence":
            if self.payload is None or sorted(self.payload) != list(range(2 * self.n)):
                raise ConfigError("fixed-sequence payload must be a permutation of all 2n vertex ids")
        elif self.payload is not None:
            raise ConfigError(f"policy {self.kind!r} takes no payload")


def arrival_order(policy: ArrivalPolicy, seed: Seed) -> list[int]:
    """The full arrival sequence (a permutation of the 2n global ids)."""
    n = policy.n
    if policy.kind == "uniform-random":
        return seed.rng().permutation(2 * n).tolist()
    if policy.kind == "l-first":
        return list(range(2 * n))
    if policy.kind == "r-first":
        return list(range(n, 2 * n)) + list(range(n))
    if policy.kind == "alternating":
        out = []
        for i in range(n):
            out.append(i)
            out.append(n + i)
        return out
    return list(policy.payload)


def next_arrival(policy: ArrivalPolicy, state: set[int], seed: Seed, t: int) -> tuple[int, str]:
    """The vertex arriving at step t given the already-exposed set.

    Returns (side-local id, side). For the canonical sequential state this is
    element t of :func:`arrival_order`; for any other state it is the first
    element of that order not yet exposed, so the result is always fresh.
    """
    n = policy.n
    if len(state) >= 2 * n:
        raise ConfigError("all vertices are already exposed")
    if not 1 <= t <= 2 * n:
        raise ConfigError(f"step index out of range: {t}")
    for vid in arrival_order(policy, seed):
        if vid not in state:
            return local_id(vid, n), side_of(vid, n)
    raise ConfigError("no unexposed vertex found")  # pragma: no cover


class LedgerView:
    """Capability handed to online algorithms.

    Serves edge statuses for pairs whose endpoints have both been exposed;
    any other query raises :class:`UnrevealedPairError`.
    """

    __slots__ = ("n", "_exposed", "_test")

    def __init__(self, g: BipartiteGraph):
        self.n = g.n
        self._exposed = bytearray(2 * g.n)
        self._test = g.edge_tester()

    def expose(self, vid: int) -> None:
        self._exposed[vid] = 1

    def is_exposed(self, vid: int) -> bool:
        return bool(self._exposed[vid])

    def exposed_count(self) -> int:
        return sum(self._exposed)

    def edge(self, u: int, v: int) -> bool:
        """Status of the cross pair (u, v); both endpoints must be exposed."""
        n = self.n
        if u >= n:
            u, v = v, u
        if not (u < n <= v < 2 * n):
            raise ConfigError("edge() takes one vertex per side")
        if not (self._exposed[u] and self._exposed[v]):
            raise UnrevealedPairError(f"pair ({u}, {v}) has not been revealed")
        return self._test(u, v - n)

    def any_edge(self, vid: int, members: list[int]) -> bool:
        """True iff the arriving vertex has a revealed edge to any member.

        ``members`` are global ids on the side opposite to ``vid``.
        """
        ex = self._exposed
        if not ex[vid]:
            raise UnrevealedPairError(f"vertex {vid} has not been exposed")
        test = self._test
        n = self.n
        if vid < n:
            for m in members:
                if not ex[m]:
                    raise UnrevealedPairError(f"pair ({vid}, {m}) has not been revealed")
                if test(vid, m - n):
                    return True
        else:
            v = vid - n
            for m in members:
                if not ex[m]:
                    raise UnrevealedPairError(f"pair ({m}, {vid}) has not been revealed")
                if test(m, v):
                    return True
        return False


@runtime_checkable
class OnlineAlgorithm(Protocol):
    """Decision rule driven by the runtime.

    ``start`` is called once per run with the ledger view, the parameters and
    a dedicated sub-seed; all algorithm randomness must come from that seed so
    a run is a deterministic function of (graph, policy, params, seed).
    ``decide`` is called once per arrival after the ledger update and returns
    True to accept. ``saturated`` may become True once no future arrival can
    be accepted, letting the runtime fill the remaining steps as rejections.
    """

    def start(self, view: LedgerView, params: Params, seed: Seed) -> None: ...

    def decide(self, t: int, vid: int) -> bool: ...

    @property
    def saturated(self) -> bool: ...


@dataclass(frozen=True)
class RevealedLedger:
    """Snapshot of everything revealed by some step: the exposed vertices per
    side and the status of every cross pair with both endpoints exposed."""

    n: int
    exposed_l: int
    exposed_r: int
    revealed: dict[tuple[int, int], bool]

    def exposed_l_ids(self) -> list[int]:
        return _ids(self.exposed_l)

    def exposed_r_ids(self) -> list[int]:
        return _ids(self.exposed_r)


def _ids(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


_SENTINEL_OFFSET = 1  # stage stop times use 2n + 1 when a stage never ended


@dataclass(frozen=True)
class RunTrace:
    """Complete record of one online run.

    ``stage_one_end`` / ``stage_two_end`` are the stop times of staged
    algorithms (2n + 1 when the stage never completed); ``threshold_time`` is
    the first step at which either side's accepted count reached the
    stopping-time target, clamped to 2n; ``majority_side`` is the larger side
    at that step (R on ties).
    """

    n: int
    arrivals: tuple[int, ...]
    decisions: bytes
    sizes_l: tuple[int, ...]
    sizes_r: tuple[int, ...]
    stage_one_end: int
    stage_two_end: int
    threshold_time: int
    majority_side: str
    final_set: BalancedSet

    @property
    def sentinel(self) -> int:
        return 2 * self.n + 1

    @property
    def final_size(self) -> int:
        return self.final_set.size

    def summary_dict(self) -> dict:
        return {
            "T_f": self.stage_one_end,
            "T_b": self.stage_two_end,
            "tau": self.threshold_time,
            "majority": self.majority_side,
            "final_size": self.final_size,
        }

    def step_records(self):
        n = self.n
        for t in range(1, 2 * n + 1):
            vid = self.arrivals[t - 1]
            yield {
                "t": t,
                "vertex": local_id(vid, n),
                "side": side_of(vid, n),
                "accepted": bool(self.decisions[t - 1]),
                "sizeL": self.sizes_l[t - 1],
                "sizeR": self.sizes_r[t - 1],
            }

    def to_jsonl(self, fp) -> None:
        for rec in self.step_records():
            fp.write(json.dumps(rec, separators=(",", ":")) + "\n")
        fp.write(json.dumps(self.summary_dict(), separators=(",", ":")) + "\n")


def _resolve_tau_target(params: Params, tau_target) -> int | None:
    if tau_target is not None:
        return int(tau_target)
    if 0.0 < params.p < 1.0:
        return max(1, snap_floor((1.0 - params.mu) * log_base_b(params.n, params.p)))
    return None


def run_online(
    g: BipartiteGraph,
    algorithm: OnlineAlgorithm,
    policy: ArrivalPolicy | Callable[[int, LedgerView], int],
    params: Params,
    seed: Seed,
    *,
    tau_target: int | None = None,
) -> RunTrace:
    """Execute one 2n-round online run and return its full trace.

    ``policy`` is either an :class:`ArrivalPolicy` or a callable
    ``(t, view) -> global id`` for algorithm-driven arrival orders; the two
    modes are never mixed within a run. Arrival randomness comes from the
    sub-seed ("arrivals", 0) and algorithm randomness from ("algorithm", 0),
    so identical inputs give identical traces.
    """
    n = g.n
    if isinstance(policy, ArrivalPolicy) and policy.n != n:
        raise ConfigError(f"policy is for n={policy.n}, graph has n={n}")
    two_n = 2 * n
    view = LedgerView(g)
    algorithm.start(view, params, derive_subseed(seed, "algorithm", 0))

    adaptive = not isinstance(policy, ArrivalPolicy)
    if adaptive:
        order: list[int] = []
    else:
        order = arrival_order(policy, derive_subseed(seed, "arrivals", 0))

    decisions = bytearray(two_n)
    sizes_l = array("i", bytes(4 * two_n))
    sizes_r = array("i", bytes(4 * two_n))
    count_l = count_r = 0
    target = _resolve_tau_target(params, tau_target)
    tau = two_n
    expose = view.expose
    decide = algorithm.decide
    t_done = two_n

    for t0 in range(two_n):
        if adaptive:
            vid = policy(t0 + 1, view)
            if not 0 <= vid < two_n or view.is_exposed(vid):
                raise ConfigError(f"adaptive policy returned an invalid arrival: {vid}")
            order.append(vid)
        else:
            vid = order[t0]
        expose(vid)
        if decide(t0 + 1, vid):
            decisions[t0] = 1
            if vid < n:
                count_l += 1
            else:
                count_r += 1
            if target is not None and tau == two_n and max(count_l, count_r) >= target:
                tau = t0 + 1
        sizes_l[t0] = count_l
        sizes_r[t0] = count_r
        if not adaptive and algorithm.saturated:
            # a saturated algorithm rejects everything from here on, so the
            # remaining steps of the trace are known without running them
            t_done = t0 + 1
            break

    if t_done < two_n:
        for t0 in range(t_done, two_n):
            sizes_l[t0] = count_l
            sizes_r[t0] = count_r

    marks = algorithm.marks() if hasattr(algorithm, "marks") else {}
    sentinel = two_n + _SENTINEL_OFFSET
    stage_one_end = marks.get("stage_one_end") or sentinel
    fill = marks.get("stage_two_fill")
    stage_two_end = fill + 1 if fill is not None and fill + 1 <= two_n else sentinel

    l_mask = r_mask = 0
    for t0 in range(min(t_done, two_n)):
        if decisions[t0]:
            vid = order[t0]
            if vid < n:
                l_mask |= 1 << vid
            else:
                r_mask |= 1 << (vid - n)
    final = BalancedSet(n, l_mask, r_mask)

    at = min(tau, two_n) - 1
    majority = "L" if sizes_l[at] > sizes_r[at] else "R"

    return RunTrace(
        n=n,
        arrivals=tuple(order),
        decisions=bytes(decisions),
        sizes_l=tuple(sizes_l),
        sizes_r=tuple(sizes_r),
        stage_one_end=stage_one_end,
        stage_two_end=stage_two_end,
        threshold_time=tau,
        majority_side=majority,
        final_set=final,
    )


def ledger_at(trace: RunTrace, g: BipartiteGraph, T: int) -> RevealedLedger:
    """Reconstruct the revealed ledger after the first T steps of a run."""
    n = g.n
    if not 0 <= T <= 2 * n:
        raise ConfigError(f"T must lie in [0, {2 * n}], got {T}")
    exposed_l = exposed_r = 0
    for vid in trace.arrivals[:T]:
        if vid < n:
            exposed_l |= 1 << vid
        else:
            exposed_r |= 1 << (vid - n)
    test = g.edge_tester()
    revealed = {}
    for u in _ids(exposed_l):
        for v in _ids(exposed_r):
            revealed[(u, v)] = test(u, v)
    return RevealedLedger(n, exposed_l, exposed_r, revealed)
