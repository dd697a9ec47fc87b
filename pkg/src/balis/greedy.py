"""Two-stage online greedy.

Stage one greedily accepts conflict-free vertices from either side until one
side's accepted count reaches the stage-one target t1. From then on only the
other (deficient) side is considered, and acceptance additionally stops once
that side's total count reaches t2, which pins the final shape to exactly
(t1, t2) whenever stage two completes. Decisions depend only on the revealed
ledger, the current set, and the two counters, never on the arrival policy.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import ConfigError
from .graph import BalancedSet, BipartiteGraph
from .params import Params, compute_thresholds, is_gamma_balanced
from .runtime import ArrivalPolicy, LedgerView, RunTrace, run_online
from .seeds import Seed


class Decision(Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    STAGE_COMPLETE = "stage-complete"  # accepted, and the acceptance ended stage one
    DONE = "done"  # stage-two cap already met; nothing will ever be accepted again


@dataclass(frozen=True)
class GreedyConfig:
    """Stage targets. ``gamma`` is only used to validate that the pair of
    targets is actually balanced when supplied by hand."""

    t1: int
    t2: int
    gamma: float | None = None

    def __post_init__(self) -> None:
        if self.t1 < 1 or self.t2 < 1:
            raise ConfigError(f"stage targets must be >= 1, got ({self.t1}, {self.t2})")
        if self.gamma is not None and not is_gamma_balanced(self.t1, self.t2, self.gamma):
            raise ConfigError(f"targets ({self.t1}, {self.t2}) are not {self.gamma}-balanced")

    @classmethod
    def from_params(cls, params: Params) -> "GreedyConfig":
        th = compute_thresholds(params)
        return cls(th.t1, th.t2, params.gamma)


def stage_one_decision(view: LedgerView, current: BalancedSet, vid: int, t1: int) -> Decision:
    """Accept iff the arriving vertex has no revealed edge into the current
    set; report STAGE_COMPLETE for the acceptance that lifts a side to t1."""
    n = view.n
    if max(current.l_size, current.r_size) >= t1:
        raise ConfigError("stage one is already over for this set")
    if vid < n:
        members = [n + v for v in current.r_ids()]
        new_count = current.l_size + 1
    else:
        members = current.l_ids()
        new_count = current.r_size + 1
    if members and view.any_edge(vid, members):
        return Decision.REJECT
    return Decision.STAGE_COMPLETE if new_count == t1 else Decision.ACCEPT


def stage_two_decision(
    view: LedgerView, current: BalancedSet, vid: int, deficient_side: str, t2: int
) -> Decision:
    """Majority-side arrivals are always rejected; a deficient-side arrival is
    accepted iff the cap has room and it has no revealed edge into the set.
    DONE is returned once the deficient count has already reached t2."""
    n = view.n
    if deficient_side not in ("L", "R"):
        raise ConfigError(f"deficient side must be 'L' or 'R', got {deficient_side!r}")
    deficient_count = current.l_size if deficient_side == "L" else current.r_size
    if deficient_count >= t2:
        return Decision.DONE
    arriving_side = "L" if vid < n else "R"
    if arriving_side != deficient_side:
        return Decision.REJECT
    if deficient_side == "L":
        members = [n + v for v in current.r_ids()]
    else:
        members = current.l_ids()
    if members and view.any_edge(vid, members):
        return Decision.REJECT
    return Decision.ACCEPT


class TwoStageGreedy:
    """Online algorithm object driven by :func:`balis.runtime.run_online`.

    Deterministic given the revealed ledger; the run sub-seed is unused.
    """

    def __init__(self, config: GreedyConfig | None = None):
        self._config = config
        self._view = None

    def start(self, view: LedgerView, params: Params, seed: Seed) -> None:
        config = self._config or GreedyConfig.from_params(params)
        self._view = view
        self._n = view.n
        self._t1 = config.t1
        self._t2 = config.t2
        self._members_l: list[int] = []
        self._members_r: list[int] = []
        self._stage = 1
        self._deficient_is_l = False
        self._stage_one_end: int | None = None
        self._fill_step: int | None = None
        self._saturated = False

    def decide(self, t: int, vid: int) -> bool:
        view = self._view
        n = self._n
        if self._stage == 1:
            if vid < n:
                mine, others = self._members_l, self._members_r
            else:
                mine, others = self._members_r, self._members_l
            if others and view.any_edge(vid, others):
                return False
            mine.append(vid)
            if len(mine) == self._t1:
                self._stage = 2
                self._stage_one_end = t
                self._deficient_is_l = vid >= n
                # the deficient side is strictly below t1 <= t2 here, so the
                # cap can only be hit by a later stage-two acceptance
            return True
        # stage two
        if self._deficient_is_l != (vid < n):
            return False
        if self._deficient_is_l:
            mine, others = self._members_l, self._members_r
        else:
            mine, others = self._members_r, self._members_l
        if len(mine) >= self._t2:
            # only reachable with hand-built targets where t2 < t1
            self._saturated = True
            return False
        if others and view.any_edge(vid, others):
            return False
        mine.append(vid)
        if len(mine) == self._t2:
            self._fill_step = t
            self._saturated = True
        return True

    @property
    def saturated(self) -> bool:
        return self._saturated

    def marks(self) -> dict:
        return {"stage_one_end": self._stage_one_end, "stage_two_fill": self._fill_step}


def two_stage(
    g: BipartiteGraph,
    policy: ArrivalPolicy,
    params: Params,
    seed: Seed,
    *,
    config: GreedyConfig | None = None,
    tau_target: int | None = None,
) -> RunTrace:
    """Run the two-stage greedy in one online pass and return the trace."""
    return run_online(g, TwoStageGreedy(config), policy, params, seed, tau_target=tau_target)
