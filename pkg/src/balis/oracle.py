"""Exact brute-force computations at small n.

Subsets are enumerated on one side only: within a side every subset is
automatically independent, so a candidate is a subset S of L together with
some vertices drawn from the common non-neighbors of S in R. Enumeration is
a depth-first walk over L-subsets in ascending-id order with an admissible
upper bound for pruning, which keeps the first optimum found lexicographically
smallest.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Iterable, Iterator

from .errors import GuardError
from .graph import BalancedSet, BipartiteGraph
from .params import is_gamma_balanced

MAX_ORACLE_N = 26


def _guard(g: BipartiteGraph) -> None:
    if g.n > MAX_ORACLE_N:
        raise GuardError(f"exact oracle is limited to n <= {MAX_ORACLE_N}, got n = {g.n}")


@dataclass(frozen=True)
class OracleResult:
    max_size: int
    witness: BalancedSet
    z_counts: dict[int, int] | None = None


def common_non_neighbors(g: BipartiteGraph, s: Iterable[int]) -> tuple[int, ...]:
    """All R vertices adjacent to no vertex of the L-subset ``s``."""
    _guard(g)
    mask = _common_mask(g.row_ints(), (1 << g.n) - 1, s, g.n)
    return tuple(_bit_ids(mask))


def _common_mask(rows: list[int], full: int, s: Iterable[int], n: int) -> int:
    mask = full
    for u in s:
        if not 0 <= u < n:
            raise GuardError(f"L id out of range: {u}")
        mask &= ~rows[u]
    return mask & full


def _bit_ids(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _lowest_bits(mask: int, k: int) -> int:
    out = 0
    for _ in range(k):
        low = mask & -mask
        out |= low
        mask ^= low
    return out


def _best_partner(l_count: int, cap: int, gamma: float) -> int:
    """Largest r <= cap with (l_count, r) gamma-balanced, or -1 if none."""
    for r in range(cap, -1, -1):
        if is_gamma_balanced(l_count, r, gamma):
            return r
    return -1


def max_balanced_independent_set(
    g: BipartiteGraph, gamma: float, *, enumerate_side: str = "L"
) -> OracleResult:
    """Exhaustive maximum over all gamma-balanced independent sets.

    ``enumerate_side`` selects which side the subset walk runs over; the two
    paths are independent computation routes that must agree (the predicate
    is symmetric under swapping the sides).
    """
    _guard(g)
    if enumerate_side == "R":
        res = max_balanced_independent_set(g.transposed(), gamma, enumerate_side="L")
        w = res.witness
        return OracleResult(res.max_size, BalancedSet(g.n, w.r_mask, w.l_mask), res.z_counts)
    if enumerate_side != "L":
        raise GuardError(f"enumerate_side must be 'L' or 'R', got {enumerate_side!r}")

    n = g.n
    rows = g.row_ints()
    full = (1 << n) - 1
    best_size = -1
    best_l = best_r = 0

    def visit(l_mask: int, l_count: int, common: int) -> None:
        nonlocal best_size, best_l, best_r
        c = common.bit_count()
        r = _best_partner(l_count, c, gamma)
        if r >= 0 and l_count + r > best_size:
            best_size = l_count + r
            best_l = l_mask
            best_r = _lowest_bits(common, r)

    def walk(start: int, l_mask: int, l_count: int, common: int) -> None:
        # everything still reachable below this node, ignoring balance
        if l_count + (n - start) + common.bit_count() <= best_size:
            return
        if start == n:
            return
        bit = 1 << start
        nxt_common = common & ~rows[start]
        visit(l_mask | bit, l_count + 1, nxt_common)
        walk(start + 1, l_mask | bit, l_count + 1, nxt_common)
        walk(start + 1, l_mask, l_count, common)

    visit(0, 0, full)
    walk(0, 0, 0, full)
    return OracleResult(best_size, BalancedSet(n, best_l, best_r))


def count_balanced_independent_sets(
    g: BipartiteGraph, gamma: float, alpha: int, *, enumerate_side: str = "L"
) -> int:
    """Exact number of gamma-balanced independent sets of size alpha."""
    _guard(g)
    if alpha < 0:
        raise GuardError(f"alpha must be nonnegative, got {alpha}")
    if enumerate_side == "R":
        return count_balanced_independent_sets(g.transposed(), gamma, alpha, enumerate_side="L")
    if enumerate_side != "L":
        raise GuardError(f"enumerate_side must be 'L' or 'R', got {enumerate_side!r}")
    n = g.n
    if alpha == 0:
        return 1 if is_gamma_balanced(0, 0, gamma) else 0
    rows = g.row_ints()
    full = (1 << n) - 1
    total = 0
    for l_count in range(0, min(alpha, n) + 1):
        r_count = alpha - l_count
        if r_count > n or not is_gamma_balanced(l_count, r_count, gamma):
            continue
        total += _count_split(rows, full, n, l_count, r_count)
    return total


def _count_split(rows, full, n, l_count, r_count):
    """Sum of C(|common non-neighbors|, r_count) over all L-subsets of size l_count."""
    total = 0

    def walk(start: int, depth: int, common: int) -> None:
        nonlocal total
        if depth == l_count:
            c = common.bit_count()
            if c >= r_count:
                total += comb(c, r_count)
            return
        if n - start < l_count - depth:
            return
        if common.bit_count() < r_count:
            return
        walk(start + 1, depth + 1, common & ~rows[start])
        walk(start + 1, depth, common)

    walk(0, 0, full)
    return total


def exists_balanced_independent_set(g: BipartiteGraph, gamma: float, alpha: int) -> bool:
    """Early-exit variant of the exact count (stops at the first witness)."""
    _guard(g)
    n = g.n
    if alpha == 0:
        return is_gamma_balanced(0, 0, gamma)
    rows = g.row_ints()
    full = (1 << n) - 1

    def witness_for_split(l_count: int, r_count: int) -> bool:
        def walk(start: int, depth: int, common: int) -> bool:
            if depth == l_count:
                return common.bit_count() >= r_count
            if n - start < l_count - depth or common.bit_count() < r_count:
                return False
            return walk(start + 1, depth + 1, common & ~rows[start]) or walk(
                start + 1, depth, common
            )

        return walk(0, 0, full)

    for l_count in range(0, min(alpha, n) + 1):
        r_count = alpha - l_count
        if r_count > n or not is_gamma_balanced(l_count, r_count, gamma):
            continue
        if witness_for_split(l_count, r_count):
            return True
    return False


def enumerate_balanced_independent_sets(
    g: BipartiteGraph, gamma: float, min_size: int, max_size: int
) -> Iterator[BalancedSet]:
    """Yield every gamma-balanced independent set with size in the window."""
    _guard(g)
    n = g.n
    rows = g.row_ints()
    full = (1 << n) - 1
    for size in range(max(0, min_size), max_size + 1):
        if size == 0:
            if is_gamma_balanced(0, 0, gamma):
                yield BalancedSet(n, 0, 0)
            continue
        for l_count in range(0, min(size, n) + 1):
            r_count = size - l_count
            if r_count > n or not is_gamma_balanced(l_count, r_count, gamma):
                continue
            yield from _enumerate_split(rows, full, n, l_count, r_count)


def _enumerate_split(rows, full, n, l_count, r_count):
    def walk(start: int, depth: int, l_mask: int, common: int):
        if depth == l_count:
            ids = list(_bit_ids(common))
            for combo in combinations(ids, r_count):
                r_mask = 0
                for v in combo:
                    r_mask |= 1 << v
                yield BalancedSet(n, l_mask, r_mask)
            return
        if n - start < l_count - depth or common.bit_count() < r_count:
            return
        yield from walk(start + 1, depth + 1, l_mask | (1 << start), common & ~rows[start])
        yield from walk(start + 1, depth, l_mask, common)

    yield from walk(0, 0, 0, full)
