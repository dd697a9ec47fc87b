import numpy as np
import pytest

from balis.graph import BipartiteGraph


def graph_from_edges(n, edges):
    w = np.zeros((n, (n + 63) // 64), dtype=np.uint64)
    for u, v in edges:
        w[u, v >> 6] |= np.uint64(1 << (v & 63))
    return BipartiteGraph.from_words(n, w)


@pytest.fixture
def greedy_hand_graph():
    """3x3 graph with edges l1-r1 and l2-r2 (1-indexed), used by the scripted
    two-stage run: arrivals l1, r1, r2 give T_f = 1 and output {l1, r2}."""
    return graph_from_edges(3, [(0, 0), (1, 1)])


@pytest.fixture
def oracle_hand_graph():
    """3x3 graph with the four edges l1-r1, l1-r2, l2-r1, l3-r3 (1-indexed).

    By exhaustion: common non-neighbors of {l2, l3} = {r2}, the maximum
    balanced independent set has size 3, and there are exactly 4 balanced
    independent sets of size 3.
    """
    return graph_from_edges(3, [(0, 0), (0, 1), (1, 0), (2, 2)])
