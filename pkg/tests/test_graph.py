import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from balis.errors import ConfigError, GraphFormatError
from balis.graph import BalancedSet, BipartiteGraph, generate_graph, load_graph, save_graph
from balis.params import Params
from balis.seeds import Seed

from conftest import graph_from_edges


def _params(n, p):
    return Params(n, p, 0.5, 0.2)


class TestGeneration:
    def test_p_zero_gives_empty_graph(self):
        g = generate_graph(_params(3, 0.0), Seed(1))
        assert g.edge_count() == 0

    def test_p_one_gives_complete_graph(self):
        g = generate_graph(_params(3, 1.0), Seed(1))
        assert g.edge_count() == 9

    def test_seeded_generation_is_deterministic(self):
        a = generate_graph(_params(16, 0.5), Seed(42))
        b = generate_graph(_params(16, 0.5), Seed(42))
        assert a == b
        assert 0 <= a.edge_count() <= 256

    def test_different_seeds_differ(self):
        a = generate_graph(_params(16, 0.5), Seed(42))
        b = generate_graph(_params(16, 0.5), Seed(43))
        assert a != b

    @settings(max_examples=30)
    @given(st.integers(min_value=0, max_value=10_000), st.sampled_from([5, 16, 70]))
    def test_lazy_and_materialized_bits_agree(self, master, n):
        lazy = generate_graph(_params(n, 0.37), Seed(master))
        test = lazy.edge_tester()
        probe = [(u, v) for u in range(0, n, 3) for v in range(0, n, 7)]
        expected = [test(u, v) for u, v in probe]
        materialized = generate_graph(_params(n, 0.37), Seed(master))
        _ = materialized.words
        assert [materialized.has_edge(u, v) for u, v in probe] == expected

    def test_empirical_edge_frequency(self):
        # each of the 64 indicators at n=8, p=0.3 over 2000 seeds: within
        # +/-0.05 of 0.3 (about 5 sigma of the binomial CI)
        n, p, seeds = 8, 0.3, 2000
        counts = np.zeros((n, n))
        for i in range(seeds):
            g = generate_graph(_params(n, p), Seed(1).derive("freq", i))
            w = g.words
            for u in range(n):
                row = int(w[u, 0])
                for v in range(n):
                    counts[u, v] += (row >> v) & 1
        freq = counts / seeds
        assert float(np.max(np.abs(freq - p))) < 0.05


class TestStructure:
    def test_row_int_matches_has_edge(self):
        g = generate_graph(_params(20, 0.5), Seed(7))
        for u in range(20):
            row = g.row_int(u)
            for v in range(20):
                assert bool((row >> v) & 1) == g.has_edge(u, v)

    def test_transpose_is_an_involution(self):
        g = generate_graph(_params(12, 0.4), Seed(3))
        assert g.transposed().transposed() == g
        t = g.transposed()
        assert t.has_edge(2, 5) == g.has_edge(5, 2)

    def test_flipped_edge(self):
        g = generate_graph(_params(6, 0.5), Seed(9))
        h = g.with_edge_flipped(1, 4)
        assert h.has_edge(1, 4) != g.has_edge(1, 4)
        assert h.with_edge_flipped(1, 4) == g

    def test_out_of_range_ids_rejected(self):
        g = generate_graph(_params(4, 0.5), Seed(1))
        with pytest.raises(ConfigError):
            g.has_edge(4, 0)
        with pytest.raises(ConfigError):
            g.has_edge(0, -1)

    def test_from_words_validates_tail_bits(self):
        w = np.zeros((3, 1), dtype=np.uint64)
        w[0, 0] = np.uint64(1 << 3)  # column 3 does not exist at n=3
        with pytest.raises(ConfigError):
            BipartiteGraph.from_words(3, w)


class TestFileFormat:
    def test_empty_graph_file(self):
        g = generate_graph(_params(2, 0.0), Seed(5))
        buf = io.StringIO()
        save_graph(g, buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "balis-graph v1"
        assert lines[1].startswith("n=2 p=0.0 seed=")
        assert len(lines) == 2

    def test_round_trip_is_identity(self):
        g = generate_graph(_params(16, 0.5), Seed(21))
        buf = io.StringIO()
        save_graph(g, buf)
        loaded = load_graph(io.StringIO(buf.getvalue()))
        assert loaded == g
        assert loaded.provenance.source == "file"

    def test_edges_are_sorted_ascending(self):
        g = generate_graph(_params(9, 0.6), Seed(2))
        buf = io.StringIO()
        save_graph(g, buf)
        pairs = [tuple(map(int, line.split())) for line in buf.getvalue().splitlines()[2:]]
        assert pairs == sorted(pairs)

    def test_out_of_range_vertex_id(self):
        text = "balis-graph v1\nn=3 p=0.5 seed=none\n3 1\n"
        with pytest.raises(GraphFormatError, match="out of range"):
            load_graph(io.StringIO(text))

    def test_duplicate_edge_line(self):
        text = "balis-graph v1\nn=3 p=0.5 seed=none\n1 1\n1 1\n"
        with pytest.raises(GraphFormatError, match="duplicate"):
            load_graph(io.StringIO(text))

    def test_malformed_header(self):
        with pytest.raises(GraphFormatError, match="header"):
            load_graph(io.StringIO("not-a-graph\n"))
        with pytest.raises(GraphFormatError):
            load_graph(io.StringIO("balis-graph v1\nn=x p=0.5 seed=none\n"))


class TestBalancedSet:
    def test_sizes_and_ids(self):
        s = BalancedSet.from_ids(5, [0, 3], [2])
        assert (s.l_size, s.r_size, s.size) == (2, 1, 3)
        assert s.l_ids() == [0, 3]
        assert s.r_ids() == [2]

    def test_independence_check(self):
        g = graph_from_edges(3, [(0, 0), (1, 1)])
        assert BalancedSet.from_ids(3, [0], [1]).is_independent_in(g)
        assert not BalancedSet.from_ids(3, [0], [0]).is_independent_in(g)

    def test_balance_check(self):
        assert BalancedSet.from_ids(4, [0, 1], [2, 3]).is_balanced(0.5)
        assert not BalancedSet.from_ids(4, [0, 1, 2], []).is_balanced(0.5)
