import io
import json

import pytest
from hypothesis import given, settings, strategies as st

from balis.errors import ConfigError, UnrevealedPairError
from balis.graph import generate_graph
from balis.greedy import GreedyConfig, TwoStageGreedy, two_stage
from balis.params import Params
from balis.runtime import (
    ArrivalPolicy,
    arrival_order,
    ledger_at,
    next_arrival,
    run_online,
)
from balis.seeds import Seed

from conftest import graph_from_edges


def _params(n, p=0.5):
    return Params(n, p, 0.5, 0.2)


class TestArrivalPolicies:
    def test_l_first(self):
        pol = ArrivalPolicy("l-first", 2)
        seen = set()
        got = []
        for t in range(1, 5):
            vid, side = next_arrival(pol, seen, Seed(1), t)
            got.append((vid, side))
            seen.add(vid if side == "L" else 2 + vid)
        assert got == [(0, "L"), (1, "L"), (0, "R"), (1, "R")]

    def test_alternating(self):
        assert arrival_order(ArrivalPolicy("alternating", 2), Seed(1)) == [0, 2, 1, 3]

    def test_r_first(self):
        assert arrival_order(ArrivalPolicy("r-first", 2), Seed(1)) == [2, 3, 0, 1]

    def test_uniform_is_seeded_and_pinned(self):
        pol = ArrivalPolicy("uniform-random", 2)
        seed = Seed(1).derive("arrivals")
        assert arrival_order(pol, seed) == arrival_order(pol, seed)
        # regression pin: read off the seeded stream once
        assert arrival_order(pol, seed) == [2, 0, 1, 3]

    @settings(max_examples=25)
    @given(st.integers(min_value=0, max_value=100_000), st.sampled_from([1, 2, 5, 16]))
    def test_arrival_sequence_is_a_permutation(self, master, n):
        order = arrival_order(ArrivalPolicy("uniform-random", n), Seed(master))
        assert sorted(order) == list(range(2 * n))

    def test_fixed_sequence_must_be_a_permutation(self):
        with pytest.raises(ConfigError):
            ArrivalPolicy("fixed-sequence", 2, payload=(0, 1, 2, 2))
        with pytest.raises(ConfigError):
            ArrivalPolicy("fixed-sequence", 2)
        ArrivalPolicy("fixed-sequence", 2, payload=(3, 2, 1, 0))

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            ArrivalPolicy("zigzag", 2)

    def test_next_arrival_skips_exposed(self):
        pol = ArrivalPolicy("l-first", 2)
        vid, side = next_arrival(pol, {0, 1}, Seed(1), 3)
        assert (vid, side) == (0, "R")


class TestRunOnline:
    def test_determinism(self):
        params = _params(16)
        g = generate_graph(params, Seed(5).derive("graph"))
        pol = ArrivalPolicy("uniform-random", 16)
        a = two_stage(g, pol, params, Seed(5).derive("run"))
        b = two_stage(g, pol, params, Seed(5).derive("run"))
        assert a == b

    def test_empty_graph_accepts_until_caps(self):
        params = Params(4, 0.0, 0.5, 0.2)
        g = generate_graph(params, Seed(1).derive("graph"))
        tr = two_stage(g, ArrivalPolicy("uniform-random", 4), params,
                       Seed(1).derive("run"), config=GreedyConfig(2, 2, 0.5))
        assert tr.final_size == 4

    def test_complete_graph_l_first(self):
        params = Params(4, 1.0, 0.5, 0.2)
        g = generate_graph(params, Seed(1).derive("graph"))
        tr = two_stage(g, ArrivalPolicy("l-first", 4), params,
                       Seed(1).derive("run"), config=GreedyConfig(2, 2, 0.5))
        # stage one ends after t1 L arrivals; no R vertex is ever accepted
        assert tr.stage_one_end == 2
        assert tr.final_set.r_size == 0
        assert tr.final_size == 2

    def test_sizes_are_monotone_and_step_by_one(self):
        params = _params(16)
        g = generate_graph(params, Seed(11).derive("graph"))
        tr = two_stage(g, ArrivalPolicy("uniform-random", 16), params, Seed(11).derive("run"))
        prev_l = prev_r = 0
        for l, r in zip(tr.sizes_l, tr.sizes_r):
            assert (l - prev_l, r - prev_r) in ((0, 0), (1, 0), (0, 1))
            prev_l, prev_r = l, r

    def test_policy_object_must_match_graph(self):
        params = _params(8)
        g = generate_graph(params, Seed(1).derive("graph"))
        with pytest.raises(ConfigError):
            run_online(g, TwoStageGreedy(), ArrivalPolicy("l-first", 4), params, Seed(1))

    def test_adaptive_policy_callable(self):
        params = _params(4)
        g = generate_graph(params, Seed(2).derive("graph"))

        def lowest_unexposed(t, view):
            for vid in range(2 * view.n):
                if not view.is_exposed(vid):
                    return vid
            raise AssertionError

        a = run_online(g, TwoStageGreedy(GreedyConfig(2, 2, 0.5)), lowest_unexposed,
                       params, Seed(2).derive("run"))
        b = run_online(g, TwoStageGreedy(GreedyConfig(2, 2, 0.5)),
                       ArrivalPolicy("l-first", 4), params, Seed(2).derive("run"))
        assert a.arrivals == b.arrivals
        assert a.decisions == b.decisions


class TestObliviousness:
    def test_same_arrival_sequence_two_ways(self):
        # an explicit fixed-sequence equal to the l-first order must produce
        # the identical trace: the decision rule never sees the policy object
        params = _params(8)
        g = generate_graph(params, Seed(3).derive("graph"))
        cfg = GreedyConfig(2, 2, 0.5)
        a = two_stage(g, ArrivalPolicy("l-first", 8), params, Seed(3).derive("run"), config=cfg)
        b = two_stage(g, ArrivalPolicy("fixed-sequence", 8, payload=tuple(range(16))),
                      params, Seed(3).derive("run"), config=cfg)
        assert a.arrivals == b.arrivals
        assert a.decisions == b.decisions
        assert a.final_set == b.final_set


class TestLedger:
    def test_t_zero_is_empty(self):
        params = _params(4)
        g = generate_graph(params, Seed(7).derive("graph"))
        tr = two_stage(g, ArrivalPolicy("uniform-random", 4), params, Seed(7).derive("run"))
        led = ledger_at(tr, g, 0)
        assert led.exposed_l == led.exposed_r == 0
        assert led.revealed == {}

    def test_full_run_reveals_everything(self):
        params = _params(4)
        g = generate_graph(params, Seed(7).derive("graph"))
        tr = two_stage(g, ArrivalPolicy("uniform-random", 4), params, Seed(7).derive("run"))
        led = ledger_at(tr, g, 8)
        assert len(led.revealed) == 16
        for (u, v), status in led.revealed.items():
            assert status == g.has_edge(u, v)

    def test_one_sided_exposure_reveals_nothing(self):
        params = _params(4)
        g = generate_graph(params, Seed(7).derive("graph"))
        tr = two_stage(g, ArrivalPolicy("l-first", 4), params, Seed(7).derive("run"))
        led = ledger_at(tr, g, 4)
        assert led.exposed_l_ids() == [0, 1, 2, 3]
        assert led.exposed_r_ids() == []
        assert led.revealed == {}

    def test_revealed_is_exactly_the_exposed_rectangle(self):
        params = _params(6)
        g = generate_graph(params, Seed(8).derive("graph"))
        tr = two_stage(g, ArrivalPolicy("uniform-random", 6), params, Seed(8).derive("run"))
        for T in (0, 3, 7, 12):
            led = ledger_at(tr, g, T)
            expected = {(u, v) for u in led.exposed_l_ids() for v in led.exposed_r_ids()}
            assert set(led.revealed) == expected

    def test_t_out_of_range(self):
        params = _params(4)
        g = generate_graph(params, Seed(7).derive("graph"))
        tr = two_stage(g, ArrivalPolicy("uniform-random", 4), params, Seed(7).derive("run"))
        with pytest.raises(ConfigError):
            ledger_at(tr, g, 9)


class TestInformationHiding:
    def test_off_ledger_mutation_preserves_prefix(self):
        params = _params(8)
        g = generate_graph(params, Seed(13).derive("graph"))
        pol = ArrivalPolicy("uniform-random", 8)
        run_seed = Seed(13).derive("run")
        base = two_stage(g, pol, params, run_seed)
        T = 6
        led = ledger_at(base, g, T)
        flipped = None
        for u in range(8):
            for v in range(8):
                if (u, v) not in led.revealed:
                    flipped = (u, v)
                    break
            if flipped:
                break
        mutated = g.with_edge_flipped(*flipped)
        other = two_stage(mutated, pol, params, run_seed)
        assert base.arrivals[:T] == other.arrivals[:T]
        assert base.decisions[:T] == other.decisions[:T]
        assert base.sizes_l[:T] == other.sizes_l[:T]

    def test_reading_an_unrevealed_pair_raises(self):
        params = _params(4)
        g = generate_graph(params, Seed(1).derive("graph"))

        class Nosy:
            saturated = False

            def start(self, view, params, seed):
                self.view = view

            def decide(self, t, vid):
                if t == 1:
                    # only one vertex is exposed; peek at an unexposed pair
                    other = 4 if vid < 4 else 0
                    self.view.edge(min(vid, other), max(vid, other) if vid < 4 else vid)
                return False

        with pytest.raises(UnrevealedPairError):
            run_online(g, Nosy(), ArrivalPolicy("l-first", 4), params, Seed(1))


class TestTraceExport:
    def test_jsonl_schema(self):
        params = _params(3)
        g = graph_from_edges(3, [(0, 0), (1, 1)])
        pol = ArrivalPolicy("fixed-sequence", 3, payload=(0, 3, 4, 5, 1, 2))
        tr = two_stage(g, pol, params, Seed(1), config=GreedyConfig(1, 1, 0.5))
        buf = io.StringIO()
        tr.to_jsonl(buf)
        lines = [json.loads(line) for line in buf.getvalue().splitlines()]
        assert len(lines) == 7
        assert lines[0] == {"t": 1, "vertex": 0, "side": "L", "accepted": True,
                            "sizeL": 1, "sizeR": 0}
        assert lines[1]["side"] == "R" and lines[1]["accepted"] is False
        summary = lines[-1]
        assert summary == {"T_f": 1, "T_b": 4, "tau": tr.threshold_time,
                           "majority": tr.majority_side, "final_size": 2}
