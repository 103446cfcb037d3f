import math

import numpy as np
import pytest

from imgm.diffusion import (DiffusionModel, RngStream, estimate_spread, reverse_step_ic,
                            reverse_step_lt, simulate_counts, simulate_spread)
from imgm.errors import ValidationError
from imgm.graph import Graph
from imgm.oracle import LiveEdgeWorlds, exact_spread

from _fixtures import random_graph

IC, LT = DiffusionModel.IC, DiffusionModel.LT


def star(deg, p):
    return Graph.from_edges(deg + 1, [(0, j, p) for j in range(1, deg + 1)])


class TestRngStream:
    def test_key_is_deterministic(self):
        assert RngStream(5, 3).key() == RngStream(5, 3).key()

    def test_distinct_streams(self):
        keys = {RngStream(5, i).key() for i in range(1000)}
        keys |= {RngStream(6, i).key() for i in range(1000)}
        assert len(keys) == 2000

    def test_large_seed_accepted(self):
        RngStream(2**64 - 1, 2**50).key()


class TestSimulateSpread:
    def test_certain_chain(self):
        g = Graph.from_edges(2, [(0, 1, 1.0)])
        assert simulate_spread(g, IC, {0}, RngStream(1)) == {0, 1}
        assert simulate_spread(g, LT, {0}, RngStream(1)) == {0, 1}

    def test_dead_edge(self):
        g = Graph.from_edges(2, [(0, 1, 0.0)])
        for s in range(50):
            assert simulate_spread(g, IC, {0}, RngStream(s)) == {0}
            assert simulate_spread(g, LT, {0}, RngStream(s)) == {0}

    def test_seeds_included(self):
        g = random_graph(np.random.default_rng(0), 12, 30)
        res = simulate_spread(g, IC, {2, 5, 7}, RngStream(9))
        assert {2, 5, 7} <= res

    def test_seed_out_of_range(self):
        g = star(3, 0.5)
        with pytest.raises(ValidationError):
            simulate_spread(g, IC, {4}, RngStream(0))

    def test_star_binomial_mean(self):
        deg, n_sims = 8, 100_000
        est = estimate_spread(star(deg, 0.5), IC, {0}, n_sims, RngStream(11))
        sd = math.sqrt(deg * 0.25 / n_sims)
        assert abs(est.mean - (1 + 0.5 * deg)) <= 3 * sd

    @pytest.mark.parametrize("model", [IC, LT])
    def test_monotone_under_common_stream(self, model):
        rng = np.random.default_rng(4)
        for trial in range(40):
            g = random_graph(rng, 15, 45, lt=True)
            S = set(rng.choice(15, size=2, replace=False).tolist())
            Sp = S | set(rng.choice(15, size=3, replace=False).tolist())
            stream = RngStream(trial, 17)
            assert simulate_spread(g, model, S, stream) <= simulate_spread(g, model, Sp, stream)

    def test_blocked_node_never_active(self):
        g = Graph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])
        assert simulate_spread(g, IC, {0}, RngStream(0), blocked_nodes=[1]) == {0}
        assert simulate_spread(g, LT, {0}, RngStream(0), blocked_edges=[1]) == {0, 1}


class TestEstimateSpread:
    def test_empty_seed_set(self):
        est = estimate_spread(star(3, 0.5), IC, set(), 100, RngStream(0))
        assert est.mean == 0 and est.stderr == 0

    def test_certain_edge_exact(self):
        g = Graph.from_edges(2, [(0, 1, 1.0)])
        for n_sims in (1, 7, 100):
            est = estimate_spread(g, IC, {0}, n_sims, RngStream(3))
            assert est.mean == 2.0 and est.stderr == 0.0

    def test_two_edges_against_oracle(self):
        g = Graph.from_edges(3, [(0, 1, 0.5), (1, 2, 0.5)])
        est = estimate_spread(g, IC, {0}, 20_000, RngStream(5))
        assert abs(est.mean - exact_spread(g, [0])) <= 3 * est.stderr

    def test_lt_against_oracle(self):
        g = random_graph(np.random.default_rng(8), 7, 14, lt=True)
        est = estimate_spread(g, LT, {0, 3}, 40_000, RngStream(2))
        assert abs(est.mean - exact_spread(g, [0, 3], "lt")) <= 3 * est.stderr

    def test_consecutive_streams(self):
        g = random_graph(np.random.default_rng(1), 10, 25)
        vals = simulate_counts(g, IC, [[0]], 20, RngStream(4, 100))
        single = [len(simulate_spread(g, IC, {0}, RngStream(4, 100 + s))) for s in range(20)]
        assert vals.tolist() == single

    def test_requires_positive_sims(self):
        with pytest.raises(ValidationError):
            estimate_spread(star(2, 0.5), IC, {0}, 0, RngStream(0))


class TestReverseStepIC:
    def test_isolated_root(self):
        assert reverse_step_ic(Graph(3, [], [], []), 1, RngStream(0)) == {1}

    def test_certain_in_edge(self):
        assert reverse_step_ic(Graph.from_edges(2, [(1, 0, 1.0)]), 0, RngStream(0)) == {0, 1}

    def test_bernoulli_frequency(self):
        g = Graph.from_edges(2, [(1, 0, 0.3)])
        n = 100_000
        hits = sum(1 in reverse_step_ic(g, 0, RngStream(21, i)) for i in range(n))
        assert abs(hits / n - 0.3) <= 3 * math.sqrt(0.21 / n)

    def test_inclusion_matches_reachability(self):
        """Pr[u in R(root)] equals Pr[root reachable from u] in the live-edge graph."""
        g = random_graph(np.random.default_rng(12), 6, 12)
        worlds = LiveEdgeWorlds(g, "ic")
        n_samples = 20_000
        for root in range(6):
            counts = np.zeros(6)
            for i in range(n_samples):
                for u in reverse_step_ic(g, root, RngStream(root, i)):
                    counts[u] += 1
            for u in range(6):
                exact = float(worlds.prob @ ((worlds.reach([u]) >> np.uint64(root)) & np.uint64(1)))
                sd = math.sqrt(max(exact * (1 - exact), 1e-12) / n_samples)
                assert abs(counts[u] / n_samples - exact) <= 4.5 * sd + 1e-12


class TestReverseStepLT:
    def test_no_in_neighbours(self):
        assert reverse_step_lt(Graph(2, [], [], []), 0, RngStream(0)) == ([0], [])

    def test_forced_step(self):
        g = Graph.from_edges(2, [(1, 0, 1.0)])
        assert reverse_step_lt(g, 0, RngStream(0)) == ([0, 1], [(1, 0)])

    def test_full_weight_always_leaves_root(self):
        g = Graph.from_edges(3, [(1, 0, 0.5), (2, 0, 0.5), (0, 1, 0.5), (2, 1, 0.5),
                                 (0, 2, 0.5), (1, 2, 0.5)])
        for i in range(5000):
            nodes, edges = reverse_step_lt(g, 0, RngStream(1, i))
            assert len(nodes) >= 2 and len(edges) == len(nodes) - 1
            assert len(set(nodes)) == len(nodes)

    def test_step_frequencies(self):
        g = Graph.from_edges(3, [(1, 0, 0.2), (2, 0, 0.5)])
        n = 50_000
        first = [reverse_step_lt(g, 0, RngStream(2, i))[0] for i in range(n)]
        f1 = sum(p[1:2] == [1] for p in first) / n
        f_stop = sum(len(p) == 1 for p in first) / n
        assert abs(f1 - 0.2) <= 3 * math.sqrt(0.16 / n)
        assert abs(f_stop - 0.3) <= 3 * math.sqrt(0.21 / n)

    def test_edges_follow_walk(self):
        g = random_graph(np.random.default_rng(3), 10, 30, lt=True)
        for i in range(200):
            nodes, edges = reverse_step_lt(g, 4, RngStream(9, i))
            assert edges == [(b, a) for a, b in zip(nodes, nodes[1:])]
