import itertools

import numpy as np
import pytest

from agreeclust.agreement import Params
from agreeclust.components import Clustering
from agreeclust.evaluation import (brute_force_opt, cluster_stats, clustering_cost,
                                   gen_gnp, gen_planted, gen_tight_instance,
                                   pivot_baseline)
from agreeclust.graph import build_graph
from agreeclust.pipeline import run_inmem_pipeline

from conftest import k_complete, path_graph


def partitions_by_recursion(items):
    """Independent set-partition enumerator used as the brute-force oracle."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for smaller in partitions_by_recursion(rest):
        for i in range(len(smaller)):
            yield smaller[:i] + [[first] + smaller[i]] + smaller[i + 1:]
        yield [[first]] + smaller


def cost_by_pair_scan(g, blocks):
    """Objective recomputed pair-by-pair from the definition."""
    label = {}
    for cid, block in enumerate(blocks):
        for v in block:
            label[v] = cid
    cost = 0
    for u, v in itertools.combinations(range(g.n), 2):
        plus = g.has_edge(u, v)
        together = label[u] == label[v]
        if plus and not together:
            cost += 1
        if not plus and together:
            cost += 1
    return cost


class TestClusteringCost:
    def test_all_singletons_pays_every_edge(self):
        g = gen_gnp(10, 0.5, seed=1)
        assert clustering_cost(g, np.arange(10)) == g.m_plus

    def test_clique_single_cluster_free(self, k4):
        assert clustering_cost(k4, np.zeros(4, int)) == 0

    def test_path_one_cluster(self, path3):
        assert clustering_cost(path3, np.zeros(3, int)) == 1

    def test_path_split(self, path3):
        assert clustering_cost(path3, np.array([0, 0, 1])) == 1
        assert clustering_cost(path3, np.array([0, 1, 1])) == 1
        assert clustering_cost(path3, np.array([0, 1, 0])) == 3

    def test_uncovered_vertex_rejected(self, path3):
        with pytest.raises(ValueError):
            clustering_cost(path3, np.zeros(2, int))

    def test_matches_pair_scan_oracle(self):
        rng = np.random.default_rng(3)
        for seed in range(5):
            g = gen_gnp(8, 0.5, seed=seed)
            labels = rng.integers(0, 3, size=8)
            blocks = [list(np.flatnonzero(labels == c)) for c in range(3)]
            blocks = [b for b in blocks if b]
            assert clustering_cost(g, labels) == cost_by_pair_scan(g, blocks)


class TestBruteForce:
    def test_clique_is_free(self, k4):
        _, cost = brute_force_opt(k4)
        assert cost == 0

    def test_path_costs_one_first_minimizer(self, path3):
        clustering, cost = brute_force_opt(path3)
        assert cost == 1
        # ties break to the first partition in restricted-growth order,
        # which is the single cluster
        assert list(clustering.assignment) == [0, 0, 0]

    def test_empty_graph_prefers_singletons(self):
        g = build_graph(4, [])
        clustering, cost = brute_force_opt(g)
        assert cost == 0
        assert clustering.num_clusters == 4

    def test_limit_enforced(self):
        with pytest.raises(ValueError):
            brute_force_opt(gen_gnp(13, 0.2, seed=0))

    def test_matches_recursive_enumeration(self):
        for seed in range(6):
            g = gen_gnp(6, 0.45, seed=seed)
            _, cost = brute_force_opt(g)
            best = min(cost_by_pair_scan(g, blocks)
                       for blocks in partitions_by_recursion(range(6)))
            assert cost == best


class TestPivot:
    def test_clique_any_seed(self, k4):
        for seed in range(10):
            c = pivot_baseline(k4, seed)
            assert c.num_clusters == 1
            assert clustering_cost(k4, c.assignment) == 0

    def test_path_pivot_at_center(self, path3):
        seed = next(s for s in range(100)
                    if np.random.default_rng(s).permutation(3)[0] == 1)
        c = pivot_baseline(path3, seed)
        assert c.num_clusters == 1
        assert clustering_cost(path3, c.assignment) == 1

    def test_three_approx_in_expectation(self):
        g = gen_gnp(8, 0.5, seed=7)
        _, opt = brute_force_opt(g)
        assert opt > 0
        costs = [clustering_cost(g, pivot_baseline(g, s).assignment) for s in range(1000)]
        assert np.mean(costs) <= 3.0 * opt + 3.0 / np.sqrt(len(costs)) * np.std(costs)


class TestGenerators:
    def test_gnp_extremes(self):
        assert gen_gnp(6, 0.0, seed=0).m_plus == 0
        assert gen_gnp(6, 1.0, seed=0).m_plus == 15

    def test_gnp_deterministic_per_seed(self):
        a = gen_gnp(40, 0.3, seed=5)
        b = gen_gnp(40, 0.3, seed=5)
        c = gen_gnp(40, 0.3, seed=6)
        assert np.array_equal(a.indices, b.indices)
        assert not np.array_equal(a.indices, c.indices)

    def test_planted_disjoint_cliques_recovered(self):
        g = gen_planted(2, 50, 1.0, 0.0, seed=1)
        run = run_inmem_pipeline(g, Params(beta=0.05, lam=0.05), "exact")
        assert run.clustering.num_clusters == 2
        assert clustering_cost(g, run.clustering.assignment) == 0

    def test_tight_instance_paper_scale(self):
        g = gen_tight_instance(100, 0.05, x_mult=1)
        assert g.n == 190
        assert g.m_plus == 2 * (95 * 94 // 2) + 25
        two_cliques = np.repeat([0, 1], 95)
        assert clustering_cost(g, two_cliques) == 25

    def test_tight_instance_doubled_boundary(self):
        g = gen_tight_instance(100, 0.05, x_mult=2)
        assert g.m_plus == 2 * (95 * 94 // 2) + 100
        two_cliques = np.repeat([0, 1], 95)
        assert clustering_cost(g, two_cliques) == 100

    def test_tight_instance_smallest_valid(self):
        g = gen_tight_instance(4, 0.25, x_mult=1)
        assert g.n == 6
        _, cost = brute_force_opt(g)
        assert cost == 1

    def test_tight_instance_infeasible_params(self):
        with pytest.raises(ValueError):
            gen_tight_instance(4, 0.05, x_mult=1)  # boundary would be empty
        with pytest.raises(ValueError):
            gen_tight_instance(10, 0.3, x_mult=3)  # boundary exceeds clique


class TestClusterStats:
    def test_clique_single_cluster(self, k4):
        stats = cluster_stats(k4, np.zeros(4, int))
        assert stats.num_clusters == 1
        assert stats.intra_cluster_edge_fraction == 1.0
        assert stats.objective == 0
        assert stats.size_histogram == {4: 1}

    def test_singletons_fraction_zero(self, k4):
        stats = cluster_stats(k4, np.arange(4))
        assert stats.intra_cluster_edge_fraction == 0.0

    def test_path_split_half(self, path3):
        stats = cluster_stats(path3, np.array([0, 0, 1]))
        assert stats.num_clusters == 2
        assert stats.intra_cluster_edge_fraction == 0.5
        assert stats.objective == 1

    def test_empty_graph_fraction_defined_as_one(self):
        g = build_graph(3, [])
        assert cluster_stats(g, np.arange(3)).intra_cluster_edge_fraction == 1.0
