"""Objective, oracles, baselines and instance generators.

The clustering objective is the number of disagreements: "+" edges cut
between clusters plus "-" pairs (complement pairs) kept inside clusters.
Self-loops never contribute.  The brute-force optimum enumerates all set
partitions (restricted-growth-string order, first minimizer wins) and is the
ground truth on small instances; Pivot is the classic random-permutation
baseline.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .components import Clustering
from .graph import SignedGraph, build_graph

__all__ = [
    "ClusterStats",
    "clustering_cost",
    "cluster_stats",
    "brute_force_opt",
    "BRUTE_FORCE_LIMIT",
    "pivot_baseline",
    "gen_gnp",
    "gen_planted",
    "gen_tight_instance",
]

BRUTE_FORCE_LIMIT = 12


@dataclass(frozen=True)
class ClusterStats:
    """Solution metrics: cluster count, size histogram, in-edge fraction, cost."""

    num_clusters: int
    size_histogram: dict[int, int]
    intra_cluster_edge_fraction: float
    objective: int

    def as_dict(self) -> dict:
        return {
            "num_clusters": self.num_clusters,
            "size_histogram": {str(k): v for k, v in sorted(self.size_histogram.items())},
            "intra_cluster_edge_fraction": self.intra_cluster_edge_fraction,
            "objective": self.objective,
        }


def _labels_of(clustering) -> np.ndarray:
    if isinstance(clustering, Clustering):
        return clustering.assignment
    return np.asarray(clustering, dtype=np.int64)


def clustering_cost(g: SignedGraph, clustering) -> int:
    """Disagreement count of a partition: cut "+" edges plus intra "-" pairs."""
    labels = _labels_of(clustering)
    if labels.shape != (g.n,):
        raise ValueError(f"clustering must cover all {g.n} vertices, got shape {labels.shape}")
    eu, ev = g.edge_arrays()
    cut = int(np.count_nonzero(labels[eu] != labels[ev]))
    _, sizes = np.unique(labels, return_counts=True)
    intra_pairs = int(np.sum(sizes * (sizes - 1) // 2))
    intra_plus = g.m_plus - cut
    return cut + (intra_pairs - intra_plus)


def cluster_stats(g: SignedGraph, clustering) -> ClusterStats:
    labels = _labels_of(clustering)
    eu, ev = g.edge_arrays()
    cut = int(np.count_nonzero(labels[eu] != labels[ev]))
    intra_plus = g.m_plus - cut
    fraction = 1.0 if g.m_plus == 0 else intra_plus / g.m_plus
    _, sizes = np.unique(labels, return_counts=True)
    hist_sizes, hist_counts = np.unique(sizes, return_counts=True)
    return ClusterStats(
        num_clusters=int(sizes.size),
        size_histogram={int(s): int(c) for s, c in zip(hist_sizes, hist_counts)},
        intra_cluster_edge_fraction=fraction,
        objective=clustering_cost(g, labels),
    )


@lru_cache(maxsize=4)
def _all_partitions(n: int) -> np.ndarray:
    """All set partitions of n items as restricted growth strings, in RGS order."""
    parts = np.zeros((1, 1), dtype=np.int8)
    maxes = np.zeros(1, dtype=np.int8)
    for _ in range(n - 1):
        fan = maxes.astype(np.int64) + 2
        rows = np.repeat(np.arange(parts.shape[0]), fan)
        offsets = np.cumsum(fan) - fan
        new_col = (np.arange(rows.size) - offsets[rows]).astype(np.int8)
        parts = np.concatenate([parts[rows], new_col[:, None]], axis=1)
        maxes = np.maximum(maxes[rows], new_col)
    return parts


def brute_force_opt(g: SignedGraph) -> tuple[Clustering, int]:
    """Exhaustive optimum over all partitions; ties go to the first in RGS order.

    Hard-limited to n <= 12 (about 4.2M partitions).
    """
    n = g.n
    if n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force limited to n <= {BRUTE_FORCE_LIMIT}, got {n}")
    parts = _all_partitions(n)
    num = parts.shape[0]

    same_pairs = np.zeros(num, dtype=np.int64)
    for u in range(n):
        for v in range(u + 1, n):
            same_pairs += parts[:, u] == parts[:, v]

    eu, ev = g.edge_arrays()
    intra_plus = np.zeros(num, dtype=np.int64)
    for u, v in zip(eu.tolist(), ev.tolist()):
        intra_plus += parts[:, u] == parts[:, v]

    # cut + ("-" pairs inside) = (m - intra_plus) + (same_pairs - intra_plus)
    costs = (g.m_plus - intra_plus) + (same_pairs - intra_plus)
    best = int(np.argmin(costs))
    return Clustering.from_labels(parts[best].astype(np.int64)), int(costs[best])


def pivot_baseline(g: SignedGraph, seed: int) -> Clustering:
    """Random-permutation pivot clustering.

    Walk a seeded permutation; each still-unclustered vertex becomes a pivot
    and absorbs its unclustered "+" neighbors.
    """
    rng = np.random.default_rng(seed)
    order = rng.permutation(g.n)
    labels = np.full(g.n, -1, dtype=np.int64)
    next_id = 0
    for pivot in order.tolist():
        if labels[pivot] >= 0:
            continue
        labels[pivot] = next_id
        for w in g.neighbors(pivot).tolist():
            if labels[w] < 0:
                labels[w] = next_id
        next_id += 1
    return Clustering.from_labels(labels)


def gen_gnp(n: int, p: float, seed: int = 0) -> SignedGraph:
    """Uniform random graph: every pair is a "+" edge with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    if p == 0.0 or n == 1:
        return build_graph(n, [])
    iu, iv = np.triu_indices(n, k=1)
    if p == 1.0:
        mask = np.ones(iu.size, dtype=bool)
    else:
        mask = rng.random(iu.size) < p
    return build_graph(n, np.column_stack([iu[mask], iv[mask]]))


def gen_planted(k: int, size: int, p_in: float, p_out: float, seed: int = 0) -> SignedGraph:
    """Planted-partition graph: k blocks of ``size`` vertices.

    Pairs inside a block are "+" edges with probability p_in, pairs across
    blocks with probability p_out.
    """
    for name, p in (("p_in", p_in), ("p_out", p_out)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name} must be in [0, 1], got {p}")
    n = k * size
    rng = np.random.default_rng(seed)
    iu, iv = np.triu_indices(n, k=1)
    same = (iu // size) == (iv // size)
    prob = np.where(same, p_in, p_out)
    mask = rng.random(iu.size) < prob
    return build_graph(n, np.column_stack([iu[mask], iv[mask]]))


def gen_tight_instance(d: int, beta: float, x_mult: float = 1.0) -> SignedGraph:
    """Two cliques bridged through fully cross-connected boundary sets.

    Builds two disjoint cliques of size ``round((1-beta)*d)``; the first
    ``round(x_mult*beta*d)`` vertices of each form the boundary sets, which
    are completely joined to each other.  With x_mult = 1 the boundary pairs
    sit exactly on the agreement threshold under the self-loop convention;
    x_mult = 2 pushes them robustly outside agreement, which makes the
    all-singleton outcome of the pipeline reproducible.
    """
    size_a = int(round((1.0 - beta) * d))
    size_x = int(round(x_mult * beta * d))
    if size_x < 1:
        raise ValueError(f"boundary size round({x_mult}*{beta}*{d}) must be >= 1")
    if size_a < size_x:
        raise ValueError(f"clique size {size_a} smaller than boundary size {size_x}")
    n = 2 * size_a
    iu, iv = np.triu_indices(size_a, k=1)
    edges = [np.column_stack([iu, iv]),
             np.column_stack([iu + size_a, iv + size_a])]
    x1 = np.arange(size_x)
    x2 = np.arange(size_x) + size_a
    cross_u, cross_v = np.meshgrid(x1, x2, indexing="ij")
    edges.append(np.column_stack([cross_u.ravel(), cross_v.ravel()]))
    return build_graph(n, np.concatenate(edges, axis=0))
