"""Runtime-checkable validators for the guarantees the sparsifier promises.

Each check returns a list of violation records (dicts naming the offending
vertices or pairs); an empty list means the property held.  The structural
guarantees are only promised under ``params.analysis_valid()``.
"""

from __future__ import annotations

import math

import numpy as np

from .agreement import Params, SparsifiedGraph, edge_intersection_sizes, in_weak_agreement_exact
from .components import Clustering
from .evaluation import BRUTE_FORCE_LIMIT, brute_force_opt, clustering_cost
from .graph import SignedGraph, build_graph

__all__ = [
    "weak_agreement_pairs",
    "check_agreement_degree_bound",
    "check_agreement_intersection_bound",
    "check_agreement_chains",
    "check_heavy_distance",
    "check_original_distance",
    "check_heavy_pair_agreement",
    "check_min_in_cluster_degree",
    "check_local_optimality",
]

_ALL_PAIRS_LIMIT = 3000


def _pair_matrices(g: SignedGraph):
    if g.n > _ALL_PAIRS_LIMIT:
        raise ValueError(f"all-pairs scan limited to n <= {_ALL_PAIRS_LIMIT}")
    iu, iv = np.triu_indices(g.n, k=1)
    inter = edge_intersection_sizes(g, iu, iv)
    d = g.degrees
    sym = d[iu] + d[iv] - 2 * inter
    maxd = np.maximum(d[iu], d[iv])
    return iu, iv, inter, sym, maxd


def weak_agreement_pairs(g: SignedGraph, i: int, beta: float):
    """All unordered pairs in i-weak agreement, as (u, v) arrays."""
    iu, iv, _, sym, maxd = _pair_matrices(g)
    mask = sym < i * beta * maxd
    return iu[mask], iv[mask]


def check_agreement_degree_bound(g: SignedGraph, beta: float, max_i: int = 5) -> list[dict]:
    """Pairs in i-weak agreement must have degrees within a (1 - i*beta) factor."""
    violations = []
    d = g.degrees
    for i in range(1, max_i + 1):
        uu, vv = weak_agreement_pairs(g, i, beta)
        du, dv = d[uu], d[vv]
        ok = ((1.0 - beta * i) * du <= dv) & (dv <= du / (1.0 - i * beta))
        for idx in np.flatnonzero(~ok):
            violations.append({"check": "degree-bound", "i": i,
                               "pair": (int(uu[idx]), int(vv[idx])),
                               "degrees": (int(du[idx]), int(dv[idx]))})
    return violations


def check_agreement_intersection_bound(g: SignedGraph, beta: float, max_i: int = 5) -> list[dict]:
    """Pairs in i-weak agreement share at least (1 - i*beta) * d(v) neighbors."""
    violations = []
    iu, iv, inter, sym, maxd = _pair_matrices(g)
    d = g.degrees
    for i in range(1, max_i + 1):
        mask = sym < i * beta * maxd
        uu, vv, cc = iu[mask], iv[mask], inter[mask]
        ok = (cc >= (1.0 - i * beta) * d[uu]) & (cc >= (1.0 - i * beta) * d[vv])
        for idx in np.flatnonzero(~ok):
            violations.append({"check": "intersection-bound", "i": i,
                               "pair": (int(uu[idx]), int(vv[idx])),
                               "common": int(cc[idx])})
    return violations


def check_agreement_chains(g: SignedGraph, beta: float, max_sources: int = 64) -> list[dict]:
    """Endpoints of a k-vertex chain of consecutive agreements (k <= 5) must
    be in k-weak agreement."""
    iu, iv, _, sym, maxd = _pair_matrices(g)
    mask = sym < beta * maxd
    adj: dict[int, list[int]] = {}
    for u, v in zip(iu[mask].tolist(), iv[mask].tolist()):
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)

    violations = []
    sources = sorted(adj)[:max_sources]
    for s in sources:
        dist = {s: 0}
        frontier = [s]
        for depth in range(1, 5):  # up to 4 hops = 5 chain vertices
            nxt = []
            for x in frontier:
                for y in adj.get(x, ()):
                    if y not in dist:
                        dist[y] = depth
                        nxt.append(y)
            for y in nxt:
                k = depth + 1
                if not in_weak_agreement_exact(g, s, y, k, beta):
                    violations.append({"check": "chain", "k": k, "pair": (s, y)})
            frontier = nxt
    return violations


def _component_distances(sg: SparsifiedGraph, members: np.ndarray) -> dict[tuple[int, int], int]:
    indptr, indices = sg.tilde_adjacency()
    dist_map = {}
    member_set = set(members.tolist())
    for s in members.tolist():
        dist = {s: 0}
        frontier = [s]
        while frontier:
            nxt = []
            for x in frontier:
                for y in indices[indptr[x]:indptr[x + 1]].tolist():
                    if y in member_set and y not in dist:
                        dist[y] = dist[x] + 1
                        nxt.append(y)
            frontier = nxt
        for t, dd in dist.items():
            dist_map[(s, t)] = dd
    return dist_map


def check_heavy_distance(sg: SparsifiedGraph, clustering: Clustering,
                         bound: int = 2) -> list[dict]:
    """Two heavy vertices in one component sit within 2 hops in the
    sparsified graph."""
    violations = []
    heavy = ~sg.is_light
    for cid, members in clustering.cluster_members().items():
        hs = members[heavy[members]]
        if hs.size < 2:
            continue
        dist = _component_distances(sg, members)
        for a in hs.tolist():
            for b in hs.tolist():
                if a < b and dist.get((a, b), math.inf) > bound:
                    violations.append({"check": "heavy-distance", "component": cid,
                                       "pair": (a, b), "distance": dist.get((a, b))})
    return violations


def check_original_distance(g: SignedGraph, clustering: Clustering) -> list[dict]:
    """Same-component vertices sit within 2 hops in the original graph
    (equivalently, their neighborhoods intersect)."""
    violations = []
    for cid, members in clustering.cluster_members().items():
        if members.size < 2:
            continue
        for ai in range(members.size):
            for bi in range(ai + 1, members.size):
                a, b = int(members[ai]), int(members[bi])
                inter = np.intersect1d(g.neighbors(a), g.neighbors(b),
                                       assume_unique=True).size
                if inter == 0:
                    violations.append({"check": "original-distance", "component": cid,
                                       "pair": (a, b)})
    return violations


def check_heavy_pair_agreement(g: SignedGraph, sg: SparsifiedGraph,
                               clustering: Clustering, beta: float) -> list[dict]:
    """Same-component pairs with a heavy endpoint are in 4-weak agreement."""
    violations = []
    heavy = ~sg.is_light
    for cid, members in clustering.cluster_members().items():
        if members.size < 2:
            continue
        for ai in range(members.size):
            for bi in range(ai + 1, members.size):
                a, b = int(members[ai]), int(members[bi])
                if not (heavy[a] or heavy[b]):
                    continue
                if not in_weak_agreement_exact(g, a, b, 4, beta):
                    violations.append({"check": "heavy-pair-agreement",
                                       "component": cid, "pair": (a, b)})
    return violations


def check_min_in_cluster_degree(g: SignedGraph, clustering: Clustering,
                                params: Params) -> list[dict]:
    """Every vertex of a non-trivial component keeps induced degree at least
    (1 - 8*beta - lam) times the component size."""
    violations = []
    labels = clustering.assignment
    factor = 1.0 - 8.0 * params.beta - params.lam
    for cid, members in clustering.cluster_members().items():
        if members.size < 2:
            continue
        threshold = factor * members.size
        for u in members.tolist():
            induced = int(np.count_nonzero(labels[g.neighbors(u)] == labels[u]))
            if induced < threshold:
                violations.append({"check": "in-cluster-degree", "component": cid,
                                   "vertex": u, "induced": induced,
                                   "required": threshold})
    return violations


def check_local_optimality(g: SignedGraph, clustering: Clustering,
                           limit: int = BRUTE_FORCE_LIMIT) -> list[dict]:
    """No split of a small output cluster beats keeping it whole (rest fixed)."""
    violations = []
    for cid, members in clustering.cluster_members().items():
        if not 2 <= members.size <= limit:
            continue
        sub = _induced_subgraph(g, members)
        whole_cost = clustering_cost(sub, np.zeros(sub.n, dtype=np.int64))
        _, best_cost = brute_force_opt(sub)
        if best_cost < whole_cost:
            violations.append({"check": "local-optimality", "component": cid,
                               "whole": whole_cost, "split": best_cost})
    return violations


def _induced_subgraph(g: SignedGraph, members: np.ndarray) -> SignedGraph:
    index = {int(v): i for i, v in enumerate(members.tolist())}
    edges = []
    for u in members.tolist():
        for w in g.neighbors(u).tolist():
            if w > u and w in index:
                edges.append((index[u], index[w]))
    return build_graph(len(index), edges)
