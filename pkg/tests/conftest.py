"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from agreeclust.agreement import Params
from agreeclust.graph import SignedGraph, build_graph


def k_complete(n: int) -> SignedGraph:
    return build_graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def path_graph(n: int) -> SignedGraph:
    return build_graph(n, [(i, i + 1) for i in range(n - 1)])


@pytest.fixture
def path3() -> SignedGraph:
    return path_graph(3)


@pytest.fixture
def k4() -> SignedGraph:
    return k_complete(4)


@pytest.fixture
def valid_params() -> Params:
    return Params(beta=1.0 / 36.0, lam=1.0 / 36.0, a=600.0, seed=13)


def make_pair_family(n: int, degree: int, sym_diff: int, count: int,
                     seed: int) -> tuple[SignedGraph, list[tuple[int, int]]]:
    """Graph hosting ``count`` planted pairs with an exact symmetric difference.

    Pair endpoints occupy vertices [0, 2*count); the rest of the vertex range
    is a shared neighbor pool.  Each endpoint pair (u, v) = (2i, 2i+1) is
    joined by an edge and connected to ``degree - 2`` pool vertices chosen so
    that |N(u) ^ N(v)| is exactly ``sym_diff`` and d(u) = d(v) = ``degree``
    (self-loops included).
    """
    if sym_diff % 2:
        raise ValueError("sym_diff must be even so both degrees can match")
    half = sym_diff // 2
    base = degree - 2
    pool = np.arange(2 * count, n)
    if base + half > pool.size:
        raise ValueError("pool too small for the requested degree")
    rng = np.random.default_rng(seed)
    edges = []
    pairs = []
    for i in range(count):
        u, v = 2 * i, 2 * i + 1
        picked = rng.choice(pool, size=base + half, replace=False)
        b_u = picked[:base]
        b_v = np.concatenate([picked[half:base], picked[base:]])
        edges.append(np.column_stack([np.full(base, u), b_u]))
        edges.append(np.column_stack([np.full(base, v), b_v]))
        edges.append(np.array([[u, v]]))
        pairs.append((u, v))
    return build_graph(n, np.concatenate(edges, axis=0)), pairs
