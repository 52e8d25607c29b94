"""Neighborhood agreement and the two-step edge-discard sparsification.

Two vertices are in i-weak agreement when ``|N(u) ^ N(v)| < i * beta *
max(d(u), d(v))`` (strict inequality; ``^`` is symmetric difference over
neighborhoods that include the self-loops).  "Agreement" means i = 1.

Sparsification first discards every edge whose endpoints the agreement oracle
rejects, with all decisions evaluated against the original graph; a vertex
that loses strictly more than a ``lam`` fraction of its neighbors in that step
is labeled light, and edges between two light vertices are then discarded as
well.  Self-loops are exempt from both steps.  The surviving edges form the
sparsified graph whose connected components are the output clusters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graph import SignedGraph

__all__ = [
    "Params",
    "SparsifiedGraph",
    "in_weak_agreement_exact",
    "degree_compatible",
    "exact_agreement_oracle",
    "sparsify",
    "edge_intersection_sizes",
]

# At most this many integer multiply-adds go through the sparse matmul path;
# denser inputs switch to a float32 BLAS product (exact for counts < 2**24).
_SPARSE_OPS_LIMIT = 3e8


@dataclass(frozen=True)
class Params:
    """Run parameters.

    beta: agreement slack, fraction in (0, 1).
    lam: light-vertex threshold, fraction in (0, 1); a vertex is light when
        it loses strictly more than ``lam * d(v)`` incident edges in the
        agreement-discard step (d(v) counts the self-loop).
    a: positive constant scaling the neighborhood-sample size.
    seed: 64-bit seed driving every random choice (sample coins).
    """

    beta: float = 1.0 / 36.0
    lam: float = 1.0 / 36.0
    a: float = 600.0
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.beta < 1.0):
            raise ValueError(f"beta must be in (0, 1), got {self.beta}")
        if not (0.0 < self.lam < 1.0):
            raise ValueError(f"lam must be in (0, 1), got {self.lam}")
        if self.a <= 0:
            raise ValueError(f"a must be positive, got {self.a}")

    def analysis_valid(self) -> bool:
        """True when the guarantees asserted by the validators apply.

        Runs with other settings are allowed, but the diameter bound, the
        in-cluster degree bound and the approximation factor are only
        promised under these constraints.
        """
        return (self.beta < 1.0 / 20.0
                and 5.0 * self.beta + 2.0 * self.lam < 1.0
                and 8.0 * self.beta + self.lam <= 0.25)

    def approximation_factor(self) -> float:
        """Worst-case cost ratio versus the optimum under analysis_valid()."""
        return 2.0 + 3.0 / self.beta + 1.0 / self.lam + 1.0 / (self.beta * self.lam)


@dataclass(frozen=True)
class SparsifiedGraph:
    """Result of the two discard steps.

    kept/kept_step1 are booleans aligned with ``base.edge_arrays()``;
    ``kept`` marks edges surviving both steps, ``kept_step1`` only the
    agreement step.  ``removed_step1[v]`` counts v's incident edges discarded
    by the agreement step, and ``is_light[v]`` is the resulting label.
    """

    base: SignedGraph
    kept: np.ndarray
    kept_step1: np.ndarray
    is_light: np.ndarray
    removed_step1: np.ndarray

    def tilde_edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Non-loop edges of the sparsified graph."""
        return self.base.edge_u[self.kept], self.base.edge_v[self.kept]

    def num_kept(self) -> int:
        return int(np.count_nonzero(self.kept))

    def tilde_adjacency(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR (indptr, indices) of the sparsified graph, self-loops included."""
        n = self.base.n
        eu, ev = self.tilde_edge_arrays()
        src = np.concatenate([eu, ev, np.arange(n, dtype=np.int64)])
        dst = np.concatenate([ev, eu, np.arange(n, dtype=np.int64)])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        return indptr, dst


def in_weak_agreement_exact(g: SignedGraph, u: int, v: int, i: int, beta: float) -> bool:
    """Exact i-weak agreement test; i = 1 is plain agreement."""
    if i < 1:
        raise ValueError(f"i must be >= 1, got {i}")
    if u == v:
        return True
    du, dv = g.degree(u), g.degree(v)
    inter = int(np.intersect1d(g.neighbors(u), g.neighbors(v), assume_unique=True).size)
    sym = du + dv - 2 * inter
    return sym < i * beta * max(du, dv)


def degree_compatible(du: int, dv: int, beta: float) -> bool:
    """Necessary degree condition for agreement.

    False certifies the pair is not in agreement (their degrees are not
    within a 1 - beta factor); True is necessary but not sufficient.
    """
    if du <= 0 or dv <= 0:
        raise ValueError("degrees must be positive")
    return min(du, dv) >= (1.0 - beta) * max(du, dv)


def edge_intersection_sizes(g: SignedGraph, u_arr: np.ndarray, v_arr: np.ndarray) -> np.ndarray:
    """|N(u) intersect N(v)| for many pairs at once.

    Uses A @ A on the adjacency matrix (self-loops on the diagonal), reading
    the products off at the requested pair positions.  Switches to a dense
    float32 product for graphs too dense for the sparse kernel; counts are
    at most n < 2**24 so the float path is exact.
    """
    if u_arr.size == 0:
        return np.empty(0, dtype=np.int64)
    degs = g.degrees.astype(np.float64)
    est_ops = float(np.sum(degs * degs))
    if est_ops > _SPARSE_OPS_LIMIT:
        dense = np.zeros((g.n, g.n), dtype=np.float32)
        rows = np.repeat(np.arange(g.n), np.diff(g.indptr))
        dense[rows, g.indices] = 1.0
        prod = dense @ dense.T
        return prod[u_arr, v_arr].astype(np.int64)
    a = g.csr_matrix(dtype=np.int32)
    prod = (a @ a).tocsr()
    return np.asarray(prod[u_arr, v_arr]).ravel().astype(np.int64)


def exact_agreement_oracle(g: SignedGraph, beta: float):
    """Bulk agreement predicate over vertex-pair arrays, exact semantics."""
    degs = g.degrees

    def oracle(u_arr: np.ndarray, v_arr: np.ndarray) -> np.ndarray:
        inter = edge_intersection_sizes(g, u_arr, v_arr)
        du, dv = degs[u_arr], degs[v_arr]
        sym = du + dv - 2 * inter
        return sym < beta * np.maximum(du, dv)

    oracle.label = "exact"
    return oracle


def sparsify(g: SignedGraph, params: Params, oracle) -> SparsifiedGraph:
    """Run both discard steps against a fixed agreement oracle.

    The oracle is a symmetric deterministic predicate over pair arrays and is
    evaluated once per undirected edge, always against the original graph;
    the two steps are phase-separated, so the result does not depend on edge
    order.  Light vertices are those with ``removed_step1 > lam * d``; edges
    between two light vertices are then dropped.
    """
    eu, ev = g.edge_arrays()
    agree = np.asarray(oracle(eu, ev), dtype=bool)

    removed = np.zeros(g.n, dtype=np.int64)
    np.add.at(removed, eu[~agree], 1)
    np.add.at(removed, ev[~agree], 1)

    is_light = removed > params.lam * g.degrees
    kept = agree & ~(is_light[eu] & is_light[ev])
    return SparsifiedGraph(base=g, kept=kept, kept_step1=agree,
                           is_light=is_light, removed_step1=removed)
