"""Signed-graph core.

A signed graph is stored as the explicit "+" edge set in CSR form; the "-"
edges are the implicit complement and are never materialized.  Every vertex
carries a mandatory self-loop, so ``v in N(v)`` and ``d(v) >= 1`` always hold.
All set arithmetic on neighborhoods (symmetric difference, intersection,
induced degree) counts the self-loops.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import scipy.sparse as sp

__all__ = [
    "SignedGraph",
    "GraphFormatError",
    "build_graph",
    "sym_diff_size",
    "intersection_size",
    "induced_degree",
    "load_edge_list",
]


class GraphFormatError(ValueError):
    """Raised when an edge-list file cannot be parsed."""


class SignedGraph:
    """Immutable undirected "+" graph with a self-loop on every vertex.

    Attributes:
        n: number of vertices, ids are dense integers ``0..n-1``.
        indptr / indices: CSR adjacency, each row strictly sorted and
            containing the row's own vertex id (the self-loop).
        m_plus: number of non-loop "+" edges.
        edge_u / edge_v: canonical non-loop edge list with ``edge_u < edge_v``,
            sorted lexicographically.
        original_ids: optional mapping from dense ids back to external ids
            (identity when the graph was built from dense ids).
    """

    __slots__ = ("n", "indptr", "indices", "m_plus", "edge_u", "edge_v", "original_ids")

    def __init__(self, n, indptr, indices, edge_u, edge_v, original_ids=None):
        self.n = int(n)
        self.indptr = indptr
        self.indices = indices
        self.edge_u = edge_u
        self.edge_v = edge_v
        self.m_plus = int(edge_u.size)
        if original_ids is None:
            original_ids = np.arange(self.n, dtype=np.int64)
        self.original_ids = original_ids
        for arr in (self.indptr, self.indices, self.edge_u, self.edge_v, self.original_ids):
            arr.setflags(write=False)

    @property
    def degrees(self) -> np.ndarray:
        """Per-vertex degree |N(v)|, self-loop included."""
        return np.diff(self.indptr)

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted neighbor ids of v, including v itself."""
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        i = np.searchsorted(row, v)
        return i < row.size and row[i] == v

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Canonical non-loop edge list as (u, v) arrays with u < v."""
        return self.edge_u, self.edge_v

    def csr_matrix(self, dtype=np.int32) -> sp.csr_matrix:
        """Adjacency (self-loops on the diagonal) as a scipy CSR matrix."""
        data = np.ones(self.indices.size, dtype=dtype)
        return sp.csr_matrix((data, self.indices.copy(), self.indptr.copy()),
                             shape=(self.n, self.n))

    def __repr__(self):
        return f"SignedGraph(n={self.n}, m_plus={self.m_plus})"


def build_graph(n: int, edges, original_ids=None) -> SignedGraph:
    """Build a SignedGraph from a vertex count and an unordered pair list.

    Duplicate pairs and explicit self-pairs in the input are tolerated and
    collapsed; a self-loop is added for every vertex regardless of the input.

    Raises:
        ValueError: if ``n < 1`` or any vertex id falls outside ``[0, n)``;
            the message names the first offending pair.
    """
    if n < 1:
        raise ValueError(f"vertex count must be positive, got {n}")
    arr = np.asarray(edges, dtype=np.int64)
    if arr.size == 0:
        arr = arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("edges must be a sequence of (u, v) pairs")

    bad = (arr < 0) | (arr >= n)
    if bad.any():
        i = int(np.flatnonzero(bad.any(axis=1))[0])
        pair = (int(arr[i, 0]), int(arr[i, 1]))
        raise ValueError(f"vertex id out of range [0, {n}) in edge {pair}")

    lo = np.minimum(arr[:, 0], arr[:, 1])
    hi = np.maximum(arr[:, 0], arr[:, 1])
    keep = lo != hi
    lo, hi = lo[keep], hi[keep]
    if lo.size:
        code = np.unique(lo * n + hi)
        eu = (code // n).astype(np.int64)
        ev = (code % n).astype(np.int64)
    else:
        eu = np.empty(0, dtype=np.int64)
        ev = np.empty(0, dtype=np.int64)

    # Symmetrize and append the self-loops, then sort into CSR.
    src = np.concatenate([eu, ev, np.arange(n, dtype=np.int64)])
    dst = np.concatenate([ev, eu, np.arange(n, dtype=np.int64)])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    return SignedGraph(n, indptr, dst.astype(np.int64), eu, ev, original_ids)


def sym_diff_size(g: SignedGraph, u: int, v: int) -> int:
    """|N(u) symmetric-difference N(v)|, self-loops counted."""
    if u == v:
        return 0
    inter = intersection_size(g, u, v)
    return g.degree(u) + g.degree(v) - 2 * inter


def intersection_size(g: SignedGraph, u: int, v: int) -> int:
    """|N(u) intersect N(v)| via merge of the sorted adjacency rows."""
    if u == v:
        return g.degree(u)
    return int(np.intersect1d(g.neighbors(u), g.neighbors(v), assume_unique=True).size)


def induced_degree(g: SignedGraph, v: int, s) -> int:
    """Degree of v induced on the vertex set s, i.e. |N(v) intersect s|.

    The self-loop is counted iff ``v in s``.
    """
    s_arr = np.unique(np.asarray(list(s) if isinstance(s, (set, frozenset)) else s,
                                 dtype=np.int64))
    return int(np.intersect1d(g.neighbors(v), s_arr, assume_unique=True).size)


def load_edge_list(path) -> SignedGraph:
    """Read a whitespace-separated edge-list file into a SignedGraph.

    Format: one edge per line, two non-negative integers; lines starting with
    ``#`` are ignored; parallel edges and self-loops are tolerated.  Sparse
    external ids are remapped to dense ``0..n-1`` ids; the mapping is kept on
    the returned graph as ``original_ids``.
    """
    pairs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise GraphFormatError(f"{path}:{lineno}: expected two integers, got {line!r}")
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError:
                raise GraphFormatError(f"{path}:{lineno}: expected two integers, got {line!r}")
            if a < 0 or b < 0:
                raise GraphFormatError(f"{path}:{lineno}: negative vertex id in {line!r}")
            pairs.append((a, b))

    if not pairs:
        raise GraphFormatError(f"{Path(path)}: empty edge list")
    arr = np.asarray(pairs, dtype=np.int64)
    original_ids, dense = np.unique(arr, return_inverse=True)
    dense = dense.reshape(arr.shape)
    return build_graph(int(original_ids.size), dense, original_ids=original_ids)
