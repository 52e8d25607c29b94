"""Multi-pass semi-streaming driver.

The edge set is consumed as a restartable stream whose order may change
between passes.  Resident state is per-vertex only (degrees, level samples,
lightness, labels), so memory stays within O(n polylog n) words while the
edges themselves are never materialized.

Pass schedule, always exactly PASS_COUNT = 7 passes:
  P0  degree counting (levels depend on degrees, so this comes first)
  P1  level-sample collection (coins are pure functions of the seed)
  P2  per-edge agreement decisions, discard counting, lightness marking
  P3-P6  four max-label-propagation passes; each edge's membership in the
         sparsified graph is re-decided on the fly from resident state

Label propagation is double-buffered per pass (read previous labels, write
next), so the outcome is invariant under any per-pass edge permutation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .agreement import Params
from .components import Clustering
from .graph import GraphFormatError
from .sketch import (SketchSizeAnomaly, _coin_unit, decide_agreement_from_parts,
                     level_index, sample_probability)

__all__ = [
    "PASS_COUNT",
    "ListEdgeStream",
    "FileEdgeStream",
    "StreamResult",
    "StreamRestartError",
    "MemoryBudgetError",
    "run_streaming_pipeline",
    "memory_budget_words",
]

PASS_COUNT = 7

def _budget_factor(a: float) -> float:
    # The sample-size cap scales with the sampling constant a, which the
    # resident-memory bound treats as O(1).
    return 2.0 * (5.0 + math.ceil(a))


class StreamRestartError(RuntimeError):
    """A provider pass yielded a different edge multiset size than before."""


class MemoryBudgetError(RuntimeError):
    """Resident state exceeded the semi-streaming budget."""


class ListEdgeStream:
    """In-memory provider; optionally re-permutes the edges every pass.

    Provider-held memory (the edge list itself) does not count toward the
    algorithm's budget.
    """

    def __init__(self, n: int, edges, shuffle_seed: int | None = None):
        self.n = int(n)
        arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        self._edges = arr
        self._shuffle_seed = shuffle_seed
        self._pass_no = 0

    @property
    def vertex_count(self) -> int:
        return self.n

    def __iter__(self):
        order = np.arange(self._edges.shape[0])
        if self._shuffle_seed is not None:
            rng = np.random.default_rng((self._shuffle_seed, self._pass_no))
            order = rng.permutation(order)
        self._pass_no += 1
        for i in order:
            yield int(self._edges[i, 0]), int(self._edges[i, 1])


class FileEdgeStream:
    """Edge-list file provider; re-reads the file on every pass.

    The constructor scans the file once to size the vertex set and build the
    dense id map (provider-held, outside the algorithm budget).  Passes skip
    comments, self-loops and repeated edges, exactly like bulk ingestion.
    """

    def __init__(self, path):
        self.path = path
        ids = set()
        count = 0
        for u, v in self._raw_pairs():
            ids.add(u)
            ids.add(v)
            count += 1
        if not ids:
            raise GraphFormatError(f"{path}: empty edge list")
        self.original_ids = np.array(sorted(ids), dtype=np.int64)
        self._dense = {int(x): i for i, x in enumerate(self.original_ids)}
        self.n = len(self.original_ids)

    @property
    def vertex_count(self) -> int:
        return self.n

    def _raw_pairs(self):
        with open(self.path) as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split()
                if len(parts) != 2:
                    raise GraphFormatError(
                        f"{self.path}:{lineno}: expected two integers, got {line!r}")
                yield int(parts[0]), int(parts[1])

    def __iter__(self):
        seen = set()
        for a, b in self._raw_pairs():
            if a == b:
                continue
            u, v = self._dense[a], self._dense[b]
            code = (min(u, v), max(u, v))
            if code in seen:
                continue
            seen.add(code)
            yield code


@dataclass(frozen=True)
class StreamResult:
    clustering: Clustering
    passes: int
    peak_words: int
    budget_words: int


def memory_budget_words(n: int, params: Params) -> int:
    logn = math.log(max(n, 2))
    return int(math.ceil(_budget_factor(params.a) * n * logn * logn / params.beta))


def run_streaming_pipeline(provider, params: Params, mode: str = "sketch") -> StreamResult:
    """Cluster the streamed edge set; same partition as the other drivers.

    Raises MemoryBudgetError if the resident per-vertex state ever exceeds
    the documented budget and StreamRestartError if a pass disagrees with
    the first pass about the number of edges.
    """
    if mode not in ("exact", "sketch"):
        raise ValueError(f"unknown oracle mode {mode!r}")
    n = provider.vertex_count
    budget = memory_budget_words(n, params)
    peak = 0
    force_full = mode == "exact"
    logn = math.log(max(n, 2))
    sketch_cap = 4.0 * params.a * logn / params.beta

    def account(words: int) -> int:
        nonlocal peak
        peak = max(peak, words)
        if peak > budget:
            raise MemoryBudgetError(f"resident {peak} words exceed budget {budget}")
        return words

    # P0: degrees (self-loops included afterwards).
    degrees = np.zeros(n, dtype=np.int64)
    m_seen = 0
    for u, v in provider:
        degrees[u] += 1
        degrees[v] += 1
        m_seen += 1
    degrees += 1
    levels = np.array([level_index(int(d), params.beta)[0] for d in degrees],
                      dtype=np.int64)
    base_words = 2 * n + 1  # degrees + levels + pass counter
    account(base_words)

    def check_pass_size(count):
        if count != m_seen:
            raise StreamRestartError(
                f"pass yielded {count} edges, first pass yielded {m_seen}")

    # P1: collect both level samples per vertex.
    prob_cache: dict[int, float] = {}

    def prob(k: int) -> float:
        p = prob_cache.get(k)
        if p is None:
            p = sample_probability(k, n, params)
            prob_cache[k] = p
        return p

    def heads(w: int, k: int) -> bool:
        if force_full:
            return True
        p = prob(k)
        if p >= 1.0:
            return True
        if p <= 0.0:
            return False
        return _coin_unit(params.seed, w, k) < p

    buckets: list[list[list[int]]] = [[[], []] for _ in range(n)]
    count = 0
    for u, v in provider:
        count += 1
        for x, w in ((u, v), (v, u)):
            kx = int(levels[x])
            for rel, kk in ((0, kx), (1, kx + 1)):
                if heads(w, kk):
                    buckets[x][rel].append(w)
    check_pass_size(count)
    samples0: list[np.ndarray] = [None] * n
    samples1: list[np.ndarray] = [None] * n
    sketch_words = 0
    for v in range(n):
        kv = int(levels[v])
        for rel, kk in ((0, kv), (1, kv + 1)):
            lst = buckets[v][rel]
            if heads(v, kk):
                lst.append(v)
            arr = np.asarray(sorted(lst), dtype=np.int64)
            if not force_full and prob(kk) < 1.0 and arr.size > sketch_cap:
                raise SketchSizeAnomaly(
                    f"vertex {v} level {kk}: {arr.size} samples exceed cap {sketch_cap:.0f}")
            if rel == 0:
                samples0[v] = arr
            else:
                samples1[v] = arr
            sketch_words += arr.size + 1
    del buckets
    account(base_words + sketch_words)

    def agree(u: int, v: int) -> bool:
        return decide_agreement_from_parts(
            int(degrees[u]), int(levels[u]), samples0[u], samples1[u],
            int(degrees[v]), int(levels[v]), samples0[v], samples1[v],
            params, n, force_full=force_full)

    # P2: discard counts, then lightness.
    removed = np.zeros(n, dtype=np.int64)
    count = 0
    for u, v in provider:
        count += 1
        if not agree(u, v):
            removed[u] += 1
            removed[v] += 1
    check_pass_size(count)
    is_light = removed > params.lam * degrees
    account(base_words + sketch_words + 2 * n)

    def in_tilde(u: int, v: int) -> bool:
        if is_light[u] and is_light[v]:
            return False
        return agree(u, v)

    # P3-P6: double-buffered max-label propagation.
    labels = np.arange(n, dtype=np.int64)
    for _ in range(4):
        nxt = labels.copy()
        count = 0
        for u, v in provider:
            count += 1
            if in_tilde(u, v):
                if labels[v] > nxt[u]:
                    nxt[u] = labels[v]
                if labels[u] > nxt[v]:
                    nxt[v] = labels[u]
        check_pass_size(count)
        labels = nxt
        account(base_words + sketch_words + 2 * n + 2 * n)

    return StreamResult(clustering=Clustering.from_labels(labels),
                        passes=PASS_COUNT, peak_words=peak, budget_words=budget)
