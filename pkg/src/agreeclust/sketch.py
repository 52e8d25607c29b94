"""Sampled agreement testing from shared level samples.

Every vertex keeps two downsampled copies of its neighborhood, one per
degree level.  Levels are powers of ``1/(1-beta)``; a vertex of degree d sits
at the largest level not exceeding d and also keeps the next level up, so any
two degree-compatible vertices share at least one level.  Level membership is
decided by a global per-(vertex, level) coin, a pure function of the seed, so
the same vertex lands in every neighbor's sample at a level or in none of
them.  The pair statistic is the symmetric difference of the two common-level
samples, accepted when it stays under 0.9 of the threshold ``tau``.

When the sampling probability at the common level is 1 the samples are the
full neighborhoods and the decision falls back to the exact agreement
inequality (a sampling-inflated threshold would be meaningless there); pass
``exact_regime="threshold"`` to keep the literal 0.9*tau rule instead for
comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .agreement import Params, degree_compatible
from .graph import SignedGraph

__all__ = [
    "SampleSketch",
    "SketchSizeAnomaly",
    "LevelMismatchError",
    "level_index",
    "level_value",
    "sample_probability",
    "sample_member",
    "build_sketches",
    "agreement_sampled",
    "sketch_agreement_oracle",
]

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SketchSizeAnomaly(RuntimeError):
    """A sample set grew far beyond its expectation; the coins are suspect."""


class LevelMismatchError(RuntimeError):
    """Two degree-compatible sketches share no level; level_index is broken."""


@dataclass(frozen=True)
class SampleSketch:
    """Per-vertex sample pair.

    ``level`` is the integer exponent k of the vertex's base level
    ``j = (1/(1-beta))**k``; level identity between endpoints is always the
    exponent, never the real value.  ``samples_at_level`` holds the sampled
    neighbors at level k, ``samples_at_next`` at level k + 1; both are sorted
    subsets of N(owner) (self-loop included when its coin lands heads).
    """

    owner: int
    level: int
    samples_at_level: np.ndarray
    samples_at_next: np.ndarray
    degree: int


def level_index(d: int, beta: float) -> tuple[int, float]:
    """Largest power of 1/(1-beta) not exceeding d, as (exponent, value)."""
    if d < 1:
        raise ValueError(f"degree must be >= 1, got {d}")
    base = 1.0 / (1.0 - beta)
    k = int(math.floor(math.log(d) / math.log(base)))
    if k < 0:
        k = 0
    # Guard against floating-point drift right at a power boundary.
    while base ** (k + 1) <= d:
        k += 1
    while k > 0 and base ** k > d:
        k -= 1
    return k, base ** k


def level_value(k: int, beta: float) -> float:
    return (1.0 / (1.0 - beta)) ** k


def sample_probability(k: int, n: int, params: Params) -> float:
    """Per-vertex coin probability at level exponent k (natural log)."""
    j = level_value(k, params.beta)
    return min(params.a * math.log(n) / (params.beta * j), 1.0)


def _mix64(x: int) -> int:
    x &= _MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & _MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & _MASK64
    return x ^ (x >> 31)


def _coin_unit(seed: int, w: int, k: int) -> float:
    """Uniform [0,1) value for the (w, k) coin; stable across platforms."""
    h = _mix64((seed & _MASK64) + _GAMMA * (k + 1))
    h = _mix64(h ^ (w & _MASK64))
    return float(h >> 11) * 2.0 ** -53


def _coin_unit_batch(seed: int, w: np.ndarray, k: int) -> np.ndarray:
    base = np.uint64(_mix64((seed & _MASK64) + _GAMMA * (k + 1)))
    x = base ^ w.astype(np.uint64)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(_MIX1)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(_MIX2)
    x = x ^ (x >> np.uint64(31))
    return (x >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


def sample_member(seed: int, w: int, k: int, p: float) -> bool:
    """The shared coin: is vertex w sampled at level exponent k?

    A pure function of (seed, w, k), identical no matter which vertex's
    sample is being assembled.
    """
    if p >= 1.0:
        return True
    if p <= 0.0:
        return False
    return _coin_unit(seed, w, k) < p


def _sample_row(neigh: np.ndarray, seed: int, k: int, p: float) -> np.ndarray:
    if p >= 1.0:
        return neigh.astype(np.int64)
    if p <= 0.0:
        return np.empty(0, dtype=np.int64)
    return neigh[_coin_unit_batch(seed, neigh, k) < p].astype(np.int64)


def build_sketches(g: SignedGraph, params: Params, *, force_full: bool = False,
                   cap_factor: float = 4.0) -> list[SampleSketch]:
    """Assemble both level samples for every vertex.

    ``force_full`` keeps every neighbor at both levels (probability-1 coins),
    which turns downstream decisions into the exact agreement test.  When a
    level actually subsamples (p < 1), sample sizes are capped at
    ``cap_factor * a * log(n) / beta``; exceeding the cap indicates broken
    coins and raises SketchSizeAnomaly.
    """
    n = g.n
    cap = cap_factor * params.a * math.log(max(n, 2)) / params.beta
    sketches = []
    for v in range(n):
        d = g.degree(v)
        k, _ = level_index(d, params.beta)
        neigh = g.neighbors(v)
        row = []
        for kk in (k, k + 1):
            p = 1.0 if force_full else sample_probability(kk, n, params)
            samples = _sample_row(neigh, params.seed, kk, p)
            if p < 1.0 and samples.size > cap:
                raise SketchSizeAnomaly(
                    f"vertex {v} level {kk}: {samples.size} samples exceed cap {cap:.0f}")
            row.append(samples)
        sketches.append(SampleSketch(owner=v, level=k,
                                     samples_at_level=row[0],
                                     samples_at_next=row[1],
                                     degree=d))
    return sketches


def _samples_at(sk: SampleSketch, k: int) -> np.ndarray:
    if k == sk.level:
        return sk.samples_at_level
    if k == sk.level + 1:
        return sk.samples_at_next
    raise LevelMismatchError(
        f"vertex {sk.owner} (level {sk.level}) holds no samples for level {k}")


def decide_agreement_from_parts(du: int, ku: int, su_level: np.ndarray, su_next: np.ndarray,
                                dv: int, kv: int, sv_level: np.ndarray, sv_next: np.ndarray,
                                params: Params, n: int, *,
                                exact_regime: str = "definition",
                                force_full: bool = False) -> bool:
    """Core decision shared by all drivers; sketches given as raw parts."""
    if not degree_compatible(du, dv, params.beta):
        return False
    if abs(ku - kv) > 1:
        raise LevelMismatchError(
            f"levels {ku} and {kv} of a degree-compatible pair do not overlap")
    # Both endpoints hold {k, k+1}; prefer the larger shared exponent.
    kc = max(ku, kv) + (1 if ku == kv else 0)
    su = su_next if kc == ku + 1 else su_level
    sv = sv_next if kc == kv + 1 else sv_level
    x = int(su.size) + int(sv.size) \
        - 2 * int(np.intersect1d(su, sv, assume_unique=True).size)
    maxd = max(du, dv)
    p = 1.0 if force_full else sample_probability(kc, n, params)
    if p >= 1.0 and exact_regime == "definition":
        # Samples are the full neighborhoods: use the exact inequality.
        return x < params.beta * maxd
    tau = params.a * math.log(n) / level_value(kc, params.beta) * maxd
    return x <= 0.9 * tau


def agreement_sampled(sketch_u: SampleSketch, sketch_v: SampleSketch, params: Params,
                      n: int, *, exact_regime: str = "definition",
                      force_full: bool = False) -> bool:
    """Yes/No agreement decision from two sketches built with the same seed."""
    return decide_agreement_from_parts(
        sketch_u.degree, sketch_u.level,
        sketch_u.samples_at_level, sketch_u.samples_at_next,
        sketch_v.degree, sketch_v.level,
        sketch_v.samples_at_level, sketch_v.samples_at_next,
        params, n, exact_regime=exact_regime, force_full=force_full)


def sketch_agreement_oracle(g: SignedGraph, params: Params, *,
                            force_full: bool = False,
                            exact_regime: str = "definition"):
    """Bulk pair predicate backed by freshly built sketches.

    The sketches are built once and frozen, so repeated evaluation of the
    same pair always returns the same answer.
    """
    sketches = build_sketches(g, params, force_full=force_full)
    n = g.n

    def oracle(u_arr: np.ndarray, v_arr: np.ndarray) -> np.ndarray:
        out = np.empty(len(u_arr), dtype=bool)
        for i, (u, v) in enumerate(zip(u_arr, v_arr)):
            out[i] = agreement_sampled(sketches[int(u)], sketches[int(v)], params, n,
                                       exact_regime=exact_regime, force_full=force_full)
        return out

    oracle.label = "sketch"
    oracle.sketches = sketches
    return oracle
