"""Deterministic simulator of synchronous shared-nothing parallel rounds.

Model: ``num_machines`` logical machines, each capped at ``S`` words of
memory, where ``S = ceil(n**delta)`` and a word holds one vertex id or one
counter.  Computation alternates local work with a keyed shuffle; per round a
machine may send at most S words, receive at most S words, and hold at most S
resident words.  Strict enforcement turns any cap overrun into an error;
audit enforcement records overruns in the trace and keeps going.

Accounting conventions:
  * message size = 1 word for the key plus one word per payload element;
  * resident size = 3 words per held edge, 3 per cached vertex meta entry,
    2 + sample words per cached sketch, 2 per cached flag/label, and
    5 + holder-list + sample words per home record.

The pipeline executes a fixed stage schedule, one shuffle per stage:

   1. degree aggregation (per-endpoint counts, combined per source machine)
   2. vertex meta (degree, level) delivery to edge-holding machines
   3. level-sample collection at vertex homes (coin-filtered neighbors)
   4. sample broadcast, first hop (homes to relay holders)
   5. sample broadcast, second hop (relays to remaining holders)
   6. per-edge agreement decisions, discard-count aggregation at homes
   7. lightness delivery to holders (edges between two light vertices drop)
   8-15. four max-label-propagation iterations, two rounds each
         (labels out to holders, per-edge maxes back to homes)

The final labels are read off the vertex homes by the driver without a
further shuffle, so the round count is MPC_ROUNDS = 15 for every input,
machine count and oracle mode.  Per-vertex reductions are pre-combined on
the sending machine and the sample broadcast uses a two-hop relay tree, so
no single round requires a machine to emit a vertex's data more than
O(sqrt(degree)) times.

Routing is a fixed function of the key: with at least n + m machines,
vertex homes and edge holders get dedicated collision-free machine ranges;
with fewer machines both collapse to a hashed placement.  Total
communication stays within ``C * m * log(n)`` words for
``C = 16 + 8 * ceil(min(maxdeg + 1, a*log(n)/beta + 1) / log(n))``, since the
dominant stage ships at most one (capped) sketch per edge endpoint per hop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .agreement import Params
from .components import Clustering
from .graph import SignedGraph
from .sketch import (SketchSizeAnomaly, _coin_unit, decide_agreement_from_parts,
                     level_index, sample_probability)

__all__ = [
    "MpcConfig",
    "MpcTrace",
    "MpcConfigError",
    "MpcCapViolation",
    "MpcRoutingError",
    "MPC_ROUNDS",
    "shuffle",
    "run_mpc_pipeline",
    "plan_resource_audit",
    "communication_budget",
]

MPC_ROUNDS = 15

_SKETCH_CAP_FACTOR = 4.0


class MpcConfigError(ValueError):
    """The configuration cannot host the input under strict enforcement."""


class MpcRoutingError(ValueError):
    """A message key resolved to no valid machine."""


class MpcCapViolation(RuntimeError):
    def __init__(self, info: dict):
        self.info = info
        super().__init__(
            "machine {machine} {kind} {words} words in round {round} ({label}), "
            "cap {cap}".format(**info))


@dataclass(frozen=True)
class MpcConfig:
    """Machine count, memory exponent and enforcement mode.

    The per-machine cap is ``ceil(n**delta)`` words unless ``memory_cap``
    overrides it explicitly (useful for driving the shuffle directly).
    """

    num_machines: int
    delta: float = 0.9
    enforcement: str = "audit"
    memory_cap: int | None = None

    def __post_init__(self):
        if self.num_machines < 1:
            raise MpcConfigError(f"need at least one machine, got {self.num_machines}")
        if not (0.0 < self.delta < 1.0):
            raise MpcConfigError(f"delta must be in (0, 1), got {self.delta}")
        if self.enforcement not in ("strict", "audit"):
            raise MpcConfigError(f"enforcement must be strict or audit, got {self.enforcement!r}")
        if self.memory_cap is not None and self.memory_cap < 1:
            raise MpcConfigError(f"memory_cap must be positive, got {self.memory_cap}")

    def resolved_cap(self, n: int) -> int:
        if self.memory_cap is not None:
            return self.memory_cap
        return int(math.ceil(n ** self.delta))


@dataclass
class MpcTrace:
    """Auditable record of the simulated execution."""

    num_machines: int = 0
    memory_cap: int = 0
    rounds: int = 0
    total_words: int = 0
    per_round: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    _pending: dict | None = None

    def begin_round(self, label: str, sent: list[int], recv: list[int]) -> None:
        self.rounds += 1
        self.total_words += sum(sent)
        self._pending = {
            "label": label,
            "sent_max": max(sent, default=0),
            "recv_max": max(recv, default=0),
            "resident_max": 0,
        }

    def end_round(self, residents: list[int], config: MpcConfig, cap: int) -> None:
        rec = self._pending
        rec["resident_max"] = max(residents, default=0)
        self.per_round.append(rec)
        self._pending = None
        worst = int(np.argmax(residents)) if residents else 0
        if rec["resident_max"] > cap:
            info = {"round": self.rounds, "label": rec["label"], "machine": worst,
                    "kind": "resident", "words": rec["resident_max"], "cap": cap}
            if config.enforcement == "strict":
                raise MpcCapViolation(info)
            self.violations.append(info)

    def to_json(self) -> dict:
        return {
            "rounds": self.rounds,
            "per_round": [
                {"sent_max": r["sent_max"], "recv_max": r["recv_max"],
                 "resident_max": r["resident_max"], "label": r["label"]}
                for r in self.per_round
            ],
            "total_words": self.total_words,
            "num_machines": self.num_machines,
            "memory_cap": self.memory_cap,
            "violations": self.violations,
        }


def _mix(x: int) -> int:
    x &= (1 << 64) - 1
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & ((1 << 64) - 1)
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & ((1 << 64) - 1)
    return x ^ (x >> 31)


class Router:
    """Fixed key-to-machine map.

    Keys are tuples: ("v", v) routes to v's home, ("e", i) places edge i,
    ("m", j) addresses machine j directly.  Given at least n + m machines,
    homes occupy machines [0, n) and edges spread injectively over the rest;
    otherwise both fall back to a hashed placement.
    """

    def __init__(self, n: int, m: int, num_machines: int):
        self.n = n
        self.m = m
        self.num_machines = num_machines
        self.structured = num_machines >= n + m

    def __call__(self, key) -> int:
        if not isinstance(key, tuple) or not key:
            raise MpcRoutingError(f"malformed message key {key!r}")
        kind = key[0]
        if kind == "m":
            return key[1] % self.num_machines
        if kind == "v":
            if self.structured:
                return key[1]
            return _mix(0x517CC1B727220A95 ^ key[1]) % self.num_machines
        if kind == "e":
            if self.structured:
                return self.n + key[1] % (self.num_machines - self.n)
            return _mix(0x2545F4914F6CDD1D + key[1]) % self.num_machines
        raise MpcRoutingError(f"malformed message key {key!r}")


def _stable_hash_route(key, num_machines: int) -> int:
    """Run-independent fallback router: direct for ("m", j), hashed otherwise."""
    if isinstance(key, tuple) and key and key[0] == "m":
        return key[1] % num_machines
    h = 0xCBF29CE484222325
    for byte in repr(key).encode():
        h = ((h ^ byte) * 0x100000001B3) & ((1 << 64) - 1)
    return _mix(h) % num_machines


def shuffle(outboxes, config: MpcConfig, cap: int | None = None, *,
            router=None, trace: MpcTrace | None = None, label: str = "shuffle"):
    """Deliver keyed messages, enforcing the send/receive caps.

    ``outboxes`` is one list of ``(key, payload_tuple)`` per machine; the
    returned inboxes have the same shape.  Message size is 1 + len(payload)
    words.  Strict enforcement raises MpcCapViolation naming the machine and
    round; audit enforcement records the overrun on the trace.
    """
    num = config.num_machines
    if cap is None:
        cap = config.memory_cap
        if cap is None:
            raise ValueError("shuffle needs a resolved memory cap")
    if router is None:
        router = lambda key: _stable_hash_route(key, num)  # noqa: E731
    inboxes = [[] for _ in range(num)]
    sent = [0] * num
    recv = [0] * num
    for i, box in enumerate(outboxes):
        for key, payload in box:
            dest = router(key)
            if not (0 <= dest < num):
                raise MpcRoutingError(f"key {key!r} routed to invalid machine {dest}")
            size = 1 + len(payload)
            sent[i] += size
            recv[dest] += size
            inboxes[dest].append((key, payload))
    round_no = trace.rounds + 1 if trace is not None else 1
    for i in range(num):
        for kind, words in (("sent", sent[i]), ("recv", recv[i])):
            if words > cap:
                info = {"round": round_no, "label": label, "machine": i,
                        "kind": kind, "words": words, "cap": cap}
                if config.enforcement == "strict":
                    raise MpcCapViolation(info)
                if trace is not None:
                    trace.violations.append(info)
    if trace is not None:
        trace.begin_round(label, sent, recv)
    return inboxes


class _Home:
    __slots__ = ("d", "k", "holders", "s0", "s1", "removed", "light", "label")

    def __init__(self):
        self.d = 0
        self.k = 0
        self.holders = {}
        self.s0 = []
        self.s1 = []
        self.removed = 0
        self.light = False
        self.label = 0

    def words(self) -> int:
        return 5 + 2 * len(self.holders) + len(self.s0) + len(self.s1)


class _Machine:
    __slots__ = ("edges", "keep1", "kept", "meta", "sk", "light", "label",
                 "home", "relay")

    def __init__(self):
        self.edges = []
        self.keep1 = []
        self.kept = []
        self.meta = {}
        self.sk = {}
        self.light = {}
        self.label = {}
        self.home = {}
        self.relay = []

    def words(self) -> int:
        w = 3 * len(self.edges)
        w += 3 * len(self.meta)
        w += sum(2 + s0.size + s1.size for (_, _, s0, s1) in self.sk.values())
        w += 2 * len(self.light) + 2 * len(self.label)
        w += sum(h.words() for h in self.home.values())
        w += sum(5 + len(s0) + len(s1) + len(rest)
                 for (_, _, _, s0, s1, rest) in self.relay)
        return w


def communication_budget(g: SignedGraph, params: Params) -> tuple[int, int]:
    """(C, budget_words): total communication must stay below C * m * log n.

    C = 16 + 8 * ceil(min(maxdeg + 1, a*log(n)/beta + 1) / log(n)); the
    min() is the sketch-size bound, the dominant per-edge message unit.
    """
    n = max(g.n, 2)
    logn = math.log(n)
    maxdeg = int(g.degrees.max())
    unit = min(maxdeg + 1, params.a * logn / params.beta + 1)
    c = 16 + 8 * math.ceil(unit / logn)
    return c, int(math.ceil(c * max(g.m_plus, 1) * logn))


def plan_resource_audit(g: SignedGraph, params: Params, mode: str = "sketch",
                        num_machines: int | None = None) -> MpcConfig:
    """Find a (machines, delta) pair whose caps the pipeline provably meets.

    Runs one probe execution with a collision-free machine layout (one home
    per vertex, one edge per machine) and an unbounded cap, measures the true
    per-machine peak load, and binds delta so that ``ceil(n**delta)`` covers
    it.  Re-running with the returned config reproduces the probe's loads
    exactly, so audit mode records zero violations.

    Raises ValueError when no delta < 1 suffices (the peak load reaches n;
    the input is too dense for a sublinear per-machine cap).
    """
    n = g.n
    if num_machines is None:
        num_machines = n + g.m_plus + 1
    probe_cfg = MpcConfig(num_machines=num_machines, delta=0.5,
                          enforcement="audit", memory_cap=1 << 62)
    _, probe = run_mpc_pipeline(g, params, probe_cfg, mode=mode)
    peak = max(max(r["sent_max"], r["recv_max"], r["resident_max"])
               for r in probe.per_round)
    peak = max(peak, 2 * g.m_plus // num_machines + 1)
    if peak + 2 >= n:
        raise ValueError(
            f"peak machine load {peak} words needs a cap >= n = {n}; "
            f"no sublinear delta fits this input")
    delta = math.log(peak + 2) / math.log(n)
    cfg = MpcConfig(num_machines=num_machines, delta=delta, enforcement="audit")
    assert cfg.resolved_cap(n) >= peak
    return cfg


def run_mpc_pipeline(g: SignedGraph, params: Params, config: MpcConfig,
                     mode: str = "sketch") -> tuple[Clustering, MpcTrace]:
    """Full pipeline on the simulated machines.

    Returns the clustering (identical, as a partition, to the in-memory
    pipeline with the same seed whenever sparsified components have diameter
    at most 4) plus the round/memory trace.  The round count is MPC_ROUNDS
    regardless of the input.
    """
    if mode not in ("exact", "sketch"):
        raise ValueError(f"unknown oracle mode {mode!r}")
    n, m = g.n, g.m_plus
    num = config.num_machines
    cap = config.resolved_cap(n)
    trace = MpcTrace(num_machines=num, memory_cap=cap)

    input_words = 2 * m
    if num * cap < input_words:
        info = {"round": 0, "label": "config", "machine": -1, "kind": "capacity",
                "words": input_words, "cap": num * cap}
        if config.enforcement == "strict":
            raise MpcConfigError(
                f"{num} machines x {cap} words cannot hold {input_words} input words")
        trace.violations.append(info)

    router = Router(n, m, num)
    machines = [_Machine() for _ in range(num)]

    # Input distribution: edges land on their fixed holders, every vertex
    # gets an (initially empty) record at its home machine.
    eu, ev = g.edge_arrays()
    for i, (u, v) in enumerate(zip(eu.tolist(), ev.tolist())):
        machines[router(("e", i))].edges.append((u, v))
    for v in range(n):
        machines[router(("v", v))].home[v] = _Home()

    logn = math.log(max(n, 2))
    sketch_cap = _SKETCH_CAP_FACTOR * params.a * logn / params.beta
    prob_cache: dict[int, float] = {}

    def prob(k: int) -> float:
        p = prob_cache.get(k)
        if p is None:
            p = sample_probability(k, n, params)
            prob_cache[k] = p
        return p

    def heads(w: int, k: int) -> bool:
        if mode == "exact":
            return True
        p = prob(k)
        if p >= 1.0:
            return True
        if p <= 0.0:
            return False
        return _coin_unit(params.seed, w, k) < p

    def run_round(label: str, outboxes):
        inboxes = shuffle(outboxes, config, cap, router=router, trace=trace, label=label)
        return inboxes

    def finish_round():
        trace.end_round([mc.words() for mc in machines], config, cap)

    # Round 1: per-endpoint degree counts, combined per source machine.
    out = [[] for _ in range(num)]
    for i, mc in enumerate(machines):
        counts: dict[int, int] = {}
        for (u, v) in mc.edges:
            counts[u] = counts.get(u, 0) + 1
            counts[v] = counts.get(v, 0) + 1
        for v, c in counts.items():
            out[i].append((("v", v), (i, c)))
    for mc, inbox in zip(machines, run_round("degrees", out)):
        for key, (src, c) in inbox:
            h = mc.home[key[1]]
            h.d += c
            h.holders[src] = h.holders.get(src, 0) + c
        for v, h in mc.home.items():
            h.d += 1  # self-loop
            h.k = level_index(h.d, params.beta)[0]
            h.label = v
    finish_round()

    # Round 2: degree + level to every machine holding an incident edge.
    out = [[] for _ in range(num)]
    for i, mc in enumerate(machines):
        for v, h in mc.home.items():
            for holder in h.holders:
                out[i].append((("m", holder), (v, h.d, h.k)))
    for mc, inbox in zip(machines, run_round("vertex-meta", out)):
        for _, (v, d, k) in inbox:
            mc.meta[v] = (d, k)
    finish_round()

    # Round 3: coin-filtered neighbors back to the vertex homes.
    out = [[] for _ in range(num)]
    for i, mc in enumerate(machines):
        for (u, v) in mc.edges:
            for x, w in ((u, v), (v, u)):
                kx = mc.meta[x][1]
                for rel, kk in ((0, kx), (1, kx + 1)):
                    if heads(w, kk):
                        out[i].append((("v", x), (rel, w)))
    for mc, inbox in zip(machines, run_round("level-samples", out)):
        for key, (rel, w) in inbox:
            h = mc.home[key[1]]
            (h.s0 if rel == 0 else h.s1).append(w)
        for v, h in mc.home.items():
            for rel, kk in ((0, h.k), (1, h.k + 1)):
                lst = h.s0 if rel == 0 else h.s1
                if heads(v, kk):
                    lst.append(v)
                lst.sort()
                if mode == "sketch" and prob(kk) < 1.0 and len(lst) > sketch_cap:
                    raise SketchSizeAnomaly(
                        f"vertex {v} level {kk}: {len(lst)} samples exceed cap "
                        f"{sketch_cap:.0f}")
    finish_round()

    # Rounds 4-5: two-hop sketch broadcast; the first holder of each chunk
    # relays to the rest, keeping per-machine send volume ~sqrt(deg) copies.
    def parse_sketch_payload(words):
        v, d, k = words[0], words[1], words[2]
        n0 = words[3]
        s0 = words[4:4 + n0]
        pos = 4 + n0
        n1 = words[pos]
        s1 = words[pos + 1:pos + 1 + n1]
        pos = pos + 1 + n1
        n_rest = words[pos]
        rest = words[pos + 1:pos + 1 + n_rest]
        return v, d, k, s0, s1, rest

    def store_sketch(mc, v, d, k, s0, s1):
        mc.sk[v] = (d, k, np.asarray(s0, dtype=np.int64), np.asarray(s1, dtype=np.int64))

    out = [[] for _ in range(num)]
    for i, mc in enumerate(machines):
        for v, h in mc.home.items():
            targets = sorted(h.holders)
            if not targets:
                continue
            fan = max(1, math.isqrt(len(targets) - 1) + 1)
            for start in range(0, len(targets), fan):
                chunk = targets[start:start + fan]
                rest = chunk[1:]
                payload = (v, h.d, h.k, len(h.s0), *h.s0, len(h.s1), *h.s1,
                           len(rest), *rest)
                out[i].append((("m", chunk[0]), payload))
    for mc, inbox in zip(machines, run_round("sketch-relay", out)):
        for _, payload in inbox:
            v, d, k, s0, s1, rest = parse_sketch_payload(payload)
            store_sketch(mc, v, d, k, s0, s1)
            if rest:
                mc.relay.append((v, d, k, s0, s1, rest))
    finish_round()

    out = [[] for _ in range(num)]
    for i, mc in enumerate(machines):
        for v, d, k, s0, s1, rest in mc.relay:
            payload = (v, d, k, len(s0), *s0, len(s1), *s1, 0)
            for t in rest:
                out[i].append((("m", t), payload))
        mc.relay = []
    for mc, inbox in zip(machines, run_round("sketch-deliver", out)):
        for _, payload in inbox:
            v, d, k, s0, s1, _ = parse_sketch_payload(payload)
            store_sketch(mc, v, d, k, s0, s1)
    finish_round()

    # Round 6: per-edge agreement decisions; discard counts back to homes.
    out = [[] for _ in range(num)]
    for i, mc in enumerate(machines):
        counts = {}
        mc.keep1 = []
        for (u, v) in mc.edges:
            du, ku, su0, su1 = mc.sk[u]
            dv, kv, sv0, sv1 = mc.sk[v]
            keep = decide_agreement_from_parts(du, ku, su0, su1, dv, kv, sv0, sv1,
                                               params, n, force_full=(mode == "exact"))
            mc.keep1.append(keep)
            if not keep:
                counts[u] = counts.get(u, 0) + 1
                counts[v] = counts.get(v, 0) + 1
        for v, c in counts.items():
            out[i].append((("v", v), (c,)))
    for mc, inbox in zip(machines, run_round("agreement-counts", out)):
        for key, (c,) in inbox:
            mc.home[key[1]].removed += c
        for h in mc.home.values():
            h.light = h.removed > params.lam * h.d
    finish_round()

    # Round 7: lightness out; edges between two light vertices drop.
    out = [[] for _ in range(num)]
    for i, mc in enumerate(machines):
        for v, h in mc.home.items():
            for holder in h.holders:
                out[i].append((("m", holder), (v, int(h.light))))
    for mc, inbox in zip(machines, run_round("lightness", out)):
        for _, (v, light) in inbox:
            mc.light[v] = bool(light)
        mc.kept = [k1 and not (mc.light[u] and mc.light[v])
                   for k1, (u, v) in zip(mc.keep1, mc.edges)]
    finish_round()

    # Rounds 8-15: four max-label-propagation iterations.
    for it in range(1, 5):
        out = [[] for _ in range(num)]
        for i, mc in enumerate(machines):
            for v, h in mc.home.items():
                for holder in h.holders:
                    out[i].append((("m", holder), (v, h.label)))
        for mc, inbox in zip(machines, run_round(f"labels-out-{it}", out)):
            for _, (v, lab) in inbox:
                mc.label[v] = lab
        finish_round()

        out = [[] for _ in range(num)]
        for i, mc in enumerate(machines):
            best = {}
            for keep, (u, v) in zip(mc.kept, mc.edges):
                if not keep:
                    continue
                lu, lv = mc.label[u], mc.label[v]
                if lv > best.get(u, -1):
                    best[u] = lv
                if lu > best.get(v, -1):
                    best[v] = lu
            for v, lab in best.items():
                out[i].append((("v", v), (lab,)))
        for mc, inbox in zip(machines, run_round(f"labels-max-{it}", out)):
            for key, (lab,) in inbox:
                h = mc.home[key[1]]
                if lab > h.label:
                    h.label = lab
        finish_round()

    assert trace.rounds == MPC_ROUNDS

    assignment = np.empty(n, dtype=np.int64)
    for mc in machines:
        for v, h in mc.home.items():
            assignment[v] = h.label
    return Clustering.from_labels(assignment), trace
