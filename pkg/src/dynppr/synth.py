"""Synthetic dynamic-graph streams for tests and acceptance runs.

All generators are deterministic under the spec seed and emit valid
event sequences: no duplicate inserts, every delete targets an edge that
is present at that point of the stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .graph import DELETE, INSERT, EdgeEvent

GENERATORS = ("er-growth", "pref-attach", "shock")


class InfeasibleSpecError(ValueError):
    pass


@dataclass
class StreamSpec:
    """Recipe for a generated stream.

    er-growth: uniformly random new edges among ``nodes`` ids, with a
    fraction of deletions.  pref-attach: each event attaches a fresh or
    random node to an endpoint drawn proportionally to degree+1.
    shock: er-growth plus one batch in which a target node has a
    fraction of its neighborhood rewired and its degree multiplied.
    """

    generator: str = "er-growth"
    nodes: int = 100
    batches: int = 10
    batch_size: int = 20
    delete_fraction: float = 0.0
    seed: int = 0
    shock_batch: Optional[int] = None
    shock_node: Optional[int] = None
    shock_factor: float = 3.0
    rewire_fraction: float = 0.5

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise InfeasibleSpecError(f"unknown generator {self.generator!r}")
        if not 0.0 <= self.delete_fraction < 1.0:
            raise InfeasibleSpecError("delete_fraction must be in [0, 1)")
        if self.nodes < 2 or self.batches < 1 or self.batch_size < 0:
            raise InfeasibleSpecError("need nodes >= 2, batches >= 1, batch_size >= 0")
        if self.generator == "shock" and self.shock_factor <= 1.0:
            raise InfeasibleSpecError("shock_factor must exceed 1")


@dataclass
class GeneratedStream:
    batches: list[list[EdgeEvent]]
    info: dict = field(default_factory=dict)


class _EdgeSet:
    """Presence tracking shared by the generators."""

    def __init__(self):
        self.edges: set[tuple[int, int]] = set()
        self.degree: dict[int, int] = {}

    @staticmethod
    def key(u: int, v: int) -> tuple[int, int]:
        return (u, v) if u < v else (v, u)

    def has(self, u: int, v: int) -> bool:
        return self.key(u, v) in self.edges

    def insert(self, u: int, v: int) -> None:
        self.edges.add(self.key(u, v))
        self.degree[u] = self.degree.get(u, 0) + 1
        self.degree[v] = self.degree.get(v, 0) + 1

    def delete(self, u: int, v: int) -> None:
        self.edges.remove(self.key(u, v))
        self.degree[u] -= 1
        self.degree[v] -= 1

    def neighbors_of(self, u: int) -> list[int]:
        return [b if a == u else a for a, b in self.edges if u in (a, b)]


def _random_absent_pair(rng: np.random.Generator, n: int, es: _EdgeSet,
                        tries: int = 200) -> Optional[tuple[int, int]]:
    for _ in range(tries):
        u = int(rng.integers(n))
        v = int(rng.integers(n))
        if u != v and not es.has(u, v):
            return u, v
    return None


def generate(spec: StreamSpec) -> GeneratedStream:
    rng = np.random.default_rng(spec.seed)
    es = _EdgeSet()
    timestamp = 0
    batches: list[list[EdgeEvent]] = []
    info: dict = {}

    shock_batch = spec.shock_batch
    if spec.generator == "shock":
        if shock_batch is None:
            shock_batch = spec.batches // 2
        if not 0 < shock_batch < spec.batches:
            raise InfeasibleSpecError("shock batch must fall inside the stream")

    next_fresh = 0  # pref-attach: next node id to bring in

    for b in range(spec.batches):
        batch: list[EdgeEvent] = []

        def emit(u: int, v: int, op: str) -> None:
            nonlocal timestamp
            if op == INSERT:
                es.insert(u, v)
            else:
                es.delete(u, v)
            batch.append(EdgeEvent(u, v, op, timestamp))
            timestamp += 1

        for _ in range(spec.batch_size):
            do_delete = es.edges and rng.random() < spec.delete_fraction
            if do_delete:
                edges = sorted(es.edges)
                u, v = edges[int(rng.integers(len(edges)))]
                emit(u, v, DELETE)
                continue
            if spec.generator == "pref-attach":
                pair = _pref_attach_pair(rng, spec, es, next_fresh)
                if pair is None:
                    continue
                u, v, next_fresh = pair
            else:
                got = _random_absent_pair(rng, spec.nodes, es)
                if got is None:
                    continue  # graph saturated; skip silently
                u, v = got
            emit(u, v, INSERT)

        if spec.generator == "shock" and b == shock_batch:
            target = spec.shock_node
            if target is None:
                # most-connected node so far: a meaningful anomaly carrier
                target = max(es.degree, key=lambda u: (es.degree[u], -u), default=None)
                if target is None:
                    raise InfeasibleSpecError("shock batch reached with empty graph")
            nbrs = es.neighbors_of(target)
            if not nbrs:
                raise InfeasibleSpecError(f"shock node {target} has no edges to rewire")
            deg_before = len(nbrs)
            n_drop = int(spec.rewire_fraction * deg_before)
            for v in nbrs[:n_drop]:
                emit(target, v, DELETE)
            goal = int(round(spec.shock_factor * deg_before))
            fails = 0
            while es.degree.get(target, 0) < goal and fails < 50 * spec.nodes:
                v = int(rng.integers(spec.nodes))
                if v != target and not es.has(target, v):
                    emit(target, v, INSERT)
                else:
                    fails += 1
            info["shock_node"] = target
            info["shock_batch"] = b
            info["shock_degree_before"] = deg_before
            info["shock_degree_after"] = es.degree.get(target, 0)

        batches.append(batch)

    return GeneratedStream(batches=batches, info=info)


def _pref_attach_pair(rng, spec, es: _EdgeSet, next_fresh: int):
    """Attach the next unseen node (or a random one once exhausted) to an
    endpoint sampled with probability proportional to degree + 1."""
    if next_fresh < spec.nodes:
        u = next_fresh
        next_fresh += 1
    else:
        u = int(rng.integers(spec.nodes))
    candidates = [v for v in range(min(spec.nodes, max(next_fresh, 2)))
                  if v != u and not es.has(u, v)]
    if not candidates:
        return None
    weights = np.array([es.degree.get(v, 0) + 1.0 for v in candidates])
    v = candidates[int(rng.choice(len(candidates), p=weights / weights.sum()))]
    return u, v, next_fresh
