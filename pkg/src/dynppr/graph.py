"""Mutable undirected weighted graph with a maintained degree index.

The graph is the single shared data structure behind all solvers: it
applies batches of edge events (insertions/deletions), keeps per-node
generalized degrees d(v) = sum of incident weights, and exports a frozen
CSR view for the numeric kernels.  Node ids are dense non-negative
integers; a node exists once any event mentions it (ids below the largest
mentioned id are allocated as isolated nodes so the id space stays dense).

Concurrency contract: event application is single-writer.  Between
batches the snapshot is immutable and may be read from any number of
workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

INSERT = "I"
DELETE = "D"

_OPS = (INSERT, DELETE)


class InvalidEventError(ValueError):
    """Raised when a batch contains an event that is invalid at its
    position (duplicate insert, delete of an absent edge, self-loop when
    disabled, bad weight).  The whole batch is rejected atomically."""


class UnknownNodeError(KeyError):
    """Raised when a query references a node id the graph has never seen."""


@dataclass(frozen=True)
class EdgeEvent:
    """One unit of the stream: insert or delete the undirected edge (u, v).

    ``timestamp`` is a monotone integer used by timestamp-cut schedules;
    ``weight`` only applies to insertions (deletions remove whatever
    weight the edge carries).
    """

    u: int
    v: int
    op: str = INSERT
    timestamp: int = 0
    weight: float = 1.0

    def __post_init__(self):
        if self.op not in _OPS:
            raise InvalidEventError(f"unknown event op {self.op!r}")
        if self.u < 0 or self.v < 0:
            raise InvalidEventError(f"negative node id in event ({self.u}, {self.v})")


class EventRecord(NamedTuple):
    """Replay record for one applied event: the post-event degrees of both
    endpoints, captured during graph application so per-source state
    replay does not need a second graph pass."""

    u: int
    v: int
    op: str
    weight: float
    deg_u: float
    deg_v: float


class GraphSnapshot:
    """Adjacency + degree index for the evolving undirected graph."""

    def __init__(self, allow_self_loops: bool = False):
        self._adj: list[dict[int, float]] = []
        self._deg: list[float] = []
        self._m: int = 0
        self.snapshot_index: int = 0
        self.allow_self_loops = allow_self_loops
        self._csr_cache = None

    # ---- size / queries -------------------------------------------------

    @property
    def num_nodes(self) -> int:
        return len(self._adj)

    @property
    def num_edges(self) -> int:
        """Number of undirected edges currently present."""
        return self._m

    @property
    def degree_volume(self) -> float:
        """Sum of generalized degrees over all nodes (2m for unit weights)."""
        return float(sum(self._deg))

    def has_node(self, v: int) -> bool:
        return 0 <= v < len(self._adj)

    def _check_node(self, v: int) -> None:
        if not self.has_node(v):
            raise UnknownNodeError(v)

    def degree(self, v: int) -> float:
        self._check_node(v)
        return self._deg[v]

    def neighbors(self, v: int) -> list[tuple[int, float]]:
        """Sorted (neighbor, weight) pairs of v."""
        self._check_node(v)
        return sorted(self._adj[v].items())

    def neighbor_map(self, v: int) -> dict[int, float]:
        """Read-only view used by the python-side solvers; do not mutate."""
        self._check_node(v)
        return self._adj[v]

    def has_edge(self, u: int, v: int) -> bool:
        return self.has_node(u) and v in self._adj[u]

    def edges(self) -> Iterable[tuple[int, int, float]]:
        for u, nbrs in enumerate(self._adj):
            for v, w in nbrs.items():
                if u <= v:
                    yield u, v, w

    def degrees_from_adjacency(self) -> list[float]:
        """Recompute degrees from scratch (consistency checks in tests)."""
        return [sum(nbrs.values()) for nbrs in self._adj]

    # ---- mutation --------------------------------------------------------

    def _ensure_node(self, v: int) -> None:
        while len(self._adj) <= v:
            self._adj.append({})
            self._deg.append(0.0)

    def _validate_batch(self, batch: Sequence[EdgeEvent]) -> None:
        # Overlay of edge presence so validation is O(batch), not O(graph).
        overlay: dict[tuple[int, int], bool] = {}
        for i, ev in enumerate(batch):
            if ev.u == ev.v and not self.allow_self_loops:
                raise InvalidEventError(f"event {i}: self-loop ({ev.u},{ev.v}) disabled")
            key = (min(ev.u, ev.v), max(ev.u, ev.v))
            present = overlay.get(key)
            if present is None:
                present = self.has_edge(ev.u, ev.v)
            if ev.op == INSERT:
                if present:
                    raise InvalidEventError(f"event {i}: duplicate insert of edge {key}")
                if not ev.weight > 0:
                    raise InvalidEventError(f"event {i}: non-positive weight {ev.weight}")
                overlay[key] = True
            else:
                if not present:
                    raise InvalidEventError(f"event {i}: delete of absent edge {key}")
                overlay[key] = False

    def apply_events(
        self,
        batch: Sequence[EdgeEvent],
        record: Optional[list[EventRecord]] = None,
    ) -> "GraphSnapshot":
        """Apply a batch atomically and advance the snapshot index.

        An invalid event anywhere in the batch raises InvalidEventError and
        leaves the graph untouched.  When ``record`` is a list, one
        EventRecord with post-event degrees is appended per event.
        """
        batch = list(batch)
        self._validate_batch(batch)
        for ev in batch:
            self._ensure_node(ev.u)
            self._ensure_node(ev.v)
            u, v = ev.u, ev.v
            if ev.op == INSERT:
                w = float(ev.weight)
                self._adj[u][v] = w
                self._deg[u] += w
                if u != v:
                    self._adj[v][u] = w
                    self._deg[v] += w
                self._m += 1
            else:
                w = self._adj[u].pop(v)
                self._deg[u] -= w
                if u != v:
                    self._adj[v].pop(u)
                    self._deg[v] -= w
                self._m -= 1
            if record is not None:
                record.append(EventRecord(u, v, ev.op, w, self._deg[u], self._deg[v]))
        self.snapshot_index += 1
        self._csr_cache = None
        return self

    def copy(self) -> "GraphSnapshot":
        g = GraphSnapshot(allow_self_loops=self.allow_self_loops)
        g._adj = [dict(nbrs) for nbrs in self._adj]
        g._deg = list(self._deg)
        g._m = self._m
        g.snapshot_index = self.snapshot_index
        return g

    # ---- numeric view ----------------------------------------------------

    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(indptr, indices, weights, degrees) arrays for the kernels.

        Cached until the next mutation; treat as read-only.
        """
        if self._csr_cache is None:
            n = len(self._adj)
            counts = np.fromiter((len(nb) for nb in self._adj), dtype=np.int64, count=n)
            indptr = np.zeros(n + 1, dtype=np.int64)
            np.cumsum(counts, out=indptr[1:])
            indices = np.empty(indptr[-1], dtype=np.int64)
            weights = np.empty(indptr[-1], dtype=np.float64)
            pos = 0
            for nbrs in self._adj:
                for v, w in nbrs.items():
                    indices[pos] = v
                    weights[pos] = w
                    pos += 1
            degrees = np.asarray(self._deg, dtype=np.float64)
            self._csr_cache = (indptr, indices, weights, degrees)
        return self._csr_cache

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[tuple[int, int]] | Iterable[tuple[int, int, float]],
        allow_self_loops: bool = False,
    ) -> "GraphSnapshot":
        """Build a snapshot from (u, v) or (u, v, weight) tuples."""
        batch = []
        for e in edges:
            if len(e) == 2:
                batch.append(EdgeEvent(e[0], e[1]))
            else:
                batch.append(EdgeEvent(e[0], e[1], weight=e[2]))
        return cls(allow_self_loops=allow_self_loops).apply_events(batch)


@dataclass
class SnapshotSchedule:
    """Chops a flat event stream into the batches that define snapshots.

    mode "events": fixed number of events per batch.
    mode "cuts":   batch i holds events with timestamp <= cuts[i] (strictly
    increasing cut values); a final batch collects the remainder.
    """

    mode: str = "events"
    batch_size: int = 1
    cuts: Sequence[int] = field(default_factory=tuple)

    def __post_init__(self):
        if self.mode not in ("events", "cuts"):
            raise ValueError(f"unknown schedule mode {self.mode!r}")
        if self.mode == "events" and self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.mode == "cuts":
            cuts = list(self.cuts)
            if not cuts or any(b <= a for a, b in zip(cuts, cuts[1:])):
                raise ValueError("cuts must be non-empty and strictly increasing")

    def batches(self, events: Sequence[EdgeEvent]) -> list[list[EdgeEvent]]:
        events = list(events)
        if self.mode == "events":
            size = self.batch_size
            return [events[i : i + size] for i in range(0, len(events), size)] or [[]]
        out: list[list[EdgeEvent]] = [[] for _ in range(len(self.cuts) + 1)]
        cuts = list(self.cuts)
        for ev in events:
            for i, cut in enumerate(cuts):
                if ev.timestamp <= cut:
                    out[i].append(ev)
                    break
            else:
                out[-1].append(ev)
        return out
