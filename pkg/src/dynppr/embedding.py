"""Subset node embeddings over a dynamic graph.

Per tracked source and batch the pipeline is: per-event state
adjustments, one push at the batch precision, then hash-kernel
projection of the estimate vector.  Sources are mutually independent,
so the embedding of a node does not depend on which other nodes are
tracked.

DynamicPPE is the sklearn-style driver: the first batch fed to it
builds the initial graph (tracked sources present in it are initialized
with p = 0, r = 1_s and an initial push at precision 1/volume_0); every
later batch advances the graph one snapshot and emits one embedding per
tracked node.  Tracked nodes that have not appeared yet stay
uninitialized (zero embedding) and are picked up by the first batch
that mentions them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .dynamic import DynPprConfig, WorkCounter, advance_snapshot, replay_events
from .graph import EdgeEvent, EventRecord, GraphSnapshot
from .hashing import HashKernel, hash_project
from .push import PprState, PushConfig, forward_push
from .validation import check_dim, check_subset


@dataclass
class TrackerConfig:
    """Tracked subset plus embedding and precision settings."""

    nodes: Sequence[int]
    dim: int = 512
    seed: int = 0
    ppr: DynPprConfig = field(default_factory=DynPprConfig)

    def __post_init__(self):
        self.nodes = check_subset(self.nodes)
        check_dim(self.dim)


def dynamic_sne(
    g: GraphSnapshot,
    batch: Sequence[EdgeEvent],
    state: PprState,
    kernel: HashKernel,
    cfg: DynPprConfig,
    eps_t: Optional[float] = None,
) -> np.ndarray:
    """Single-source pipeline: apply the batch to g, adjust the state per
    event, push at the batch precision, and project.

    Mutates g and state; returns the embedding vector.
    """
    record: list[EventRecord] = []
    g.apply_events(batch, record=record)
    if eps_t is None:
        eps_t = cfg.batch_epsilon(g)
    replay_events(state, record, cfg.alpha)
    forward_push(g, state, PushConfig(alpha=cfg.alpha, epsilon=eps_t, frontier=cfg.frontier))
    return hash_project(state.estimate, g.num_nodes, kernel)


def static_embedding(
    g: GraphSnapshot, source: int, kernel: HashKernel, cfg: DynPprConfig
) -> np.ndarray:
    """From-scratch reference: fresh state pushed on the current graph at
    the same precision policy, then projected."""
    state = PprState.fresh(source)
    eps_t = cfg.batch_epsilon(g)
    forward_push(g, state, PushConfig(alpha=cfg.alpha, epsilon=eps_t, frontier=cfg.frontier))
    return hash_project(state.estimate, g.num_nodes, kernel)


class DynamicPPE(BaseEstimator, TransformerMixin):
    """Streaming subset embedder with an estimator interface.

    Parameters mirror TrackerConfig but stay flat for get_params/clone.
    fit consumes an iterable of event batches: the first batch forms the
    initial graph, each later batch yields one embedding row per tracked
    node.  partial_fit consumes one batch at a time with the same
    semantics; transform processes further batches after a fit and
    returns their embeddings as an array of shape (T, k, dim).
    """

    def __init__(
        self,
        nodes: Optional[Sequence[int]] = None,
        dim: int = 512,
        alpha: float = 0.15,
        epsilon: float = 0.1,
        adaptive: bool = True,
        seed: int = 0,
        frontier: str = "fifo",
        count_work: bool = False,
        threads: int = 1,
    ):
        self.nodes = nodes
        self.dim = dim
        self.alpha = alpha
        self.epsilon = epsilon
        self.adaptive = adaptive
        self.seed = seed
        self.frontier = frontier
        self.count_work = count_work
        self.threads = threads

    # ---- lifecycle -------------------------------------------------------

    def _reset(self) -> None:
        self.nodes_ = check_subset(self.nodes if self.nodes is not None else [])
        check_dim(self.dim)
        self.ppr_config_ = DynPprConfig(
            epsilon=self.epsilon, alpha=self.alpha,
            adaptive=self.adaptive, frontier=self.frontier,
        )
        self.kernel_ = HashKernel(dim=self.dim, seed=self.seed)
        self.graph_ = GraphSnapshot()
        self.states_: dict[int, PprState] = {}
        self.work_counter_ = WorkCounter() if self.count_work else None
        self.history_: list[dict[int, np.ndarray]] = []
        self.degree_history_: list[dict[int, float]] = []
        self.snapshots_: list[int] = []
        self.batches_seen_ = 0

    def _check_fitted(self) -> None:
        if not hasattr(self, "graph_"):
            raise NotFittedError("DynamicPPE instance is not fitted yet")

    def _init_pending(self, eps_init: float) -> None:
        """Initialize tracked sources that are now present in the graph."""
        cfg = self.ppr_config_
        push_cfg = PushConfig(alpha=cfg.alpha, epsilon=eps_init, frontier=cfg.frontier)
        for s in self.nodes_:
            if s not in self.states_ and self.graph_.has_node(s):
                state = PprState.fresh(s)
                before_volume, before_count = state.pushed_volume, state.push_count
                forward_push(self.graph_, state, push_cfg)
                self.states_[s] = state
                if self.work_counter_ is not None:
                    self.work_counter_.add(
                        self.graph_.snapshot_index, s,
                        state.pushed_volume - before_volume,
                        state.push_count - before_count,
                    )

    def partial_fit(self, batch: Sequence[EdgeEvent], y=None) -> "DynamicPPE":
        if not hasattr(self, "graph_"):
            self._reset()
        if self.batches_seen_ == 0:
            # Initial graph: apply and run the initial pushes, no embedding.
            self.graph_.apply_events(batch)
            volume = self.graph_.degree_volume
            self._init_pending(1.0 / volume if volume > 0 else 1.0)
        else:
            advance_snapshot(
                self.states_, self.graph_, batch, self.ppr_config_,
                counter=self.work_counter_, threads=self.threads,
            )
            self._init_pending(self.ppr_config_.batch_epsilon(self.graph_))
            n_t = self.graph_.num_nodes
            row = {}
            degs = {}
            for s in self.nodes_:
                state = self.states_.get(s)
                estimate = state.estimate if state is not None else {}
                row[s] = hash_project(estimate, n_t, self.kernel_)
                degs[s] = self.graph_.degree(s) if self.graph_.has_node(s) else 0.0
            self.history_.append(row)
            self.degree_history_.append(degs)
            self.snapshots_.append(self.graph_.snapshot_index)
        self.batches_seen_ += 1
        return self

    def fit(self, X: Sequence[Sequence[EdgeEvent]], y=None) -> "DynamicPPE":
        self._reset()
        for batch in X:
            self.partial_fit(batch)
        return self

    def transform(self, X: Optional[Sequence[Sequence[EdgeEvent]]] = None) -> np.ndarray:
        """Process further batches (or none) and return their embeddings,
        shaped (num_batches, num_tracked, dim)."""
        self._check_fitted()
        start = len(self.history_)
        if X is not None:
            for batch in X:
                self.partial_fit(batch)
        return self._stack(self.history_[start:] if X is not None else self.history_)

    def fit_transform(self, X: Sequence[Sequence[EdgeEvent]], y=None) -> np.ndarray:
        return self.fit(X).transform(None)

    # ---- results ---------------------------------------------------------

    def _stack(self, rows: list[dict[int, np.ndarray]]) -> np.ndarray:
        out = np.zeros((len(rows), len(self.nodes_), self.dim))
        for t, row in enumerate(rows):
            for i, s in enumerate(self.nodes_):
                out[t, i] = row[s]
        return out

    def embedding_history(self, node: int) -> np.ndarray:
        """All emitted embeddings of one tracked node, shape (T, dim)."""
        self._check_fitted()
        return np.array([row[node] for row in self.history_])


def dynamic_ppe(
    batches: Sequence[Sequence[EdgeEvent]], cfg: TrackerConfig,
) -> dict[int, np.ndarray]:
    """Functional driver: run the full stream, return per-node embedding
    matrices of shape (T, dim) where T = len(batches) - 1."""
    est = DynamicPPE(
        nodes=cfg.nodes, dim=cfg.dim, alpha=cfg.ppr.alpha,
        epsilon=cfg.ppr.epsilon, adaptive=cfg.ppr.adaptive, seed=cfg.seed,
        frontier=cfg.ppr.frontier,
    )
    est.fit(batches)
    return {s: est.embedding_history(s) for s in cfg.nodes}
