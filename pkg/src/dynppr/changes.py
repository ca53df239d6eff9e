"""Temporal analytics over embeddings: movement metric, z-score ranking,
and the degree-weighted moving-average baseline embedder.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .graph import DELETE, EdgeEvent
from .validation import check_dim


def movement(a: np.ndarray, b: np.ndarray) -> float:
    """Embedding movement 1 - cos(a, b), in [0, 2].

    Zero-vector convention: 0 if both are zero (nothing moved), 1 if
    exactly one is zero (no direction to compare, treated as orthogonal).
    """
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 and nb == 0.0:
        return 0.0
    if na == 0.0 or nb == 0.0:
        return 1.0
    return 1.0 - float(a @ b) / (na * nb)


def z_scores(movements: dict[int, float]) -> dict[int, float]:
    """Standardize movements over the tracked set with the population
    mean/std.  Degenerate spread (std = 0) yields all-zero scores."""
    if len(movements) < 2:
        raise ValueError("z-scores need at least 2 tracked nodes")
    values = np.array(list(movements.values()))
    mu = values.mean()
    sigma = values.std()  # population std, ddof=0
    if sigma <= 1e-12 * max(1.0, abs(mu)):
        return {u: 0.0 for u in movements}
    return {u: (val - mu) / sigma for u, val in movements.items()}


@dataclass
class ReportRow:
    node: int
    degree: float
    degree_change: float
    movement: float
    z_score: float


@dataclass
class ChangeReport:
    """Per-snapshot ranking of tracked nodes by z-score (descending).
    Ties break toward larger degree change, then smaller node id."""

    snapshot: int
    rows: list[ReportRow] = field(default_factory=list)


def build_report(
    snapshot: int,
    prev_embeddings: dict[int, np.ndarray],
    curr_embeddings: dict[int, np.ndarray],
    degrees: dict[int, float],
    prev_degrees: dict[int, float],
    min_degree_change: Optional[float] = None,
) -> ChangeReport:
    """Movements between consecutive snapshots, standardized and ranked.

    min_degree_change filters rows after scoring (per-window semantics:
    the filter applies to this snapshot's degree change only); scores are
    always computed over the full tracked set.
    """
    moves = {u: movement(prev_embeddings[u], curr_embeddings[u]) for u in curr_embeddings}
    scores = z_scores(moves)
    rows = []
    for u in curr_embeddings:
        ddeg = degrees.get(u, 0.0) - prev_degrees.get(u, 0.0)
        if min_degree_change is not None and ddeg < min_degree_change:
            continue
        rows.append(ReportRow(u, degrees.get(u, 0.0), ddeg, moves[u], scores[u]))
    rows.sort(key=lambda r: (-r.z_score, -r.degree_change, r.node))
    return ChangeReport(snapshot, rows)


@dataclass
class CommuteState:
    """Per-node vectors plus the degree bookkeeping the update needs.
    The baseline consumes insertions only; it keeps its own degree counts
    so it can run straight off an event stream."""

    dim: int
    rng: np.random.Generator
    init: str = "uniform"
    vectors: dict[int, np.ndarray] = field(default_factory=dict)
    degrees: dict[int, int] = field(default_factory=dict)

    def _init_vector(self) -> np.ndarray:
        if self.init == "normal":
            return self.rng.normal(0.0, 0.1, size=self.dim)
        return self.rng.uniform(-0.5, 0.5, size=self.dim) / self.dim

    def _ensure(self, u: int) -> None:
        if u not in self.vectors:
            self.vectors[u] = self._init_vector()
            self.degrees[u] = 0


def commute_step(state: CommuteState, event: EdgeEvent) -> CommuteState:
    """One inserted edge (u, v) updates, in order,

        w_u <- d(u)/(d(u)+1) * w_u + (1/d(u)) * w_v
        w_v <- d(v)/(d(v)+1) * w_v + (1/d(v)) * w_u   (with the new w_u)

    where degrees are post-insert.  Unseen endpoints draw their initial
    vector first; deletion events are ignored by this baseline."""
    if event.op == DELETE:
        return state
    u, v = event.u, event.v
    state._ensure(u)
    state._ensure(v)
    state.degrees[u] += 1
    state.degrees[v] += 1
    du, dv = state.degrees[u], state.degrees[v]
    state.vectors[u] = du / (du + 1.0) * state.vectors[u] + state.vectors[v] / du
    state.vectors[v] = dv / (dv + 1.0) * state.vectors[v] + state.vectors[u] / dv
    return state


class CommuteEmbedder(BaseEstimator):
    """First-order moving-average baseline embedder over an insert stream."""

    def __init__(self, dim: int = 512, init: str = "uniform", seed: Optional[int] = None):
        self.dim = dim
        self.init = init
        self.seed = seed

    def _reset(self) -> None:
        check_dim(self.dim)
        if self.init not in ("uniform", "normal"):
            raise ValueError(f"unknown init distribution {self.init!r}")
        if self.seed is None:
            raise ValueError("CommuteEmbedder requires an explicit seed")
        self.state_ = CommuteState(dim=self.dim, rng=np.random.default_rng(self.seed),
                                   init=self.init)

    def fit(self, X: Sequence[Sequence[EdgeEvent]], y=None) -> "CommuteEmbedder":
        self._reset()
        for batch in X:
            self.partial_fit_batch(batch)
        return self

    def partial_fit_batch(self, batch: Sequence[EdgeEvent]) -> "CommuteEmbedder":
        if not hasattr(self, "state_"):
            self._reset()
        for ev in batch:
            commute_step(self.state_, ev)
        return self

    def vector(self, node: int) -> np.ndarray:
        if node not in self.state_.vectors:
            return np.zeros(self.dim)
        return self.state_.vectors[node]
