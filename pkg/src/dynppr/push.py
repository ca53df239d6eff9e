"""Static personalized PageRank solvers.

forward_push is the production solver: it settles residual probability
mass locally until every residual is below eps * degree.  The dense
linear solve and power iteration are independent oracles used for
testing and small-scale ground truth; they are deliberately written
against the defining equation rather than sharing code with the push.

Conventions for degree-0 (dangling) nodes: an isolated source has
pi_s = 1_s (the walk cannot leave), and a push on a dangling node
absorbs its whole residual into the estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from heapq import heappush, heappop
import math

import numpy as np

from . import _kernels
from .graph import GraphSnapshot
from .validation import check_alpha, check_epsilon

DROP_THRESHOLD = _kernels.DROP_THRESHOLD

ORACLE_MAX_NODES = 2000


class NonPositiveEpsilonError(ValueError):
    pass


class TooLargeError(ValueError):
    """Dense oracle guard: refuse graphs beyond test scale."""


@dataclass
class PushConfig:
    """Knobs of the push solver.  beta is the laziness of the walk and is
    fixed at 0 (the plain random walk); it is exposed only so that the
    assumption is visible."""

    alpha: float = 0.15
    epsilon: float = 1e-6
    frontier: str = "fifo"
    beta: float = 0.0

    def __post_init__(self):
        check_alpha(self.alpha)
        check_epsilon(self.epsilon)
        if self.frontier not in ("fifo", "priority"):
            raise ValueError(f"unknown frontier policy {self.frontier!r}")
        if self.beta != 0.0:
            raise ValueError("only beta=0 is supported")


@dataclass
class PprState:
    """Per-source solver state: sparse estimate and residual vectors.

    Maps never hold entries below DROP_THRESHOLD in magnitude.  Estimate
    entries stay non-negative for insertion-only histories; residuals may
    go negative after deletions.  pushed_volume accumulates sum of d(u)
    over all pushes ever performed for this source.
    """

    source: int
    estimate: dict[int, float] = field(default_factory=dict)
    residual: dict[int, float] = field(default_factory=dict)
    epsilon_used: float | None = None
    pushed_volume: float = 0.0
    push_count: int = 0

    @classmethod
    def fresh(cls, source: int) -> "PprState":
        """p = 0, r = 1_source: the canonical starting state."""
        return cls(source=source, residual={source: 1.0})

    def estimate_vector(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        for u, val in self.estimate.items():
            out[u] = val
        return out

    def residual_vector(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        for u, val in self.residual.items():
            out[u] = val
        return out

    def estimate_l1(self) -> float:
        return sum(abs(v) for v in self.estimate.values())

    def residual_l1(self) -> float:
        return sum(abs(v) for v in self.residual.values())


def _sparsify_into(mapping: dict[int, float], dense: np.ndarray) -> None:
    mapping.clear()
    (idx,) = np.nonzero(np.abs(dense) >= DROP_THRESHOLD)
    for i in idx:
        mapping[int(i)] = float(dense[i])


def forward_push(g: GraphSnapshot, state: PprState, cfg: PushConfig) -> PprState:
    """Run local push until |r(u)| <= eps*d(u) everywhere.

    Mutates and returns ``state``.  Work is accounted on the state as the
    pushed volume sum(d(u)) over push operations.
    """
    if not g.has_node(state.source):
        from .graph import UnknownNodeError

        raise UnknownNodeError(state.source)
    if not cfg.epsilon > 0:
        raise NonPositiveEpsilonError(cfg.epsilon)
    if cfg.frontier == "priority":
        return _forward_push_priority(g, state, cfg)
    indptr, indices, weights, degrees = g.csr()
    n = g.num_nodes
    p = state.estimate_vector(n)
    r = state.residual_vector(n)
    volume, count = _kernels.push_fifo(
        indptr, indices, weights, degrees, p, r, cfg.alpha, cfg.epsilon
    )
    _sparsify_into(state.estimate, p)
    _sparsify_into(state.residual, r)
    state.epsilon_used = cfg.epsilon
    state.pushed_volume += float(volume)
    state.push_count += int(count)
    return state


def _forward_push_priority(g: GraphSnapshot, state: PprState, cfg: PushConfig) -> PprState:
    """Priority-frontier variant: always push the node with the largest
    residual-to-degree ratio.  Python-side; meant for small graphs and for
    checking that both frontier policies satisfy the error bound."""
    alpha, eps = cfg.alpha, cfg.epsilon
    p, r = state.estimate, state.residual
    for sign in (1.0, -1.0):

        def key(u: int) -> float:
            return -sign * r.get(u, 0.0) / max(g.degree(u), 1.0)

        def above(u: int) -> bool:
            ru = sign * r.get(u, 0.0)
            return ru > eps * g.degree(u) and ru > DROP_THRESHOLD

        heap = [(key(u), u) for u in list(r) if above(u)]
        heap.sort()
        while heap:
            _, u = heappop(heap)
            if not above(u):
                continue
            ru = r.pop(u)
            state.push_count += 1
            deg = g.degree(u)
            if deg <= 0.0:
                p[u] = p.get(u, 0.0) + ru
                continue
            p[u] = p.get(u, 0.0) + alpha * ru
            share = (1.0 - alpha) * ru / deg
            state.pushed_volume += deg
            for v, w in g.neighbor_map(u).items():
                rv = r.get(v, 0.0) + share * w
                if abs(rv) < DROP_THRESHOLD:
                    r.pop(v, None)
                    continue
                r[v] = rv
                if above(v):
                    heappush(heap, (key(v), v))
    for mapping in (state.estimate, state.residual):
        for u in [u for u, val in mapping.items() if abs(val) < DROP_THRESHOLD]:
            del mapping[u]
    state.epsilon_used = eps
    return state


def _transition_matrix(g: GraphSnapshot) -> np.ndarray:
    """Column-stochastic P^T with zero columns for isolated nodes."""
    n = g.num_nodes
    pt = np.zeros((n, n))
    for u in range(n):
        d = g.degree(u)
        if d > 0:
            for v, w in g.neighbor_map(u).items():
                pt[v, u] = w / d
    return pt


def ppr_dense_oracle(g: GraphSnapshot, s: int, alpha: float) -> np.ndarray:
    """Exact PPR by dense linear solve: pi = alpha (I - (1-alpha) P^T)^-1 1_s.

    Test-scale only (n <= 2000).  An isolated source returns 1_s.
    """
    check_alpha(alpha)
    g._check_node(s)
    n = g.num_nodes
    if n > ORACLE_MAX_NODES:
        raise TooLargeError(n)
    e = np.zeros(n)
    e[s] = 1.0
    if g.degree(s) == 0:
        return e
    m = np.eye(n) - (1.0 - alpha) * _transition_matrix(g)
    pi = alpha * np.linalg.solve(m, e)
    # The series expansion is entrywise non-negative; clip float dust.
    return np.maximum(pi, 0.0)


def ppr_dense_oracle_all(g: GraphSnapshot, alpha: float) -> np.ndarray:
    """All PPR vectors at once: column s is pi_s.  One LU factorization
    serves every source, which is what makes exhaustive all-source
    comparisons affordable in the test suite."""
    check_alpha(alpha)
    n = g.num_nodes
    if n > ORACLE_MAX_NODES:
        raise TooLargeError(n)
    m = np.eye(n) - (1.0 - alpha) * _transition_matrix(g)
    pis = alpha * np.linalg.solve(m, np.eye(n))
    degrees = g.csr()[3]
    for s in np.nonzero(degrees == 0)[0]:
        pis[:, s] = 0.0
        pis[s, s] = 1.0
    return np.maximum(pis, 0.0)


def ppr_power_iteration(g: GraphSnapshot, s: int, alpha: float, tol: float) -> np.ndarray:
    """Power iteration on pi <- (1-alpha) P^T pi + alpha 1_s from pi = 1_s.

    Stops when the successive l1 change drops to tol, capped at
    ceil(log_{1-alpha} tol) + 1 iterations (at the cap the iterate is
    already within tol of the exact vector in l1).
    """
    check_alpha(alpha)
    if not tol > 0:
        raise NonPositiveEpsilonError(tol)
    g._check_node(s)
    n = g.num_nodes
    e = np.zeros(n)
    e[s] = 1.0
    if g.degree(s) == 0 or alpha == 1.0:
        return e
    if tol < 1.0:
        max_iter = max(1, math.ceil(math.log(tol) / math.log(1.0 - alpha)) + 1)
    else:
        max_iter = 1
    pt = _transition_matrix(g)
    pi = e.copy()
    for _ in range(max_iter):
        nxt = (1.0 - alpha) * (pt @ pi) + alpha * e
        diff = float(np.abs(nxt - pi).sum())
        pi = nxt
        if diff <= tol:
            break
    return pi
