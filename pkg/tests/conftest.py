"""Shared fixtures: small named graphs, random-graph builders, and the
dense-solve helpers the property tests use as ground truth."""

import numpy as np
import pytest

from dynppr import _kernels
from dynppr.graph import EdgeEvent, GraphSnapshot
from dynppr.push import ppr_dense_oracle_all


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Pay numba JIT cost once, before anything timed runs."""
    _kernels.warmup()


@pytest.fixture
def two_node_path():
    return GraphSnapshot.from_edges([(0, 1)])


@pytest.fixture
def triangle():
    return GraphSnapshot.from_edges([(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def star4():
    """Center 0 with three unit-weight spokes."""
    return GraphSnapshot.from_edges([(0, 1), (0, 2), (0, 3)])


def random_graph(n: int, p: float, seed: int, ensure_connected_source: bool = True):
    """Erdos-Renyi G(n, p) snapshot; deterministic under seed."""
    rng = np.random.default_rng(seed)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    if ensure_connected_source and not any(0 in e for e in edges):
        edges.append((0, 1))
    g = GraphSnapshot()
    g.apply_events([EdgeEvent(u, v) for u, v in edges])
    return g


def oracle_matrix(g: GraphSnapshot, alpha: float) -> np.ndarray:
    """Column s holds pi_s for every source (one dense solve per graph)."""
    return ppr_dense_oracle_all(g, alpha)


def invariant_defect(g: GraphSnapshot, state, alpha: float, pis: np.ndarray = None) -> float:
    """max_u |pi_s(u) - p(u) - sum_v r(v) pi_v(u)| against the dense oracle."""
    n = g.num_nodes
    if pis is None:
        pis = oracle_matrix(g, alpha)
    acc = state.estimate_vector(n)
    for v, rv in state.residual.items():
        acc = acc + rv * pis[:, v]
    return float(np.max(np.abs(pis[:, state.source] - acc)))
