"""Shared input-validation helpers for solver and estimator parameters."""

from __future__ import annotations

from typing import Sequence


def check_alpha(alpha: float) -> float:
    """Teleport probability: (0, 1].  alpha=1 degenerates to pi = 1_s."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    return float(alpha)


def check_epsilon(epsilon: float, upper: float | None = None) -> float:
    if not epsilon > 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if upper is not None and epsilon > upper:
        raise ValueError(f"epsilon must be <= {upper}, got {epsilon}")
    return float(epsilon)


def check_dim(dim: int) -> int:
    if not isinstance(dim, (int,)) or dim < 1:
        raise ValueError(f"embedding dimension must be a positive int, got {dim}")
    return dim


def check_subset(nodes: Sequence[int]) -> list[int]:
    """Tracked subset: non-empty, unique, non-negative ids; order kept."""
    nodes = list(nodes)
    if not nodes:
        raise ValueError("tracked subset must be non-empty")
    seen = set()
    for v in nodes:
        if not isinstance(v, int) or v < 0:
            raise ValueError(f"node ids must be non-negative ints, got {v!r}")
        if v in seen:
            raise ValueError(f"duplicate tracked node {v}")
        seen.add(v)
    return nodes
