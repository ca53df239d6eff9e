"""PPR as degree-weighted l1-regularized quadratic optimization.

Minimizes f(x) = g(x) + h(x) with

    g(x) = 0.5 x^T W x + x^T b,   W = D^{-1/2} (D - (1-alpha) A) D^{-1/2},
    b = -alpha D^{-1/2} e_s,      h(x) = epsilon * || D^{1/2} x ||_1,

by proximal gradient descent (ISTA) at step eta = 1/(2-alpha), the inverse
of the Lipschitz bound ||W||_2 <= 2-alpha.  The PPR vector is recovered as
pi = D^{1/2} x.  The prox of eta*h soft-thresholds coordinate i at
eta * epsilon * sqrt(d(i)); the three-branch case analysis collapses to a
single threshold (one regularization weight in the objective).

This solver is the independent cross-check for the push solver: it shares
no code with it, and the gradient it maintains incrementally can be
recomputed from scratch in debug mode.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .graph import GraphSnapshot
from .validation import check_alpha, check_epsilon


class NoConvergenceError(RuntimeError):
    def __init__(self, max_iter: int):
        super().__init__(f"ISTA did not converge within {max_iter} iterations")
        self.max_iter = max_iter


class DanglingSourceError(ValueError):
    """The optimization is undefined for a degree-0 source (D^{-1/2} e_s
    does not exist); callers fall back to pi = 1_s."""


class IstaResult(NamedTuple):
    x: dict[int, float]
    gradient: dict[int, float]
    iterations: int
    objective_trace: list[float] | None


def _sqrt_degrees(g: GraphSnapshot) -> np.ndarray:
    d = np.asarray(g.csr()[3])
    return np.sqrt(d, where=d > 0, out=np.zeros_like(d))


def objective_value(g: GraphSnapshot, s: int, alpha: float, epsilon: float,
                    x: dict[int, float]) -> float:
    """f(x) = 0.5 x^T W x + x^T b + epsilon ||D^{1/2} x||_1, evaluated
    sparsely over the support of x."""
    check_alpha(alpha)
    sq = _sqrt_degrees(g)
    quad = 0.0
    cross = 0.0
    l1 = 0.0
    for i, xi in x.items():
        quad += xi * xi  # diagonal of W is identity
        l1 += sq[i] * abs(xi)
        for j, w in g.neighbor_map(i).items():
            xj = x.get(j, 0.0)
            if xj != 0.0:
                cross += w * xi * xj / (sq[i] * sq[j])
    gx = 0.5 * (quad - (1.0 - alpha) * cross)
    gx += -alpha * x.get(s, 0.0) / sq[s] if sq[s] > 0 else 0.0
    return gx + epsilon * l1


def ista_solve(
    g: GraphSnapshot,
    s: int,
    alpha: float,
    epsilon: float,
    max_iter: int | None = None,
    conv_tol: float | None = None,
    recompute_gradient: bool = False,
    track_objective: bool = False,
) -> IstaResult:
    """Solve the regularized problem; returns the iterate x, the gradient
    of the smooth part at x, and the iteration count.

    Convergence: l-infinity change of x below conv_tol (default
    epsilon * alpha).  recompute_gradient=True replaces the incremental
    gradient maintenance with a full recomputation each sweep (debug mode).
    """
    check_alpha(alpha)
    check_epsilon(epsilon)
    g._check_node(s)
    if g.degree(s) == 0:
        raise DanglingSourceError(s)
    if conv_tol is None:
        conv_tol = epsilon * alpha
    if max_iter is None:
        max_iter = 10 * math.ceil(1.0 / (epsilon * alpha))

    sq = _sqrt_degrees(g)
    eta = 1.0 / (2.0 - alpha)
    one_minus_alpha = 1.0 - alpha

    x: dict[int, float] = {}
    grad: dict[int, float] = {s: -alpha / sq[s]}
    trace: list[float] | None = [] if track_objective else None

    iterations = 0
    while True:
        if iterations >= max_iter:
            raise NoConvergenceError(max_iter)
        iterations += 1
        max_delta = 0.0
        deltas: dict[int, float] = {}
        for i in set(x) | set(grad):
            z = x.get(i, 0.0) - eta * grad.get(i, 0.0)
            tau = eta * epsilon * sq[i]
            if z > tau:
                xi = z - tau
            elif z < -tau:
                xi = z + tau
            else:
                xi = 0.0
            delta = xi - x.get(i, 0.0)
            if delta != 0.0:
                deltas[i] = delta
                if xi == 0.0:
                    del x[i]
                else:
                    x[i] = xi
                if abs(delta) > max_delta:
                    max_delta = abs(delta)
        if recompute_gradient:
            grad = _full_gradient(g, s, alpha, x, sq)
        else:
            # grad = W x + b; only changed coordinates propagate.
            for i, delta in deltas.items():
                grad[i] = grad.get(i, 0.0) + delta
                scale = one_minus_alpha * delta / sq[i]
                for j, w in g.neighbor_map(i).items():
                    grad[j] = grad.get(j, 0.0) - scale * w / sq[j]
        if trace is not None:
            trace.append(objective_value(g, s, alpha, epsilon, x))
        if max_delta < conv_tol:
            break
    return IstaResult(x, grad, iterations, trace)


def _full_gradient(g: GraphSnapshot, s: int, alpha: float,
                   x: dict[int, float], sq: np.ndarray) -> dict[int, float]:
    grad: dict[int, float] = {s: -alpha / sq[s]}
    for i, xi in x.items():
        grad[i] = grad.get(i, 0.0) + xi
        scale = (1.0 - alpha) * xi / sq[i]
        for j, w in g.neighbor_map(i).items():
            grad[j] = grad.get(j, 0.0) - scale * w / sq[j]
    return grad


def ppr_ista(g: GraphSnapshot, s: int, alpha: float, epsilon: float,
             **kwargs) -> np.ndarray:
    """PPR estimate D^{1/2} x from the optimization solver, as a dense
    vector.  Falls back to 1_s for a dangling source."""
    n = g.num_nodes
    out = np.zeros(n)
    try:
        result = ista_solve(g, s, alpha, epsilon, **kwargs)
    except DanglingSourceError:
        out[s] = 1.0
        return out
    sq = _sqrt_degrees(g)
    for i, xi in result.x.items():
        out[i] = sq[i] * xi
    return out
