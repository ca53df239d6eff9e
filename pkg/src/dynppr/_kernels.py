"""Numba-compiled inner loops.

The push kernel works on dense per-source scratch arrays over the CSR view
of the current snapshot; callers densify the sparse state, run the kernel,
and re-sparsify.  First call per process pays JIT compilation (cached on
disk afterwards).
"""

import numpy as np
from numba import njit

# Entries below this magnitude are treated as numerical dust: they never
# trigger a push on a degree-0 node and are dropped on re-sparsify.
DROP_THRESHOLD = 1e-15


@njit(cache=True)
def push_fifo(indptr, indices, weights, degrees, p, r, alpha, eps):
    """FIFO forward push, positive-residual loop then negative loop.

    Mutates p and r in place until no node has r(u) > eps*d(u) or
    r(u) < -eps*d(u).  A node with zero degree absorbs its entire
    residual into the estimate.  Returns (pushed_volume, push_count)
    where pushed_volume is the sum of d(u) over performed pushes.
    """
    n = degrees.shape[0]
    cap = n + 1
    queue = np.empty(cap, dtype=np.int64)
    in_queue = np.zeros(n, dtype=np.bool_)
    volume = 0.0
    count = 0
    for sign in (1.0, -1.0):
        head = 0
        tail = 0
        for v in range(n):
            rv = sign * r[v]
            if rv > eps * degrees[v] and rv > DROP_THRESHOLD:
                queue[tail] = v
                tail = (tail + 1) % cap
                in_queue[v] = True
        while head != tail:
            u = queue[head]
            head = (head + 1) % cap
            in_queue[u] = False
            ru = r[u]
            if not (sign * ru > eps * degrees[u] and sign * ru > DROP_THRESHOLD):
                continue
            count += 1
            if degrees[u] <= 0.0:
                # Dangling node: no outflow possible, settle all mass.
                p[u] += ru
                r[u] = 0.0
                continue
            p[u] += alpha * ru
            r[u] = 0.0
            share = (1.0 - alpha) * ru / degrees[u]
            volume += degrees[u]
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                r[v] += share * weights[k]
                if not in_queue[v]:
                    rv = sign * r[v]
                    if rv > eps * degrees[v] and rv > DROP_THRESHOLD:
                        queue[tail] = v
                        tail = (tail + 1) % cap
                        in_queue[v] = True
    return volume, count


def warmup():
    """Force JIT compilation on a two-node graph (used by tests/CLI once)."""
    indptr = np.array([0, 1, 2], dtype=np.int64)
    indices = np.array([1, 0], dtype=np.int64)
    weights = np.ones(2, dtype=np.float64)
    degrees = np.ones(2, dtype=np.float64)
    p = np.zeros(2)
    r = np.zeros(2)
    r[0] = 1.0
    push_fifo(indptr, indices, weights, degrees, p, r, 0.15, 1e-4)
