"""Hash-kernel projection of sparse vectors into a fixed dimension.

Two hash functions derived from one 64-bit seed map node ids to buckets
(h_d) and signs (h_sgn); the kernel H sends a sparse vector x to the
d-dimensional vector with entries sum_{i: h_d(i)=j} h_sgn(i) * x(i).
Inner products are preserved in expectation over seeds.

The concrete hash is frozen for reproducibility: the splitmix64 output
function mix(seed' + (id+1) * GAMMA) with GAMMA = 0x9E3779B97F4A7C15,
where seed' is the mixed user seed (bucket and sign streams use two
different sub-seeds).  Buckets take the 64-bit value modulo d, which for
the power-of-two dims used here is exactly the low log2(d) bits; the
sign comes from the top bit.
"""

from __future__ import annotations

import math

import numpy as np

from .validation import check_dim

_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_MASK = (1 << 64) - 1
_SIGN_SUBSEED = 0xA5A5A5A5A5A5A5A5


def _mix(z: int) -> int:
    z &= _MASK
    z ^= z >> 30
    z = (z * _MIX1) & _MASK
    z ^= z >> 27
    z = (z * _MIX2) & _MASK
    z ^= z >> 31
    return z


def _mix_array(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = z.astype(np.uint64, copy=True)
        z ^= z >> np.uint64(30)
        z *= np.uint64(_MIX1)
        z ^= z >> np.uint64(27)
        z *= np.uint64(_MIX2)
        z ^= z >> np.uint64(31)
    return z


class HashKernel:
    """Pure (seed, id) -> bucket/sign functions plus the projection.

    Same (seed, dim, id) always gives the same outputs, across processes
    and platforms.
    """

    def __init__(self, dim: int = 512, seed: int = 0):
        self.dim = check_dim(dim)
        self.seed = int(seed) & _MASK
        self._bucket_seed = _mix(self.seed)
        self._sign_seed = _mix(self.seed ^ _SIGN_SUBSEED)

    def bucket(self, node: int) -> int:
        return _mix(self._bucket_seed + (node + 1) * _GAMMA) % self.dim

    def sign(self, node: int) -> int:
        return 1 if _mix(self._sign_seed + (node + 1) * _GAMMA) >> 63 == 0 else -1

    def buckets(self, nodes: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore"):
            z = (nodes.astype(np.uint64) + np.uint64(1)) * np.uint64(_GAMMA)
            z += np.uint64(self._bucket_seed)
        return (_mix_array(z) % np.uint64(self.dim)).astype(np.int64)

    def signs(self, nodes: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore"):
            z = (nodes.astype(np.uint64) + np.uint64(1)) * np.uint64(_GAMMA)
            z += np.uint64(self._sign_seed)
        top = (_mix_array(z) >> np.uint64(63)).astype(np.int64)
        return 1 - 2 * top

    def project(self, x: dict[int, float]) -> np.ndarray:
        """Raw kernel H(x): signed bucket sums of the entries of x.
        Touches only the nonzero support of x."""
        out = np.zeros(self.dim)
        if not x:
            return out
        ids = np.fromiter(x.keys(), dtype=np.int64, count=len(x))
        vals = np.fromiter(x.values(), dtype=np.float64, count=len(x))
        np.add.at(out, self.buckets(ids), self.signs(ids) * vals)
        return out


def hash_project(p: dict[int, float], n_t: int, kernel: HashKernel) -> np.ndarray:
    """Embedding projection: H applied to the log-scaled estimate,
    entry i contributing max(log(p(i) * n_t), 0).

    Entries with p(i) * n_t <= 1 (including any transiently negative
    estimates) contribute nothing, so the output is the zero vector when
    no estimate entry exceeds 1/n_t.
    """
    transformed = {}
    for i, val in p.items():
        arg = val * n_t
        if arg > 1.0:
            transformed[i] = math.log(arg)
    return kernel.project(transformed)


def inner_product_estimate(x: dict[int, float], y: dict[int, float],
                           kernel: HashKernel) -> float:
    """<H(x), H(y)>; unbiased for <x, y> in expectation over seeds."""
    return float(kernel.project(x) @ kernel.project(y))


def bucket_histogram(kernel: HashKernel, num_ids: int) -> np.ndarray:
    """Bucket occupancy counts of h_d over ids 0..num_ids-1."""
    ids = np.arange(num_ids, dtype=np.int64)
    return np.bincount(kernel.buckets(ids), minlength=kernel.dim)


def sign_counts(kernel: HashKernel, num_ids: int) -> tuple[int, int]:
    """(#plus, #minus) of h_sgn over ids 0..num_ids-1."""
    ids = np.arange(num_ids, dtype=np.int64)
    plus = int((kernel.signs(ids) > 0).sum())
    return plus, num_ids - plus


def uniformity_pvalue(kernel: HashKernel, num_ids: int) -> float:
    """Chi-square goodness-of-fit p-value of h_d against uniform buckets."""
    from scipy.stats import chi2

    counts = bucket_histogram(kernel, num_ids)
    expected = num_ids / kernel.dim
    stat = float(((counts - expected) ** 2 / expected).sum())
    return float(chi2.sf(stat, kernel.dim - 1))


def sign_balance_pvalue(kernel: HashKernel, num_ids: int) -> float:
    """Chi-square p-value of h_sgn against a fair +1/-1 split."""
    from scipy.stats import chi2

    plus, minus = sign_counts(kernel, num_ids)
    expected = num_ids / 2.0
    stat = (plus - expected) ** 2 / expected + (minus - expected) ** 2 / expected
    return float(chi2.sf(stat, 1))
