"""Update compression for the uplink: sign-mean sparsifier and random sparsifier.

Two schemes share the sparse-update container:

* ``dsgd_quantize`` keeps the q most positive and q most negative entries of
  a dense update, then collapses the winning sign group to its mean value.
  The encoded payload is the support pattern plus one 33-bit value (32-bit
  magnitude + sign), so its bit cost is ``log2 C(d, q) + 33``.
* ``rand_sparsify`` keeps a uniformly random q-subset of the coordinates and
  passes each survivor through a 33-bit scalar quantizer (sign bit plus a
  32-bit uniform magnitude code over [0, max |kept|]), costing
  ``log2 C(d, q) + 33 q`` bits.

``max_q`` inverts either cost function against a bit budget: the largest
sparsity level a device can afford on its allocated link.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

_LN2 = math.log(2.0)
# 2^32 uniform magnitude levels over [0, scale].
_QUANT_LEVELS = 2**32 - 1

# log2 C(d, q) decays after q = d/2 slower than 33q grows whenever d < 2^33,
# keeping the random-sparsifier cost strictly increasing on [0, d].
_MAX_DIM = 2**33


@dataclass
class SparseUpdate:
    """A d-dimensional vector stored as (support indices, values).

    ``indices`` are strictly increasing positions in [0, dim); ``values``
    aligns with them.  The empty update (no indices) is the zero vector.
    """

    dim: int
    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.indices.shape != self.values.shape or self.indices.ndim != 1:
            raise ValueError("indices and values must be 1-D and equal length")
        if self.indices.size:
            if self.indices[0] < 0 or self.indices[-1] >= self.dim:
                raise ValueError("indices must lie in [0, dim)")
            if np.any(np.diff(self.indices) <= 0):
                raise ValueError("indices must be strictly increasing")

    @property
    def nnz(self) -> int:
        return self.indices.size

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.dim)
        dense[self.indices] = self.values
        return dense

    @staticmethod
    def empty(dim: int) -> "SparseUpdate":
        return SparseUpdate(dim, np.empty(0, dtype=np.int64), np.empty(0))

    @staticmethod
    def from_dense(vec: np.ndarray) -> "SparseUpdate":
        """Sparse view of a dense vector, keeping its nonzero entries."""
        vec = np.asarray(vec, dtype=np.float64)
        idx = np.flatnonzero(vec)
        return SparseUpdate(vec.size, idx, vec[idx])


def _log2_binom(d, q):
    """log2 of the binomial coefficient C(d, q), via log-gamma."""
    if np.ndim(d) == 0 and np.ndim(q) == 0:
        return (
            math.lgamma(d + 1) - math.lgamma(q + 1) - math.lgamma(d - q + 1)
        ) / _LN2
    d = np.asarray(d, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    return (gammaln(d + 1) - gammaln(q + 1) - gammaln(d - q + 1)) / _LN2


def _check_sparsity_args(d: int, q) -> None:
    if d < 0:
        raise ValueError(f"dimension must be nonnegative, got {d}")
    q = np.asarray(q)
    if np.any(q < 0) or np.any(q > d):
        raise ValueError(f"sparsity level must lie in [0, {d}]")


def bit_cost_dsgd(d: int, q) -> float | np.ndarray:
    """Bits to convey a sign-mean sparsified update: log2 C(d, q) + 33.

    The 33 bits carry the shared magnitude (32) and its sign (1); the
    log-binomial term indexes the support pattern.  Accepts scalar or
    array q.
    """
    _check_sparsity_args(d, q)
    cost = _log2_binom(d, q) + 33.0
    return float(cost) if np.isscalar(q) or np.ndim(q) == 0 else cost


def bit_cost_rand(d: int, q) -> float | np.ndarray:
    """Bits to convey a randomly sparsified update: log2 C(d, q) + 33 q.

    Each kept coordinate pays 33 bits (32-bit quantized magnitude + sign);
    the log-binomial term indexes the support pattern.
    """
    _check_sparsity_args(d, q)
    cost = _log2_binom(d, q) + 33.0 * np.asarray(q, dtype=np.float64)
    return float(cost) if np.isscalar(q) or np.ndim(q) == 0 else cost


def max_q(d: int, budget, scheme: str):
    """Largest sparsity level whose bit cost fits within ``budget``.

    Search ranges: [0, d//2] for "dsgd" (the cost is strictly increasing
    there; larger q is never needed in practice), [0, d] for "rand".
    Returns 0 when not even a single coordinate fits — a legal silent
    device.  ``budget`` may be an array, in which case the search runs
    lane-wise and an int array comes back.
    """
    if scheme == "dsgd":
        cost, hi_val = bit_cost_dsgd, d // 2
    elif scheme == "rand":
        if d >= _MAX_DIM:
            raise ValueError(f"dimension must be < 2^33, got {d}")
        cost, hi_val = bit_cost_rand, d
    else:
        raise ValueError(f"unknown scheme {scheme!r}; expected 'dsgd' or 'rand'")

    if np.ndim(budget) == 0:
        b = float(budget)
        if b < 0:
            raise ValueError(f"budget must be nonnegative, got {b}")
        if cost(d, 0) > b:
            return 0
        lo, hi = 0, hi_val
        # Binary search; cost is strictly increasing on [0, hi_val] and
        # cost(d, lo) <= b throughout.
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if cost(d, mid) <= b:
                lo = mid
            else:
                hi = mid - 1
        return lo

    budgets = np.asarray(budget, dtype=np.float64)
    if np.any(budgets < 0):
        raise ValueError("budget must be nonnegative")
    feasible = cost(d, 0) <= budgets
    lo = np.zeros(budgets.shape, dtype=np.int64)
    hi = np.full(budgets.shape, hi_val, dtype=np.int64)
    # Lane-wise binary search; settled lanes keep re-testing their own lo,
    # which never moves them.
    while np.any(lo < hi):
        mid = (lo + hi + 1) // 2
        fits = cost(d, mid) <= budgets
        lo = np.where(fits, mid, lo)
        hi = np.where(fits, hi, mid - 1)
    return np.where(feasible, lo, 0)


def dsgd_quantize(vec: np.ndarray, q: int) -> SparseUpdate:
    """Sign-mean sparsification: keep the 2q extremes, binarize to one sign.

    Keeps the q largest and q smallest entries, averages the positive and
    the negative survivors separately, and emits whichever sign group has
    the larger mean magnitude, every entry set to that mean (ties go to the
    positive side).  Ties in the extreme selection go to the lower index.

    Requires 1 <= q <= d//2 (q = 0 yields the empty update).  When the
    losing sign occupies fewer than q of the 2q extreme slots the winning
    group can hold more than q entries; with at least q entries of each
    sign the support size is exactly q.
    """
    vec = np.asarray(vec, dtype=np.float64)
    if not np.all(np.isfinite(vec)):
        raise ValueError("update vector contains non-finite entries")
    d = vec.size
    if q == 0:
        return SparseUpdate.empty(d)
    if q < 0 or q > d // 2:
        raise ValueError(f"q must lie in [0, d//2] = [0, {d // 2}], got {q}")

    top = np.argsort(-vec, kind="stable")[:q]
    bottom = np.argsort(vec, kind="stable")[:q]
    kept = np.union1d(top, bottom)
    kept_vals = vec[kept]

    pos = kept_vals > 0
    neg = kept_vals < 0
    mean_pos = kept_vals[pos].mean() if pos.any() else 0.0
    mean_neg = kept_vals[neg].mean() if neg.any() else 0.0

    if mean_pos >= -mean_neg:
        support, value = kept[pos], mean_pos
    else:
        support, value = kept[neg], mean_neg
    if support.size == 0:
        return SparseUpdate.empty(d)
    return SparseUpdate(d, support, np.full(support.size, value))


def rand_sparsify(vec: np.ndarray, q: int, rng: np.random.Generator) -> SparseUpdate:
    """Keep a uniformly random q-subset, quantizing survivors to 33 bits each.

    The magnitude code is uniform over [0, max |kept value|] with 2^32
    levels, so the per-entry quantization error is at most half a step,
    well under 2^-31 of the range.
    """
    vec = np.asarray(vec, dtype=np.float64)
    d = vec.size
    if q < 0 or q > d:
        raise ValueError(f"q must lie in [0, {d}], got {q}")
    if q == 0:
        return SparseUpdate.empty(d)

    support = np.sort(rng.choice(d, size=q, replace=False))
    kept = vec[support]
    scale = np.max(np.abs(kept))
    if scale == 0.0:
        return SparseUpdate(d, support, np.zeros(q))
    step = scale / _QUANT_LEVELS
    quantized = np.sign(kept) * np.rint(np.abs(kept) / step) * step
    return SparseUpdate(d, support, quantized)


def sparse_l2norm(u: SparseUpdate) -> float:
    """Euclidean norm of the embedded dense vector."""
    return float(np.linalg.norm(u.values))
