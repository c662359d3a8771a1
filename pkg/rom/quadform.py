"""Compact Kronecker algebra and dimension bookkeeping.

The compact Kronecker product of a vector q of length r keeps one entry per
unordered pair (i, j), i <= j, in lexicographic order:
(0,0), (0,1), ..., (0,r-1), (1,1), ..., (r-1,r-1).
Every module that builds or applies a quadratic operator uses this ordering.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import DimensionError


def _check_rank(r):
    if int(r) != r or r < 1:
        raise DimensionError(f"invalid reduced dimension r={r}; r must be a positive integer")
    return int(r)


def compact_dim(r):
    """Number of unique quadratic monomials, r(r+1)/2."""
    r = _check_rank(r)
    return r * (r + 1) // 2


def data_dim(r, m=0):
    """Column count d(r, m) = 1 + r + r(r+1)/2 + m of the data matrix."""
    if m < 0:
        raise DimensionError(f"invalid input dimension m={m}")
    return 1 + r + compact_dim(r) + int(m)


@dataclass(frozen=True)
class CompactIndexMap:
    r: int
    rows: np.ndarray
    cols: np.ndarray

    @classmethod
    def for_rank(cls, r):
        return _index_map(_check_rank(r))


@lru_cache(maxsize=64)
def _index_map(r):
    rows, cols = np.triu_indices(r)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return CompactIndexMap(r=r, rows=rows, cols=cols)


def kron_compact(q):
    q = np.asarray(q, dtype=float)
    if q.ndim != 1 or q.size == 0:
        raise DimensionError(f"expected a nonempty vector, got shape {q.shape}")
    index = CompactIndexMap.for_rank(q.size)
    return q[index.rows] * q[index.cols]


def kron_compact_columns(Q):
    """Column-wise compact Kronecker product of an r x k matrix."""
    Q = np.asarray(Q, dtype=float)
    if Q.ndim == 1:
        return kron_compact(Q)
    if Q.shape[0] == 0:
        raise DimensionError("matrix has no rows")
    index = CompactIndexMap.for_rank(Q.shape[0])
    return Q[index.rows] * Q[index.cols]


def compact_from_full(H_full):
    """Collapse an operator acting on q (x) q into one acting on kron_compact(q).

    Off-diagonal columns (i, j) and (j, i) are summed, so the compact operator
    reproduces the full operator's action exactly. The row count is free;
    only the column count must be a perfect square.
    """
    H_full = np.asarray(H_full, dtype=float)
    if H_full.ndim != 2:
        raise DimensionError(f"expected a 2D operator, got shape {H_full.shape}")
    r = int(round(np.sqrt(H_full.shape[1])))
    if r < 1 or r * r != H_full.shape[1]:
        raise DimensionError(
            f"column count {H_full.shape[1]} is not a perfect square r^2"
        )
    index = CompactIndexMap.for_rank(r)
    upper = H_full[:, index.rows * r + index.cols]
    lower = H_full[:, index.cols * r + index.rows]
    return np.where(index.rows == index.cols, upper, upper + lower)
