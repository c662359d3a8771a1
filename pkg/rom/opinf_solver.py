"""Regularized Operator Inference regression.

The learned operators O = [c A H B] solve

    min_O ||D O^T - R^T||_F^2 + ||Gamma O^T||_F^2

with D = [1 | Qhat^T | (Qhat (x) Qhat)^T | U^T] and a diagonal Gamma that puts
lambda2 on the quadratic block and lambda1 everywhere else. The Gram products
D^T D and D^T R^T are formed once; every regularization choice after that costs
one d x d Cholesky solve, independent of n and k.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as la
from scipy.linalg import lapack

from .exceptions import DimensionError, FactorizationError, OverParameterizedError
from .quadform import compact_dim, data_dim, kron_compact_columns

logger = logging.getLogger(__name__)


def _as_inputs(U, k):
    if U is None:
        return np.empty((0, k))
    U = np.asarray(U, dtype=float)
    return U.reshape(1, -1) if U.ndim == 1 else U


@dataclass(frozen=True)
class DataMatrix:
    D: np.ndarray
    r: int
    m: int

    @property
    def k(self):
        return self.D.shape[0]

    @property
    def d(self):
        return self.D.shape[1]

    def rank(self):
        return int(np.linalg.matrix_rank(self.D))

    def require_full_rank(self):
        rank = self.rank()
        if rank < self.d:
            raise DimensionError(
                f"data matrix is rank deficient: rank {rank} < d(r={self.r}, m={self.m}) = {self.d}"
            )


def build_data_matrix(Qhat, U=None):
    """Assemble D = [1_k | Qhat^T | kron_compact(Qhat)^T | U^T]."""
    Qhat = np.atleast_2d(np.asarray(Qhat, dtype=float))
    r, k = Qhat.shape
    U = _as_inputs(U, k)
    if U.shape[1] != k:
        raise DimensionError(f"Qhat has {k} columns, inputs have {U.shape[1]}")
    m = U.shape[0]
    d = data_dim(r, m)
    if k <= d:
        logger.warning("data matrix is not overdetermined: k=%d <= d(r=%d, m=%d)=%d", k, r, m, d)
    D = np.hstack([np.ones((k, 1)), Qhat.T, kron_compact_columns(Qhat).T, U.T])
    return DataMatrix(D, r, m)


def check_overdetermined(r, m, k):
    d = data_dim(r, m)
    if d >= k:
        raise OverParameterizedError(r, m, d, k)
    return d


@dataclass(frozen=True)
class GramCache:
    DtD: np.ndarray
    DtRt: np.ndarray
    r: int
    m: int
    k: int
    # Kept only for the unregularized least-squares path.
    data: Optional[DataMatrix] = None
    R: Optional[np.ndarray] = None

    @property
    def d(self):
        return self.DtD.shape[0]


def build_gram_cache(data, R, keep_data=False):
    R = np.atleast_2d(np.asarray(R, dtype=float))
    if R.shape != (data.r, data.k):
        raise DimensionError(f"derivatives have shape {R.shape}, expected {(data.r, data.k)}")
    DtD = data.D.T @ data.D
    DtD = 0.5 * (DtD + DtD.T)
    DtRt = data.D.T @ R.T
    for array in (DtD, DtRt):
        array.setflags(write=False)
    return GramCache(
        DtD, DtRt, data.r, data.m, data.k,
        data if keep_data else None,
        R if keep_data else None,
    )


@dataclass(frozen=True)
class RegPair:
    lambda1: float
    lambda2: float

    def __post_init__(self):
        for name in ('lambda1', 'lambda2'):
            value = float(getattr(self, name))
            if not (np.isfinite(value) and value >= 0):
                raise DimensionError(f"{name} must be a nonnegative finite number, got {value}")
            object.__setattr__(self, name, value)

    @classmethod
    def from_log10(cls, point):
        return cls(10.0 ** float(point[0]), 10.0 ** float(point[1]))

    @property
    def log10(self):
        return np.log10([self.lambda1, self.lambda2])

    @property
    def is_zero(self):
        return self.lambda1 == 0 and self.lambda2 == 0

    def diagonal(self, r, m):
        """Diagonal of Gamma = Lambda(lambda1, lambda2) for a d(r, m)-column regression."""
        gamma = np.full(data_dim(r, m), self.lambda1)
        gamma[1 + r:1 + r + compact_dim(r)] = self.lambda2
        return gamma

    def __str__(self):
        return f"(lambda1={self.lambda1:.6g}, lambda2={self.lambda2:.6g})"


@dataclass(frozen=True)
class RomOperators:
    c_hat: np.ndarray
    A_hat: np.ndarray
    H_hat: np.ndarray
    B_hat: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c_hat, dtype=float).reshape(-1)
        r = c.size
        A = np.asarray(self.A_hat, dtype=float).reshape(r, r)
        H = np.asarray(self.H_hat, dtype=float).reshape(r, compact_dim(r))
        B = np.asarray(self.B_hat, dtype=float)
        B = B.reshape(r, -1) if B.size else np.empty((r, 0))
        for name, value in zip(('c_hat', 'A_hat', 'H_hat', 'B_hat'), (c, A, H, B)):
            object.__setattr__(self, name, value)

    @property
    def r(self):
        return self.c_hat.size

    @property
    def m(self):
        return self.B_hat.shape[1]

    @property
    def O(self):
        return np.hstack([self.c_hat[:, np.newaxis], self.A_hat, self.H_hat, self.B_hat])

    @classmethod
    def from_O(cls, O, r, m):
        O = np.asarray(O, dtype=float)
        if O.shape != (r, data_dim(r, m)):
            raise DimensionError(f"operator matrix has shape {O.shape}, expected {(r, data_dim(r, m))}")
        s = compact_dim(r)
        return cls(O[:, 0], O[:, 1:1 + r], O[:, 1 + r:1 + r + s], O[:, 1 + r + s:])

    @classmethod
    def zeros(cls, r, m=0):
        return cls.from_O(np.zeros((r, data_dim(r, m))), r, m)


def solve_regularized(cache, reg):
    """Solve (D^T D + Gamma^T Gamma) O^T = D^T R^T with one Cholesky factorization.

    The r right-hand sides share the factorization. With lambda1 = lambda2 = 0
    and the data retained in the cache, the column-pivoted least-squares path
    is used instead of the normal equations.
    """
    if reg.is_zero and cache.data is not None:
        return solve_lstsq(cache.data, cache.R, reg)

    lhs = np.array(cache.DtD, copy=True)
    lhs[np.diag_indices_from(lhs)] += reg.diagonal(cache.r, cache.m) ** 2
    _, Ot, info = lapack.dposv(lhs, np.array(cache.DtRt), lower=False)
    if info > 0:
        if cache.data is not None and (reg.lambda1 == 0 or reg.lambda2 == 0):
            logger.debug("Cholesky failed at pivot %d, using least squares", info)
            return solve_lstsq(cache.data, cache.R, reg)
        raise FactorizationError(info)
    if info < 0:
        raise FactorizationError(-info, f"LAPACK dposv rejected argument {-info}")
    return RomOperators.from_O(Ot.T, cache.r, cache.m)


def solve_lstsq(data, R, reg):
    """Solve the stacked system [D; Gamma] O^T = [R^T; 0] by pivoted QR."""
    R = np.atleast_2d(np.asarray(R, dtype=float))
    gamma = reg.diagonal(data.r, data.m)
    lhs = np.vstack([data.D, np.diag(gamma)])
    rhs = np.vstack([R.T, np.zeros((data.d, R.shape[0]))])
    Ot, _, rank, _ = la.lstsq(lhs, rhs, lapack_driver='gelsy')
    if rank < data.d:
        logger.warning("least-squares system is rank deficient (rank %d < %d)", rank, data.d)
    return RomOperators.from_O(Ot.T, data.r, data.m)


def regression_objective(data, R, ops, reg):
    """||D O^T - R^T||_F^2 + ||Gamma O^T||_F^2."""
    Ot = ops.O.T
    residual = data.D @ Ot - np.atleast_2d(R).T
    penalty = reg.diagonal(data.r, data.m)[:, np.newaxis] * Ot
    return float(np.sum(residual ** 2) + np.sum(penalty ** 2))
