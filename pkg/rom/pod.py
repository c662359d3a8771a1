"""Proper orthogonal decomposition of snapshot matrices."""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .exceptions import DimensionError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RsvdOptions:
    """Randomized SVD settings; matrices with min(n, k) <= dense_limit use a dense SVD."""
    oversampling: int = 10
    power_iterations: int = 2
    dense_limit: int = 512
    seed: int = 0


@dataclass(frozen=True)
class PodBasis:
    V: np.ndarray
    singular_values: np.ndarray
    total_energy: float

    @property
    def n(self):
        return self.V.shape[0]

    @property
    def r(self):
        return self.V.shape[1]

    def truncate(self, r):
        if not 1 <= r <= self.r:
            raise DimensionError(f"cannot truncate a rank-{self.r} basis to r={r}")
        return PodBasis(self.V[:, :r], self.singular_values, self.total_energy)

    def energy(self, r=None):
        return cumulative_energy(self.singular_values, r or self.r, self.total_energy)


def randomized_svd(Q, rank, oversampling=10, power_iterations=2, rng=None):
    """Randomized range finder followed by a dense SVD of the small projection.

    Returns the leading ``rank`` left singular vectors and all
    ``rank + oversampling`` sketch singular values.
    """
    rng = np.random.default_rng(rng)
    n, k = Q.shape
    sketch = min(rank + oversampling, n, k)
    Y = Q @ rng.standard_normal((k, sketch))
    basis, _ = la.qr(Y, mode='economic')
    for _ in range(power_iterations):
        Z, _ = la.qr(Q.T @ basis, mode='economic')
        basis, _ = la.qr(Q @ Z, mode='economic')
    U_small, s, _ = la.svd(basis.T @ Q, full_matrices=False)
    return (basis @ U_small)[:, :rank], s


def _fix_signs(V):
    """Make the largest-magnitude entry of every column positive."""
    rows = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[rows, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def pod(Q, r=None, opts=RsvdOptions()):
    """Rank-r POD basis of the snapshot matrix Q.

    With ``r=None`` every computed mode is kept: all min(n, k) modes for the
    dense path, ``dense_limit`` modes for the randomized path.
    """
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2:
        raise DimensionError(f"snapshot matrix must be 2D, got shape {Q.shape}")
    n, k = Q.shape
    limit = min(n, k)
    dense = limit <= opts.dense_limit
    if r is None:
        r = limit if dense else opts.dense_limit
    if not 1 <= r <= limit:
        raise DimensionError(f"rank r={r} must satisfy 1 <= r <= min(n, k) = {limit}")

    if dense:
        U, s, _ = la.svd(Q, full_matrices=False)
        V = U[:, :r]
    else:
        logger.debug("randomized SVD of a %dx%d matrix, rank %d", n, k, r)
        V, s = randomized_svd(Q, r, opts.oversampling, opts.power_iterations, opts.seed)
    total = float(np.sum(Q * Q))
    return PodBasis(_fix_signs(V), s, total)


def cumulative_energy(singular_values, r, total_energy=None):
    """Fraction of squared singular-value mass captured by the leading r modes.

    ``total_energy`` defaults to the sum of the given squared values; pass
    ||Q||_F^2 when the spectrum is a truncated sketch.
    """
    s2 = np.asarray(singular_values, dtype=float) ** 2
    if not 1 <= r <= s2.size:
        raise DimensionError(f"r={r} outside 1..{s2.size}")
    total = s2.sum() if total_energy is None else total_energy
    if total <= 0:
        raise DimensionError("cumulative energy of an all-zero spectrum is undefined")
    return float(min(s2[:r].sum() / total, 1.0))


def select_rank(singular_values, threshold, total_energy=None):
    """Smallest r whose cumulative energy exceeds ``threshold``."""
    if not 0 < threshold < 1:
        raise DimensionError(f"energy threshold must lie in (0, 1), got {threshold}")
    s2 = np.asarray(singular_values, dtype=float) ** 2
    total = s2.sum() if total_energy is None else total_energy
    if total <= 0:
        raise DimensionError("cannot select a rank from an all-zero spectrum")
    energies = np.cumsum(s2) / total
    above = np.flatnonzero(energies > threshold)
    if above.size == 0:
        raise DimensionError(
            f"the {s2.size} computed modes capture {energies[-1]:.6f} of the energy, "
            f"not above {threshold}; increase the sketch size"
        )
    return int(above[0]) + 1


def _matrix(V):
    return V.V if isinstance(V, PodBasis) else np.asarray(V, dtype=float)


def project(V, Q):
    V, Q = _matrix(V), np.asarray(Q, dtype=float)
    if V.shape[0] != Q.shape[0]:
        raise DimensionError(f"basis has {V.shape[0]} rows, snapshots have {Q.shape[0]}")
    return V.T @ Q


def reconstruct(V, Qhat):
    V, Qhat = _matrix(V), np.asarray(Qhat, dtype=float)
    if V.shape[1] != Qhat.shape[0]:
        raise DimensionError(f"basis has {V.shape[1]} columns, reduced states have {Qhat.shape[0]} rows")
    return V @ Qhat


def bound_factors(V):
    """Row sums of |V|: |q_i(t)| <= B * bound_factors(V)[i] whenever max|qhat| <= B."""
    return np.abs(_matrix(V)).sum(axis=1)
