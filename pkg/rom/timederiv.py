"""Fourth-order finite-difference time derivatives on a uniform grid."""
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError

# 5-point stencils, all scaled by 1/(12 dt).
_FIRST = np.array([-25.0, 48.0, -36.0, 16.0, -3.0])
_SECOND = np.array([-3.0, -10.0, 18.0, -6.0, 1.0])


@dataclass(frozen=True)
class UniformTimeGrid:
    t0: float
    dt: float
    k: int

    def __post_init__(self):
        if not self.dt > 0:
            raise DimensionError(f"time step must be positive, got {self.dt}")
        if self.k < 1:
            raise DimensionError(f"grid needs at least one sample, got k={self.k}")

    @classmethod
    def from_times(cls, times, rtol=1e-8):
        times = np.asarray(times, dtype=float)
        if times.ndim != 1 or times.size < 2:
            raise DimensionError("need at least two time samples to infer a grid")
        steps = np.diff(times)
        dt = (times[-1] - times[0]) / (times.size - 1)
        if not np.allclose(steps, dt, rtol=rtol, atol=0):
            raise DimensionError("time samples are not uniformly spaced")
        return cls(float(times[0]), float(dt), times.size)

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(self.k)

    @property
    def t_last(self):
        return self.t0 + self.dt * (self.k - 1)


def fd4(Qhat, grid):
    """Estimate d/dt of every row of Qhat, sampled on ``grid``.

    Interior columns use the central 5-point stencil; the first two and the
    last two columns use one-sided/offset 5-point stencils of the same order.
    """
    Qhat = np.asarray(Qhat, dtype=float)
    one_dim = Qhat.ndim == 1
    X = np.atleast_2d(Qhat)
    k = X.shape[1]
    if k != grid.k:
        raise DimensionError(f"matrix has {k} columns, grid has {grid.k} samples")
    if k < 5:
        raise DimensionError(f"fourth-order differences need k >= 5 samples, got {k}")

    out = np.empty_like(X)
    out[:, 2:-2] = (X[:, :-4] - 8.0 * X[:, 1:-3] + 8.0 * X[:, 3:-1] - X[:, 4:])
    out[:, 0] = X[:, :5] @ _FIRST
    out[:, 1] = X[:, :5] @ _SECOND
    out[:, -2] = -(X[:, -5:] @ _SECOND[::-1])
    out[:, -1] = -(X[:, -5:] @ _FIRST[::-1])
    out /= 12.0 * grid.dt
    return out[0] if one_dim else out
