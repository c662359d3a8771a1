"""Evaluation and time integration of the quadratic reduced-order model

    d/dt qhat = c + A qhat + H kron_compact(qhat) + B u(t).

Integration uses the Dormand-Prince 5(4) pair with a PI step-size controller
and quartic dense output. Bound violations and integrator failures are
reported in the trajectory status; they are never raised.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .exceptions import DimensionError
from .quadform import CompactIndexMap

logger = logging.getLogger(__name__)


# =============================================================================
# Input signals
# =============================================================================

class InputSignal:
    """u(t), evaluable anywhere on the integration interval."""
    m = 0

    def __call__(self, t):
        raise NotImplementedError

    def sample(self, times):
        times = np.asarray(times, dtype=float)
        if self.m == 0:
            return np.empty((0, times.size))
        return np.column_stack([self(t) for t in times])


class NoInput(InputSignal):
    _empty = np.empty(0)

    def __call__(self, t):
        return self._empty

    def __repr__(self):
        return 'NoInput()'


class SampledSignal(InputSignal):
    """Linear interpolation of an m x k sample matrix, constant beyond the ends."""

    def __init__(self, times, values):
        times = np.asarray(times, dtype=float)
        values = np.atleast_2d(np.asarray(values, dtype=float))
        if values.shape[1] != times.size:
            raise DimensionError(f"{values.shape[1]} input samples for {times.size} times")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise DimensionError("input sample times must be increasing")
        self.times = times
        self.values = values
        self.m = values.shape[0]

    def __call__(self, t):
        return np.array([np.interp(t, self.times, row) for row in self.values])

    def sample(self, times):
        times = np.asarray(times, dtype=float)
        return np.vstack([np.interp(times, self.times, row) for row in self.values])


@dataclass(frozen=True)
class PressureForcing(InputSignal):
    """u(t) = p_ref (1 + amplitude sin(2 pi f t))."""
    p_ref: float = 1e6
    amplitude: float = 0.1
    frequency: float = 5000.0
    m = 1

    def __call__(self, t):
        return np.array([self.p_ref * (1.0 + self.amplitude * math.sin(2.0 * math.pi * self.frequency * t))])

    def sample(self, times):
        times = np.asarray(times, dtype=float)
        return (self.p_ref * (1.0 + self.amplitude * np.sin(2.0 * np.pi * self.frequency * times)))[np.newaxis]


def pressure_forcing(p_ref=1e6, amp=0.1, f=5000.0):
    if not p_ref > 0:
        raise DimensionError(f"reference pressure must be positive, got {p_ref}")
    if not f > 0:
        raise DimensionError(f"forcing frequency must be positive, got {f}")
    return PressureForcing(float(p_ref), float(amp), float(f))


# =============================================================================
# Trajectories
# =============================================================================

class Status(str, Enum):
    COMPLETED = 'completed'
    BOUND_VIOLATED = 'bound_violated'
    INTEGRATOR_FAILED = 'integrator_failed'


@dataclass(frozen=True)
class TrajectoryStatus:
    kind: Status
    time: Optional[float] = None
    index: Optional[int] = None
    message: str = ''

    def __str__(self):
        if self.kind is Status.COMPLETED:
            return self.kind.value
        if self.kind is Status.BOUND_VIOLATED:
            return f"{self.kind.value}(t={self.time:.6g}, index={self.index})"
        return f"{self.kind.value}(t={self.time:.6g}: {self.message})"


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    status: TrajectoryStatus

    @property
    def completed(self):
        return self.status.kind is Status.COMPLETED


# =============================================================================
# Right-hand side
# =============================================================================

def rom_rhs(ops, qhat, u=None):
    """c + A qhat + H kron_compact(qhat) + B u."""
    qhat = np.asarray(qhat, dtype=float)
    if qhat.shape != (ops.r,):
        raise DimensionError(f"state has shape {qhat.shape}, operators expect ({ops.r},)")
    index = CompactIndexMap.for_rank(ops.r)
    out = ops.c_hat + ops.A_hat @ qhat + ops.H_hat @ (qhat[index.rows] * qhat[index.cols])
    if ops.m:
        if u is None:
            raise DimensionError(f"operators expect an input of length {ops.m}")
        out += ops.B_hat @ np.asarray(u, dtype=float).reshape(ops.m)
    return out


def _rhs_function(ops, signal):
    if signal.m != ops.m:
        raise DimensionError(f"signal has m={signal.m}, operators expect m={ops.m}")
    index = CompactIndexMap.for_rank(ops.r)
    rows, cols = index.rows, index.cols
    c, A, H, B = ops.c_hat, ops.A_hat, ops.H_hat, ops.B_hat

    if ops.m == 0:
        def fun(t, q):
            return c + A @ q + H @ (q[rows] * q[cols])
    else:
        def fun(t, q):
            return c + A @ q + H @ (q[rows] * q[cols]) + B @ signal(t)
    return fun


# =============================================================================
# Dormand-Prince 5(4)
# =============================================================================

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# fifth-order minus embedded fourth-order weights, FSAL stage last
_E = np.array([-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40])
# quartic dense output, columns multiply x, x^2, x^3, x^4
_P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_ALPHA = 0.7 / 5
_BETA = 0.4 / 5


def _rms(x):
    return float(np.linalg.norm(x) / math.sqrt(x.size)) if x.size else 0.0


def _initial_step(fun, t0, y0, f0, direction_span, rtol, atol):
    scale = atol + np.abs(y0) * rtol
    d0, d1 = _rms(y0 / scale), _rms(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, direction_span)
    f1 = fun(t0 + h0, y0 + h0 * f0)
    d2 = _rms((f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, direction_span)


def _violation(y, bound):
    if bound is None:
        return None
    above = np.flatnonzero(np.abs(y) > bound)
    return int(above[0]) if above.size else None


def integrate(ops, qhat0, signal=None, t_eval=None, rtol=1e-6, atol=1e-9, bound=None, max_steps=200_000):
    """Integrate the ROM from qhat0 at t_eval[0] and report states at every t_eval.

    With ``bound`` set, integration stops at the first accepted step or output
    point where some |qhat_i| > bound.
    """
    signal = signal or NoInput()
    fun = _rhs_function(ops, signal)
    t_eval = np.asarray(t_eval, dtype=float)
    if t_eval.ndim != 1 or t_eval.size == 0:
        raise DimensionError("t_eval must be a nonempty vector")
    if np.any(np.diff(t_eval) <= 0):
        raise DimensionError("t_eval must be strictly increasing")
    y = np.array(qhat0, dtype=float).reshape(-1)
    if y.size != ops.r:
        raise DimensionError(f"initial state has {y.size} entries, operators expect {ops.r}")

    r = ops.r
    times, states = [], []

    def finish(kind, t=None, index=None, message=''):
        return Trajectory(
            np.array(times),
            np.column_stack(states) if states else np.empty((r, 0)),
            TrajectoryStatus(kind, t, index, message),
        )

    t, tf = float(t_eval[0]), float(t_eval[-1])
    if not np.all(np.isfinite(y)):
        return finish(Status.INTEGRATOR_FAILED, t, message='non-finite initial state')
    index = _violation(y, bound)
    if index is not None:
        return finish(Status.BOUND_VIOLATED, t, index)
    times.append(t)
    states.append(y.copy())
    if t_eval.size == 1:
        return finish(Status.COMPLETED)

    f = fun(t, y)
    if not np.all(np.isfinite(f)):
        return finish(Status.INTEGRATOR_FAILED, t, message='non-finite right-hand side')
    h = _initial_step(fun, t, y, f, tf - t, rtol, atol)
    K = np.empty((7, r))
    next_out = 1
    err_prev = 1e-4
    rejected = False
    steps = accepted = 0

    while t < tf:
        if steps >= max_steps:
            return finish(Status.INTEGRATOR_FAILED, t, message=f'exceeded {max_steps} steps')
        h_min = 10 * np.spacing(abs(t) or 1.0)
        if not np.isfinite(h) or h < h_min:
            return finish(Status.INTEGRATOR_FAILED, t, message='step size underflow')
        if t + h > tf or tf - (t + h) < h_min:
            h = tf - t
        steps += 1

        K[0] = f
        for s in range(1, 6):
            K[s] = fun(t + _C[s] * h, y + h * (_A[s] @ K[:s]))
        y_new = y + h * (_B @ K[:6])
        t_new = t + h if t + h < tf else tf
        f_new = fun(t_new, y_new)
        K[6] = f_new
        scale = atol + np.maximum(np.abs(y), np.abs(y_new)) * rtol
        err = _rms(h * (_E @ K) / scale)

        if not np.isfinite(err) or not np.all(np.isfinite(f_new)):
            h *= _MIN_FACTOR
            rejected = True
            continue
        if err > 1.0:
            h *= max(_MIN_FACTOR, _SAFETY * err ** (-1 / 5))
            rejected = True
            continue

        accepted += 1
        # dense output at every requested time inside (t, t_new]
        Q = K.T @ _P
        while next_out < t_eval.size and t_eval[next_out] <= t_new:
            t_out = t_eval[next_out]
            if t_out == t_new:
                y_out = y_new.copy()
            else:
                x = (t_out - t) / h
                y_out = y + h * (Q @ (x ** np.arange(1, 5)))
            index = _violation(y_out, bound)
            if index is not None:
                return finish(Status.BOUND_VIOLATED, float(t_out), index)
            times.append(float(t_out))
            states.append(y_out)
            next_out += 1
        index = _violation(y_new, bound)
        if index is not None:
            return finish(Status.BOUND_VIOLATED, t_new, index)

        t, y, f = t_new, y_new, f_new
        err = max(err, 1e-10)
        factor = _SAFETY * err ** (-_ALPHA) * err_prev ** _BETA
        factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
        if rejected:
            factor = min(1.0, factor)
        h *= factor
        err_prev = max(err, 1e-4)
        rejected = False

    logger.debug("integrated to t=%g in %d steps (%d accepted)", tf, steps, accepted)
    return finish(Status.COMPLETED)
