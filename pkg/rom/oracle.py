"""Ground truth for verifying the learned models.

Intrusive Galerkin projection of known quadratic full-order operators, a
viscous Burgers testbed with exact quadratic structure, exact-derivative
datasets generated from a known ROM, and the spatially averaged relative
error series used to judge reconstructions.
"""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sparse
from scipy.integrate import solve_ivp, trapezoid

from .exceptions import DimensionError, IntegrationError
from .opinf_solver import RomOperators
from .pod import PodBasis
from .preprocess import apply_scaling, apply_transform, invert_scaling, invert_transform
from .quadform import compact_dim, compact_from_full, kron_compact_columns
from .rom_model import NoInput, integrate

logger = logging.getLogger(__name__)


# =============================================================================
# Full-order operators
# =============================================================================

@dataclass(frozen=True)
class FomOperators:
    """dq/dt = c + A q + H (q (x) q) + B u, with A and H sparse."""
    c: np.ndarray
    A: sparse.csr_matrix
    H: sparse.csr_matrix
    B: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.c).size
        object.__setattr__(self, 'c', np.asarray(self.c, dtype=float).reshape(n))
        object.__setattr__(self, 'A', sparse.csr_matrix(self.A))
        object.__setattr__(self, 'H', sparse.csr_matrix(self.H))
        B = np.asarray(self.B, dtype=float)
        object.__setattr__(self, 'B', B.reshape(n, -1) if B.size else np.empty((n, 0)))
        if self.A.shape != (n, n) or self.H.shape != (n, n * n):
            raise DimensionError(
                f"inconsistent full-order shapes: c {n}, A {self.A.shape}, H {self.H.shape}"
            )

    @property
    def n(self):
        return self.c.size

    @property
    def m(self):
        return self.B.shape[1]

    def quadratic(self, x, y):
        """H (x (x) y)."""
        return self.H @ np.kron(x, y)

    def jacobian(self, q):
        column = sparse.csr_matrix(np.asarray(q, dtype=float).reshape(-1, 1))
        eye = sparse.identity(self.n, format='csr')
        return (self.A + self.H @ (sparse.kron(column, eye) + sparse.kron(eye, column))).tocsr()

    def without_quadratic(self):
        return FomOperators(self.c, self.A, sparse.csr_matrix(self.H.shape), self.B)


def fom_rhs(fom, q, u=None):
    q = np.asarray(q, dtype=float)
    out = fom.c + fom.A @ q + fom.quadratic(q, q)
    if fom.m:
        out = out + fom.B @ np.asarray(u, dtype=float).reshape(fom.m)
    return out


def galerkin_project(fom, V):
    """Intrusive ROM c_r = V^T c, A_r = V^T A V, H_r = V^T H (V (x) V), B_r = V^T B."""
    V = V.V if isinstance(V, PodBasis) else np.asarray(V, dtype=float)
    if V.ndim != 2 or V.shape[0] != fom.n:
        raise DimensionError(f"basis has shape {V.shape}, full-order state has n={fom.n}")
    r = V.shape[1]
    # columns H(v_a (x) v_b), a-major to match the full Kronecker ordering
    HVV = np.column_stack([fom.quadratic(V[:, a], V[:, b]) for a in range(r) for b in range(r)])
    return RomOperators(
        V.T @ fom.c,
        V.T @ (fom.A @ V),
        compact_from_full(V.T @ HVV),
        V.T @ fom.B,
    )


def make_burgers_fom(n, viscosity, length=1.0, boundary='dirichlet'):
    """Semi-discrete viscous Burgers equation q_t + q q_x = viscosity q_xx.

    The convective term uses the skew-symmetric central form
    -(1/3)[(q^2)_x + q q_x], which conserves the discrete energy q^T q.
    ``dirichlet``: n interior nodes, right boundary 0, the input u(t) is the
    left boundary value and enters through the diffusion stencil.
    ``periodic``: n nodes on a periodic grid, B = 0.
    """
    if n < 8:
        raise DimensionError(f"Burgers grid needs n >= 8 nodes, got {n}")
    if not viscosity > 0:
        raise DimensionError(f"viscosity must be positive, got {viscosity}")
    if boundary not in ('dirichlet', 'periodic'):
        raise DimensionError(f"unknown boundary condition '{boundary}'")
    periodic = boundary == 'periodic'
    h = length / n if periodic else length / (n + 1)

    A = sparse.diags(
        [np.ones(n - 1), -2.0 * np.ones(n), np.ones(n - 1)], [-1, 0, 1], format='lil'
    )
    if periodic:
        A[0, n - 1] = A[n - 1, 0] = 1.0
    A = viscosity / h ** 2 * A.tocsr()

    coef = 1.0 / (6.0 * h)
    rows, cols, vals = [], [], []
    for i in range(n):
        for neighbor, sign in ((i + 1, -1.0), (i - 1, 1.0)):
            if periodic:
                neighbor %= n
            elif not 0 <= neighbor < n:
                continue
            rows += [i, i]
            cols += [neighbor * n + neighbor, i * n + neighbor]
            vals += [sign * coef, sign * coef]
    H = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n * n))

    B = np.zeros((n, 1))
    if not periodic:
        B[0, 0] = viscosity / h ** 2
    return FomOperators(np.zeros(n), A, H, B)


def burgers_grid(n, length=1.0, boundary='dirichlet'):
    """Node coordinates matching ``make_burgers_fom``."""
    if boundary == 'periodic':
        return np.arange(n) * (length / n)
    return np.arange(1, n + 1) * (length / (n + 1))


def simulate_fom(fom, q0, signal, times, rtol=1e-8, atol=1e-10):
    """Integrate the full-order model with BDF and the analytic sparse Jacobian."""
    times = np.asarray(times, dtype=float)
    if signal is None or (signal.m == 0 and not fom.B.any()):
        # input-free run; a zero B makes any input irrelevant
        zero = np.zeros(fom.m)

        def signal(t):
            return zero
    elif signal.m != fom.m:
        raise DimensionError(f"signal has m={signal.m}, full-order model expects m={fom.m}")

    def fun(t, q):
        return fom_rhs(fom, q, signal(t))

    solution = solve_ivp(
        fun, (times[0], times[-1]), np.asarray(q0, dtype=float), method='BDF',
        t_eval=times, jac=lambda t, q: fom.jacobian(q), rtol=rtol, atol=atol,
    )
    if not solution.success:
        raise IntegrationError(f"full-order integration failed: {solution.message}")
    logger.info("full-order model integrated: n=%d, %d snapshots, %d rhs evaluations",
                fom.n, times.size, solution.nfev)
    return solution.y


# =============================================================================
# Synthetic reduced models and recovery datasets
# =============================================================================

def make_stable_rom(r, m=1, seed=0):
    """Random dissipative quadratic ROM: A has a negative definite symmetric part."""
    rng = np.random.default_rng(seed)
    skew = rng.standard_normal((r, r))
    A = -np.diag(rng.uniform(0.5, 1.5, r)) + 0.5 * (skew - skew.T)
    return RomOperators(
        0.1 * rng.standard_normal(r),
        A,
        0.02 * rng.standard_normal((r, compact_dim(r))),
        0.2 * rng.standard_normal((r, m)),
    )


def evaluate_rhs_columns(ops, Qhat, U=None):
    """Right-hand side of the ROM at every column of Qhat."""
    out = ops.c_hat[:, np.newaxis] + ops.A_hat @ Qhat + ops.H_hat @ kron_compact_columns(Qhat)
    if ops.m:
        out += ops.B_hat @ np.atleast_2d(U)
    return out


def generate_recovery_dataset(rom_true, qhat0, signal, grid, rtol=1e-10, atol=1e-12):
    """Snapshots of a known ROM with exact time derivatives.

    Returns (Qhat, R, U): states at the grid times, right-hand sides evaluated
    exactly at those states, and the input samples.
    """
    signal = signal or NoInput()
    trajectory = integrate(rom_true, qhat0, signal, grid.times, rtol=rtol, atol=atol)
    if not trajectory.completed:
        raise IntegrationError(f"reference ROM integration ended with {trajectory.status}")
    Qhat = trajectory.states
    U = signal.sample(grid.times)
    return Qhat, evaluate_rhs_columns(rom_true, Qhat, U), U


# =============================================================================
# Error metrics
# =============================================================================

def _variable_block(rows, transform, variable):
    if variable not in transform.sources:
        raise DimensionError(
            f"unknown variable '{variable}'; known: {', '.join(transform.sources)}"
        )
    cells = rows // len(transform.sources)
    i = transform.sources.index(variable)
    return slice(i * cells, (i + 1) * cells)


def spatial_relative_error(truth, approx, block, floor=1e-10):
    """Mean over the block's spatial points of |approx - truth| / max(|truth|, floor * max|truth|)."""
    truth, approx = truth[block], approx[block]
    reference = np.abs(truth).max(initial=0.0)
    denominator = np.maximum(np.abs(truth), floor * reference if reference > 0 else floor)
    return np.mean(np.abs(approx - truth) / denominator, axis=0)


def reconstruct_native(states, transform, scaling, V):
    V = V.V if isinstance(V, PodBasis) else np.asarray(V, dtype=float)
    return invert_transform(invert_scaling(V @ states, scaling), transform)


def projection_error_series(Z, transform, scaling, V, variable, floor=1e-10):
    """Spatially averaged relative error of T*(V V^T T(z)) for one native variable."""
    V = V.V if isinstance(V, PodBasis) else np.asarray(V, dtype=float)
    Z = np.asarray(Z, dtype=float)
    block = _variable_block(Z.shape[0], transform, variable)
    Qs = apply_scaling(apply_transform(Z, transform), scaling)
    approx = reconstruct_native(V.T @ Qs, transform, scaling, V)
    return spatial_relative_error(Z, approx, block, floor)


def prediction_error_series(Z, states, transform, scaling, V, variable, floor=1e-10):
    """Spatially averaged relative error of T*(V qtilde) for one native variable."""
    Z = np.asarray(Z, dtype=float)
    states = np.asarray(states, dtype=float)
    if states.shape[1] != Z.shape[1]:
        raise DimensionError(
            f"trajectory has {states.shape[1]} columns, truth has {Z.shape[1]}"
        )
    block = _variable_block(Z.shape[0], transform, variable)
    approx = reconstruct_native(states, transform, scaling, V)
    return spatial_relative_error(Z, approx, block, floor)


def relative_state_error(truth, approx, times=None):
    """Relative L2-in-time error of column-sampled states (Frobenius without times)."""
    truth, approx = np.asarray(truth, dtype=float), np.asarray(approx, dtype=float)
    if truth.shape != approx.shape:
        raise DimensionError(f"shapes differ: {truth.shape} vs {approx.shape}")
    diff = np.sum((truth - approx) ** 2, axis=0)
    norm = np.sum(truth ** 2, axis=0)
    if times is None or truth.shape[1] < 2:
        return float(np.sqrt(diff.sum() / norm.sum()))
    return float(np.sqrt(trapezoid(diff, times) / trapezoid(norm, times)))
