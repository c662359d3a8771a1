"""Regularization selection for Operator Inference.

``reg_opinf`` runs the whole learning pipeline: transform, scale, POD,
project, differentiate, pick the trajectory bound, search the
(lambda1, lambda2) plane on a coarse log grid, refine with Nelder-Mead and
solve once more at the winner. Every candidate is scored by ``train_error``,
which returns ``inf`` for models that blow past the bound or fail to
integrate.
"""
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy import optimize
from scipy.integrate import trapezoid

from .exceptions import DimensionError, FactorizationError, GridSearchError
from .opinf_solver import (
    RegPair, build_data_matrix, build_gram_cache, check_overdetermined, solve_regularized,
)
from .pod import RsvdOptions, pod, project, select_rank
from .preprocess import VariableLayout, apply_scaling, apply_transform, fit_scaling
from .rom_model import SampledSignal, Status, integrate
from .timederiv import fd4

logger = logging.getLogger(__name__)

ERROR_NORMS = ('l2', 'frobenius')


class Stage(str, Enum):
    GRID = 'grid'
    REFINE = 'refine'


@dataclass(frozen=True)
class GridSpec:
    """Log10 ranges and point counts of the coarse (lambda1, lambda2) grid."""
    lambda1_log10: tuple = (0.0, 5.0)
    lambda1_count: int = 6
    lambda2_log10: tuple = (0.0, 5.0)
    lambda2_count: int = 6

    def __post_init__(self):
        if self.lambda1_count < 2 or self.lambda2_count < 2:
            raise DimensionError("the regularization grid needs at least 2 points per axis")
        for bounds in (self.lambda1_log10, self.lambda2_log10):
            if len(bounds) != 2 or not bounds[0] <= bounds[1]:
                raise DimensionError(f"invalid log10 range {bounds}")

    def axes(self):
        return (
            np.linspace(*self.lambda1_log10, self.lambda1_count),
            np.linspace(*self.lambda2_log10, self.lambda2_count),
        )

    def points(self):
        return [RegPair.from_log10(point) for point in itertools.product(*self.axes())]

    def __len__(self):
        return self.lambda1_count * self.lambda2_count


@dataclass(frozen=True)
class NelderMeadOptions:
    simplex_scale: float = 0.5
    max_iterations: int = 200
    xatol: float = 1e-4
    fatol: float = 1e-8


@dataclass(frozen=True)
class SearchConfig:
    tau: float = 1.5
    grid: GridSpec = field(default_factory=GridSpec)
    nm: NelderMeadOptions = field(default_factory=NelderMeadOptions)
    error_norm: str = 'l2'
    rtol: float = 1e-6
    atol: float = 1e-9
    threads: int = 1

    def __post_init__(self):
        if not self.tau >= 1:
            raise DimensionError(f"bound margin tau must be >= 1, got {self.tau}")
        if self.error_norm not in ERROR_NORMS:
            raise DimensionError(
                f"unknown error norm '{self.error_norm}'; choose from {', '.join(ERROR_NORMS)}"
            )
        if self.threads < 1:
            raise DimensionError(f"threads must be >= 1, got {self.threads}")


@dataclass(frozen=True)
class Evaluation:
    reg: RegPair
    error: float
    stage: Stage
    status: str = Status.COMPLETED.value

    @property
    def finite(self):
        return math.isfinite(self.error)


def _tie_key(evaluation):
    # equal errors prefer the stronger regularization
    return (evaluation.error, -evaluation.reg.lambda1, -evaluation.reg.lambda2)


def best_of(evaluations):
    finite = [evaluation for evaluation in evaluations if evaluation.finite]
    return min(finite, key=_tie_key) if finite else None


@dataclass
class SearchReport:
    evaluations: list
    grid_winner: Evaluation
    winner: Evaluation
    bound: float
    config: SearchConfig
    operators: Optional[object] = None

    @property
    def disqualified(self):
        return sum(evaluation.status == Status.BOUND_VIOLATED.value for evaluation in self.evaluations)

    @property
    def failed(self):
        return sum(
            evaluation.status not in (Status.COMPLETED.value, Status.BOUND_VIOLATED.value)
            for evaluation in self.evaluations
        )


def select_bound(Qhat, tau):
    """B = tau * max |Qhat_ij|."""
    if not tau >= 1:
        raise DimensionError(f"bound margin tau must be >= 1, got {tau}")
    peak = float(np.max(np.abs(Qhat), initial=0.0))
    if peak == 0:
        raise DimensionError("cannot select a bound from an all-zero reduced state matrix")
    return tau * peak


def trajectory_error(Qhat, Qtilde, times, norm='l2'):
    """Relative error of Qtilde against Qhat in the trapezoid L2-in-time or Frobenius norm."""
    diff = np.sum((Qhat - Qtilde) ** 2, axis=0)
    reference = np.sum(Qhat ** 2, axis=0)
    if norm == 'frobenius' or times.size < 2:
        return float(np.sqrt(diff.sum() / reference.sum()))
    return float(np.sqrt(trapezoid(diff, times) / trapezoid(reference, times)))


@dataclass(frozen=True)
class TrainingProblem:
    """Everything ``train_error`` needs besides the regularization pair."""
    cache: object
    Qhat: np.ndarray
    signal: object
    grid: object
    tf: float
    bound: float
    rtol: float = 1e-6
    atol: float = 1e-9
    error_norm: str = 'l2'

    def __post_init__(self):
        if self.tf < self.grid.t_last:
            raise DimensionError(f"final time {self.tf} precedes the last training time {self.grid.t_last}")

    @property
    def t_eval(self):
        times = self.grid.times
        if self.tf > self.grid.t_last:
            times = np.append(times, self.tf)
        return times

    def evaluate(self, reg, stage=Stage.GRID):
        try:
            ops = solve_regularized(self.cache, reg)
        except FactorizationError as exc:
            logger.debug("%s %s: %s", stage.value, reg, exc)
            return Evaluation(reg, math.inf, stage, 'factorization_failed')
        with np.errstate(all='ignore'):
            trajectory = integrate(
                ops, self.Qhat[:, 0], self.signal, self.t_eval,
                rtol=self.rtol, atol=self.atol, bound=self.bound,
            )
        if not trajectory.completed:
            logger.debug("%s %s: %s", stage.value, reg, trajectory.status)
            return Evaluation(reg, math.inf, stage, trajectory.status.kind.value)
        k = self.grid.k
        error = trajectory_error(self.Qhat, trajectory.states[:, :k], self.grid.times, self.error_norm)
        logger.debug("%s %s: error %.6e", stage.value, reg, error)
        return Evaluation(reg, error, stage)


def train_error(reg, cache, Qhat, signal, grid, tf, B, rtol=1e-6, atol=1e-9, error_norm='l2'):
    """Relative training error of the ROM learned at ``reg``, or ``inf`` if disqualified."""
    problem = TrainingProblem(cache, np.asarray(Qhat, dtype=float), signal, grid, tf, B, rtol, atol, error_norm)
    return problem.evaluate(reg).error


def grid_search(grid, evaluate, threads=1):
    """Score every grid point; return (winner, evaluations) with the documented tie rule."""
    points = grid.points()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            evaluations = list(pool.map(evaluate, points))
    else:
        evaluations = [evaluate(point) for point in points]
    winner = best_of(evaluations)
    if winner is None:
        raise GridSearchError(
            f"all {len(points)} grid points were disqualified "
            f"(lambda1 10^{grid.lambda1_log10}, lambda2 10^{grid.lambda2_log10}); "
            f"widen the lambda ranges toward larger values or increase tau"
        )
    logger.info("grid search winner %s with error %.6e", winner.reg, winner.error)
    return winner, evaluations


def refine_nelder_mead(start, evaluate, options=NelderMeadOptions()):
    """Nelder-Mead refinement in (log10 lambda1, log10 lambda2).

    ``evaluate`` maps a RegPair to an Evaluation or a float; ``inf`` ranks
    below every finite value. Returns (best Evaluation, all new evaluations);
    the result is never worse than ``start``.
    """
    seen = {}

    def score(reg):
        key = (reg.lambda1, reg.lambda2)
        if key not in seen:
            result = evaluate(reg)
            if not isinstance(result, Evaluation):
                result = Evaluation(reg, float(result), Stage.REFINE)
            seen[key] = result
        return seen[key]

    origin = score(start)
    x0 = start.log10
    simplex = np.vstack([x0, x0 + [options.simplex_scale, 0.0], x0 + [0.0, options.simplex_scale]])

    def objective(x):
        return score(RegPair.from_log10(x)).error

    with np.errstate(invalid='ignore', over='ignore'):
        result = optimize.minimize(
            objective, x0, method='Nelder-Mead',
            options=dict(
                initial_simplex=simplex, maxiter=options.max_iterations,
                xatol=options.xatol, fatol=options.fatol,
            ),
        )
    if not result.success:
        logger.warning("Nelder-Mead stopped without converging: %s", result.message)

    best = best_of(seen.values()) or origin
    if origin.finite and _tie_key(origin) <= _tie_key(best):
        best = origin
    logger.info("refined winner %s with error %.6e (%d evaluations)", best.reg, best.error, len(seen))
    return best, [evaluation for evaluation in seen.values() if evaluation is not origin]


@dataclass(frozen=True)
class RegOpInfResult:
    operators: object
    basis: object
    scaling: object
    report: SearchReport
    Qhat: np.ndarray
    grid: object
    bound: float

    @property
    def initial_state(self):
        return self.Qhat[:, 0]


def reg_opinf(Z, U, tf, transform, r, tau=None, config=SearchConfig(), *, grid, layout=None,
              signal=None, ddts=None, rsvd=RsvdOptions(), energy_threshold=0.985):
    """Learn a regularized quadratic ROM from native snapshots ``Z`` (n x k).

    ``r`` of 0 or None chooses the smallest rank whose cumulative energy
    exceeds ``energy_threshold``. ``ddts`` are optional full-state time
    derivatives; they replace the finite-difference estimate and require an
    identity transform.
    """
    if tau is not None:
        config = SearchConfig(tau, config.grid, config.nm, config.error_norm,
                              config.rtol, config.atol, config.threads)
    Z = np.asarray(Z, dtype=float)
    k = Z.shape[1]
    if k != grid.k:
        raise DimensionError(f"snapshots have {k} columns, time grid has {grid.k}")
    if U is not None:
        U = np.atleast_2d(np.asarray(U, dtype=float))
        if U.shape[1] != k:
            raise DimensionError(f"inputs have {U.shape[1]} columns, snapshots have {k}")
    m = 0 if U is None else U.shape[0]

    logger.info("transforming %d native variables into %d learning variables",
                len(transform.sources), len(transform.targets))
    Q = apply_transform(Z, transform)
    layout = layout or VariableLayout(tuple((name, 'signed') for name in transform.targets))
    if layout.names != transform.targets:
        raise DimensionError(f"layout variables {layout.names} do not match learning variables {transform.targets}")
    scaling = fit_scaling(Q, layout)
    Qs = apply_scaling(Q, scaling)

    if r:
        check_overdetermined(r, m, k)
    basis = pod(Qs, r or None, rsvd)
    if not r:
        r = select_rank(basis.singular_values, energy_threshold, basis.total_energy)
        logger.info("energy threshold %.6g selects r=%d", energy_threshold, r)
        check_overdetermined(r, m, k)
    basis = basis.truncate(r)
    logger.info("POD basis: n=%d, r=%d, energy %.6f", basis.n, r, basis.energy())

    Qhat = project(basis, Qs)
    if ddts is None:
        R = fd4(Qhat, grid)
    else:
        if any(recipe.kind.value != 'identity' for recipe in transform.recipes):
            raise DimensionError("provided time derivatives require an identity transform")
        R = project(basis, apply_scaling(np.asarray(ddts, dtype=float), scaling))

    data = build_data_matrix(Qhat, U)
    cache = build_gram_cache(data, R)
    bound = select_bound(Qhat, config.tau)
    logger.info("bound B=%.6g (tau=%g)", bound, config.tau)

    signal = signal or (SampledSignal(grid.times, U) if m else None)
    problem = TrainingProblem(cache, Qhat, signal, grid, tf, bound, config.rtol, config.atol, config.error_norm)

    logger.info("grid search over %d points", len(config.grid))
    grid_winner, evaluations = grid_search(config.grid, problem.evaluate, config.threads)
    winner, refined = refine_nelder_mead(
        grid_winner.reg, lambda reg: problem.evaluate(reg, Stage.REFINE), config.nm,
    )
    evaluations += refined

    operators = solve_regularized(cache, winner.reg)
    logger.info("final operators solved at %s", winner.reg)
    report = SearchReport(evaluations, grid_winner, winner, bound, config, operators)
    return RegOpInfResult(operators, basis, scaling, report, Qhat, grid, bound)
