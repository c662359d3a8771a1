import math

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from rom.exceptions import DimensionError, GridSearchError, OverParameterizedError
from rom.opinf_solver import RegPair, build_data_matrix, build_gram_cache
from rom.oracle import generate_recovery_dataset, make_stable_rom, relative_state_error
from rom.pod import bound_factors
from rom.preprocess import TransformSpec
from rom.regsearch import (
    Evaluation, GridSpec, NelderMeadOptions, SearchConfig, Stage, TrainingProblem, grid_search,
    reg_opinf, refine_nelder_mead, select_bound, train_error,
)
from rom.rom_model import SampledSignal, integrate
from rom.timederiv import UniformTimeGrid


def bowl(center):
    def evaluate(reg):
        x = reg.log10
        return Evaluation(reg, float(np.sum((x - center) ** 2)), Stage.REFINE)
    return evaluate


def synthetic_dataset(n=20, k=200, seed=3):
    rom_true = make_stable_rom(2, m=1, seed=seed)
    grid = UniformTimeGrid(0.0, 0.02, k)
    U = (np.sin(2 * grid.times) + np.cos(3.1 * grid.times))[np.newaxis]
    Qhat, R, U = generate_recovery_dataset(rom_true, np.array([0.8, -0.4]), SampledSignal(grid.times, U), grid)
    V, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((n, 2)))
    return V @ Qhat, U, grid


SMALL_SEARCH = SearchConfig(
    grid=GridSpec((-8.0, -4.0), 3, (-8.0, -4.0), 3),
    nm=NelderMeadOptions(max_iterations=20),
)


class SelectBoundTests(SimpleTestCase):
    def test_bound_is_scaled_maximum(self):
        self.assertEqual(select_bound(np.array([[1.0, -2.0], [0.5, 1.5]]), 1.5), 3.0)
        self.assertEqual(select_bound(np.array([[1.0, -2.0]]), 1.0), 2.0)

    def test_matches_elementwise_scan(self):
        Q = np.random.default_rng(0).standard_normal((5, 40))
        self.assertEqual(select_bound(Q, 1.2), 1.2 * max(abs(v) for v in Q.ravel()))

    def test_invalid_inputs(self):
        with self.assertRaises(DimensionError):
            select_bound(np.zeros((2, 3)), 1.5)
        with self.assertRaises(DimensionError):
            select_bound(np.ones((2, 3)), 0.5)


class TrainErrorTests(SimpleTestCase):
    def test_exact_data_gives_tiny_error(self):
        rom_true = make_stable_rom(2, m=0, seed=1)
        grid = UniformTimeGrid(0.0, 0.02, 200)
        Qhat, R, _ = generate_recovery_dataset(rom_true, np.array([1.0, 0.5]), None, grid)
        cache = build_gram_cache(build_data_matrix(Qhat), R)
        error = train_error(
            RegPair(1e-12, 1e-12), cache, Qhat, None, grid, grid.t_last,
            select_bound(Qhat, 1.5), rtol=1e-10, atol=1e-12,
        )
        self.assertLess(error, 1e-6)

    def test_growth_past_bound_is_infinite(self):
        grid = UniformTimeGrid(0.0, 0.02, 51)
        Qhat = np.exp(grid.times)[np.newaxis]
        cache = build_gram_cache(build_data_matrix(Qhat), Qhat.copy())
        error = train_error(RegPair(1e-10, 1e-10), cache, Qhat, None, grid, 5.0, select_bound(Qhat, 1.5))
        self.assertEqual(error, math.inf)

    def test_heavy_regularization_freezes_the_state(self):
        rom_true = make_stable_rom(2, m=0, seed=2)
        grid = UniformTimeGrid(0.0, 0.05, 80)
        Qhat, R, _ = generate_recovery_dataset(rom_true, np.array([1.0, -1.0]), None, grid)
        cache = build_gram_cache(build_data_matrix(Qhat), R)
        error = train_error(RegPair(1e8, 1e8), cache, Qhat, None, grid, grid.t_last, math.inf)
        frozen = np.repeat(Qhat[:, :1], grid.k, axis=1)
        self.assertTrue(math.isfinite(error))
        self.assertAlmostEqual(error, relative_state_error(Qhat, frozen, grid.times), delta=1e-3)

    def test_final_time_before_training_window_rejected(self):
        grid = UniformTimeGrid(0.0, 0.1, 10)
        with self.assertRaises(DimensionError):
            TrainingProblem(None, np.ones((1, 10)), None, grid, 0.5, 1.0)


class GridSearchTests(SimpleTestCase):
    def test_planted_winner(self):
        winner, evaluations = grid_search(GridSpec(), bowl(np.array([2.0, 3.0])))
        assert_allclose(winner.reg.log10, [2.0, 3.0])
        self.assertEqual(len(evaluations), 36)

    def test_all_infinite_grid_raises(self):
        with self.assertRaises(GridSearchError) as ctx:
            grid_search(GridSpec(), lambda reg: Evaluation(reg, math.inf, Stage.GRID, 'bound_violated'))
        self.assertIn('lambda', str(ctx.exception))

    def test_ties_prefer_stronger_regularization(self):
        winner, _ = grid_search(GridSpec(), lambda reg: Evaluation(reg, 1.0, Stage.GRID))
        assert_allclose(winner.reg.log10, [5.0, 5.0])

    def test_parallel_matches_serial(self):
        evaluate = bowl(np.array([1.4, 0.6]))
        serial, _ = grid_search(GridSpec(), evaluate)
        parallel, _ = grid_search(GridSpec(), evaluate, threads=4)
        self.assertEqual(serial, parallel)

    def test_grid_needs_two_points_per_axis(self):
        with self.assertRaises(DimensionError):
            GridSpec(lambda1_count=1)


class NelderMeadTests(SimpleTestCase):
    def test_converges_on_quadratic_bowl(self):
        best, _ = refine_nelder_mead(RegPair.from_log10((1.0, 3.0)), bowl(np.array([1.3, 2.7])))
        assert_allclose(best.reg.log10, [1.3, 2.7], atol=1e-3)

    def test_start_at_minimum_is_kept(self):
        start = RegPair.from_log10((2.0, 2.0))
        best, _ = refine_nelder_mead(start, bowl(np.array([2.0, 2.0])))
        self.assertEqual(best.reg, start)
        self.assertEqual(best.error, 0.0)

    def test_infinite_plateau_is_avoided(self):
        center = np.array([0.5, 2.0])

        def evaluate(reg):
            x = reg.log10
            return math.inf if x[0] < 1.0 else float(np.sum((x - center) ** 2))

        start = RegPair.from_log10((2.0, 2.0))
        best, _ = refine_nelder_mead(start, evaluate)
        self.assertTrue(best.finite)
        self.assertLessEqual(best.error, 2.25)
        self.assertGreaterEqual(best.reg.log10[0], 1.0)

    def test_never_worse_than_start(self):
        start = RegPair.from_log10((3.0, 3.0))
        rng = np.random.default_rng(0)
        noise = {}

        def evaluate(reg):
            key = (reg.lambda1, reg.lambda2)
            noise.setdefault(key, 1.0 + rng.random())
            return 0.5 if reg == start else noise[key]

        best, _ = refine_nelder_mead(start, evaluate)
        self.assertLessEqual(best.error, 0.5)


class RegOpInfTests(SimpleTestCase):
    def test_end_to_end_refinement_is_monotone(self):
        Z, U, grid = synthetic_dataset()
        result = reg_opinf(Z, U, grid.t_last, TransformSpec.identity(['q']), 2, config=SMALL_SEARCH, grid=grid)
        report = result.report
        self.assertEqual(result.operators.r, 2)
        self.assertEqual(result.operators.m, 1)
        self.assertLessEqual(report.winner.error, report.grid_winner.error)
        self.assertLess(report.winner.error, 1e-2)
        self.assertGreaterEqual(len(report.evaluations), 9)
        self.assertEqual({evaluation.stage for evaluation in report.evaluations}, {Stage.GRID, Stage.REFINE})

    def test_returned_model_respects_the_bound(self):
        Z, U, grid = synthetic_dataset()
        result = reg_opinf(Z, U, grid.t_last, TransformSpec.identity(['q']), 2, config=SMALL_SEARCH, grid=grid)
        trajectory = integrate(
            result.operators, result.initial_state, SampledSignal(grid.times, U), grid.times,
            bound=result.bound,
        )
        self.assertTrue(trajectory.completed)
        limits = result.bound * bound_factors(result.basis)
        self.assertTrue(np.all(np.abs(result.basis.V @ trajectory.states) <= limits[:, np.newaxis]))

    def test_rerun_is_deterministic(self):
        Z, U, grid = synthetic_dataset()
        first = reg_opinf(Z, U, grid.t_last, TransformSpec.identity(['q']), 2, config=SMALL_SEARCH, grid=grid)
        second = reg_opinf(Z, U, grid.t_last, TransformSpec.identity(['q']), 2, config=SMALL_SEARCH, grid=grid)
        self.assertEqual(first.report.winner.reg, second.report.winner.reg)
        np.testing.assert_array_equal(first.operators.O, second.operators.O)

    def test_energy_threshold_picks_rank(self):
        Z, U, grid = synthetic_dataset()
        result = reg_opinf(
            Z, U, grid.t_last, TransformSpec.identity(['q']), 0, config=SMALL_SEARCH, grid=grid,
            energy_threshold=0.999999,
        )
        self.assertEqual(result.basis.r, 2)

    def test_over_parameterized_rejected(self):
        Z, U, grid = synthetic_dataset(k=10)
        with self.assertRaises(OverParameterizedError):
            reg_opinf(Z, U, grid.t_last, TransformSpec.identity(['q']), 3, grid=grid)

    def test_tau_below_one_rejected(self):
        with self.assertRaises(DimensionError):
            SearchConfig(tau=0.9)
