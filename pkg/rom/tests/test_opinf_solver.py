import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from rom.exceptions import DimensionError, FactorizationError, OverParameterizedError
from rom.opinf_solver import (
    RegPair, RomOperators, build_data_matrix, build_gram_cache, check_overdetermined,
    regression_objective, solve_lstsq, solve_regularized,
)
from rom.quadform import compact_dim, kron_compact


def random_problem(r=3, m=1, k=60, seed=0):
    rng = np.random.default_rng(seed)
    Qhat = rng.standard_normal((r, k))
    U = rng.standard_normal((m, k))
    R = rng.standard_normal((r, k))
    return Qhat, U, R


class DataMatrixTests(SimpleTestCase):
    def test_layout(self):
        Qhat = np.array([[1.0, 2.0], [3.0, 4.0]])
        U = np.array([[5.0, 6.0]])
        data = build_data_matrix(Qhat, U)
        self.assertEqual(data.D.shape, (2, 1 + 2 + 3 + 1))
        assert_allclose(data.D[1], [1.0, 2.0, 4.0, 4.0, 8.0, 16.0, 6.0])

    def test_no_inputs(self):
        data = build_data_matrix(np.ones((2, 10)))
        self.assertEqual((data.m, data.d), (0, 6))

    def test_column_mismatch(self):
        with self.assertRaises(DimensionError):
            build_data_matrix(np.ones((2, 10)), np.ones((1, 9)))

    def test_underdetermined_warns(self):
        with self.assertLogs('rom.opinf_solver', level='WARNING'):
            build_data_matrix(np.ones((3, 5)))

    def test_rank_deficiency_detected(self):
        data = build_data_matrix(np.zeros((2, 20)))
        with self.assertRaises(DimensionError):
            data.require_full_rank()

    def test_overdetermined_check(self):
        self.assertEqual(check_overdetermined(3, 1, 20), 11)
        with self.assertRaises(OverParameterizedError) as ctx:
            check_overdetermined(5, 1, 22)
        self.assertEqual(ctx.exception.d, 22)


class RegPairTests(SimpleTestCase):
    def test_diagonal_blocks(self):
        gamma = RegPair(2.0, 7.0).diagonal(2, 1)
        assert_allclose(gamma, [2.0, 2.0, 2.0, 7.0, 7.0, 7.0, 2.0])

    def test_negative_rejected(self):
        with self.assertRaises(DimensionError):
            RegPair(-1.0, 0.0)

    def test_log10_round_trip(self):
        assert_allclose(RegPair.from_log10((1.0, -2.0)).log10, [1.0, -2.0])


class SolveTests(SimpleTestCase):
    def test_normal_equations_hold(self):
        Qhat, U, R = random_problem()
        data = build_data_matrix(Qhat, U)
        cache = build_gram_cache(data, R)
        reg = RegPair(0.3, 2.0)
        ops = solve_regularized(cache, reg)
        gamma = reg.diagonal(3, 1)
        lhs = data.D.T @ data.D + np.diag(gamma ** 2)
        assert_allclose(lhs @ ops.O.T, data.D.T @ R.T, rtol=1e-10, atol=1e-10)

    def test_matches_stacked_least_squares(self):
        Qhat, U, R = random_problem(seed=1)
        data = build_data_matrix(Qhat, U)
        cache = build_gram_cache(data, R)
        reg = RegPair(0.1, 10.0)
        assert_allclose(solve_regularized(cache, reg).O, solve_lstsq(data, R, reg).O, rtol=1e-9, atol=1e-12)

    def test_solution_minimizes_objective(self):
        Qhat, U, R = random_problem(seed=2)
        data = build_data_matrix(Qhat, U)
        reg = RegPair(1.0, 1.0)
        ops = solve_regularized(build_gram_cache(data, R), reg)
        best = regression_objective(data, R, ops, reg)
        rng = np.random.default_rng(0)
        for _ in range(5):
            nudged = RomOperators.from_O(ops.O + 1e-3 * rng.standard_normal(ops.O.shape), 3, 1)
            self.assertGreater(regression_objective(data, R, nudged, reg), best)

    def test_constant_offset_example(self):
        # dq/dt = 1 at every sample, state fixed at zero: c = k / (k + lambda1^2)
        Qhat = np.zeros((1, 2))
        R = np.ones((1, 2))
        data = build_data_matrix(Qhat)
        ops = solve_regularized(build_gram_cache(data, R), RegPair(1.0, 1.0))
        self.assertAlmostEqual(ops.c_hat[0], 2.0 / 3.0)
        assert_allclose(ops.A_hat, 0.0)

    def test_zero_regularization_uses_least_squares(self):
        Qhat, U, R = random_problem(seed=3)
        data = build_data_matrix(Qhat, U)
        cache = build_gram_cache(data, R, keep_data=True)
        expected, *_ = np.linalg.lstsq(data.D, R.T, rcond=None)
        assert_allclose(solve_regularized(cache, RegPair(0.0, 0.0)).O, expected.T, rtol=1e-9, atol=1e-10)

    def test_singular_gram_without_data_raises(self):
        data = build_data_matrix(np.zeros((2, 20)))
        cache = build_gram_cache(data, np.zeros((2, 20)))
        with self.assertRaises(FactorizationError) as ctx:
            solve_regularized(cache, RegPair(0.0, 0.0))
        self.assertGreater(ctx.exception.pivot, 0)

    def test_operator_shapes(self):
        Qhat, U, R = random_problem(r=4, m=2, k=80, seed=4)
        ops = solve_regularized(build_gram_cache(build_data_matrix(Qhat, U), R), RegPair(1.0, 1.0))
        self.assertEqual(ops.A_hat.shape, (4, 4))
        self.assertEqual(ops.H_hat.shape, (4, compact_dim(4)))
        self.assertEqual(ops.B_hat.shape, (4, 2))

    def test_gram_cache_is_read_only(self):
        Qhat, U, R = random_problem(seed=5)
        cache = build_gram_cache(build_data_matrix(Qhat, U), R)
        with self.assertRaises(ValueError):
            cache.DtD[0, 0] = 1.0

    def test_recovers_noise_free_operators(self):
        rng = np.random.default_rng(6)
        truth = RomOperators(rng.standard_normal(2), rng.standard_normal((2, 2)), rng.standard_normal((2, 3)), rng.standard_normal((2, 1)))
        Qhat = rng.standard_normal((2, 40))
        U = rng.standard_normal((1, 40))
        R = np.column_stack([
            truth.c_hat + truth.A_hat @ q + truth.H_hat @ kron_compact(q) + truth.B_hat @ u
            for q, u in zip(Qhat.T, U.T)
        ])
        cache = build_gram_cache(build_data_matrix(Qhat, U), R, keep_data=True)
        assert_allclose(solve_regularized(cache, RegPair(0.0, 0.0)).O, truth.O, rtol=1e-9, atol=1e-10)

    def test_rows_are_solved_independently(self):
        Qhat, U, R = random_problem(seed=7)
        data = build_data_matrix(Qhat, U)
        reg = RegPair(0.5, 3.0)
        joint = solve_regularized(build_gram_cache(data, R), reg).O
        for i in range(3):
            single = np.zeros_like(R)
            single[i] = R[i]
            O = solve_regularized(build_gram_cache(data, single), reg).O
            with self.subTest(row=i):
                assert_allclose(O[i], joint[i], rtol=1e-10, atol=1e-12)
                assert_allclose(np.delete(O, i, axis=0), 0.0, atol=1e-12)

    def test_heavy_regularization_shrinks_operators(self):
        Qhat, U, R = random_problem(seed=8)
        cache = build_gram_cache(build_data_matrix(Qhat, U), R)
        light = solve_regularized(cache, RegPair(1.0, 1.0)).O
        heavy = solve_regularized(cache, RegPair(1e8, 1e8)).O
        self.assertLessEqual(np.linalg.norm(heavy), 1e-4 * np.linalg.norm(light))
