import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from rom.exceptions import DimensionError
from rom.timederiv import UniformTimeGrid, fd4


class UniformTimeGridTests(SimpleTestCase):
    def test_from_times(self):
        grid = UniformTimeGrid.from_times(np.linspace(1.0, 2.0, 11))
        self.assertAlmostEqual(grid.dt, 0.1)
        self.assertEqual(grid.k, 11)
        self.assertAlmostEqual(grid.t_last, 2.0)

    def test_nonuniform_rejected(self):
        with self.assertRaises(DimensionError):
            UniformTimeGrid.from_times([0.0, 0.1, 0.3])


class Fd4Tests(SimpleTestCase):
    def test_quartic_is_exact_everywhere(self):
        grid = UniformTimeGrid(-1.0, 0.1, 21)
        t = grid.times
        Q = np.vstack([t ** 4 - 2 * t ** 3 + t, 3 * t ** 2 - 1])
        dQ = np.vstack([4 * t ** 3 - 6 * t ** 2 + 1, 6 * t])
        assert_allclose(fd4(Q, grid), dQ, rtol=1e-9, atol=1e-9)

    def test_fourth_order_convergence_on_sine(self):
        errors = []
        for k in (41, 81):
            grid = UniformTimeGrid(0.0, 2.0 / (k - 1), k)
            t = grid.times
            errors.append(np.max(np.abs(fd4(np.sin(t), grid) - np.cos(t))))
        ratio = errors[0] / errors[1]
        self.assertGreaterEqual(ratio, 12)
        self.assertLessEqual(ratio, 20)

    def test_vector_input(self):
        grid = UniformTimeGrid(0.0, 1.0, 6)
        assert_allclose(fd4(2.0 * grid.times, grid), 2.0)

    def test_too_few_samples(self):
        with self.assertRaises(DimensionError):
            fd4(np.ones((2, 4)), UniformTimeGrid(0.0, 1.0, 4))

    def test_grid_mismatch(self):
        with self.assertRaises(DimensionError):
            fd4(np.ones((2, 6)), UniformTimeGrid(0.0, 1.0, 5))
