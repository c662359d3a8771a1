import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose, assert_array_equal

from rom.exceptions import DimensionError
from rom.quadform import (
    CompactIndexMap, compact_dim, compact_from_full, data_dim, kron_compact, kron_compact_columns,
)

# (r, d) pairs with one input
TABLE_ROWS = [(22, 277), (27, 407), (36, 704), (43, 991), (53, 1486), (66, 2279), (82, 3487), (110, 6217)]


class DimensionTests(SimpleTestCase):
    def test_compact_dim(self):
        self.assertEqual(compact_dim(1), 1)
        self.assertEqual(compact_dim(3), 6)
        self.assertEqual(compact_dim(43), 946)

    def test_data_dim_reproduces_rank_table(self):
        for r, d in TABLE_ROWS:
            with self.subTest(r=r):
                self.assertEqual(data_dim(r, 1), d)

    def test_data_dim_at_r_72_is_formula_value(self):
        self.assertEqual(data_dim(72, 1), 2702)

    def test_inputs_add_one_column_each(self):
        for r in (1, 4, 43):
            for m in (1, 2, 5):
                with self.subTest(r=r, m=m):
                    self.assertEqual(data_dim(r, m) - data_dim(r, 0), m)

    def test_invalid_rank_rejected(self):
        with self.assertRaises(DimensionError):
            compact_dim(0)
        with self.assertRaises(DimensionError):
            data_dim(3, -1)


class KronCompactTests(SimpleTestCase):
    def test_ordering(self):
        assert_array_equal(kron_compact(np.array([1.0, 2.0, 3.0])), [1, 2, 3, 4, 6, 9])
        index = CompactIndexMap.for_rank(3)
        assert_array_equal(index.rows, [0, 0, 0, 1, 1, 2])
        assert_array_equal(index.cols, [0, 1, 2, 1, 2, 2])

    def test_scalar_state(self):
        assert_array_equal(kron_compact(np.array([-2.0])), [4.0])

    def test_homogeneous_of_degree_two(self):
        q = np.random.default_rng(2).standard_normal(5)
        for alpha in (-3.0, 0.5, 7.25):
            assert_allclose(kron_compact(alpha * q), alpha ** 2 * kron_compact(q), rtol=1e-14)

    def test_columns_match_vectors(self):
        Q = np.random.default_rng(1).standard_normal((4, 7))
        K = kron_compact_columns(Q)
        self.assertEqual(K.shape, (10, 7))
        for j in range(7):
            assert_allclose(K[:, j], kron_compact(Q[:, j]))

    def test_empty_vector_rejected(self):
        with self.assertRaises(DimensionError):
            kron_compact(np.array([]))


class CompactFromFullTests(SimpleTestCase):
    def test_action_is_preserved(self):
        rng = np.random.default_rng(2)
        r = 4
        H_full = rng.standard_normal((r, r * r))
        H = compact_from_full(H_full)
        self.assertEqual(H.shape, (r, compact_dim(r)))
        for _ in range(10):
            q = rng.standard_normal(r)
            assert_allclose(H @ kron_compact(q), H_full @ np.kron(q, q), rtol=1e-12, atol=1e-12)

    def test_symmetric_pairs_are_summed(self):
        H_full = np.zeros((1, 4))
        H_full[0, 1] = 2.0
        H_full[0, 2] = 3.0
        assert_allclose(compact_from_full(H_full), [[0.0, 5.0, 0.0]])

    def test_non_square_columns_rejected(self):
        with self.assertRaises(DimensionError):
            compact_from_full(np.zeros((2, 5)))
