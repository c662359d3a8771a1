import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_array_equal

from rom.exceptions import MatrixFormatError
from rom.matrixio import HEADER, load_matrix, read_matrix, read_text_matrix, write_matrix


class MatrixFileTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_header_layout(self):
        path = self.dir / 'm.oimx'
        write_matrix(path, np.arange(6.0).reshape(2, 3))
        raw = path.read_bytes()
        self.assertEqual(HEADER.itemsize, 26)
        self.assertEqual(raw[:4], b'OIMX')
        self.assertEqual(len(raw), 26 + 6 * 8)
        self.assertEqual(int.from_bytes(raw[10:18], 'little'), 2)
        self.assertEqual(int.from_bytes(raw[18:26], 'little'), 3)
        self.assertEqual(np.frombuffer(raw[26:34], '<f8')[0], 0.0)
        self.assertEqual(np.frombuffer(raw[34:42], '<f8')[0], 1.0)

    def test_bit_identical_round_trip(self):
        path = self.dir / 'm.oimx'
        M = np.random.default_rng(0).standard_normal((7, 5))
        M[0, 0] = -0.0
        write_matrix(path, M)
        back = read_matrix(path)
        self.assertEqual(back.tobytes(), M.tobytes())

    def test_empty_matrix(self):
        path = self.dir / 'e.oimx'
        write_matrix(path, np.empty((3, 0)))
        self.assertEqual(read_matrix(path).shape, (3, 0))

    def test_bad_magic(self):
        path = self.dir / 'bad.oimx'
        write_matrix(path, np.ones((1, 1)))
        path.write_bytes(b'XXXX' + path.read_bytes()[4:])
        with self.assertRaises(MatrixFormatError):
            read_matrix(path)

    def test_bad_version_and_dtype(self):
        path = self.dir / 'bad.oimx'
        write_matrix(path, np.ones((1, 1)))
        raw = bytearray(path.read_bytes())
        raw[4] = 2
        path.write_bytes(bytes(raw))
        with self.assertRaises(MatrixFormatError):
            read_matrix(path)
        raw[4] = 1
        raw[8] = 2
        path.write_bytes(bytes(raw))
        with self.assertRaises(MatrixFormatError):
            read_matrix(path)

    def test_truncated_payload(self):
        path = self.dir / 'short.oimx'
        write_matrix(path, np.ones((2, 2)))
        path.write_bytes(path.read_bytes()[:-1])
        with self.assertRaises(MatrixFormatError):
            read_matrix(path)

    def test_text_import(self):
        path = self.dir / 'm.txt'
        path.write_text("2 3\n1 2 3\n4 5 6\n")
        assert_array_equal(read_text_matrix(path), [[1, 2, 3], [4, 5, 6]])
        assert_array_equal(load_matrix(path), [[1, 2, 3], [4, 5, 6]])

    def test_text_count_mismatch(self):
        path = self.dir / 'm.txt'
        path.write_text("2 2\n1 2 3\n")
        with self.assertRaises(MatrixFormatError):
            read_text_matrix(path)
