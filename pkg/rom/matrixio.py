"""Binary OIMX matrix files and the plain-text import format.

Layout: a 26-byte little-endian header (magic ``OIMX``, u32 version, u8
dtype, u8 order, u64 rows, u64 cols) followed by rows*cols binary64 values
in row-major order.
"""
from pathlib import Path

import numpy as np

from .exceptions import MatrixFormatError

MAGIC = b'OIMX'
VERSION = 1
DTYPE_FLOAT64 = 1
ORDER_ROW_MAJOR = 0

HEADER = np.dtype([
    ('magic', 'S4'),
    ('version', '<u4'),
    ('dtype', 'u1'),
    ('order', 'u1'),
    ('rows', '<u8'),
    ('cols', '<u8'),
])


def write_matrix(path, M):
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M.reshape(-1, 1)
    if M.ndim != 2:
        raise MatrixFormatError(f"only 2D matrices can be written, got shape {M.shape}")
    header = np.array([(MAGIC, VERSION, DTYPE_FLOAT64, ORDER_ROW_MAJOR, M.shape[0], M.shape[1])], dtype=HEADER)
    with open(path, 'wb') as handle:
        handle.write(header.tobytes())
        handle.write(np.ascontiguousarray(M, dtype='<f8').tobytes())


def read_matrix(path):
    raw = Path(path).read_bytes()
    if len(raw) < HEADER.itemsize:
        raise MatrixFormatError(f"{path}: file too short for a matrix header")
    header = np.frombuffer(raw[:HEADER.itemsize], dtype=HEADER)[0]
    if header['magic'] != MAGIC:
        raise MatrixFormatError(f"{path}: bad magic {bytes(header['magic'])!r}")
    if header['version'] != VERSION:
        raise MatrixFormatError(f"{path}: unsupported version {header['version']}")
    if header['dtype'] != DTYPE_FLOAT64:
        raise MatrixFormatError(f"{path}: unsupported dtype code {header['dtype']}")
    if header['order'] != ORDER_ROW_MAJOR:
        raise MatrixFormatError(f"{path}: unsupported storage order {header['order']}")
    rows, cols = int(header['rows']), int(header['cols'])
    payload = raw[HEADER.itemsize:]
    if len(payload) != rows * cols * 8:
        raise MatrixFormatError(
            f"{path}: payload has {len(payload)} bytes, header promises {rows}x{cols} values"
        )
    return np.frombuffer(payload, dtype='<f8').astype(float).reshape(rows, cols)


def read_text_matrix(path):
    """Whitespace-separated values after a ``rows cols`` header line."""
    lines = [line for line in Path(path).read_text().splitlines() if line.strip() and not line.lstrip().startswith('#')]
    if not lines:
        raise MatrixFormatError(f"{path}: empty text matrix")
    try:
        rows, cols = (int(token) for token in lines[0].split())
        values = np.array([float(token) for line in lines[1:] for token in line.split()])
    except ValueError as exc:
        raise MatrixFormatError(f"{path}: {exc}") from None
    if values.size != rows * cols:
        raise MatrixFormatError(f"{path}: {values.size} values for a {rows}x{cols} matrix")
    return values.reshape(rows, cols)


def load_matrix(path):
    """Read an OIMX file, or the text format for ``.txt`` files."""
    if Path(path).suffix == '.txt':
        return read_text_matrix(path)
    return read_matrix(path)
