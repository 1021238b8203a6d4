"""Square integer matrices, file I/O and sentinel padding.

Symbols are non-negative integers. Text files carry one character per
cell (symbol = Unicode code point); raw files carry one byte per cell.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import MatrixFormatError, UnsupportedAlphabetError

MAX_ALPHABET = 1 << 16
_RAW_HEADER = struct.Struct("<QQ")


@dataclass(frozen=True)
class Matrix:
    """An immutable 2D array of integer symbols (1-based in public APIs)."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2 or arr.size == 0:
            raise MatrixFormatError("matrix must be 2-dimensional and non-empty")
        if not np.issubdtype(arr.dtype, np.integer):
            raise MatrixFormatError("matrix symbols must be integers")
        if arr.min() < 0 or arr.max() >= (1 << 31):
            raise MatrixFormatError("symbols must lie in [0, 2^31)")
        arr = np.ascontiguousarray(arr, dtype=np.int64)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    @property
    def alphabet(self) -> tuple[int, ...]:
        return tuple(int(v) for v in np.unique(self.data))

    @property
    def sigma(self) -> int:
        return len(self.alphabet)

    def cell(self, i: int, j: int) -> int:
        """Symbol at 1-based position (i, j)."""
        if not (1 <= i <= self.rows and 1 <= j <= self.cols):
            raise IndexError(f"position ({i}, {j}) outside {self.rows}x{self.cols}")
        return int(self.data[i - 1, j - 1])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.data.shape == other.data.shape and bool(
            np.array_equal(self.data, other.data)
        )

    def __hash__(self):
        return hash((self.data.shape, self.data.tobytes()))

    @classmethod
    def from_rows(cls, rows) -> "Matrix":
        return cls(np.array(rows, dtype=np.int64))

    @classmethod
    def from_strings(cls, lines) -> "Matrix":
        """Build from equal-length strings, one character per cell."""
        if not lines:
            raise MatrixFormatError("no rows given")
        width = len(lines[0])
        if any(len(ln) != width for ln in lines):
            raise MatrixFormatError("ragged rows")
        return cls(np.array([[ord(c) for c in ln] for ln in lines], dtype=np.int64))


@dataclass(frozen=True)
class PaddedMatrix:
    """A square matrix extended by one sentinel row and column.

    For an n x n source the layout is (n+1) x (n+1): the bottom row holds
    sentinels 1..n left to right, the right column sentinels n+1..2n top
    to bottom, and the corner sentinel 2n+1.  Sentinel t is encoded as
    ``sentinel_base + t - 1``, so all sentinels are pairwise distinct and
    distinct from every source symbol.
    """

    data: np.ndarray
    n: int
    sentinel_base: int

    @property
    def side(self) -> int:
        return self.n + 1

    def inner(self) -> Matrix:
        return Matrix(self.data[: self.n, : self.n])

    def is_sentinel(self, value: int) -> bool:
        return value >= self.sentinel_base


def transpose(m: Matrix) -> Matrix:
    return Matrix(m.data.T)


def pad_with_sentinels(m: Matrix) -> PaddedMatrix:
    """Append the sentinel row/column that keeps Isuffixes prefix-free."""
    if not m.is_square:
        raise MatrixFormatError("padding requires a square matrix")
    n = m.rows
    base = int(m.data.max()) + 1
    out = np.empty((n + 1, n + 1), dtype=np.int64)
    out[:n, :n] = m.data
    out[n, :n] = base + np.arange(n)
    out[:n, n] = base + n + np.arange(n)
    out[n, n] = base + 2 * n
    return PaddedMatrix(data=out, n=n, sentinel_base=base)


def _load_text(text: str) -> Matrix:
    lines = text.splitlines()
    if not lines:
        raise MatrixFormatError("empty matrix file")
    head = lines[0].split()
    if len(head) != 2:
        raise MatrixFormatError("header must be 'rows cols'")
    try:
        r, c = int(head[0]), int(head[1])
    except ValueError as exc:
        raise MatrixFormatError("non-integer header") from exc
    if r < 1 or c < 1:
        raise MatrixFormatError("matrix dimensions must be positive")
    body = lines[1:]
    if len(body) < r:
        raise MatrixFormatError(f"expected {r} rows, found {len(body)}")
    if len(body) > r and any(ln.strip() for ln in body[r:]):
        raise MatrixFormatError("trailing content after matrix rows")
    cells = []
    for idx, ln in enumerate(body[:r]):
        if len(ln) != c:
            raise MatrixFormatError(f"row {idx + 1} has {len(ln)} cells, expected {c}")
        cells.append([ord(ch) for ch in ln])
    return Matrix(np.array(cells, dtype=np.int64))


def _load_raw(blob: bytes) -> Matrix:
    if len(blob) < _RAW_HEADER.size:
        raise MatrixFormatError("raw matrix shorter than its header")
    r, c = _RAW_HEADER.unpack_from(blob)
    if r < 1 or c < 1:
        raise MatrixFormatError("matrix dimensions must be positive")
    need = _RAW_HEADER.size + r * c
    if len(blob) != need:
        raise MatrixFormatError(f"raw matrix has {len(blob)} bytes, expected {need}")
    arr = np.frombuffer(blob, dtype=np.uint8, offset=_RAW_HEADER.size)
    return Matrix(arr.astype(np.int64).reshape(r, c))


def load_matrix(path, fmt: str = "auto") -> Matrix:
    """Read a matrix from disk.

    fmt: "text", "raw", or "auto" (by extension; .bin/.raw are raw).
    Rejects alphabets larger than 2**16 symbols.
    """
    p = Path(path)
    if fmt == "auto":
        fmt = "raw" if p.suffix.lower() in (".bin", ".raw") else "text"
    if fmt == "text":
        try:
            text = p.read_text()
        except UnicodeDecodeError as exc:
            raise MatrixFormatError(f"{p.name} is not valid text: {exc}") from exc
        m = _load_text(text)
    elif fmt == "raw":
        m = _load_raw(p.read_bytes())
    else:
        raise MatrixFormatError(f"unknown matrix format {fmt!r}")
    if m.sigma > MAX_ALPHABET:
        raise UnsupportedAlphabetError(
            f"alphabet has {m.sigma} symbols, limit is {MAX_ALPHABET}"
        )
    return m


def save_matrix(m: Matrix, path, fmt: str = "auto") -> None:
    """Write a matrix; text needs printable code points, raw needs symbols < 256."""
    p = Path(path)
    if fmt == "auto":
        fmt = "raw" if p.suffix.lower() in (".bin", ".raw") else "text"
    if fmt == "text":
        if int(m.data.min()) < 33:
            raise MatrixFormatError(
                "symbols below 33 cannot be written as text; use raw format"
            )
        lines = [f"{m.rows} {m.cols}"]
        lines.extend("".join(chr(v) for v in row) for row in m.data.tolist())
        p.write_text("\n".join(lines) + "\n")
    elif fmt == "raw":
        if int(m.data.max()) > 255:
            raise MatrixFormatError("symbols above 255 cannot be written as raw bytes")
        blob = _RAW_HEADER.pack(m.rows, m.cols) + m.data.astype(np.uint8).tobytes()
        p.write_bytes(blob)
    else:
        raise MatrixFormatError(f"unknown matrix format {fmt!r}")
