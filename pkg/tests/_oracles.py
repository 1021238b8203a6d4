"""Independent reference implementations used to cross-check the library.

Everything here recomputes answers from first principles: materialized
submatrix bytes, exhaustive subset search, direct cell slicing.  None of
it shares fingerprinting, Isuffix ordering or hitting-set machinery with
the package, so agreement is meaningful evidence.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

import numpy as np


def _as_array(m) -> np.ndarray:
    return np.asarray(getattr(m, "data", m))


# ---------------------------------------------------------------- counting


def distinct_k_by_materialization(m, k: int) -> int:
    """Distinct k x k submatrices, deduplicated by raw bytes."""
    arr = _as_array(m)
    n_rows, n_cols = arr.shape
    seen = set()
    for i in range(n_rows - k + 1):
        for j in range(n_cols - k + 1):
            seen.add(arr[i : i + k, j : j + k].tobytes())
    return len(seen)


def profile_by_materialization(m) -> list[int]:
    """d_1..d_n for a square matrix, by byte-level deduplication."""
    arr = _as_array(m)
    n = arr.shape[0]
    assert arr.shape == (n, n)
    return [distinct_k_by_materialization(arr, k) for k in range(1, n + 1)]


def delta_by_materialization(m) -> Fraction:
    counts = profile_by_materialization(m)
    return max(Fraction(c, k * k) for k, c in enumerate(counts, start=1))


# ----------------------------------------------------------- 1D attractors


def _string_symbols(s) -> list[int]:
    return [ord(c) for c in s] if isinstance(s, str) else [int(v) for v in s]


def string_attractor_valid(s, positions) -> bool:
    """Does every distinct substring have an occurrence covering a position?

    positions are 1-based.
    """
    seq = _string_symbols(s)
    n = len(seq)
    pos0 = {p - 1 for p in positions}
    for length in range(1, n + 1):
        occs: dict = {}
        for start in range(n - length + 1):
            occs.setdefault(tuple(seq[start : start + length]), []).append(start)
        for starts in occs.values():
            if not any(pos0 & set(range(a, a + length)) for a in starts):
                return False
    return True


def min_string_attractor_brute(s) -> tuple[int, set]:
    """Smallest valid attractor by exhaustive subset enumeration."""
    n = len(s)
    for size in range(1, n + 1):
        for combo in combinations(range(1, n + 1), size):
            if string_attractor_valid(s, combo):
                return size, set(combo)
    raise AssertionError("the full position set is always a valid attractor")


# ----------------------------------------------------------- 2D attractors


def matrix_attractor_valid(m, positions) -> bool:
    """2D analogue of string_attractor_valid; positions are 1-based (i, j)."""
    arr = _as_array(m)
    n = arr.shape[0]
    pos0 = {(i - 1, j - 1) for (i, j) in positions}
    for k in range(1, n + 1):
        occs: dict = {}
        for i in range(n - k + 1):
            for j in range(n - k + 1):
                occs.setdefault(arr[i : i + k, j : j + k].tobytes(), []).append((i, j))
        for anchors in occs.values():
            covered = any(
                a <= r < a + k and b <= c < b + k
                for (a, b) in anchors
                for (r, c) in pos0
            )
            if not covered:
                return False
    return True


def min_matrix_attractor_brute(m) -> tuple[int, set]:
    """Smallest valid 2D attractor by exhaustive subset enumeration."""
    arr = _as_array(m)
    n = arr.shape[0]
    cells = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1)]
    for size in range(1, n * n + 1):
        for combo in combinations(cells, size):
            if matrix_attractor_valid(arr, combo):
                return size, set(combo)
    raise AssertionError("the full cell set is always a valid attractor")


# ------------------------------------------------------------- Isuffixes


def icharacters_brute(m, i: int, j: int) -> list[tuple[int, ...]]:
    """All Icharacters of the Isuffix at 1-based (i, j), as symbol tuples.

    Position t = 2m-1 is the column piece (rows i..i+m-1 of column
    j+m-1); t = 2m is the row piece (row i+m, columns j..j+m-1).
    """
    arr = _as_array(m)
    rows, cols = arr.shape
    q = min(rows - i + 1, cols - j + 1)
    out = []
    for t in range(1, 2 * q):
        if t % 2 == 1:
            mm = (t + 1) // 2
            piece = [int(arr[i - 1 + r, j - 1 + mm - 1]) for r in range(mm)]
        else:
            mm = t // 2
            piece = [int(arr[i - 1 + mm, j - 1 + c]) for c in range(mm)]
        out.append(tuple(piece))
    return out


def isuffix_cmp_brute(m, p, q) -> tuple[int, int]:
    """(sign, lcp) by direct Icharacter comparison; raises if one Isuffix
    is a prefix of the other (impossible on sentinel-padded matrices)."""
    a = icharacters_brute(m, *p)
    b = icharacters_brute(m, *q)
    lcp = 0
    for ca, cb in zip(a, b):
        if ca != cb:
            return (-1 if ca < cb else 1), lcp
        lcp += 1
    if len(a) == len(b):
        raise AssertionError("identical Isuffixes for distinct anchors")
    raise AssertionError("one Isuffix is a prefix of the other")
