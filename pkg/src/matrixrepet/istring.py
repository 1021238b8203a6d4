"""Icharacter decomposition and Isuffix comparison.

The Isuffix anchored at (i, j) linearizes the largest square submatrix
with top-left corner (i, j) as an alternating sequence of L-shaped
pieces: odd positions t = 2m-1 carry the column piece (rows i..i+m-1 of
column j+m-1), even positions t = 2m carry the row piece (row i+m,
columns j..j+m-1).  The prefix of 2m-1 Icharacters therefore spells
exactly the m x m square at (i, j), which is what makes Isuffix order
useful for counting distinct squares.

On a sentinel-padded matrix two distinct anchors always disagree before
either Isuffix runs out, so the comparison below is a strict total
order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cmp_to_key

import numpy as np

from .hashing import HashIndex
from .matrix import Matrix, PaddedMatrix


@dataclass(frozen=True)
class Icharacter:
    kind: str  # "column" (odd positions) or "row" (even positions)
    content: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.content)


def _as_array(source) -> np.ndarray:
    if isinstance(source, HashIndex):
        return source.data
    if isinstance(source, (Matrix, PaddedMatrix)):
        return source.data
    return np.asarray(source)


def max_icharacters(side_rows: int, side_cols: int, i: int, j: int) -> int:
    """Number of Icharacters in the Isuffix at 1-based (i, j)."""
    q = min(side_rows - i + 1, side_cols - j + 1)
    return 2 * q - 1


def _ic_cells(i0: int, j0: int, t: int) -> tuple[slice, slice, str]:
    # 0-based anchor; returns (row slice, col slice, kind) of Icharacter t.
    if t % 2 == 1:
        m = (t + 1) // 2
        return slice(i0, i0 + m), slice(j0 + m - 1, j0 + m), "column"
    m = t // 2
    return slice(i0 + m, i0 + m + 1), slice(j0, j0 + m), "row"


def icharacter_at(source, i: int, j: int, t: int) -> Icharacter:
    """Icharacter number t (1-based) of the Isuffix anchored at (i, j)."""
    arr = _as_array(source)
    rows, cols = arr.shape
    if not (1 <= i <= rows and 1 <= j <= cols):
        raise IndexError(f"anchor ({i}, {j}) outside {rows}x{cols}")
    top = max_icharacters(rows, cols, i, j)
    if not (1 <= t <= top):
        raise IndexError(f"Icharacter index {t} out of range 1..{top}")
    rs, cs, kind = _ic_cells(i - 1, j - 1, t)
    return Icharacter(kind=kind, content=tuple(int(v) for v in arr[rs, cs].ravel()))


def istring(source, i: int, j: int, count: int | None = None) -> list[Icharacter]:
    """The Isuffix at (i, j) as a list (full length 2q-1 by default)."""
    arr = _as_array(source)
    top = max_icharacters(arr.shape[0], arr.shape[1], i, j)
    n = top if count is None else min(count, top)
    return [icharacter_at(arr, i, j, t) for t in range(1, n + 1)]


def _prefix_eq(h: HashIndex, pi: int, pj: int, qi: int, qj: int, t: int) -> bool:
    # First t Icharacters equal <=> the derived square (and for even t the
    # extra row segment) match; one or two O(1) fingerprint probes.
    if t <= 0:
        return True
    if t % 2 == 1:
        m = (t + 1) // 2
        return h.eq(pi, pj, qi, qj, m, m)
    m = t // 2
    return h.eq(pi + m, pj, qi + m, qj, 1, m) and h.eq(pi, pj, qi, qj, m, m)


def _prefix_eq_cells(arr: np.ndarray, pi, pj, qi, qj, t: int) -> bool:
    if t <= 0:
        return True
    m = (t + 1) // 2
    if not np.array_equal(arr[pi : pi + m, pj : pj + m], arr[qi : qi + m, qj : qj + m]):
        return False
    if t % 2 == 0:
        return np.array_equal(
            arr[pi + m, pj : pj + m], arr[qi + m, qj : qj + m]
        )
    return True


def _brute_compare(arr, pi, pj, qi, qj, tp, tq) -> tuple[int, int]:
    lcp = 0
    for t in range(1, min(tp, tq) + 1):
        rs, cs, _ = _ic_cells(pi, pj, t)
        ca = arr[rs, cs].ravel()
        rs, cs, _ = _ic_cells(qi, qj, t)
        cb = arr[rs, cs].ravel()
        neq = ca != cb
        if neq.any():
            d = int(np.argmax(neq))
            return (-1 if ca[d] < cb[d] else 1), lcp
        lcp = t
    raise ValueError("Isuffixes are prefixes of each other; anchors must differ")


def compare_isuffixes(
    index, p: tuple[int, int], q: tuple[int, int], paranoid: bool = False, _hint: int = 0
) -> tuple[int, int]:
    """Order two Isuffixes of one matrix.

    p and q are 1-based anchors.  Returns (sign, lcp) where sign is -1 if
    the Isuffix at p sorts first, +1 otherwise, and lcp counts the equal
    leading Icharacters.  Galloping + binary search over fingerprint
    probes; the differing Icharacter is always re-read cell by cell.
    """
    h = index if isinstance(index, HashIndex) else HashIndex(_as_array(index))
    arr = h.data
    rows, cols = arr.shape
    if p == q:
        raise ValueError("anchors must differ")
    pi, pj = p[0] - 1, p[1] - 1
    qi, qj = q[0] - 1, q[1] - 1
    tp = max_icharacters(rows, cols, *p)
    tq = max_icharacters(rows, cols, *q)
    top = min(tp, tq)

    lo = min(_hint, top)
    if lo == 0:
        if arr[pi, pj] != arr[qi, qj]:
            return (-1 if arr[pi, pj] < arr[qi, qj] else 1), 0
        lo = 1
    step = 1
    hi = top
    while True:
        t = lo + step
        if t > hi:
            break
        if _prefix_eq(h, pi, pj, qi, qj, t):
            lo = t
            step *= 2
        else:
            hi = t - 1
            break
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if _prefix_eq(h, pi, pj, qi, qj, mid):
            lo = mid
        else:
            hi = mid - 1

    if paranoid and not _prefix_eq_cells(arr, pi, pj, qi, qj, lo):
        return _brute_compare(arr, pi, pj, qi, qj, tp, tq)
    if lo == top:
        # Sentinels make this unreachable for distinct anchors unless a
        # fingerprint collision misled the search; re-scan exactly.
        return _brute_compare(arr, pi, pj, qi, qj, tp, tq)

    rs, cs, _ = _ic_cells(pi, pj, lo + 1)
    ca = arr[rs, cs].ravel()
    rs, cs, _ = _ic_cells(qi, qj, lo + 1)
    cb = arr[rs, cs].ravel()
    neq = ca != cb
    if not neq.any():
        return _brute_compare(arr, pi, pj, qi, qj, tp, tq)
    d = int(np.argmax(neq))
    return (-1 if ca[d] < cb[d] else 1), lo


_KEY_OFFSETS = ((0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (2, 1), (0, 2), (1, 2), (2, 2))
# Icharacter index each key column belongs to (key columns follow
# Icharacter order: ic1 | ic2 | ic3 ic3 | ic4 ic4 | ic5 ic5 ic5).
_HINT_BY_COL = (0, 1, 2, 2, 3, 3, 4, 4, 4)


_KEY_MIN_Q = (1, 2, 2, 2, 3, 3, 3, 3, 3)  # square side needed for each key cell


def _bucket_keys(arr: np.ndarray, ai: np.ndarray, aj: np.ndarray) -> np.ndarray:
    # First five Icharacters flattened in order; -1 pads positions past the
    # end of short Isuffixes (never order-deciding: a real difference
    # always appears first).
    rows, cols = arr.shape
    n_anchors = ai.shape[0]
    keys = np.full((n_anchors, 9), -1, dtype=np.int64)
    flat = arr.ravel()
    q = np.minimum(rows - ai, cols - aj)
    for col, (di, dj) in enumerate(_KEY_OFFSETS):
        ok = q >= _KEY_MIN_Q[col]
        idx = np.minimum(ai + di, rows - 1) * cols + np.minimum(aj + dj, cols - 1)
        keys[:, col] = np.where(ok, flat[idx], -1)
    return keys


def isuffix_order(
    index, anchors=None, paranoid: bool = False
) -> tuple[list[tuple[int, int]], list[int]]:
    """Sort anchors by Isuffix and report neighbour lcps.

    Returns (sorted 1-based anchors, lcps) with lcps[i] the Icharacter-lcp
    of sorted[i] and sorted[i+1].  Anchors are pre-bucketed by their first
    five Icharacters (exact cell values), so the comparator only runs
    inside buckets and between bucket neighbours.
    """
    h = index if isinstance(index, HashIndex) else HashIndex(_as_array(index))
    arr = h.data
    rows, cols = arr.shape
    if anchors is None:
        anchors = [(i, j) for i in range(1, rows + 1) for j in range(1, cols + 1)]
    if not anchors:
        return [], []
    ai = np.array([a[0] - 1 for a in anchors], dtype=np.int64)
    aj = np.array([a[1] - 1 for a in anchors], dtype=np.int64)
    keys = _bucket_keys(arr, ai, aj)

    order = np.lexsort(tuple(keys[:, col] for col in reversed(range(9))))
    keys_sorted = keys[order]
    boundary = np.empty(order.shape[0], dtype=bool)
    boundary[0] = True
    if order.shape[0] > 1:
        boundary[1:] = (keys_sorted[1:] != keys_sorted[:-1]).any(axis=1)
    starts = np.flatnonzero(boundary).tolist()
    starts.append(order.shape[0])

    def cmp(a: int, b: int) -> int:
        return compare_isuffixes(h, anchors[a], anchors[b], paranoid=paranoid, _hint=5)[0]

    perm: list[int] = []
    for s, e in zip(starts, starts[1:]):
        group = order[s:e].tolist()
        if len(group) > 1:
            group.sort(key=cmp_to_key(cmp))
        perm.extend(group)

    lcps = []
    for a, b in zip(perm, perm[1:]):
        diff = np.flatnonzero(keys[a] != keys[b])
        hint = 5 if diff.size == 0 else _HINT_BY_COL[int(diff[0])]
        sign, lcp = compare_isuffixes(h, anchors[a], anchors[b], paranoid=paranoid, _hint=hint)
        if sign >= 0:
            raise AssertionError("Isuffix order violated by comparator")
        lcps.append(lcp)
    return [anchors[k] for k in perm], lcps
