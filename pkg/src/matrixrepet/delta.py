"""Distinct k x k counting and the substring-complexity measure.

delta2d(M) = max_k d_k(M) / k^2 where d_k counts distinct k x k
submatrices.  Values are exact rationals; ties in the maximum resolve
to the smallest k.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import MatrixFormatError
from .hashing import DEFAULT_SEED, HashIndex
from .istring import isuffix_order
from .matrix import Matrix, pad_with_sentinels


@dataclass(frozen=True)
class DeltaProfile:
    """Distinct-square counts d_1..d_n together with the derived measure."""

    n: int
    counts: tuple[int, ...]
    delta: Fraction
    argmax_k: int

    @classmethod
    def from_counts(cls, counts) -> "DeltaProfile":
        counts = tuple(int(c) for c in counts)
        if not counts:
            raise ValueError("empty count vector")
        best = Fraction(0)
        best_k = 1
        for k, c in enumerate(counts, start=1):
            val = Fraction(c, k * k)
            if val > best:
                best = val
                best_k = k
        return cls(n=len(counts), counts=counts, delta=best, argmax_k=best_k)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "d": list(self.counts),
            "delta2d": {"num": self.delta.numerator, "den": self.delta.denominator},
            "argmax_k": self.argmax_k,
        }


def _require_square(m: Matrix) -> int:
    if not m.is_square:
        raise MatrixFormatError("this measure is defined for square matrices")
    return m.rows


def count_distinct_k(m: Matrix, k: int, index: HashIndex | None = None) -> int:
    """Number of distinct k x k submatrices (fingerprint deduplication)."""
    n_rows, n_cols = m.rows, m.cols
    if not (1 <= k <= min(n_rows, n_cols)):
        raise ValueError(f"k={k} out of range 1..{min(n_rows, n_cols)}")
    h = index if index is not None else HashIndex(m.data)
    packed = h.window_grid(k, k)
    return int(np.unique(packed.ravel()).size)


def delta_profile_naive(
    m: Matrix, seed: int = DEFAULT_SEED, threads: int = 1
) -> DeltaProfile:
    """Profile by deduplicating every k independently (k = 1..n)."""
    n = _require_square(m)
    h = HashIndex(m.data, seed)
    ks = range(1, n + 1)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            counts = list(pool.map(lambda k: count_distinct_k(m, k, h), ks))
    else:
        counts = [count_distinct_k(m, k, h) for k in ks]
    return DeltaProfile.from_counts(counts)


def diff_updates(l1: int, l2: int) -> tuple[int, int]:
    """Side range (s, t) of the new squares an Isuffix contributes when its
    unshared well-formed Icharacters span Istring positions l1..l2.

    The counting pass then performs d[s] += 1 and d[t+1] -= 1, crediting one
    distinct square of every side in [s, t]; s may exceed t when the whole
    well-formed part is shared with the sorted predecessor.
    """
    if l1 < 1 or l2 < 1:
        raise ValueError("Istring positions are 1-based")
    return l1 // 2 + 1, (l2 + 1) // 2


def delta_profile_fast(
    m: Matrix, seed: int = DEFAULT_SEED, paranoid: bool = False
) -> DeltaProfile:
    """Profile from one Isuffix ordering of the sentinel-padded matrix.

    Sorting all Isuffixes and summing Icharacter-lcp gaps counts each
    distinct square exactly once: the anchor whose Isuffix sorts first
    among occurrences contributes it through the diff-array update.
    """
    n = _require_square(m)
    padded = pad_with_sentinels(m)
    h = HashIndex(padded.data, seed)
    anchors = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1)]
    ordered, lcps = isuffix_order(h, anchors, paranoid=paranoid)

    diff = [0] * (n + 2)
    for idx, (i, j) in enumerate(ordered):
        lcp = lcps[idx - 1] if idx > 0 else 0
        # the first unshared Icharacter is lcp+1; the largest square that
        # stays clear of the sentinels has side n+1-max(i,j), so its
        # Istring (the well-formed part of the Isuffix) ends at 2*side-1
        side_cap = n + 1 - max(i, j)
        s, t = diff_updates(lcp + 1, 2 * side_cap - 1)
        if s <= t:
            diff[s] += 1
            diff[t + 1] -= 1
    counts = []
    acc = 0
    for k in range(1, n + 1):
        acc += diff[k]
        counts.append(acc)
    if counts[0] != m.sigma:
        raise AssertionError("d_1 must equal the alphabet size")
    return DeltaProfile.from_counts(counts)


def delta2d(
    m: Matrix,
    method: str = "fast",
    seed: int = DEFAULT_SEED,
    threads: int = 1,
    paranoid: bool = False,
) -> Fraction:
    """The measure alone; see delta_profile_* for the full profile."""
    if method == "fast":
        return delta_profile_fast(m, seed=seed, paranoid=paranoid).delta
    if method == "naive":
        return delta_profile_naive(m, seed=seed, threads=threads).delta
    raise ValueError(f"unknown method {method!r}")
