"""String attractors for square matrices and plain strings.

An attractor is a set of positions such that every distinct square
submatrix (substring, in 1D) has at least one occurrence whose cell
range contains a chosen position.  gamma is the minimum attractor size;
computing it exactly is a minimum hitting set problem, solved here by
iterative-deepening branch and bound with a node budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InconclusiveError, MatrixFormatError
from .hashing import DEFAULT_SEED, HashIndex
from .matrix import Matrix

DEFAULT_BUDGET = 5_000_000
_GREEDY_CELL_CAP = 25_000_000


@dataclass(frozen=True)
class Attractor:
    """A set of 1-based (row, col) positions of a square matrix."""

    positions: frozenset

    @classmethod
    def of(cls, positions) -> "Attractor":
        return cls(frozenset((int(i), int(j)) for i, j in positions))

    @property
    def size(self) -> int:
        return len(self.positions)

    def sorted(self) -> list[tuple[int, int]]:
        return sorted(self.positions)


@dataclass(frozen=True)
class StringAttractor:
    """A set of 1-based positions of a string."""

    positions: frozenset

    @classmethod
    def of(cls, positions) -> "StringAttractor":
        return cls(frozenset(int(p) for p in positions))

    @property
    def size(self) -> int:
        return len(self.positions)

    def sorted(self) -> list[int]:
        return sorted(self.positions)


def _position_prefix_sums(n: int, flat_positions) -> np.ndarray:
    ind = np.zeros((n, n), dtype=np.int64)
    for f in flat_positions:
        ind[f // n, f % n] = 1
    ps = np.zeros((n + 1, n + 1), dtype=np.int64)
    ps[1:, 1:] = ind.cumsum(axis=0).cumsum(axis=1)
    return ps


def _covered_grid(ps: np.ndarray, n: int, k: int) -> np.ndarray:
    w = n - k + 1
    hits = ps[k:, k:] - ps[:w, k:] - ps[k:, :w] + ps[:w, :w]
    return hits.ravel() > 0


def _group_starts(sorted_vals: np.ndarray) -> np.ndarray:
    starts = np.empty(sorted_vals.shape[0], dtype=bool)
    starts[0] = True
    starts[1:] = sorted_vals[1:] != sorted_vals[:-1]
    return np.flatnonzero(starts)


def _uncovered_first_anchors(h: HashIndex, k: int, covered: np.ndarray) -> np.ndarray:
    """Row-major first anchor of every distinct k x k content no occurrence
    of which touches a position (flat indices into the (n-k+1)^2 grid)."""
    packed = h.window_grid(k, k).ravel()
    order = np.argsort(packed, kind="stable")
    starts = _group_starts(packed[order])
    grp_hit = np.maximum.reduceat(covered[order].astype(np.uint8), starts)
    bad = grp_hit == 0
    if not bad.any():
        return np.empty(0, dtype=np.int64)
    return order[starts[bad]]


def verify_attractor(
    m: Matrix, attractor: Attractor, index: HashIndex | None = None, seed: int = DEFAULT_SEED
) -> tuple[bool, tuple[int, tuple[int, int]] | None]:
    """Check the attractor property for every k.

    Returns (True, None) or (False, (k, anchor)) where the witness anchor
    is the row-major first occurrence of the first uncovered distinct
    submatrix at the smallest failing k.
    """
    if not m.is_square:
        raise MatrixFormatError("attractors are defined for square matrices")
    n = m.rows
    pos = attractor.positions if isinstance(attractor, Attractor) else frozenset(attractor)
    for (i, j) in pos:
        if not (1 <= i <= n and 1 <= j <= n):
            raise ValueError(f"attractor position ({i}, {j}) outside {n}x{n}")
    h = index if index is not None else HashIndex(m.data, seed)
    ps = _position_prefix_sums(n, [(i - 1) * n + (j - 1) for i, j in pos])
    for k in range(1, n + 1):
        w = n - k + 1
        bad = _uncovered_first_anchors(h, k, _covered_grid(ps, n, k))
        if bad.size:
            a = int(bad.min())
            return False, (k, (a // w + 1, a % w + 1))
    return True, None


def _window_cells(anchors: np.ndarray, w: int, n: int, k: int) -> np.ndarray:
    """Flat cell indices (n-grid) of the k x k windows at the given flat anchors."""
    r = anchors // w
    c = anchors % w
    di, dj = np.meshgrid(np.arange(k), np.arange(k), indexing="ij")
    off = (di * n + dj).ravel()
    return ((r * n + c)[:, None] + off[None, :]).ravel()


def _cover_sets(m: Matrix, h: HashIndex, k_cap: int):
    """One constraint per distinct content with side <= k_cap.

    Returns (sets, labels): sets[i] is the sorted unique flat positions
    whose choice would cover content i; labels[i] = (k, anchor row, anchor
    col) of its row-major first occurrence, ascending.
    """
    n = m.rows
    sets: list[np.ndarray] = []
    labels: list[tuple[int, int, int]] = []
    for k in range(1, k_cap + 1):
        w = n - k + 1
        packed = h.window_grid(k, k).ravel()
        order = np.argsort(packed, kind="stable")
        starts = _group_starts(packed[order]).tolist()
        starts.append(order.shape[0])
        groups = []
        for s, e in zip(starts, starts[1:]):
            occ = np.sort(order[s:e])
            groups.append((int(occ[0]), occ))
        groups.sort(key=lambda t: t[0])
        for first, occ in groups:
            cells = np.unique(_window_cells(occ, w, n, k))
            sets.append(cells.astype(np.int64))
            labels.append((k, first // w, first % w))
    return sets, labels


def _greedy_hitting(sets: list[frozenset]) -> set:
    chosen: set = set()
    uncovered = list(sets)
    while uncovered:
        counts: dict = {}
        for s in uncovered:
            for p in s:
                counts[p] = counts.get(p, 0) + 1
        best = min(counts, key=lambda p: (-counts[p], p))
        chosen.add(best)
        uncovered = [s for s in uncovered if best not in s]
    return chosen


def _min_hitting_set(sets, labels, lower: int, budget: int) -> set:
    """Deterministic minimum hitting set via iterative deepening DFS.

    Raises InconclusiveError when the node budget runs out; never returns
    a non-minimum answer.
    """
    pairs = sorted(zip(sets, labels), key=lambda t: (len(t[0]), t[1]))
    kept: list[frozenset] = []
    for s, _ in pairs:
        if not any(t <= s for t in kept):
            kept.append(s)
    if not kept:
        return set()
    ub_set = _greedy_hitting(kept)
    lower = max(lower, 1)
    nodes = [0]

    def dfs(uncov: list, chosen: set, limit: int):
        nodes[0] += 1
        if nodes[0] > budget:
            raise InconclusiveError(f"hitting-set search exceeded {budget} nodes")
        if not uncov:
            return chosen
        rem = limit - len(chosen)
        if rem <= 0:
            return None
        # pairwise-disjoint uncovered sets each need their own position
        taken: set = set()
        need = 0
        for s in uncov:
            if taken.isdisjoint(s):
                need += 1
                if need > rem:
                    return None
                taken |= s
        target = min(uncov, key=len)
        for p in sorted(target):
            rest = [s for s in uncov if p not in s]
            got = dfs(rest, chosen | {p}, limit)
            if got is not None:
                return got
        return None

    for limit in range(lower, len(ub_set)):
        got = dfs(kept, set(), limit)
        if got is not None:
            return got
    return ub_set


def gamma_exact(
    m: Matrix,
    budget: int = DEFAULT_BUDGET,
    max_side: int = 10,
    allow_large: bool = False,
    seed: int = DEFAULT_SEED,
) -> Attractor:
    """Minimum attractor by branch and bound (exponential worst case).

    Guarded to small matrices; pass allow_large=True to override.  Raises
    InconclusiveError if the budget is exhausted first.
    """
    if not m.is_square:
        raise MatrixFormatError("attractors are defined for square matrices")
    n = m.rows
    if n > max_side and not allow_large:
        raise ValueError(
            f"gamma_exact is guarded to side <= {max_side}; pass allow_large=True"
        )
    h = HashIndex(m.data, seed)
    raw_sets, labels = _cover_sets(m, h, n)
    sets = [frozenset(arr.tolist()) for arr in raw_sets]
    from .delta import delta_profile_naive  # local import: delta <-> attractor

    delta = delta_profile_naive(m, seed=seed).delta
    lower = max(m.sigma, math.ceil(delta))
    best = _min_hitting_set(sets, labels, lower, budget)
    return Attractor.of(((f // n) + 1, (f % n) + 1) for f in best)


def verify_string_attractor(
    s, attractor: StringAttractor
) -> tuple[bool, tuple[int, int] | None]:
    """1D attractor check; witness is (length, first occurrence) 1-based."""
    seq = [ord(c) for c in s] if isinstance(s, str) else [int(v) for v in s]
    n = len(seq)
    pos = sorted(attractor.positions if isinstance(attractor, StringAttractor) else attractor)
    for p in pos:
        if not (1 <= p <= n):
            raise ValueError(f"attractor position {p} outside 1..{n}")
    pset = set(p - 1 for p in pos)
    for length in range(1, n + 1):
        seen: dict = {}
        for start in range(n - length + 1):
            key = tuple(seq[start : start + length])
            hit = any(start <= q < start + length for q in pset)
            if key not in seen:
                seen[key] = (start, hit)
            elif hit and not seen[key][1]:
                seen[key] = (seen[key][0], True)
        for key, (first, hit) in seen.items():
            if not hit:
                return False, (length, first + 1)
    return True, None


def gamma_exact_string(
    s,
    budget: int = DEFAULT_BUDGET,
    max_len: int = 16,
    allow_large: bool = False,
) -> StringAttractor:
    """Minimum 1D attractor via the same hitting-set search."""
    seq = [ord(c) for c in s] if isinstance(s, str) else [int(v) for v in s]
    n = len(seq)
    if n == 0:
        raise ValueError("empty string")
    if n > max_len and not allow_large:
        raise ValueError(f"gamma_exact_string is guarded to length <= {max_len}")
    sets = []
    labels = []
    for length in range(1, n + 1):
        groups: dict = {}
        for start in range(n - length + 1):
            groups.setdefault(tuple(seq[start : start + length]), []).append(start)
        for occs in sorted(groups.values(), key=lambda o: o[0]):
            cover = set()
            for o in occs:
                cover.update(range(o, o + length))
            sets.append(frozenset(cover))
            labels.append((length, occs[0], 0))
    best = _min_hitting_set(sets, labels, len(set(seq)), budget)
    return StringAttractor.of(p + 1 for p in best)


def gamma_greedy(
    m: Matrix, seed: int = DEFAULT_SEED, k_cap: int | None = None
) -> Attractor:
    """A valid attractor, greedily built then patched to full validity.

    Greedy covers all contents with side <= k_cap (most-covering position
    first, exact distinct-content counts); an ascending sweep over the
    remaining sides then adds the first occurrence anchor of anything
    still uncovered.  The result always passes verify_attractor.
    """
    if not m.is_square:
        raise MatrixFormatError("attractors are defined for square matrices")
    n = m.rows
    h = HashIndex(m.data, seed)
    cap = k_cap if k_cap is not None else min(n, 8)
    cap = max(1, min(cap, n))
    while cap > 1 and sum((n - k + 1) ** 2 * k * k for k in range(1, cap + 1)) > _GREEDY_CELL_CAP:
        cap -= 1

    sets, _labels = _cover_sets(m, h, cap)
    cnt = np.bincount(np.concatenate(sets), minlength=n * n).astype(np.int64)
    cat = np.concatenate(sets)
    sid = np.repeat(np.arange(len(sets), dtype=np.int64), [len(x) for x in sets])
    order = np.argsort(cat, kind="stable")
    cat_s = cat[order]
    sid_s = sid[order]
    bounds = np.searchsorted(cat_s, np.arange(n * n + 1))
    del cat, sid, order

    alive = np.ones(len(sets), dtype=bool)
    remaining = len(sets)
    chosen: list[int] = []
    while remaining:
        p = int(np.argmax(cnt))
        chosen.append(p)
        for sidx in sid_s[bounds[p] : bounds[p + 1]].tolist():
            if alive[sidx]:
                alive[sidx] = False
                remaining -= 1
                cnt[sets[sidx]] -= 1

    flat = set(chosen)
    for k in range(1, n + 1):
        w = n - k + 1
        ps = _position_prefix_sums(n, flat)
        bad = _uncovered_first_anchors(h, k, _covered_grid(ps, n, k))
        for a in bad.tolist():
            flat.add((a // w) * n + (a % w))
    return Attractor.of(((f // n) + 1, (f % n) + 1) for f in flat)


def reduce_string_to_matrix(s) -> Matrix:
    """R^S: the |S| x |S| matrix whose every row equals S."""
    seq = [ord(c) for c in s] if isinstance(s, str) else [int(v) for v in s]
    if not seq:
        raise MatrixFormatError("cannot reduce an empty string")
    row = np.array(seq, dtype=np.int64)
    return Matrix(np.tile(row, (len(seq), 1)))


def lift_attractor(sa: StringAttractor) -> Attractor:
    """String positions j become first-row positions (1, j) of R^S."""
    return Attractor.of((1, p) for p in sa.positions)


def project_attractor(g2: Attractor, k: int, n: int | None = None) -> StringAttractor:
    """Column-project a matrix attractor to a string attractor of size k.

    Distinct column indices survive; if fewer than k remain the set is
    completed with the smallest unused positions.
    """
    cols = sorted({j for (_i, j) in g2.positions})
    if len(cols) > k:
        raise ValueError(f"cannot project {len(cols)} columns down to {k} positions")
    used = set(cols)
    candidate = 1
    while len(used) < k:
        while candidate in used:
            candidate += 1
        if n is not None and candidate > n:
            raise ValueError(f"cannot complete to {k} positions within 1..{n}")
        used.add(candidate)
        candidate += 1
    return StringAttractor.of(used)
