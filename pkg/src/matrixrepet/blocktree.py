"""Two-dimensional block trees.

A block tree partitions the (k-power padded) matrix into a grid of
square blocks and recurses only inside marked blocks.  The default
builder marks every block intersecting the row-major first occurrence
of any distinct block-sized submatrix; an unmarked block stores one
pointer to the marked block containing the top-left cell of its
content's first occurrence, plus the offset inside it.  The attractor
variant instead marks blocks containing an attractor position and their
eight neighbours, and points unmarked blocks at an occurrence that
crosses an attractor position.

Either way access() resolves a cell with at most two node visits per
level: at most one sideways jump (unmarked -> marked), then one descent.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .attractor import Attractor, verify_attractor
from .errors import InvalidAttractorError, MatrixFormatError, TreeFormatError
from .hashing import DEFAULT_SEED, HashIndex
from .matrix import Matrix

MAGIC = b"2DBT"
VERSION = 1


class NodeKind(IntEnum):
    MARKED = 0
    UNMARKED = 1
    LEAF = 2


@dataclass
class Node:
    kind: NodeKind
    grid: tuple[int, int]  # block coordinates at this level, 0-based
    ptr: int | None = None  # node index (same level) of the pointed marked block
    offset: tuple[int, int] | None = None  # occurrence offset inside that block
    payload: np.ndarray | None = None  # raw symbols, leaf level only


@dataclass
class Level:
    side: int
    nodes: list[Node]
    index: dict = field(default_factory=dict)  # grid -> node position

    def rebuild_index(self):
        self.index = {node.grid: pos for pos, node in enumerate(self.nodes)}


@dataclass
class BlockTree:
    k: int
    leaf_side: int
    origin: str  # "first" (first occurrences) or "attractor"
    n: int  # source side
    padded_side: int
    top_side: int
    fill: int | None
    seed: int
    levels: list[Level]

    def access(self, i: int, j: int) -> int:
        """Symbol at 1-based (i, j) of the source matrix."""
        return self._resolve(i, j)[0]

    def access_traced(self, i: int, j: int) -> tuple[int, list[int]]:
        """(symbol, node visits per level) — the visit bound is 2."""
        return self._resolve(i, j)

    def _resolve(self, i: int, j: int) -> tuple[int, list[int]]:
        if not (1 <= i <= self.n and 1 <= j <= self.n):
            raise IndexError(f"cell ({i}, {j}) outside {self.n}x{self.n}")
        r, c = i - 1, j - 1
        visits = [0] * len(self.levels)
        li = 0
        lvl = self.levels[0]
        node = lvl.nodes[lvl.index[(r // lvl.side, c // lvl.side)]]
        loc = (r % lvl.side, c % lvl.side)
        while True:
            visits[li] += 1
            if node.kind == NodeKind.LEAF:
                return int(node.payload[loc]), visits
            if node.kind == NodeKind.UNMARKED:
                s = lvl.side
                target = lvl.nodes[node.ptr]
                gr = target.grid[0] * s + node.offset[0] + loc[0]
                gc = target.grid[1] * s + node.offset[1] + loc[1]
                node = lvl.nodes[lvl.index[(gr // s, gc // s)]]
                loc = (gr % s, gc % s)
                visits[li] += 1
            # marked: descend
            nxt = self.levels[li + 1]
            k = lvl.side // nxt.side
            child = (node.grid[0] * k + loc[0] // nxt.side, node.grid[1] * k + loc[1] // nxt.side)
            node = nxt.nodes[nxt.index[child]]
            loc = (loc[0] % nxt.side, loc[1] % nxt.side)
            li += 1
            lvl = nxt


def _pad_to_power(m: Matrix, k: int) -> tuple[np.ndarray, int, int | None]:
    n = m.rows
    n0 = 1
    while n0 < n:
        n0 *= k
    if n0 == n:
        return m.data, n0, None
    fill = int(m.data.max()) + 1
    out = np.full((n0, n0), fill, dtype=np.int64)
    out[:n, :n] = m.data
    return out, n0, fill


def _first_occurrence_tables(h: HashIndex, s: int):
    """(packed grid, sorted unique contents, their first flat anchors)."""
    packed = h.window_grid(s, s)
    flat = packed.ravel()
    uvals, first_idx = np.unique(flat, return_index=True)
    return packed, uvals, first_idx


def _blocks_touching(anchors: np.ndarray, s: int, grid_dim: int, w: int) -> np.ndarray:
    """Flat grid ids of every block intersecting an s x s window at the anchors."""
    ar = anchors // w
    ac = anchors % w
    rlo, rhi = ar // s, (ar + s - 1) // s
    clo, chi = ac // s, (ac + s - 1) // s
    ids = np.concatenate(
        [rlo * grid_dim + clo, rlo * grid_dim + chi, rhi * grid_dim + clo, rhi * grid_dim + chi]
    )
    return np.unique(ids)


def _children_of_marked(level: Level, k: int) -> list[tuple[int, int]]:
    live: list[tuple[int, int]] = []
    for node in level.nodes:
        if node.kind == NodeKind.MARKED:
            r0, c0 = node.grid[0] * k, node.grid[1] * k
            for dr in range(k):
                for dc in range(k):
                    live.append((r0 + dr, c0 + dc))
    return live


def _leaf_level(data: np.ndarray, live, s: int) -> Level:
    nodes = [
        Node(NodeKind.LEAF, g, payload=data[g[0] * s : (g[0] + 1) * s, g[1] * s : (g[1] + 1) * s])
        for g in live
    ]
    lvl = Level(s, nodes)
    lvl.rebuild_index()
    return lvl


def _assemble(
    data: np.ndarray,
    top_side: int,
    leaf_side: int,
    k: int,
    mark_and_point,
) -> list[Level]:
    """Shared recursion: mark_and_point(s, live) -> (marked flat ids, pointer map)."""
    n0 = data.shape[0]
    g0 = n0 // top_side
    live = [(r, c) for r in range(g0) for c in range(g0)]
    levels: list[Level] = []
    s = top_side
    while s > leaf_side:
        grid_dim = n0 // s
        marked, pointer_of = mark_and_point(s, live)
        nodes: list[Node] = []
        for (r, c) in live:
            flat_id = r * grid_dim + c
            if flat_id in marked:
                nodes.append(Node(NodeKind.MARKED, (r, c)))
            else:
                nodes.append(Node(NodeKind.UNMARKED, (r, c)))
        lvl = Level(s, nodes)
        lvl.rebuild_index()
        for node in nodes:
            if node.kind == NodeKind.UNMARKED:
                anchor = pointer_of(node.grid)
                tgt = (anchor[0] // s, anchor[1] // s)
                if tgt not in lvl.index or lvl.nodes[lvl.index[tgt]].kind != NodeKind.MARKED:
                    raise AssertionError("pointer target must be a marked live block")
                node.ptr = lvl.index[tgt]
                node.offset = (anchor[0] % s, anchor[1] % s)
        levels.append(lvl)
        live = _children_of_marked(lvl, k)
        s //= k
    levels.append(_leaf_level(data, live, s))
    return levels


def _shallow_top(n0: int, k: int, leaf_side: int, delta_ceiling: int) -> int:
    # Largest k-power s with s^2 * delta <= n0^2, i.e. about delta blocks
    # in the first division; clamped to the normal range.
    s = n0 // k
    while s > 1 and s * s * delta_ceiling > n0 * n0:
        s //= k
    floor = 1
    while floor * k <= leaf_side:
        floor *= k
    floor *= k  # smallest k-power strictly above leaf_side
    return max(min(s, n0 // k), min(floor, n0 // k))


def build_bt(
    m: Matrix,
    k: int = 2,
    leaf_side: int | None = None,
    shallow: bool = False,
    delta_hint=None,
    seed: int = DEFAULT_SEED,
) -> BlockTree:
    """First-occurrence block tree.

    shallow=True makes the first division produce about delta2d blocks
    (computed via the fast profile unless delta_hint is given), which
    removes the deep all-marked prefix of highly repetitive inputs.
    """
    if not m.is_square:
        raise MatrixFormatError("block trees are built over square matrices")
    if k < 2:
        raise ValueError("k must be at least 2")
    explicit_leaf = leaf_side is not None
    leaf_side = k if leaf_side is None else leaf_side
    if leaf_side < 1:
        raise ValueError("leaf_side must be positive")
    data, n0, fill = _pad_to_power(m, k)
    if explicit_leaf and leaf_side >= n0:
        raise ValueError(f"leaf_side {leaf_side} must be smaller than the padded side {n0}")
    if n0 <= leaf_side:
        # defaulted leaf on a matrix no larger than one leaf: store it whole
        levels = [_leaf_level(data, [(0, 0)], n0)]
        return BlockTree(k, leaf_side, "first", m.rows, n0, n0, fill, seed, levels)

    top_side = n0 // k
    if shallow:
        if delta_hint is None:
            from .delta import delta_profile_fast  # deferred: delta imports istring only

            delta_hint = delta_profile_fast(m, seed=seed).delta
        top_side = _shallow_top(n0, k, leaf_side, max(1, math.ceil(delta_hint)))

    h = HashIndex(data, seed)

    def mark_and_point(s: int, live):
        grid_dim = n0 // s
        w = n0 - s + 1
        packed, uvals, first_idx = _first_occurrence_tables(h, s)
        marked = set(_blocks_touching(first_idx, s, grid_dim, w).tolist())
        live_ids = {r * grid_dim + c for (r, c) in live}
        if not marked <= live_ids:
            raise AssertionError("marked blocks must all be live")

        def pointer_of(grid: tuple[int, int]) -> tuple[int, int]:
            v = packed[grid[0] * s, grid[1] * s]
            pos = int(np.searchsorted(uvals, v))
            f = int(first_idx[pos])
            return f // w, f % w

        return marked, pointer_of

    levels = _assemble(data, top_side, leaf_side, k, mark_and_point)
    return BlockTree(k, leaf_side, "first", m.rows, n0, top_side, fill, seed, levels)


def build_gamma_bt(
    m: Matrix,
    attractor: Attractor,
    k: int = 2,
    leaf_side: int | None = None,
    seed: int = DEFAULT_SEED,
    check: bool = True,
) -> BlockTree:
    """Attractor-guided block tree: marked = attractor blocks + 8 neighbours.

    The attractor is verified first (InvalidAttractorError on failure).
    Unmarked blocks point at the row-major first occurrence of their
    content that crosses an attractor position; such an occurrence never
    overlaps the pointing block.  Marked blocks per level stay <= 9 *
    |attractor| plus the blocks that touch the k-power padding.
    """
    if not m.is_square:
        raise MatrixFormatError("block trees are built over square matrices")
    if k < 2:
        raise ValueError("k must be at least 2")
    explicit_leaf = leaf_side is not None
    leaf_side = k if leaf_side is None else leaf_side
    if leaf_side < 1:
        raise ValueError("leaf_side must be positive")
    h_src = HashIndex(m.data, seed)
    if check:
        ok, witness = verify_attractor(m, attractor, index=h_src)
        if not ok:
            raise InvalidAttractorError(
                f"attractor misses a distinct {witness[0]}x{witness[0]} submatrix at {witness[1]}",
                witness=witness,
            )
    n = m.rows
    pos0 = [(i - 1, j - 1) for (i, j) in attractor.positions]
    data, n0, fill = _pad_to_power(m, k)
    if explicit_leaf and leaf_side >= n0:
        raise ValueError(f"leaf_side {leaf_side} must be smaller than the padded side {n0}")
    if n0 <= leaf_side:
        levels = [_leaf_level(data, [(0, 0)], n0)]
        return BlockTree(k, leaf_side, "attractor", n, n0, n0, fill, seed, levels)

    h = HashIndex(data, seed)
    ps = np.zeros((n0 + 1, n0 + 1), dtype=np.int64)
    ind = np.zeros((n0, n0), dtype=np.int64)
    for (r, c) in pos0:
        ind[r, c] = 1
    ps[1:, 1:] = ind.cumsum(axis=0).cumsum(axis=1)

    def mark_and_point(s: int, live):
        grid_dim = n0 // s
        marked: set[int] = set()
        for (r, c) in pos0:
            br, bc = r // s, c // s
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    rr, cc = br + dr, bc + dc
                    if 0 <= rr < grid_dim and 0 <= cc < grid_dim:
                        marked.add(rr * grid_dim + cc)
        if fill is not None:
            # blocks overlapping the padded region have no crossing
            # occurrence to point at, so they are marked unconditionally
            edge = n // s
            for r in range(edge, grid_dim):
                for c in range(grid_dim):
                    marked.add(r * grid_dim + c)
                    marked.add(c * grid_dim + r)
        live_ids = {r * grid_dim + c for (r, c) in live}
        if not marked <= live_ids:
            raise AssertionError("marked blocks must all be live")

        w = n0 - s + 1
        packed = h.window_grid(s, s)
        flat = packed.ravel()
        hits = (ps[s:, s:] - ps[:w, s:] - ps[s:, :w] + ps[:w, :w]).ravel() > 0
        midx = np.flatnonzero(hits)
        mvals = flat[midx]
        uvals, ui = np.unique(mvals, return_index=True)
        ufirst = midx[ui]

        def pointer_of(grid: tuple[int, int]) -> tuple[int, int]:
            v = packed[grid[0] * s, grid[1] * s]
            pos = int(np.searchsorted(uvals, v))
            if pos >= uvals.size or uvals[pos] != v:
                raise AssertionError("unmarked block content has no crossing occurrence")
            f = int(ufirst[pos])
            return f // w, f % w

        return marked, pointer_of

    levels = _assemble(data, top_side=n0 // k, leaf_side=leaf_side, k=k, mark_and_point=mark_and_point)
    return BlockTree(k, leaf_side, "attractor", n, n0, n0 // k, fill, seed, levels)


@dataclass(frozen=True)
class LevelStats:
    side: int
    marked: int
    unmarked: int
    leaves: int


@dataclass(frozen=True)
class BTStats:
    origin: str
    k: int
    leaf_side: int
    source_side: int
    padded_side: int
    top_side: int
    levels: tuple[LevelStats, ...]
    total_nodes: int
    pointer_count: int
    explicit_cells: int
    estimated_bits: int

    def as_dict(self) -> dict:
        return {
            "origin": self.origin,
            "k": self.k,
            "leaf_side": self.leaf_side,
            "source_side": self.source_side,
            "padded_side": self.padded_side,
            "top_side": self.top_side,
            "levels": [
                {"side": l.side, "marked": l.marked, "unmarked": l.unmarked, "leaves": l.leaves}
                for l in self.levels
            ],
            "total_nodes": self.total_nodes,
            "pointer_count": self.pointer_count,
            "explicit_cells": self.explicit_cells,
            "estimated_bits": self.estimated_bits,
        }


def bt_stats(tree: BlockTree) -> BTStats:
    """Per-level shape counts and a bit estimate.

    Bits: 2 per node for the kind, each pointer pays log2 of the marked
    count at its level plus two offset fields of log2(side), each
    explicit cell pays 16.
    """
    level_stats = []
    total_nodes = pointer_count = explicit_cells = bits = 0
    for lvl in tree.levels:
        marked = sum(1 for nd in lvl.nodes if nd.kind == NodeKind.MARKED)
        unmarked = sum(1 for nd in lvl.nodes if nd.kind == NodeKind.UNMARKED)
        leaves = len(lvl.nodes) - marked - unmarked
        level_stats.append(LevelStats(lvl.side, marked, unmarked, leaves))
        total_nodes += len(lvl.nodes)
        pointer_count += unmarked
        explicit_cells += leaves * lvl.side * lvl.side
        bits += 2 * len(lvl.nodes)
        ptr_bits = max(marked, 2).bit_length() + 2 * max(lvl.side - 1, 1).bit_length()
        bits += unmarked * ptr_bits
    bits += explicit_cells * 16
    return BTStats(
        origin=tree.origin,
        k=tree.k,
        leaf_side=tree.leaf_side,
        source_side=tree.n,
        padded_side=tree.padded_side,
        top_side=tree.top_side,
        levels=tuple(level_stats),
        total_nodes=total_nodes,
        pointer_count=pointer_count,
        explicit_cells=explicit_cells,
        estimated_bits=bits,
    )


_HEADER = struct.Struct("<4sBBIIQQQqQI")
_LEVEL_HEAD = struct.Struct("<QI")
_PTR = struct.Struct("<III")
_KIND = struct.Struct("<B")


def serialize(tree: BlockTree) -> bytes:
    """Canonical binary form; node order alone reconstructs the grids."""
    out = bytearray()
    out += _HEADER.pack(
        MAGIC,
        VERSION,
        0 if tree.origin == "first" else 1,
        tree.k,
        tree.leaf_side,
        tree.n,
        tree.padded_side,
        tree.top_side,
        -1 if tree.fill is None else tree.fill,
        tree.seed & ((1 << 64) - 1),
        len(tree.levels),
    )
    for lvl in tree.levels:
        out += _LEVEL_HEAD.pack(lvl.side, len(lvl.nodes))
        for node in lvl.nodes:
            out.append(int(node.kind))
            if node.kind == NodeKind.UNMARKED:
                out += _PTR.pack(node.ptr, node.offset[0], node.offset[1])
            elif node.kind == NodeKind.LEAF:
                out += node.payload.astype("<u4").tobytes()
    return bytes(out)


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.pos = 0

    def take(self, fmt: struct.Struct):
        if self.pos + fmt.size > len(self.blob):
            raise TreeFormatError("truncated block tree stream")
        vals = fmt.unpack_from(self.blob, self.pos)
        self.pos += fmt.size
        return vals

    def take_bytes(self, count: int) -> bytes:
        if self.pos + count > len(self.blob):
            raise TreeFormatError("truncated block tree stream")
        chunk = self.blob[self.pos : self.pos + count]
        self.pos += count
        return chunk


def deserialize(blob: bytes) -> BlockTree:
    """Rebuild a tree, validating magic, version, counts and pointers."""
    r = _Reader(blob)
    magic, version, origin_code, k, leaf_side, n, n0, top_side, fill, seed, n_levels = r.take(
        _HEADER
    )
    if magic != MAGIC:
        raise TreeFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise TreeFormatError(f"unsupported version {version}")
    if k < 2 or n < 1 or n0 < n or top_side < 1 or n_levels < 1:
        raise TreeFormatError("implausible header fields")
    origin = "first" if origin_code == 0 else "attractor"

    levels: list[Level] = []
    live = None
    prev_side = None
    for li in range(n_levels):
        side, count = r.take(_LEVEL_HEAD)
        if live is None:
            if side != top_side or side < 1 or n0 % side:
                raise TreeFormatError("first level side disagrees with the header")
            g0 = n0 // side
            live = [(a, b) for a in range(g0) for b in range(g0)]
        elif side * k != prev_side:
            raise TreeFormatError("level sides must shrink by exactly k")
        prev_side = side
        if count != len(live):
            raise TreeFormatError(
                f"level {li} stores {count} nodes but the grid implies {len(live)}"
            )
        nodes: list[Node] = []
        for grid in live:
            (kind_byte,) = r.take(_KIND)
            if kind_byte == NodeKind.UNMARKED:
                ptr, o0, o1 = r.take(_PTR)
                if not (o0 < side and o1 < side):
                    raise TreeFormatError("pointer offset outside its block")
                nodes.append(Node(NodeKind.UNMARKED, grid, ptr=ptr, offset=(o0, o1)))
            elif kind_byte == NodeKind.MARKED:
                nodes.append(Node(NodeKind.MARKED, grid))
            elif kind_byte == NodeKind.LEAF:
                raw = r.take_bytes(4 * side * side)
                payload = np.frombuffer(raw, dtype="<u4").astype(np.int64).reshape(side, side)
                nodes.append(Node(NodeKind.LEAF, grid, payload=payload))
            else:
                raise TreeFormatError(f"unknown node kind {kind_byte}")
        for node in nodes:
            if node.kind == NodeKind.UNMARKED and not (0 <= node.ptr < len(nodes)):
                raise TreeFormatError("pointer index out of range")
        lvl = Level(side, nodes)
        lvl.rebuild_index()
        levels.append(lvl)
        if li + 1 < n_levels:
            next_side = side // k
            live = _children_of_marked(lvl, k)
            if not live:
                raise TreeFormatError("non-final level has no marked blocks")
            if next_side < 1:
                raise TreeFormatError("level sides do not divide down by k")
    if r.pos != len(blob):
        raise TreeFormatError(f"{len(blob) - r.pos} trailing bytes after the tree")
    return BlockTree(
        k=k,
        leaf_side=leaf_side,
        origin=origin,
        n=n,
        padded_side=n0,
        top_side=top_side,
        fill=None if fill < 0 else int(fill),
        seed=seed,
        levels=levels,
    )
