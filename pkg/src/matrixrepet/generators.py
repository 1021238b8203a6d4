"""Input families: separation lower-bound matrices, the non-monotonicity
witness strings, permuted variants and seeded random matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .attractor import reduce_string_to_matrix
from .matrix import Matrix


def gen_nonmono(n: int) -> tuple[str, str]:
    """(w, wb): appending 'b' to w drops the minimum attractor size.

    w = abbb a^n ab has gamma 3 while w·b has gamma 2, so gamma (1D and,
    through R^S, 2D) is not monotone under appends.
    """
    if n < 1:
        raise ValueError("n must be positive")
    w = "abbb" + "a" * n + "ab"
    return w, w + "b"


def _separation_root(n: int) -> int:
    root = math.isqrt(n) if n > 0 else 0
    if root < 2 or root * root != n or root % 2 != 0:
        raise ValueError("separation family needs n a perfect square with even root")
    return root


def separation_blocks(n: int) -> list[str]:
    """S_i = 1^i 0^(2*sqrt(n)-i) for i = 1..sqrt(n)/2; each has length 2*sqrt(n)."""
    root = _separation_root(n)
    return ["1" * i + "0" * (2 * root - i) for i in range(1, root // 2 + 1)]


def _separation_matrix(n: int, order: list[int]) -> Matrix:
    blocks = separation_blocks(n)
    first_row = "".join(blocks[i - 1] for i in order)
    assert len(first_row) == n
    data = np.full((n, n), ord("#"), dtype=np.int64)
    data[0] = [ord(c) for c in first_row]
    return Matrix(data)


def gen_separation(n: int) -> Matrix:
    """First row S_1 S_2 ... S_{sqrt(n)/2}, every other row all '#'.

    Each S_i block occurs exactly once, which forces any attractor to
    spend a position per block (gamma >= sqrt(n)/2) while delta2d stays
    constant.
    """
    root = _separation_root(n)
    return _separation_matrix(n, list(range(1, root // 2 + 1)))


def gen_permuted(n: int, perm) -> Matrix:
    """Separation matrix with blocks laid out in the given 1-based order."""
    root = _separation_root(n)
    b = root // 2
    order = [int(p) for p in perm]
    if sorted(order) != list(range(1, b + 1)):
        raise ValueError(f"perm must be a permutation of 1..{b}")
    return _separation_matrix(n, order)


def gen_random(n: int, sigma: int, seed: int = 0) -> Matrix:
    """Uniform random n x n matrix guaranteed to use all sigma symbols.

    Symbols are 0..sigma-1; the counter-based generator makes results
    reproducible from the seed alone.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if not (1 <= sigma <= 1 << 16):
        raise ValueError("sigma must be in 1..65536")
    if sigma > n * n:
        raise ValueError(f"cannot fit {sigma} distinct symbols into {n}x{n}")
    rng = np.random.Generator(np.random.Philox(key=seed))
    while True:
        data = rng.integers(0, sigma, size=(n, n), dtype=np.int64)
        if np.unique(data).size == sigma:
            return Matrix(data)


def _random_letters(n: int, sigma: int, seed: int) -> str:
    rng = np.random.Generator(np.random.Philox(key=seed))
    while True:
        draws = rng.integers(0, sigma, size=n)
        if np.unique(draws).size == min(sigma, n):
            return "".join(chr(ord("a") + int(d)) for d in draws)


@dataclass(frozen=True)
class FamilySpec:
    """A named family instance; make() renders the matrix for benchmarks."""

    family: str
    n: int
    sigma: int = 2
    seed: int = 0
    perm: tuple = field(default=())

    def make(self) -> Matrix:
        if self.family == "separation":
            return gen_separation(self.n)
        if self.family == "permuted":
            if self.perm:
                return gen_permuted(self.n, self.perm)
            root = _separation_root(self.n)
            rng = np.random.Generator(np.random.Philox(key=self.seed))
            order = rng.permutation(root // 2) + 1
            return gen_permuted(self.n, order.tolist())
        if self.family == "random":
            return gen_random(self.n, self.sigma, self.seed)
        if self.family == "rs":
            return reduce_string_to_matrix(_random_letters(self.n, self.sigma, self.seed))
        if self.family == "nonmono":
            w, _wb = gen_nonmono(self.n)
            return reduce_string_to_matrix(w)
        raise ValueError(f"unknown family {self.family!r}")
