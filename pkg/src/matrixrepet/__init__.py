"""Repetitiveness measures and block trees for two-dimensional strings."""

from .attractor import (
    Attractor,
    StringAttractor,
    gamma_exact,
    gamma_exact_string,
    gamma_greedy,
    lift_attractor,
    project_attractor,
    reduce_string_to_matrix,
    verify_attractor,
    verify_string_attractor,
)
from .blocktree import BlockTree, BTStats, bt_stats, build_bt, build_gamma_bt, deserialize, serialize
from .delta import DeltaProfile, count_distinct_k, delta2d, delta_profile_fast, delta_profile_naive
from .errors import (
    InconclusiveError,
    InvalidAttractorError,
    MatrixFormatError,
    TreeFormatError,
    UnsupportedAlphabetError,
)
from .generators import (
    FamilySpec,
    gen_nonmono,
    gen_permuted,
    gen_random,
    gen_separation,
    separation_blocks,
)
from .hashing import DEFAULT_SEED, HashIndex
from .istring import Icharacter, compare_isuffixes, icharacter_at, istring, isuffix_order
from .matrix import Matrix, PaddedMatrix, load_matrix, pad_with_sentinels, save_matrix, transpose

__version__ = "0.1.0"

__all__ = [
    "Attractor",
    "BTStats",
    "BlockTree",
    "DEFAULT_SEED",
    "DeltaProfile",
    "FamilySpec",
    "HashIndex",
    "Icharacter",
    "InconclusiveError",
    "InvalidAttractorError",
    "Matrix",
    "MatrixFormatError",
    "PaddedMatrix",
    "StringAttractor",
    "TreeFormatError",
    "UnsupportedAlphabetError",
    "bt_stats",
    "build_bt",
    "build_gamma_bt",
    "compare_isuffixes",
    "count_distinct_k",
    "delta2d",
    "delta_profile_fast",
    "delta_profile_naive",
    "deserialize",
    "gamma_exact",
    "gamma_exact_string",
    "gamma_greedy",
    "gen_nonmono",
    "gen_permuted",
    "gen_random",
    "gen_separation",
    "icharacter_at",
    "istring",
    "isuffix_order",
    "lift_attractor",
    "load_matrix",
    "pad_with_sentinels",
    "project_attractor",
    "reduce_string_to_matrix",
    "save_matrix",
    "separation_blocks",
    "serialize",
    "transpose",
    "verify_attractor",
    "verify_string_attractor",
    "__version__",
]
