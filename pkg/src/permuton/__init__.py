"""Permutation patterns, permutons and growth chains on permutations and partitions."""
from .errors import BudgetError, PermutonError, TieError
from .perm import (BivariateSample, CycleForm, Permutation, ZArray, compose, cycle_restrict,
                   direct_sum, foata, foata_inverse, from_cycles, identity, invert, order_restrict,
                   pattern_of, ranks, skew_sum, to_cycles, z_decode, z_encode)
from .patterns import (PatternTable, count_patterns, count_patterns_bruteforce, count_patterns_fast,
                       is_separable, pattern_frequency)

__version__ = "0.1.0"

__all__ = [
    "BivariateSample", "BudgetError", "CycleForm", "PatternTable", "Permutation", "PermutonError",
    "TieError", "ZArray", "compose", "count_patterns", "count_patterns_bruteforce",
    "count_patterns_fast", "cycle_restrict", "direct_sum", "foata", "foata_inverse", "from_cycles",
    "identity", "invert", "is_separable", "order_restrict", "pattern_frequency", "pattern_of",
    "ranks", "skew_sum", "to_cycles", "z_decode", "z_encode",
]
