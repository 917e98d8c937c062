"""Random-to-random insertion shuffle: coupling, spectral bound and exact checks."""

from .deck import Shuffle, apply_path, apply_shuffle, rank, swap_cards, transpose_relabel, unrank
from .coupling import CouplingVariant, SpecialPair, last_good_time, run_coupled, theta
from .chains import CONSTANTS, build_C, build_Ktilde, second_largest_eigenvalue

__all__ = [
    "Shuffle", "apply_path", "apply_shuffle", "rank", "swap_cards", "transpose_relabel", "unrank",
    "CouplingVariant", "SpecialPair", "last_good_time", "run_coupled", "theta",
    "CONSTANTS", "build_C", "build_Ktilde", "second_largest_eigenvalue",
]
