"""Subsets of an ordered generator list stored as integer bitmasks.

Bit k (0-based) stands for generator k+1. Both the exterior algebra of a bundle and the
algebra of forms use these helpers for their Koszul signs.
"""

from functools import lru_cache
from typing import Iterable, Tuple


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def merge_sign(left: int, right: int) -> int:
    """Sign of g_left ∧ g_right relative to g_(left ∪ right); 0 when they overlap."""
    if left & right:
        return 0
    swaps = 0
    remaining = right
    while remaining:
        low = remaining & -remaining
        swaps += popcount(left & ~((low << 1) - 1))
        remaining ^= low
    return -1 if swaps & 1 else 1


def indices(mask: int) -> Tuple[int, ...]:
    """1-based generator indices of a mask, increasing."""
    found = []
    position = 0
    while mask:
        if mask & 1:
            found.append(position + 1)
        mask >>= 1
        position += 1
    return tuple(found)


def from_indices(values: Iterable[int]) -> int:
    mask = 0
    for value in values:
        mask |= 1 << (value - 1)
    return mask


@lru_cache(maxsize=None)
def masks_of_degree(width: int, degree: int) -> Tuple[int, ...]:
    """All masks over ``width`` generators with exactly ``degree`` bits, in lex order."""
    found = [mask for mask in range(1 << width) if popcount(mask) == degree]
    return tuple(sorted(found, key=indices))


@lru_cache(maxsize=None)
def all_masks(width: int) -> Tuple[int, ...]:
    """Every mask ordered by degree, then lexicographically."""
    ordered = []
    for degree in range(width + 1):
        ordered.extend(masks_of_degree(width, degree))
    return tuple(ordered)


def sort_key(mask: int) -> Tuple[int, Tuple[int, ...]]:
    return popcount(mask), indices(mask)
