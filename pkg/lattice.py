"""Subset-lattice primitives.

A relation set is an int bitmask, bit i standing for relation i. Dense tables
over all 2^n sets are numpy arrays indexed by that mask.
"""
import logging
from functools import lru_cache
from typing import Iterable, Iterator, List, Tuple

import numpy as np

logger = logging.getLogger(__name__)

MAX_RELATIONS = 30


def full_set(n: int) -> int:
    """🌐 Mask of all n relations"""
    return (1 << n) - 1


def members(s: int) -> List[int]:
    """📋 Relation indices of a mask, ascending"""
    out = []
    while s:
        low = s & -s
        out.append(low.bit_length() - 1)
        s ^= low
    return out


def from_members(indices: Iterable[int]) -> int:
    """🧮 Mask from relation indices"""
    s = 0
    for i in indices:
        s |= 1 << int(i)
    return s


def popcount(s: int) -> int:
    return bin(s).count('1')


def enumerate_proper_subsets(s: int) -> List[int]:
    """🔁 Every T with 0 < T < s, T a submask of s, in increasing order"""
    if s <= 0:
        return []
    out = []
    t = (s - 1) & s
    while t:
        out.append(t)
        t = (t - 1) & s
    out.reverse()
    return out


def sets_of_cardinality(n: int, k: int) -> List[int]:
    """🎯 All masks over n relations with exactly k members, increasing"""
    if not 0 <= k <= n:
        return []
    return np.flatnonzero(popcount_table(n) == k).tolist()


@lru_cache(maxsize=None)
def popcount_table(n: int) -> np.ndarray:
    """📊 popcount of every mask below 2^n"""
    table = np.zeros(1 << n, dtype=np.int64)
    for b in range(n):
        table[1 << b:2 << b] = table[:1 << b] + 1
    table.setflags(write=False)
    return table


@lru_cache(maxsize=None)
def rank_order(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """📚 Masks sorted by cardinality and the start offset of every rank.

    order[offsets[r]:offsets[r + 1]] are the rank-r masks in increasing order,
    so any cardinality range is one contiguous slice.
    """
    counts = popcount_table(n)
    order = np.argsort(counts, kind='stable').astype(np.int64)
    offsets = np.zeros(n + 2, dtype=np.int64)
    offsets[1:] = np.cumsum(np.bincount(counts, minlength=n + 1))
    order.setflags(write=False)
    offsets.setflags(write=False)
    return order, offsets


@lru_cache(maxsize=None)
def _submask_patterns(k: int, unordered: bool) -> np.ndarray:
    if k < 2:
        return np.zeros((0, k), dtype=np.int64)
    patterns = np.arange(1, (1 << k) - 1, dtype=np.int64)
    if unordered:
        patterns = patterns[patterns & 1 == 1]
    bits = (patterns[:, None] >> np.arange(k, dtype=np.int64)) & 1
    bits.setflags(write=False)
    return bits


def split_count(k: int, unordered: bool = False) -> int:
    """✂️ Number of proper nonempty submasks of a k-set"""
    if k < 2:
        return 0
    return (1 << (k - 1)) - 1 if unordered else (1 << k) - 2


def proper_subset_matrix(sets: np.ndarray, k: int, unordered: bool = False) -> np.ndarray:
    """🧱 Proper nonempty submasks for a batch of k-element masks.

    Row i lists the submasks of sets[i] in increasing order. With unordered,
    only submasks holding the lowest member are kept, one per partition.
    """
    sets = np.asarray(sets, dtype=np.int64)
    patterns = _submask_patterns(k, unordered)
    if len(sets) == 0 or patterns.shape[0] == 0:
        return np.zeros((len(sets), patterns.shape[0]), dtype=np.int64)

    bits = np.empty((len(sets), k), dtype=np.int64)
    rest = sets.copy()
    for j in range(k):
        low = rest & -rest
        bits[:, j] = low
        rest ^= low
    if np.any(rest):
        raise ValueError(f"sets passed to proper_subset_matrix must all have {k} members")
    return bits @ patterns.T


def batched(sets: np.ndarray, per_row: int, budget: int) -> Iterator[np.ndarray]:
    """📦 Chunk rows so that rows * per_row stays near the element budget"""
    rows = max(1, budget // max(1, per_row))
    for start in range(0, len(sets), rows):
        yield sets[start:start + rows]
