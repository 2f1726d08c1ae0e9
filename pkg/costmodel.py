"""Cost functions over join trees, connectivity and cardinality diagnostics."""
import logging
import math
from typing import List, Tuple

import networkx as nx
import numpy as np

from config import config
from errors import InvalidInputError
from lattice import batched, members, proper_subset_matrix, rank_order, split_count
from models import MISSING, JoinTree, QueryInstance

logger = logging.getLogger(__name__)


def _check_spans(tree: JoinTree, q: QueryInstance):
    if tree.relations & ~q.full:
        raise InvalidInputError(f"tree spans relations outside the {q.n}-relation instance")


def _join_cardinality(s: int, q: QueryInstance) -> int:
    if not q.cross_products and not is_connected(s, q):
        raise InvalidInputError(f"join over {members(s)} is a cross product, disabled for this instance")
    return q.c(s)


def cost_out(tree: JoinTree, q: QueryInstance) -> int:
    """📦 Sum of the cardinalities of every intermediate result"""
    _check_spans(tree, q)
    return sum(_join_cardinality(node.relations, q) for node in tree.inner_nodes())


def cost_max(tree: JoinTree, q: QueryInstance) -> int:
    """📈 Largest intermediate result"""
    _check_spans(tree, q)
    return max((_join_cardinality(node.relations, q) for node in tree.inner_nodes()), default=0)


def x_log_x(x: float) -> float:
    """x log2 x with 0 log 0 = 0"""
    return x * math.log2(x) if x > 0 else 0.0


def cost_smj(tree: JoinTree, q: QueryInstance) -> float:
    """🔀 Sort-merge join cost: each join pays c log c for both of its inputs"""
    _check_spans(tree, q)
    total = 0.0
    for node in tree.inner_nodes():
        _join_cardinality(node.relations, q)
        total += x_log_x(q.c(node.left.relations)) + x_log_x(q.c(node.right.relations))
    return total


def is_connected(s: int, q: QueryInstance) -> bool:
    """🕸️ Does s induce a connected subgraph of the query graph"""
    if s <= 0:
        raise InvalidInputError("connectivity is only defined for non-empty sets")
    return nx.is_connected(q.graph.subgraph(members(s)))


def connectivity_table(q: QueryInstance) -> np.ndarray:
    """🗺️ Connectivity flag for every mask; entry 0 is False.

    Grows the reachable part of each mask from its lowest member one
    neighbourhood at a time, all masks at once.
    """
    n = q.n
    adjacency = np.zeros(n, dtype=np.int64)
    for a, b in q.edges:
        adjacency[a] |= 1 << b
        adjacency[b] |= 1 << a

    # neighbours[S]: union of the neighbourhoods of the members of S
    neighbours = np.zeros(1 << n, dtype=np.int64)
    for b in range(n):
        neighbours[1 << b:2 << b] = neighbours[:1 << b] | adjacency[b]

    masks = np.arange(1 << n, dtype=np.int64)
    reach = masks & -masks
    for _ in range(max(0, n - 1)):
        grown = (reach | neighbours[reach]) & masks
        if np.array_equal(grown, reach):
            break
        reach = grown
    connected = reach == masks
    connected[0] = False
    return connected


def validate_cardinalities(q: QueryInstance) -> List[Tuple[int, int, int]]:
    """🔍 Every (S, S1, S2) with c(S) > c(S1) c(S2), one entry per unordered partition"""
    values = q.cardinality.values
    order, offsets = rank_order(q.n)
    violations: List[Tuple[int, int, int]] = []
    for k in range(2, q.n + 1):
        sets = order[offsets[k]:offsets[k + 1]]
        sets = sets[values[sets] != MISSING]
        for chunk in batched(sets, split_count(k, unordered=True), config.SPLIT_BATCH):
            left = proper_subset_matrix(chunk, k, unordered=True)
            right = chunk[:, None] ^ left
            a, b = values[left], values[right]
            defined = (a != MISSING) & (b != MISSING)
            # compare in float first, then confirm exactly to stay clear of int64 wraparound
            suspicious = defined & (values[chunk][:, None] > a.astype(float) * b.astype(float) * (1 - 1e-12))
            for row, col in zip(*np.nonzero(suspicious)):
                s, s1, s2 = int(chunk[row]), int(left[row, col]), int(right[row, col])
                if int(values[s]) > int(values[s1]) * int(values[s2]):
                    violations.append((s, s1, s2))
    if violations:
        logger.warning(f"⚠️ {len(violations)} cardinalities exceed their cross-product bound")
    return violations


def describe_violation(violation: Tuple[int, int, int], q: QueryInstance) -> str:
    s, s1, s2 = violation
    return (f"c({members(s)})={q.c(s)} > c({members(s1)})·c({members(s2)})"
            f" = {q.c(s1) * q.c(s2)}")


def smj_terms(q: QueryInstance) -> np.ndarray:
    """🧾 c(X) log2 c(X) for every mask, as float64"""
    values = q.cardinality.values.astype(np.float64)
    terms = np.zeros_like(values)
    positive = values > 0
    terms[positive] = values[positive] * np.log2(values[positive])
    return terms

