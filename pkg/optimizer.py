"""Join-order optimizers: DPsub, DPconv[max], DPconv[out] and the C_cap pipeline."""
import logging
import math
import time
from typing import Callable, Optional, Tuple

import numpy as np

from config import config
from convolution import LayeredDpState, layered_init, layered_run
from costmodel import connectivity_table, cost_max, smj_terms
from domains import INFINITY, CountingDomain, PackedPolynomialDomain, saturating_add
from errors import ConsistencyError, CorruptDpTableError, ExponentBudgetExceeded, InvalidInputError
from lattice import (batched, enumerate_proper_subsets, popcount, popcount_table, proper_subset_matrix,
                     rank_order, split_count)
from models import (MISSING, Algorithm, CostFunction, DpResult, GammaSearchState, JoinTree,
                    OptimizerStats, QueryInstance, SetFunction)

logger = logging.getLogger(__name__)

SMJ_RELATIVE_TOLERANCE = 1e-9


def _allowed_sets(q: QueryInstance) -> Optional[np.ndarray]:
    """Sets the DP may build; None when every set qualifies"""
    if q.cross_products:
        return None
    return connectivity_table(q)


def dpsub(q: QueryInstance, cost: CostFunction, cap: Optional[int] = None) -> DpResult:
    """🐢 Subset-enumeration DP, O(3^n).

    Layer by layer, every set S is split into all ordered pairs (T, S minus T)
    of non-empty parts. With a cap, sets larger than the cap become INFINITY
    and are never enumerated. With cross products disabled only connected
    sets are built.
    """
    cost = CostFunction(cost)
    n = q.n
    stats = OptimizerStats()
    cardinality = q.cardinality.values
    allowed = _allowed_sets(q)
    counts = popcount_table(n)

    smj = cost is CostFunction.SMJ
    unreachable = np.inf if smj else INFINITY
    dp = np.full(1 << n, unreachable, dtype=np.float64 if smj else np.int64)
    dp[counts == 1] = 0
    terms = smj_terms(q) if smj else None

    order, offsets = rank_order(n)
    for k in range(2, n + 1):
        sets = order[offsets[k]:offsets[k + 1]]
        if allowed is not None:
            sets = sets[allowed[sets]]
        if cap is not None:
            sets = sets[cardinality[sets] <= cap]
        for chunk in batched(sets, split_count(k), config.SPLIT_BATCH):
            if np.any(cardinality[chunk] == MISSING):
                raise ConsistencyError("DP reached a set without a cardinality")
            left = proper_subset_matrix(chunk, k)
            right = chunk[:, None] ^ left
            stats.splits += left.size
            c = cardinality[chunk]
            if cost is CostFunction.OUT:
                best = saturating_add(dp[left], dp[right]).min(axis=1)
                dp[chunk] = saturating_add(best, c)
            elif cost is CostFunction.MAX:
                best = np.maximum(dp[left], dp[right]).min(axis=1)
                dp[chunk] = np.where(best >= INFINITY, INFINITY, np.maximum(best, c))
            else:
                dp[chunk] = (dp[left] + dp[right] + terms[left] + terms[right]).min(axis=1)

    table = SetFunction(n, dp)
    result = DpResult(
        algorithm=f"dpsub-{cost.value}",
        cost=cost,
        optimal_value=float(dp[q.full]) if smj else int(dp[q.full]),
        dp_table=table,
        tree=None,
        stats=stats,
    )
    if result.feasible:
        result.tree = build_join_tree(q.full, table, q, cost)
    elif cap is None and allowed is None:
        raise ConsistencyError("unconstrained DP produced no plan")
    logger.debug(f"🐢 dpsub[{cost.value}] n={n} cap={cap}: {result.optimal_value} after {stats.splits} splits")
    return result


def _combine_matches(s: int, subsets: np.ndarray, dp: np.ndarray, q: QueryInstance,
                     cost: CostFunction, terms: Optional[np.ndarray]) -> np.ndarray:
    complements = s ^ subsets
    a, b = dp[subsets], dp[complements]
    target = dp[s]
    c = q.c(s)
    if cost is CostFunction.OUT:
        return saturating_add(saturating_add(a, b), c) == target
    if cost is CostFunction.MAX:
        return np.maximum(np.maximum(a, b), c) == target
    combined = a + b + terms[subsets] + terms[complements]
    return np.isclose(combined, target, rtol=SMJ_RELATIVE_TOLERANCE, atol=0.0)


def _extract(s: int, matches: Callable[[int, np.ndarray], np.ndarray]) -> JoinTree:
    # first qualifying split in increasing mask order, recursively
    if popcount(s) == 1:
        return JoinTree.leaf(s.bit_length() - 1)
    subsets = np.array(enumerate_proper_subsets(s), dtype=np.int64)
    hits = np.flatnonzero(matches(s, subsets))
    if len(hits) == 0:
        raise CorruptDpTableError(f"no split of set {s:b} reproduces its DP value")
    t = int(subsets[hits[0]])
    return JoinTree.join(_extract(t, matches), _extract(s ^ t, matches))


def build_join_tree(s: int, dp: SetFunction, q: QueryInstance, cost: CostFunction) -> JoinTree:
    """🌳 Recover an optimal tree for s from a finished DP table"""
    cost = CostFunction(cost)
    if s <= 0:
        raise InvalidInputError("cannot build a join tree over the empty set")
    values = dp.values
    terms = smj_terms(q) if cost is CostFunction.SMJ else None
    return _extract(s, lambda t, subsets: _combine_matches(t, subsets, values, q, cost, terms))


def build_feasible_tree(s: int, feasible: SetFunction) -> JoinTree:
    """🌳 Tree whose every intermediate set is marked feasible"""
    flags = feasible.values > 0
    if not flags[s]:
        raise CorruptDpTableError(f"set {s:b} is not feasible")
    return _extract(s, lambda t, subsets: flags[subsets] & flags[t ^ subsets])


def _feasibility_run(q: QueryInstance, gamma: int, exact: bool = False) -> LayeredDpState:
    domain = CountingDomain(exact=exact, compact=not exact)
    cardinality = q.cardinality.values
    allowed = _allowed_sets(q)

    base = np.zeros(1 << q.n, dtype=domain.dtype)
    base[popcount_table(q.n) == 1] = 1

    def post_update(sets: np.ndarray, conv: np.ndarray) -> np.ndarray:
        keep = cardinality[sets] <= gamma
        if allowed is not None:
            keep &= allowed[sets]
        if exact:
            return np.where(keep, conv, 0).astype(object)
        return ((conv > 0) & keep).astype(np.int64)

    state = layered_init(q.n, SetFunction(q.n, base), domain)
    return layered_run(state, post_update)


def feasible_under_gamma(q: QueryInstance, gamma: int, exact: bool = False) -> bool:
    """🎯 Is there a plan whose every intermediate result is at most gamma?

    Counts plans layer by layer, clamping each count to {0, 1}; exact keeps
    the full counts in Python integers instead.
    """
    if gamma < 0:
        raise InvalidInputError("gamma must be non-negative")
    state = _feasibility_run(q, gamma, exact)
    return bool(state.dp.values[q.full] > 0)


def gamma_candidates(q: QueryInstance) -> list:
    """Distinct cardinalities of sets with at least two relations, decreasing"""
    values = q.cardinality.values
    mask = (popcount_table(q.n) >= 2) & (values != MISSING)
    allowed = _allowed_sets(q)
    if allowed is not None:
        mask &= allowed
    return [int(v) for v in np.unique(values[mask])[::-1]]


def dpconv_max(q: QueryInstance) -> DpResult:
    """⚡ Optimal C_max by binary search over feasibility thresholds"""
    stats = OptimizerStats()
    if q.n == 1:
        return DpResult('dpconv-max', CostFunction.MAX, 0, SetFunction.full(1, 1), JoinTree.leaf(0), stats, gamma=0)

    candidates = gamma_candidates(q)
    if not candidates:
        return DpResult('dpconv-max', CostFunction.MAX, INFINITY, SetFunction.zeros(q.n), None, stats)

    search = GammaSearchState(candidates)
    witness: Optional[np.ndarray] = None
    if not q.cross_products:
        # a disconnected query graph has no plan at all
        state = _feasibility_run(q, candidates[0])
        stats.probes += 1
        stats.mults += state.mults
        stats.layer_ns.extend(state.layer_ns)
        if not state.dp.values[q.full]:
            return DpResult('dpconv-max', CostFunction.MAX, INFINITY, state.dp, None, stats)
        witness = state.dp.values.copy()

    while not search.done:
        index = search.probe()
        feasible = False
        if index is not None:
            state = _feasibility_run(q, candidates[index])
            stats.probes += 1
            stats.mults += state.mults
            stats.layer_ns.extend(state.layer_ns)
            feasible = bool(state.dp.values[q.full])
            if feasible:
                witness = state.dp.values.copy()
            logger.debug(f"🔎 gamma={candidates[index]}: {'feasible' if feasible else 'infeasible'}")
        search.record(feasible)

    gamma = search.gamma
    if witness is None:
        # only the top candidate was ever feasible and it was never probed
        state = _feasibility_run(q, gamma)
        stats.probes += 1
        stats.mults += state.mults
        stats.layer_ns.extend(state.layer_ns)
        witness = state.dp.values.copy()

    table = SetFunction(q.n, witness)
    tree = build_feasible_tree(q.full, table)
    if cost_max(tree, q) != gamma:
        raise ConsistencyError(f"tree recovered at gamma={gamma} has C_max {cost_max(tree, q)}")
    logger.debug(f"⚡ dpconv-max n={q.n}: gamma={gamma} after {stats.probes} probes, {stats.mults} mults")
    return DpResult('dpconv-max', CostFunction.MAX, gamma, table, tree, stats, gamma=gamma)


def embedding_budget(q: QueryInstance) -> int:
    """Largest exponent a (min,+) value of the instance can reach"""
    return max(0, q.n - 1) * q.max_cardinality


def dpconv_out_embedding(q: QueryInstance) -> DpResult:
    """🧵 Optimal C_out through the monomial embedding.

    Values become monomials x^v (INFINITY the zero polynomial), the layered
    engine convolves in the polynomial ring, and each new entry keeps only
    the lowest surviving exponent, shifted by c(S).
    """
    stats = OptimizerStats()
    budget = embedding_budget(q)
    if budget > config.EXPONENT_BUDGET:
        logger.warning(f"📏 dpconv-out refused: needs exponent {budget}, budget {config.EXPONENT_BUDGET}")
        raise ExponentBudgetExceeded(budget, config.EXPONENT_BUDGET)

    n = q.n
    domain = PackedPolynomialDomain(budget, limb_bits=2 * n + 2)
    cardinality = q.cardinality.values
    allowed = _allowed_sets(q)
    counts = popcount_table(n)

    values = np.full(1 << n, INFINITY, dtype=np.int64)
    values[counts == 1] = 0
    base = np.array([domain.embed(v) for v in values.tolist()], dtype=object)

    def post_update(sets: np.ndarray, conv: np.ndarray) -> np.ndarray:
        out = np.zeros(len(sets), dtype=object)
        for i, (s, packed) in enumerate(zip(sets.tolist(), conv.tolist())):
            lowest = domain.min_exponent(packed)
            if lowest is None or (allowed is not None and not allowed[s]):
                continue
            value = lowest + int(cardinality[s])
            values[s] = value
            out[i] = domain.monomial(value)
        return out

    state = layered_init(n, SetFunction(n, base), domain)
    layered_run(state, post_update)
    stats.mults = state.mults
    stats.layer_ns = list(state.layer_ns)

    table = SetFunction(n, values)
    optimal = int(values[q.full])
    result = DpResult('dpconv-out', CostFunction.OUT, optimal, table, None, stats)
    if result.feasible:
        result.tree = build_join_tree(q.full, table, q, CostFunction.OUT)
    logger.debug(f"🧵 dpconv-out n={n}: {optimal} with exponent budget {budget}, {stats.mults} mults")
    return result


def optimize_ccap(q: QueryInstance, first_pass: str = 'dpconv') -> Tuple[Optional[int], DpResult]:
    """🧢 Minimal C_out among plans whose largest intermediate is the optimal C_max

    gamma is None when the query has no plan at all.
    """
    if first_pass == 'dpconv':
        first = dpconv_max(q)
    elif first_pass == 'dpsub':
        first = dpsub(q, CostFunction.MAX)
    else:
        raise InvalidInputError(f"unknown first pass '{first_pass}'")
    gamma = int(first.optimal_value) if first.feasible else None

    capped = dpsub(q, CostFunction.OUT, cap=gamma)
    capped.algorithm = 'ccap-fast' if first_pass == 'dpconv' else 'ccap-naive'
    capped.gamma = gamma
    capped.stats.merge(first.stats)
    if capped.feasible and cost_max(capped.tree, q) != gamma:
        raise ConsistencyError(f"capped plan exceeds gamma={gamma}")
    return gamma, capped


def run_algorithm(algorithm, q: QueryInstance, cap: Optional[int] = None) -> DpResult:
    """⏱️ Run one named optimizer, timing it including tree extraction"""
    algorithm = Algorithm.parse(algorithm) if isinstance(algorithm, str) else algorithm
    if cap is not None and not algorithm.value.startswith('dpsub'):
        raise InvalidInputError(f"--cap is only supported by the dpsub variants, not {algorithm.value}")

    started = time.perf_counter_ns()
    if algorithm in (Algorithm.DPSUB_OUT, Algorithm.DPSUB_MAX, Algorithm.DPSUB_SMJ):
        result = dpsub(q, algorithm.cost, cap=cap)
    elif algorithm is Algorithm.DPCONV_MAX:
        result = dpconv_max(q)
    elif algorithm is Algorithm.DPCONV_OUT:
        result = dpconv_out_embedding(q)
    else:
        _, result = optimize_ccap(q, 'dpconv' if algorithm is Algorithm.CCAP_FAST else 'dpsub')
    result.stats.elapsed_ns = time.perf_counter_ns() - started
    result.algorithm = algorithm.value

    logger.info(f"✅ {algorithm.value}: cost={result.optimal_value} in {result.stats.elapsed_ns / 1e6:.1f} ms")
    return result


def values_agree(a: float, b: float, cost: CostFunction) -> bool:
    if CostFunction(cost) is CostFunction.SMJ:
        return math.isclose(a, b, rel_tol=SMJ_RELATIVE_TOLERANCE)
    return int(a) == int(b)
