"""Zeta/Moebius transforms, subset convolutions and the layered DP engine."""
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from config import config
from domains import (CountingDomain, INFINITY, ValueDomain, check_int64_bound,
                     max_magnitude, saturating_add)
from errors import ConsistencyError, InvalidInputError
from lattice import popcount_table, proper_subset_matrix, rank_order, batched, split_count
from models import SetFunction

logger = logging.getLogger(__name__)

# (sets, convolution values at those sets) -> new DP values for those sets
PostUpdate = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _zeta_inplace(values: np.ndarray, n: int):
    # Yates: fold bit b of every mask into its superset
    for b in range(n):
        view = values.reshape(-1, 2, 1 << b)
        view[:, 1, :] += view[:, 0, :]


def _mobius_inplace(values: np.ndarray, n: int, max_rank: Optional[int] = None):
    # with max_rank, sets above it keep their input values; lower ranks only read subsets
    if max_rank is None or max_rank >= n:
        for b in range(n):
            view = values.reshape(-1, 2, 1 << b)
            view[:, 1, :] -= view[:, 0, :]
        return
    low = popcount_table(n) <= max_rank
    for b in range(n):
        view = values.reshape(-1, 2, 1 << b)
        target = view[:, 1, :]
        np.subtract(target, view[:, 0, :], out=target, where=low.reshape(-1, 2, 1 << b)[:, 1, :])


def _same_n(f: SetFunction, g: SetFunction):
    if f.n != g.n:
        raise InvalidInputError(f"set functions over different n ({f.n} vs {g.n})")


def zeta_transform(f: SetFunction) -> SetFunction:
    """➕ (zf)(S) = sum of f over all subsets of S, O(2^n n) additions"""
    values = f.values.copy()
    if values.dtype != object:
        check_int64_bound(max_magnitude(values) << f.n, 'zeta transform')
    _zeta_inplace(values, f.n)
    return SetFunction(f.n, values)


def mobius_transform(f: SetFunction) -> SetFunction:
    """➖ Inverse of the zeta transform"""
    values = f.values.copy()
    if values.dtype != object:
        check_int64_bound(max_magnitude(values) << f.n, 'Moebius transform')
    _mobius_inplace(values, f.n)
    return SetFunction(f.n, values)


def _subset_pairs(n: int):
    """Yield (k, sets of rank k, their proper submasks) batch by batch"""
    order, offsets = rank_order(n)
    for k in range(2, n + 1):
        sets = order[offsets[k]:offsets[k + 1]]
        for chunk in batched(sets, split_count(k), config.SPLIT_BATCH):
            yield k, chunk, proper_subset_matrix(chunk, k)


def naive_ring_convolution(f: SetFunction, g: SetFunction) -> SetFunction:
    """🐢 h(S) = sum over T in S of f(T) g(S minus T), by enumeration (O(3^n))"""
    _same_n(f, g)
    n = f.n
    exact = f.values.dtype == object or g.values.dtype == object
    a = f.values.astype(object) if exact else f.values.astype(np.int64)
    b = g.values.astype(object) if exact else g.values.astype(np.int64)
    if not exact:
        check_int64_bound(max_magnitude(a) * max_magnitude(b) << n, 'naive ring convolution')

    h = a[0] * b + a * b[0]
    h[0] = a[0] * b[0]
    for _, sets, subsets in _subset_pairs(n):
        products = a[subsets] * b[sets[:, None] ^ subsets]
        h[sets] += products.sum(axis=1)
    return SetFunction(n, h)


def naive_min_plus_convolution(f: SetFunction, g: SetFunction) -> SetFunction:
    """🐢 h(S) = min over T in S of f(T) + g(S minus T); INFINITY absorbs"""
    _same_n(f, g)
    n = f.n
    a = np.minimum(f.values.astype(np.int64), INFINITY)
    b = np.minimum(g.values.astype(np.int64), INFINITY)
    if np.any(a < 0) or np.any(b < 0):
        raise InvalidInputError("(min,+) convolution expects non-negative extended integers")

    h = np.minimum(saturating_add(a[0], b), saturating_add(a, b[0]))
    for _, sets, subsets in _subset_pairs(n):
        candidates = saturating_add(a[subsets], b[sets[:, None] ^ subsets])
        h[sets] = np.minimum(h[sets], candidates.min(axis=1))
    return SetFunction(n, h)


@dataclass(eq=False)
class RankedTable:
    """🗃️ Rank-major zeta slices: slices[r][S] = (zf)(S, r)"""
    n: int
    slices: np.ndarray

    def __post_init__(self):
        expected = (self.n + 1, 1 << self.n)
        if self.slices.shape != expected:
            raise InvalidInputError(f"ranked table needs shape {expected}, got {self.slices.shape}")

    @classmethod
    def empty(cls, n: int, dtype=np.int64) -> 'RankedTable':
        return cls(n, np.zeros((n + 1, 1 << n), dtype=dtype))

    @classmethod
    def from_set_function(cls, f: SetFunction) -> 'RankedTable':
        """Rank f by cardinality, then zeta every slice"""
        counts = popcount_table(f.n)
        table = cls.empty(f.n, dtype=f.values.dtype)
        for r in range(f.n + 1):
            at_rank = counts == r
            table.slices[r][at_rank] = f.values[at_rank]
            _zeta_inplace(table.slices[r], f.n)
        return table

    def assert_rank_support(self):
        """🛡️ Slice r must vanish on every set smaller than r"""
        counts = popcount_table(self.n)
        for r in range(self.n + 1):
            below = self.slices[r][counts < r]
            if any(v != 0 for v in below.tolist()):
                raise ConsistencyError(f"ranked slice {r} is non-zero below rank {r}")


def ranked_convolution(zf: RankedTable, zg: RankedTable, r: int, symmetric: bool = False) -> np.ndarray:
    """🔗 (zh)(:, r) = sum over d of (zf)(:, d) (zg)(:, r - d).

    symmetric assumes zf is zg and walks d up to r // 2, doubling off-diagonal
    pairs.
    """
    if symmetric:
        total = np.zeros_like(zf.slices[0])
        for d in range(r // 2 + 1):
            product = zf.slices[d] * zf.slices[r - d]
            total += product if 2 * d == r else 2 * product
        return total
    total = np.zeros_like(zf.slices[0])
    for d in range(r + 1):
        total += zf.slices[d] * zg.slices[r - d]
    return total


def fsc_ring(f: SetFunction, g: SetFunction) -> SetFunction:
    """⚡ Fast subset convolution in the (+, *) ring, O(2^n n^2).

    Rank, zeta each slice, ranked convolution, Moebius per rank, gather.
    Works for int64 (bound-checked) and for object arrays of exact ring
    elements (Python ints, CoefficientPolynomial).
    """
    _same_n(f, g)
    n = f.n
    exact = f.values.dtype == object or g.values.dtype == object
    if exact:
        f = SetFunction(n, f.values.astype(object))
        g = SetFunction(n, g.values.astype(object))
    else:
        f = SetFunction(n, f.values.astype(np.int64))
        g = SetFunction(n, g.values.astype(np.int64))
        zeta_bound = (max_magnitude(f.values) << n) * (max_magnitude(g.values) << n)
        check_int64_bound((zeta_bound * (n + 1)) << n, 'fast subset convolution')

    zf = RankedTable.from_set_function(f)
    zg = RankedTable.from_set_function(g)
    counts = popcount_table(n)
    h = np.zeros(1 << n, dtype=f.values.dtype)
    for r in range(n + 1):
        layer = ranked_convolution(zf, zg, r)
        _mobius_inplace(layer, n)
        at_rank = counts == r
        h[at_rank] = layer[at_rank]
    return SetFunction(n, h)


@dataclass(eq=False)
class LayeredDpState:
    """🏗️ Layer-by-layer DP with cached zeta slices.

    dp entries below current_layer are final; zeta_cache.slices[r] is written
    once, right after layer r is finalized.
    """
    n: int
    domain: ValueDomain
    dp: SetFunction
    zeta_cache: RankedTable
    current_layer: int = 1
    direct_small_layers: bool = False
    small_layer_limit: int = 6
    mults: int = 0
    layer_ns: List[int] = field(default_factory=list)
    _slice_bounds: List[int] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return self.current_layer >= self.n

    def _cache_slice(self, r: int, values: np.ndarray):
        self.zeta_cache.slices[r] = self.domain.to_storage(values, f"zeta slice {r}")
        self._slice_bounds[r] = self.domain.slice_bound(self.zeta_cache.slices[r])


def layered_init(n: int, base: SetFunction, domain: Optional[ValueDomain] = None,
                 direct_small_layers: Optional[bool] = None) -> LayeredDpState:
    """🚀 Seed the DP with the empty set and singletons; cache zeta slices 0 and 1"""
    if base.n != n:
        raise InvalidInputError(f"base covers n={base.n}, expected {n}")
    if n < 1:
        raise InvalidInputError("layered DP needs at least one relation")
    domain = domain or CountingDomain()

    counts = popcount_table(n)
    dp_values = np.zeros(1 << n, dtype=domain.dtype)
    keep = counts <= 1
    dp_values[keep] = base.values[keep]
    state = LayeredDpState(
        n=n,
        domain=domain,
        dp=SetFunction(n, dp_values),
        zeta_cache=RankedTable.empty(n, dtype=domain.storage_dtype),
        direct_small_layers=config.SMALL_LAYER_FAST_PATH if direct_small_layers is None else direct_small_layers,
        small_layer_limit=config.SMALL_LAYER_LIMIT,
        _slice_bounds=[0] * (n + 1),
    )
    for r in (0, 1):
        slice_values = np.zeros(1 << n, dtype=domain.dtype)
        at_rank = counts == r
        slice_values[at_rank] = dp_values[at_rank]
        _zeta_inplace(slice_values, n)
        state._cache_slice(r, slice_values)
    logger.debug(f"🚀 Layered DP ready: n={n}, domain={domain.name}")
    return state


def _direct_layer(state: LayeredDpState, k: int, sets: np.ndarray) -> np.ndarray:
    # rank-k convolution values by split enumeration; equals the FSC result
    dp = state.dp.values
    out = np.zeros(len(sets), dtype=state.domain.dtype)
    if state.domain.dtype != object:
        bound = max_magnitude(dp)
        state.domain.check_products(bound, bound, split_count(k), f"direct layer {k}")
    position = 0
    for chunk in batched(sets, split_count(k), config.SPLIT_BATCH):
        subsets = proper_subset_matrix(chunk, k)
        products = state.domain.multiply(dp[subsets], dp[chunk[:, None] ^ subsets])
        out[position:position + len(chunk)] = products.sum(axis=1)
        position += len(chunk)
    return out


def _convolve_layer(state: LayeredDpState, k: int) -> np.ndarray:
    n = state.n
    order, offsets = rank_order(n)
    domain = state.domain
    slices = state.zeta_cache.slices

    pairs = [(d, k - d) for d in range(1, k // 2 + 1)]
    bound = sum((1 if d == e else 2) * state._slice_bounds[d] * state._slice_bounds[e] for d, e in pairs)
    domain.check_products(bound, 1, 1, f"ranked convolution of layer {k}")

    conv = np.zeros(1 << n, dtype=domain.dtype)
    top = min(k, n)
    for d, e in pairs:
        # slices d and e vanish below rank e; only ranks up to k feed layer k
        idx = order[offsets[e]:offsets[top + 1]]
        product = domain.multiply(slices[d][idx], slices[e][idx])
        conv[idx] += product if d == e else product * 2
        state.mults += len(idx)

    _mobius_inplace(conv, n, max_rank=k)
    return conv


def layered_advance(state: LayeredDpState, post_update: PostUpdate) -> LayeredDpState:
    """⏭️ Finalize layer current_layer + 1 and cache its zeta slice"""
    if state.complete:
        raise InvalidInputError(f"layered DP already complete at layer {state.current_layer}")
    started = time.perf_counter_ns()
    n = state.n
    k = state.current_layer + 1
    order, offsets = rank_order(n)
    sets = order[offsets[k]:offsets[k + 1]]

    if state.direct_small_layers and k <= state.small_layer_limit:
        values = _direct_layer(state, k, sets)
    else:
        values = _convolve_layer(state, k)[sets]

    updated = np.asarray(post_update(sets, values))
    if updated.shape != sets.shape:
        raise ConsistencyError(f"post_update returned {updated.shape} values for {sets.shape} sets")
    state.dp.values[sets] = updated

    if k < n:
        slice_values = np.zeros(1 << n, dtype=state.domain.dtype)
        slice_values[sets] = updated
        _zeta_inplace(slice_values, n)
        state._cache_slice(k, slice_values)

    state.current_layer = k
    state.layer_ns.append(time.perf_counter_ns() - started)
    logger.debug(f"🧱 Layer {k}/{n} done: {len(sets)} sets, mults so far {state.mults}")
    return state


def layered_run(state: LayeredDpState, post_update: PostUpdate) -> LayeredDpState:
    """🏁 Advance until the full set is finalized"""
    while not state.complete:
        layered_advance(state, post_update)
    return state
