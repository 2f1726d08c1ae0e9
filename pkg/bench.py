"""Clique instance generator, benchmark sweeps and the theoretical operation counts."""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd

from config import config
from errors import InvalidInputError, OracleDisagreementError
from lattice import batched, proper_subset_matrix, rank_order, split_count
from models import Algorithm, BenchConfig, DpResult, QueryInstance, SetFunction
from optimizer import run_algorithm, values_agree
from storage import REPORT_COLUMNS, empty_report
from utils import progress_tracker

logger = logging.getLogger(__name__)

# products of two sampled cardinalities must stay inside int64
LARGEST_SAFE_CARDINALITY = math.isqrt(int(np.iinfo(np.int64).max))


def make_rng(seed: int) -> np.random.Generator:
    """🎲 The project's named generator: PCG64"""
    return np.random.Generator(np.random.PCG64(seed))


def instance_seed(seed: int, n: int, rep: int) -> int:
    """Independent per-(n, rep) seed derived from the sweep seed"""
    return int(np.random.SeedSequence([seed, n, rep]).generate_state(1, dtype=np.uint64)[0])


def generate_clique(n: int, seed: int, max_card: int = None) -> QueryInstance:
    """🎰 Random clique query whose cardinalities never exceed a cross product.

    Base sizes are uniform in [1, max_card]. Larger sets are filled by size;
    c(S) is uniform in [1, min(max_card, min over partitions of c(S1) c(S2))].
    """
    max_card = config.MAX_CARDINALITY if max_card is None else max_card
    if not 2 <= n <= config.MAX_RELATIONS:
        raise InvalidInputError(f"n={n} outside [2, {config.MAX_RELATIONS}]")
    if not 1 <= max_card <= LARGEST_SAFE_CARDINALITY:
        raise InvalidInputError(f"max_card={max_card} outside [1, {LARGEST_SAFE_CARDINALITY}]")

    rng = make_rng(seed)
    values = np.zeros(1 << n, dtype=np.int64)
    values[1 << np.arange(n, dtype=np.int64)] = rng.integers(1, max_card + 1, size=n)

    order, offsets = rank_order(n)
    for k in range(2, n + 1):
        sets = order[offsets[k]:offsets[k + 1]]
        for chunk in batched(sets, split_count(k, unordered=True), config.SPLIT_BATCH):
            left = proper_subset_matrix(chunk, k, unordered=True)
            bound = (values[left] * values[chunk[:, None] ^ left]).min(axis=1)
            values[chunk] = rng.integers(1, np.minimum(bound, max_card) + 1)

    names = [f"R{i}" for i in range(n)]
    edges = [(a, b) for a in range(n) for b in range(a + 1, n)]
    return QueryInstance(n, names, edges, SetFunction(n, values), cross_products=True)


def _row(n: int, rep: int, result: DpResult, timing: bool) -> Dict:
    value = result.optimal_value if result.feasible else None
    return {
        'n': n,
        'rep': rep,
        'algorithm': result.algorithm,
        'cost_value': value,
        'elapsed_ns': int(result.stats.elapsed_ns) if timing else 0,
        'splits_enumerated': int(result.stats.splits),
        'ring_multiplications': int(result.stats.mults),
    }


def _cross_check(results: Dict[Algorithm, DpResult], cfg: BenchConfig, n: int, rep: int):
    for algorithm, result in results.items():
        oracle = algorithm.oracle
        if oracle is None or oracle not in results:
            continue
        expected = results[oracle]
        if not values_agree(result.optimal_value, expected.optimal_value, algorithm.cost):
            logger.error(f"❌ {algorithm.value}={result.optimal_value} but {oracle.value}={expected.optimal_value}")
            raise OracleDisagreementError(
                f"{algorithm.value} returned {result.optimal_value}, {oracle.value} returned {expected.optimal_value}",
                seed=cfg.seed, n=n, rep=rep)


def _run_cell(cfg: BenchConfig, n: int, rep: int) -> List[Dict]:
    q = generate_clique(n, instance_seed(cfg.seed, n, rep), cfg.max_cardinality)
    results: Dict[Algorithm, DpResult] = {}
    for algorithm in cfg.algorithms:
        results[algorithm] = run_algorithm(algorithm, q)
    _cross_check(results, cfg, n, rep)
    return [_row(n, rep, results[a], cfg.timing) for a in cfg.algorithms]


def run_benchmark(cfg: BenchConfig) -> pd.DataFrame:
    """🏋️ One row per (n, rep, algorithm); aborts on any oracle disagreement"""
    cfg.validate()
    if not cfg.algorithms:
        return empty_report()

    cells: List[Tuple[int, int]] = [(n, rep) for n in cfg.size_range for rep in range(cfg.repetitions)]
    task_id = f"bench-{cfg.seed}"
    progress_tracker.start(task_id, f"benchmark sweep seed={cfg.seed}", total=len(cells))

    rows: List[Dict] = []
    workers = cfg.workers
    if workers > 1 and cfg.timing:
        logger.warning("⚠️ Timed sweeps run serially; ignoring workers")
        workers = 1

    try:
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                for (n, rep), cell_rows in zip(cells, pool.map(lambda cell: _run_cell(cfg, *cell), cells)):
                    rows.extend(cell_rows)
                    progress_tracker.advance(task_id, f"n={n} rep={rep}")
        else:
            for done, (n, rep) in enumerate(cells, 1):
                rows.extend(_run_cell(cfg, n, rep))
                progress_tracker.advance(task_id, f"n={n} rep={rep}")
                logger.info(f"🏋️ n={n} rep={rep} done ({done}/{len(cells)})")
    except Exception:
        progress_tracker.finish(task_id, status="failed")
        raise

    progress_tracker.finish(task_id)
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)


def summarize(report: pd.DataFrame) -> pd.DataFrame:
    """📊 Mean and median elapsed time per (algorithm, n)"""
    summary = (report.groupby(['algorithm', 'n'])['elapsed_ns']
               .agg(['mean', 'median'])
               .reset_index())
    return summary.rename(columns={'mean': 'mean_ns', 'median': 'median_ns'})


def speedup_table(summary: pd.DataFrame, baseline: str, contender: str) -> pd.DataFrame:
    """⚖️ baseline mean / contender mean for every n both were run at"""
    means = summary.pivot(index='n', columns='algorithm', values='mean_ns')
    missing = {baseline, contender} - set(means.columns)
    if missing:
        raise InvalidInputError(f"summary has no rows for {', '.join(sorted(missing))}")
    table = means[[baseline, contender]].dropna().rename(columns={baseline: 'baseline_ns', contender: 'contender_ns'})
    table['speedup'] = table['baseline_ns'] / table['contender_ns']
    return table.reset_index()


def is_monotone_non_decreasing(values: Sequence[float]) -> bool:
    return all(a <= b for a, b in zip(values, values[1:]))


def theoretical_ops_table(n: int, epsilons: Sequence[float]) -> pd.DataFrame:
    """🧮 3^n against 2^(3n/2)/sqrt(eps), one row per eps.

    approx_below_exact compares 2^(3n) < 9^n eps over exact rationals.
    """
    if n < 1:
        raise InvalidInputError("n must be at least 1")
    rows = []
    for eps in epsilons:
        if not eps > 0:
            raise InvalidInputError(f"epsilon must be positive, got {eps}")
        exact_eps = Fraction(str(eps))
        rows.append({
            'n': n,
            'epsilon': float(eps),
            'exact_ops': float(3 ** n),
            'approx_ops': 2.0 ** (1.5 * n) / math.sqrt(eps),
            'approx_below_exact': Fraction(2 ** (3 * n)) < 9 ** n * exact_eps,
        })
    return pd.DataFrame(rows, columns=['n', 'epsilon', 'exact_ops', 'approx_ops', 'approx_below_exact'])
