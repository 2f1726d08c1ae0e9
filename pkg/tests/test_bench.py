import logging
import math

import numpy as np
import pandas as pd
import pytest

import bench
from bench import (generate_clique, is_monotone_non_decreasing, run_benchmark, speedup_table, summarize,
                   theoretical_ops_table)
from costmodel import validate_cardinalities
from errors import InvalidInputError, OracleDisagreementError
from models import Algorithm, BenchConfig
from storage import REPORT_COLUMNS, instance_to_dict

logger = logging.getLogger(__name__)


def sweep(*names, sizes=(3, 6), reps=2, **kwargs):
    return BenchConfig(algorithms=[Algorithm(name) for name in names], sizes=sizes, repetitions=reps, **kwargs)


class TestGenerator:
    def test_deterministic(self):
        a = generate_clique(8, seed=42, max_card=1000)
        b = generate_clique(8, seed=42, max_card=1000)
        assert instance_to_dict(a) == instance_to_dict(b)
        assert instance_to_dict(generate_clique(8, seed=43, max_card=1000)) != instance_to_dict(a)

    def test_constraints(self):
        for n in (2, 3, 5, 9):
            q = generate_clique(n, seed=n, max_card=100_000_000)
            values = q.cardinality.values[1:]
            assert values.min() >= 1
            assert values.max() <= 100_000_000
            assert validate_cardinalities(q) == []
            assert len(q.edges) == n * (n - 1) // 2

    def test_small_max_card(self):
        q = generate_clique(6, seed=1, max_card=1)
        assert set(q.cardinality.values[1:].tolist()) == {1}

    @pytest.mark.parametrize('n, max_card', [(1, 10), (31, 10), (4, 0), (4, 2 ** 40)])
    def test_invalid_arguments(self, n, max_card):
        with pytest.raises(InvalidInputError):
            generate_clique(n, seed=0, max_card=max_card)


class TestRunBenchmark:
    def test_paired_rows_agree(self):
        report = run_benchmark(sweep('dpsub-max', 'dpconv-max'))
        assert list(report.columns) == REPORT_COLUMNS
        assert len(report) == 4 * 2 * 2
        paired = report.pivot_table(index=['n', 'rep'], columns='algorithm', values='cost_value', aggfunc='first')
        assert (paired['dpsub-max'] == paired['dpconv-max']).all()

    def test_embedding_against_oracle(self):
        report = run_benchmark(sweep('dpsub-out', 'dpconv-out', max_cardinality=64))
        paired = report.pivot_table(index=['n', 'rep'], columns='algorithm', values='cost_value', aggfunc='first')
        assert (paired['dpsub-out'] == paired['dpconv-out']).all()

    def test_split_counter_column(self):
        report = run_benchmark(sweep('dpsub-max', sizes=(3, 8), reps=1))
        for row in report.itertuples():
            assert row.splits_enumerated == 3 ** row.n - 2 * 2 ** row.n + 1

    def test_empty_algorithm_list(self):
        report = run_benchmark(sweep())
        assert report.empty
        assert list(report.columns) == REPORT_COLUMNS

    def test_counters_reproducible(self):
        cfg = sweep('dpsub-out', 'dpconv-max', 'ccap-fast', timing=False)
        first, second = run_benchmark(cfg), run_benchmark(cfg)
        pd.testing.assert_frame_equal(first, second)
        assert (first['elapsed_ns'] == 0).all()

    def test_thread_pool_matches_serial(self):
        serial = run_benchmark(sweep('dpsub-max', 'dpconv-max', timing=False))
        pooled = run_benchmark(sweep('dpsub-max', 'dpconv-max', timing=False, workers=3))
        pd.testing.assert_frame_equal(serial, pooled)

    def test_disagreement_aborts_with_reproducer(self, monkeypatch):
        real = bench.run_algorithm

        def skewed(algorithm, q, cap=None):
            result = real(algorithm, q, cap)
            if algorithm is Algorithm.DPCONV_MAX:
                result.optimal_value += 1
            return result

        monkeypatch.setattr(bench, 'run_algorithm', skewed)
        with pytest.raises(OracleDisagreementError, match='seed=7'):
            run_benchmark(sweep('dpsub-max', 'dpconv-max', seed=7))


class TestSummaries:
    def report(self):
        rows = []
        for n, times in ((18, (100, 50)), (20, (400, 100)), (22, (1600, 200))):
            for rep in range(2):
                rows.append({'n': n, 'rep': rep, 'algorithm': 'dpsub-max', 'elapsed_ns': times[0] + rep})
                rows.append({'n': n, 'rep': rep, 'algorithm': 'dpconv-max', 'elapsed_ns': times[1] + rep})
        return pd.DataFrame(rows)

    def test_summarize(self):
        summary = summarize(self.report())
        row = summary[(summary.algorithm == 'dpsub-max') & (summary.n == 20)].iloc[0]
        assert row.mean_ns == pytest.approx(400.5)
        assert row.median_ns == pytest.approx(400.5)

    def test_speedup_trend(self):
        table = speedup_table(summarize(self.report()), 'dpsub-max', 'dpconv-max')
        assert table['n'].tolist() == [18, 20, 22]
        assert is_monotone_non_decreasing(table['speedup'].tolist())
        assert table['speedup'].iloc[-1] > 1

    def test_unknown_algorithm(self):
        with pytest.raises(InvalidInputError):
            speedup_table(summarize(self.report()), 'dpsub-max', 'ccap-fast')

    def test_monotone(self):
        assert is_monotone_non_decreasing([1, 1, 2])
        assert not is_monotone_non_decreasing([1, 3, 2])
        assert is_monotone_non_decreasing([])


class TestOpsTable:
    def test_forty_relations(self):
        table = theoretical_ops_table(40, [1e-2, 1e-6])
        coarse, fine = table.iloc[0], table.iloc[1]
        assert coarse.approx_below_exact
        assert coarse.approx_ops < coarse.exact_ops
        assert not fine.approx_below_exact
        assert fine.approx_ops > fine.exact_ops

    def test_one_relation(self):
        row = theoretical_ops_table(1, [0.25]).iloc[0]
        assert row.exact_ops == 3
        assert row.approx_ops == pytest.approx(2 ** 1.5 / 0.5)

    def test_tenfold_epsilon(self):
        table = theoretical_ops_table(10, [1e-2, 1e-3])
        assert table.approx_ops.iloc[1] / table.approx_ops.iloc[0] == pytest.approx(math.sqrt(10))

    @pytest.mark.parametrize('n, eps', [(0, [0.1]), (5, [0.0]), (5, [-1.0])])
    def test_invalid(self, n, eps):
        with pytest.raises(InvalidInputError):
            theoretical_ops_table(n, eps)


@pytest.mark.slow
class TestTimingTrends:
    def test_dpconv_max_overtakes_dpsub(self):
        report = run_benchmark(BenchConfig(algorithms=[Algorithm.DPSUB_MAX, Algorithm.DPCONV_MAX],
                                           sizes=(18, 22), repetitions=5))
        table = speedup_table(summarize(report[report.n.isin([18, 20, 22])]), 'dpsub-max', 'dpconv-max')
        assert table['speedup'].iloc[-1] > 1
        assert is_monotone_non_decreasing(table['speedup'].tolist())

    def test_fast_ccap_beats_naive(self):
        report = run_benchmark(BenchConfig(algorithms=[Algorithm.CCAP_NAIVE, Algorithm.CCAP_FAST],
                                           sizes=(20, 20), repetitions=3))
        table = speedup_table(summarize(report), 'ccap-naive', 'ccap-fast')
        assert table['speedup'].iloc[0] > 1

    def test_fast_ccap_against_unconstrained_out(self):
        # hardware dependent, so only reported
        report = run_benchmark(BenchConfig(algorithms=[Algorithm.DPSUB_OUT, Algorithm.CCAP_FAST],
                                           sizes=(22, 22), repetitions=1))
        speedup = speedup_table(summarize(report), 'dpsub-out', 'ccap-fast')['speedup'].iloc[0]
        log = logger.info if speedup > 1 else logger.warning
        log(f"🧢 ccap-fast vs dpsub-out at n=22: {speedup:.2f}x")


def test_instance_seeds_are_distinct():
    seeds = {bench.instance_seed(0, n, rep) for n in range(3, 8) for rep in range(5)}
    assert len(seeds) == 25
    assert all(0 <= s < 2 ** 64 for s in seeds)
    assert isinstance(bench.make_rng(1), np.random.Generator)
