import json

import pandas as pd
import pytest

import bench
from main import main
from models import Algorithm
from storage import REPORT_COLUMNS, save_instance


@pytest.fixture
def instance_file(tmp_path, three_relations):
    path = tmp_path / 'q.json'
    save_instance(three_relations, path)
    return path


class TestCommands:
    def test_generate(self, tmp_path):
        out = tmp_path / 'clique.json'
        assert main(['generate', '--n', '5', '--seed', '3', '--max-card', '1000', '--out', str(out)]) == 0
        document = json.loads(out.read_text())
        assert document['n'] == 5
        assert len(document['cardinalities']) == 2 ** 5 - 1

    def test_optimize(self, tmp_path, instance_file, capsys):
        out = tmp_path / 'result.json'
        assert main(['optimize', '--algo', 'dpconv-out', '--input', str(instance_file), '--out', str(out)]) == 0
        document = json.loads(out.read_text())
        assert document['cost'] == 13
        assert document['algorithm'] == 'dpconv-out'
        assert 'cost=13' in capsys.readouterr().out

    def test_optimize_with_infeasible_cap(self, tmp_path, instance_file):
        out = tmp_path / 'result.json'
        assert main(['optimize', '--algo', 'dpsub-out', '--input', str(instance_file),
                     '--cap', '5', '--out', str(out)]) == 0
        assert json.loads(out.read_text())['cost'] is None

    def test_ccap_records_gamma(self, tmp_path, instance_file):
        out = tmp_path / 'result.json'
        assert main(['optimize', '--algo', 'ccap-fast', '--input', str(instance_file), '--out', str(out)]) == 0
        document = json.loads(out.read_text())
        assert document['gamma'] == 8
        assert document['cost'] == 13

    def test_bench(self, tmp_path):
        csv = tmp_path / 'bench.csv'
        assert main(['bench', '--algos', 'dpsub-max,dpconv-max', '--sizes', '3..5', '--reps', '2',
                     '--seed', '1', '--csv', str(csv)]) == 0
        report = pd.read_csv(csv)
        assert list(report.columns) == REPORT_COLUMNS
        assert len(report) == 3 * 2 * 2

    def test_ops_table(self, capsys):
        assert main(['ops-table', '--n', '40', '--eps', '0.01,0.000001']) == 0
        assert 'approx_below_exact' in capsys.readouterr().out

    def test_validate(self, instance_file, capsys):
        assert main(['validate', '--input', str(instance_file)]) == 0
        assert 'no violations' in capsys.readouterr().out


class TestExitCodes:
    def test_missing_input_is_invalid(self, tmp_path):
        assert main(['optimize', '--algo', 'dpsub-max', '--input', str(tmp_path / 'nope.json')]) == 1

    def test_unknown_bench_algorithm(self, tmp_path):
        assert main(['bench', '--algos', 'dpccp', '--csv', str(tmp_path / 'x.csv')]) == 1

    def test_bad_size_range(self, tmp_path):
        assert main(['bench', '--algos', 'dpsub-max', '--sizes', 'three', '--csv', str(tmp_path / 'x.csv')]) == 1

    def test_violations(self, tmp_path, make_instance):
        path = tmp_path / 'bad.json'
        save_instance(make_instance(2, {0b01: 2, 0b10: 3, 0b11: 7}), path)
        assert main(['validate', '--input', str(path)]) == 1

    def test_budget_refusal(self, tmp_path, clique):
        path = tmp_path / 'big.json'
        save_instance(clique(6, seed=1), path)
        assert main(['optimize', '--algo', 'dpconv-out', '--input', str(path)]) == 1

    def test_oracle_disagreement(self, tmp_path, monkeypatch):
        real = bench.run_algorithm

        def skewed(algorithm, q, cap=None):
            result = real(algorithm, q, cap)
            if algorithm is Algorithm.DPCONV_MAX:
                result.optimal_value -= 1
            return result

        monkeypatch.setattr(bench, 'run_algorithm', skewed)
        assert main(['bench', '--algos', 'dpsub-max,dpconv-max', '--sizes', '3..3', '--reps', '1',
                     '--csv', str(tmp_path / 'x.csv')]) == 2

    def test_unknown_command(self):
        with pytest.raises(SystemExit):
            main(['frobnicate'])
