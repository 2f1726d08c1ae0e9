import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from bench import generate_clique, run_benchmark, summarize, theoretical_ops_table
from config import config
from costmodel import connectivity_table, describe_violation, validate_cardinalities
from errors import InvalidInputError, JoinConvError
from models import Algorithm, BenchConfig
from optimizer import run_algorithm
from storage import load_instance, save_instance, save_result, write_report
from utils import Utils

logger = logging.getLogger(__name__)


class JoinConvApp:
    """🎯 Command-line front end"""

    def __init__(self):
        self.parser = self.build_parser()

    @staticmethod
    def build_parser() -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(prog='joinconv', description="Join ordering via fast subset convolution")
        commands = parser.add_subparsers(dest='command', required=True)

        generate = commands.add_parser('generate', help="random clique instance")
        generate.add_argument('--n', type=int, required=True)
        generate.add_argument('--seed', type=int, default=0)
        generate.add_argument('--max-card', type=int, default=config.MAX_CARDINALITY)
        generate.add_argument('--out', required=True)

        optimize = commands.add_parser('optimize', help="optimize one instance")
        optimize.add_argument('--algo', required=True, choices=config.SUPPORTED_ALGORITHMS)
        optimize.add_argument('--input', required=True)
        optimize.add_argument('--cap', type=int)
        optimize.add_argument('--out')

        bench = commands.add_parser('bench', help="benchmark sweep over random cliques")
        bench.add_argument('--algos', required=True)
        bench.add_argument('--sizes', default='3..12')
        bench.add_argument('--reps', type=int, default=5)
        bench.add_argument('--seed', type=int, default=0)
        bench.add_argument('--max-card', type=int, default=config.MAX_CARDINALITY)
        bench.add_argument('--csv')
        bench.add_argument('--no-timing', action='store_true')
        bench.add_argument('--workers', type=int, default=1)

        ops = commands.add_parser('ops-table', help="theoretical operation counts")
        ops.add_argument('--n', type=int, required=True)
        ops.add_argument('--eps', required=True)

        validate = commands.add_parser('validate', help="check an instance file")
        validate.add_argument('--input', required=True)
        return parser

    def cmd_generate(self, args) -> int:
        q = generate_clique(args.n, args.seed, args.max_card)
        save_instance(q, args.out)
        print(f"🎰 {q.describe()} -> {args.out}")
        return 0

    def cmd_optimize(self, args) -> int:
        q = load_instance(args.input)
        result = run_algorithm(args.algo, q, cap=args.cap)
        if args.out:
            save_result(result, q.names, args.out)
        cost = result.optimal_value if result.feasible else "infeasible"
        print(f"💰 {result.algorithm}: cost={cost} in {Utils.format_duration_ns(result.stats.elapsed_ns)}")
        if result.tree is not None:
            print(f"🌳 {result.tree.render(q.names)}")
        return 0

    def cmd_bench(self, args) -> int:
        cfg = BenchConfig(
            algorithms=[Algorithm.parse(name) for name in Utils.parse_csv_list(args.algos)],
            sizes=Utils.parse_size_range(args.sizes),
            repetitions=args.reps,
            seed=args.seed,
            max_cardinality=args.max_card,
            output=args.csv or str(Path(config.RESULTS_PATH) / 'bench.csv'),
            timing=not args.no_timing,
            workers=args.workers,
        )
        cfg.validate()
        if not args.csv:
            config.create_directories()
        report = run_benchmark(cfg)
        write_report(report, cfg.output)
        if len(report):
            print(summarize(report).to_string(index=False))
        return 0

    def cmd_ops_table(self, args) -> int:
        table = theoretical_ops_table(args.n, Utils.parse_float_list(args.eps))
        print(table.to_string(index=False))
        return 0

    def cmd_validate(self, args) -> int:
        q = load_instance(args.input)
        violations = validate_cardinalities(q)
        connected = connectivity_table(q)
        print(f"🗂️ {q.describe()}")
        print(f"🕸️ query graph connected: {bool(connected[q.full])}")
        for violation in violations[:20]:
            print(f"⚠️ {describe_violation(violation, q)}")
        if violations:
            print(f"❌ {len(violations)} violations")
            return 1
        print("✅ no violations")
        return 0

    def run(self, argv: Optional[List[str]] = None) -> int:
        """▶️ Parse, dispatch, and map errors onto exit codes"""
        args = self.parser.parse_args(argv)
        if not config.validate():
            return InvalidInputError.exit_code
        handler = getattr(self, f"cmd_{args.command.replace('-', '_')}")
        try:
            return handler(args)
        except JoinConvError as e:
            logger.error(f"❌ {type(e).__name__}: {e}")
            return e.exit_code
        except KeyboardInterrupt:
            logger.info("🛑 Interrupted")
            return 130


def main(argv: Optional[List[str]] = None) -> int:
    """🎯 Entry point"""
    return JoinConvApp().run(argv)


if __name__ == "__main__":
    sys.exit(main())
