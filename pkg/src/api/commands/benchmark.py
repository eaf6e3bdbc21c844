import argparse
import logging

from src.api.dependencies import (
    add_seed,
    benchmark_reports,
    graphs,
    load_config,
    models,
    parse_assignment,
    parse_keys,
    sibling,
)
from src.core.exceptions import InputError
from src.schema.config import BenchmarkConfig
from src.service.benchmark import config_from_report, long_table, run_benchmark, summary_table
from src.service.discovery.registry import default_registry

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "benchmark", help="Score causal-discovery algorithms on data sampled from a model"
    )
    parser.add_argument("--data-model", help="Model file to sample benchmark data from")
    parser.add_argument("--truth", help="Ground-truth graph JSON")
    parser.add_argument("--config", help="BenchmarkConfig JSON file")
    parser.add_argument(
        "--algorithms", type=parse_keys, help="Comma-separated keys, e.g. pc,lingam,notears,snr"
    )
    parser.add_argument("--runs", type=int, help="Number of simulation runs")
    parser.add_argument("-n", type=int, help="Rows per sampled dataset")
    parser.add_argument(
        "--standardize",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="Z-score each sampled dataset before structure learning (default on)",
    )
    parser.add_argument(
        "--import",
        dest="imports",
        action="append",
        type=parse_assignment,
        metavar="NAME=PATH",
        help="Register an external result (graph JSON or directory of run_<i>.json)",
    )
    parser.add_argument("--from-report", help="Rerun the config echoed in an earlier report")
    parser.add_argument("--out", required=True, help="Report JSON to write")
    parser.add_argument("--summary", help="Summary CSV (default: <out>_summary.csv)")
    parser.add_argument("--boxplot", help="Long metric CSV (default: <out>_boxplot.csv)")
    add_seed(parser)
    parser.set_defaults(handler=cmd_benchmark)


def _benchmark_config(args: argparse.Namespace) -> BenchmarkConfig:
    if args.from_report:
        return config_from_report(benchmark_reports.read(args.from_report))
    imports = dict(args.imports) if args.imports else None
    return load_config(
        args.config,
        BenchmarkConfig,
        algorithms=args.algorithms,
        runs=args.runs,
        n=args.n,
        standardize=args.standardize,
        seed=args.seed,
        model_path=args.data_model,
        truth_path=args.truth,
        imports=imports,
    )


def cmd_benchmark(args: argparse.Namespace) -> None:
    config = _benchmark_config(args)
    if not config.model_path or not config.truth_path:
        raise InputError("A benchmark needs --data-model and --truth")

    registry = default_registry(config.imports)
    model = models.load(config.model_path)
    truth = graphs.load_dag(config.truth_path)
    report = run_benchmark(model, truth, config, registry)

    benchmark_reports.write(args.out, report)
    summary_path = args.summary or sibling(args.out, "_summary.csv")
    boxplot_path = args.boxplot or sibling(args.out, "_boxplot.csv")
    benchmark_reports.write_table(summary_path, summary_table(report))
    benchmark_reports.write_table(boxplot_path, long_table(report))
    logger.info(f"Benchmark report written to {args.out}")
