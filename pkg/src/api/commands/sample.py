import argparse
import logging

from src.api.dependencies import add_seed, datasets, graphs, models
from src.service.synth import check_graph, sample
from src.utils.seeding import child_rng

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("sample", help="Draw synthetic rows from a fitted model")
    parser.add_argument("--model", required=True, help="Model file (.lbm)")
    parser.add_argument("-n", type=int, required=True, help="Number of rows")
    parser.add_argument("--out", required=True, help="CSV to write")
    parser.add_argument("--graph", help="Graph JSON the model must have been fit on")
    add_seed(parser)
    parser.set_defaults(handler=cmd_sample)


def cmd_sample(args: argparse.Namespace) -> None:
    model = models.load(args.model)
    if args.graph:
        check_graph(model, graphs.load_dag(args.graph))
    table = sample(model, args.n, child_rng(args.seed or 0))
    datasets.write(args.out, table)
