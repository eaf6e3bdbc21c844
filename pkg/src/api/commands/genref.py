import argparse
import logging
from pathlib import Path

from src.api.dependencies import add_seed, datasets, graphs, load_config
from src.schema.config import LineConfig
from src.service.refline import generate_line, toy_line_fixture

logger = logging.getLogger(__name__)

TOY_DEFAULT_ROWS = 2000


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "genref", help="Generate a reference assembly line (data, truth and prior)"
    )
    parser.add_argument("--config", help="LineConfig JSON file")
    parser.add_argument("--rows", type=int, help="Number of rows to generate")
    parser.add_argument(
        "--fixture",
        choices=["line", "toy"],
        default="line",
        help="'line' for the configurable line, 'toy' for the six-node toy line",
    )
    parser.add_argument("--out-dir", required=True, help="Directory for the generated files")
    add_seed(parser)
    parser.set_defaults(handler=cmd_genref)


def cmd_genref(args: argparse.Namespace) -> None:
    out = Path(args.out_dir)
    if args.fixture == "toy":
        fixture = toy_line_fixture()
        truth, prior = fixture.truth, fixture.prior
        data = fixture.sample(args.rows or TOY_DEFAULT_ROWS, args.seed or 0)
        predictions = None
    else:
        config = load_config(args.config, LineConfig, rows=args.rows, seed=args.seed)
        truth, prior, data, predictions = generate_line(config)

    if predictions is not None and predictions.columns:
        data = data.joined(predictions)
    datasets.write(out / "data.csv", data)
    graphs.save_dag(out / "truth.json", truth)
    graphs.save_prior(out / "prior.json", prior)
    logger.info(f"Reference data written to {out}")
