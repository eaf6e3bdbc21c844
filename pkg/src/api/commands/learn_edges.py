import argparse
import logging

from src.api.dependencies import (
    add_seed,
    cross_edges,
    graphs,
    load_config,
    load_table,
    sibling,
)
from src.schema.config import SpamConfig
from src.service.graph import merge_ground_truth
from src.service.spam import learn_cross_process_edges

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "learn-edges", help="Learn cross-process edges with sparse additive models"
    )
    parser.add_argument(
        "--data", required=True, help="CSV with node columns plus mechanism prediction columns"
    )
    parser.add_argument("--prior", required=True, help="Prior-knowledge JSON")
    parser.add_argument(
        "--predictions",
        help="Optional CSV of extra prediction columns; wins over same-named data columns",
    )
    parser.add_argument("--config", help="SpamConfig JSON file")
    parser.add_argument("--out", required=True, help="Cross-edge JSON to write")
    parser.add_argument(
        "--truth-out", help="Merged ground-truth graph JSON (default: <out>_truth.json)"
    )
    parser.add_argument(
        "--naive",
        action="store_true",
        help="Leave known within-process parents out of the predictor sets",
    )
    add_seed(parser)
    parser.set_defaults(handler=cmd_learn_edges)


def cmd_learn_edges(args: argparse.Namespace) -> None:
    data = load_table(args.data)
    prior = graphs.load_prior(args.prior)
    predictions = load_table(args.predictions) if args.predictions else None
    config = load_config(args.config, SpamConfig)
    seed = args.seed or 0

    edges = learn_cross_process_edges(
        data, prior, config, seed=seed, naive=args.naive, predictions=predictions
    )
    truth = merge_ground_truth(prior, edges)

    cross_edges.save_edges(args.out, edges, naive=args.naive, seed=seed)
    graphs.save_dag(args.truth_out or sibling(args.out, "_truth.json"), truth, prior.mechanisms)
    logger.info(
        f"Learned {len(edges)} cross-process edges; merged graph has {len(truth.edges)} edges"
    )
