import argparse
import logging

from src.api.dependencies import add_seed, fidelity_reports, load_table, models
from src.service.synth import fidelity_report
from src.utils.seeding import child_rng

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "fidelity", help="Per-node KS statistics between real and synthetic data"
    )
    parser.add_argument("--data", required=True, help="Original CSV")
    parser.add_argument("--model", required=True, help="Model file (.lbm)")
    parser.add_argument("-n", type=int, help="Synthetic rows (default: rows of --data)")
    parser.add_argument("--out", required=True, help="Report JSON to write")
    add_seed(parser)
    parser.set_defaults(handler=cmd_fidelity)


def cmd_fidelity(args: argparse.Namespace) -> None:
    original = load_table(args.data)
    model = models.load(args.model)
    report = fidelity_report(
        original, model, args.n or original.num_rows, child_rng(args.seed or 0)
    )
    fidelity_reports.write(args.out, report)
    if report.nodes:
        worst = report.nodes[0]
        logger.info(f"Largest KS statistic: {worst.node} ({worst.ks:.4f})")
