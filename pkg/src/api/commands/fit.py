import argparse
import logging

from src.api.dependencies import (
    add_seed,
    apply_overrides,
    graphs,
    load_config,
    load_table,
    models,
    sibling,
)
from src.model.graph import PriorKnowledge
from src.schema.config import PipelineConfig
from src.service.synth import fit_cell_pipelines, fit_pipeline

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("fit", help="Fit a generative pipeline along a DAG")
    parser.add_argument("--data", required=True, help="CSV with one column per node")
    parser.add_argument("--graph", required=True, help="Ground-truth graph JSON")
    parser.add_argument("--out", required=True, help="Model file to write (.lbm)")
    parser.add_argument("--config", help="PipelineConfig JSON file")
    parser.add_argument("--num-trees", type=int, help="Trees per forest")
    parser.add_argument("--min-node-size", type=int, help="Minimum rows per leaf")
    parser.add_argument(
        "--cells",
        action="store_true",
        help="Fit one model per station (<out>_station<S>.lbm plus its graph)",
    )
    add_seed(parser)
    parser.set_defaults(handler=cmd_fit)


def _pipeline_config(args: argparse.Namespace) -> PipelineConfig:
    config = load_config(args.config, PipelineConfig, seed=args.seed)
    drf = apply_overrides(config.drf, num_trees=args.num_trees, min_node_size=args.min_node_size)
    return apply_overrides(config, drf=drf.model_dump())


def cmd_fit(args: argparse.Namespace) -> None:
    data = load_table(args.data)
    dag = graphs.load_dag(args.graph)
    config = _pipeline_config(args)

    if not args.cells:
        models.save(args.out, fit_pipeline(data, dag, config))
        return

    prior, cross = PriorKnowledge.from_dag(dag)
    for station, model in fit_cell_pipelines(data, prior, config, cross).items():
        models.save(sibling(args.out, f"_station{station}.lbm"), model)
        graphs.save_dag(sibling(args.out, f"_station{station}.json"), model.dag)
    logger.info(f"Wrote per-station models next to {args.out}")
