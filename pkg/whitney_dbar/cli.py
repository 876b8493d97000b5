import argparse
import json
import logging
from pathlib import Path
import sys

from pydantic import ValidationError

from .exceptions import WhitneyDbarError
from .runner import list_catalog, load_config, run, with_set_spec
from .schemas.config import ExperimentConfig
from .utils import configure_logging


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2
EXIT_BUDGET = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="whitney-dbar",
        description="Reproducible experiments on Whitney jets and the dbar operator.",
    )
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Log level for the run (default: INFO)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", help="Run one experiment from a JSON config")
    run_parser.add_argument("--config", type=Path, required=True, help="Experiment config")
    run_parser.add_argument("--threads", type=int, default=None, help="Worker threads")
    run_parser.add_argument("--out", type=Path, default=None, help="Output directory")
    run_parser.add_argument(
        "--set-spec",
        type=Path,
        default=None,
        help="SetSample JSON document replacing the config's set",
    )

    commands.add_parser("list", help="List experiments, sets and function symbols")
    commands.add_parser("schema", help="Print the JSON schema of experiment configs")
    return parser


def _run(args: argparse.Namespace) -> int:
    if args.threads is not None and args.threads < 1:
        logger.error("--threads must be a positive integer")
        return EXIT_CONFIG
    try:
        config = load_config(args.config)
        if args.set_spec is not None:
            config = with_set_spec(config, args.set_spec)
    except ValidationError as e:
        logger.error("Invalid config '%s':\n%s", args.config, e)
        return EXIT_CONFIG

    try:
        manifest = run(config, threads=args.threads, out_dir=args.out)
    except WhitneyDbarError as e:
        logger.error("%s failed: %s", config.experiment, e.message)
        return e.exit_code
    logger.info("%s finished: %d files", config.experiment, len(manifest.files))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    match args.command:
        case "list":
            sys.stdout.write(list_catalog())
            return EXIT_OK
        case "schema":
            schema = ExperimentConfig.model_json_schema()
            sys.stdout.write(json.dumps(schema, indent=2, sort_keys=True) + "\n")
            return EXIT_OK
        case _:
            try:
                return _run(args)
            except WhitneyDbarError as e:
                logger.error("%s", e.message)
                return e.exit_code
