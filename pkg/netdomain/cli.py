"""
netdomain command line.

    netdomain <stage|all> --config <path> [--seed N] [--undersample-cap N]
              [--auto-project] [--jobs N] [--force]

Exit codes: 0 success, 2 when policies leave no networks, 1 on any other error.
"""
import argparse
import logging
import sys
from typing import List, Optional

from netdomain import __version__
from netdomain.core.config import get_settings, load_pipeline_config
from netdomain.core.enums import STAGE_ORDER, Stage
from netdomain.core.exceptions import EmptyCorpusError, NetdomainError
from netdomain.services.pipeline import run_pipeline

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_EMPTY_CORPUS = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netdomain",
        description="Find the few structural measures that set each network domain apart.",
    )
    parser.add_argument(
        "stage",
        choices=[s.value for s in STAGE_ORDER] + ["all"],
        help="Stage to run; 'all' runs every stage in order",
    )
    parser.add_argument("--config", required=True, help="Pipeline config file (YAML)")
    parser.add_argument("--seed", type=int, help="Override the global seed")
    parser.add_argument("--undersample-cap", type=int, help="Per-domain cap for the undersampled re-run")
    parser.add_argument(
        "--auto-project", action="store_true", default=None,
        help="Project every detected bipartite graph onto its larger side",
    )
    parser.add_argument("--jobs", type=int, help="Worker processes")
    parser.add_argument("--force", action="store_true", help="Re-run stages even when up to date")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def configure_logging() -> None:
    settings = get_settings()
    logging.basicConfig(level=settings.log_level.upper(), format=settings.log_format)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging()

    overrides = {
        "seed": args.seed,
        "undersample_cap": args.undersample_cap,
        "auto_project": args.auto_project,
        "jobs": args.jobs,
    }
    stages = None if args.stage == "all" else [Stage(args.stage)]

    try:
        config = load_pipeline_config(args.config, overrides)
        artifacts = run_pipeline(config, stages, force=args.force)
    except EmptyCorpusError as e:
        logger.error(f"Empty corpus: {e}")
        return EXIT_EMPTY_CORPUS
    except NetdomainError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_ERROR
    except Exception as e:
        logger.error(f"Unexpected error: {e}", exc_info=True)
        return EXIT_ERROR

    for artifact in artifacts:
        logger.info(f"{artifact.stage.value}: {artifact.content_digest[:12]}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
