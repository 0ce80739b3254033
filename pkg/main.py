"""
Main entry point for msf-seg: corpus generation, training, segmentation and scoring
"""

import argparse
import logging
import signal
import sys
from pathlib import Path
from typing import List, Optional

from msfseg.pipeline import ExperimentOrchestrator
from msfseg.utils.config import Config, RunConfig, StageTypes
from msfseg.utils.errors import ArrayFormatError, ConfigError, TrainingDivergedError

# Configure logging
logging.basicConfig(
    level=getattr(logging, Config.LOG_LEVEL.upper(), logging.INFO),
    format=Config.LOG_FORMAT
)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DIVERGED = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="msf-seg",
        description="Learned seeded watershed segmentation experiments",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="Stages: generate -> pretrain-g -> train -> segment -> evaluate -> report",
    )
    parser.add_argument("command", choices=StageTypes.ALL, help="Pipeline stage to run")
    parser.add_argument("--config", required=True, type=Path, help="Run config (section.key = value lines)")
    parser.add_argument("--out", type=Path, default=None, help="Output directory (default: runs/<command>)")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        Config.validate_config()
        run_config = RunConfig.load(args.config)
        outputs = ExperimentOrchestrator(run_config, args.out).handle_command(args.command)
        logger.info(f"{args.command} completed; {len(outputs)} outputs validated")
        return EXIT_OK
    except TrainingDivergedError as e:
        logger.error(f"Training diverged: {str(e)}")
        return EXIT_DIVERGED
    except (ConfigError, ArrayFormatError, FileNotFoundError, PermissionError, ValueError) as e:
        logger.error(f"{args.command} failed: {str(e)}")
        return EXIT_USAGE


# Signal handlers for graceful shutdown
def signal_handler(signum, frame):
    logger.info(f"Received signal {signum}, shutting down...")
    sys.exit(1)


if __name__ == "__main__":
    signal.signal(signal.SIGINT, signal_handler)
    signal.signal(signal.SIGTERM, signal_handler)
    sys.exit(main())
