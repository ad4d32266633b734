"""
Main entry point for the chemotactic Lotka-Volterra pattern laboratory
"""
import argparse
import sys
from pathlib import Path

from loguru import logger

from config import Config
from src.exceptions import ConfigurationError
from src.experiments.experiment_config import COMMANDS, load_experiment_config
from src.experiments.experiment_runner import run_experiment
from src.experiments.presets import PRESET_NAMES
from src.utils.output_writer import ResultsCollector


def setup_logging():
    """Setup logging configuration"""
    logger.remove()  # Remove default handler

    # Console handler on stderr keeps stdout free for the artifact list
    logger.add(
        sys.stderr,
        format=(
            "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
            "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"
        ),
        level=Config.LOG_LEVEL,
    )

    # Add file handler
    Path(Config.LOG_FILE).parent.mkdir(parents=True, exist_ok=True)
    logger.add(
        Config.LOG_FILE,
        rotation="10 MB",
        retention="30 days",
        level=Config.LOG_LEVEL,
        format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} - {message}",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Chemotactic Lotka-Volterra pattern laboratory")
    parser.add_argument("command", choices=COMMANDS, help="Experiment to run")
    parser.add_argument("--config", type=str, help="INI-style experiment config file")
    parser.add_argument("--out", type=str, help="Output directory (default: CHEMOLV_OUTPUT_PATH)")
    parser.add_argument("--preset", type=str, help=f"Figure preset: {', '.join(PRESET_NAMES)}")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override a config key, e.g. --set params.b2=1.7 or --set b2=1.7",
    )
    return parser


def main(argv=None) -> int:
    """Main function with command line interface"""
    args = build_parser().parse_args(argv)

    # Setup logging
    setup_logging()

    try:
        config = load_experiment_config(
            command=args.command,
            config_path=args.config,
            preset=args.preset,
            overrides=args.overrides,
            output_dir=args.out,
        )
    except ConfigurationError as e:
        logger.error(f"Invalid configuration for '{args.command}': {e}")
        ResultsCollector(args.out).write_error(
            {
                "command": args.command,
                "error_type": type(e).__name__,
                "exit_code": e.exit_code,
                "message": str(e),
            }
        )
        return e.exit_code

    result = run_experiment(config)
    for path in result.artifacts:
        print(path)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
