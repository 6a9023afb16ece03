"""
Main entry point for ModelSetLab.

This module parses the command line, runs the requested subcommand and
handles any top-level exceptions that might occur during execution.

    python main.py list-examples
    python main.py run configs/fibonacci_full.json --out output/fib --threads 4 --svg
    python main.py verify configs/fibonacci_bernoulli.json --seed 7
"""
from typing import List, NoReturn, Optional
import argparse
import logging
import sys

from utils.config import Config
from utils.logger import setup_logger
from cps.errors import ConfigError, ModelSetError

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_INTERRUPTED = 130


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=Config.APP_NAME,
                                     description="Model sets, autocorrelation, Eberlein decomposition and diffraction")
    parser.add_argument('--log-level', default=None, help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument('--log-file', default=None)
    sub = parser.add_subparsers(dest='command', required=True)

    sub.add_parser('list-examples', help="List bundled schemes and fixtures")
    for name, text in (('run', "Run every task of an experiment config"),
                       ('verify', "Run only the verify task of an experiment config")):
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument('config', help="Experiment config (JSON)")
        cmd.add_argument('--out', default=None, help="Output directory (overrides the config)")
        cmd.add_argument('--threads', type=int, default=None, help="Worker thread cap")
        cmd.add_argument('--seed', type=int, default=None, help="Seed for random weights (overrides the config)")
        cmd.add_argument('--svg', action='store_true', help="Write an SVG stick plot of the spectrum")
        cmd.add_argument('--log-scale', action='store_true', help="Logarithmic intensity axis for --svg")
        cmd.add_argument('--eta', type=float, default=None, help="Window boundary tolerance")
        cmd.add_argument('--epsilons', type=float, nargs='+', default=None, help="eps values for the eps-dual checks")
        cmd.add_argument('--intensity-threshold', type=float, default=None,
                         help="Bragg threshold as a multiple of the noise floor")
        cmd.add_argument('--candidate-budget', type=int, default=None, help="Lattice enumeration budget")
    return parser


def _flag_overrides(args: argparse.Namespace) -> dict:
    overrides = {
        'eta': args.eta,
        'epsilons': args.epsilons,
        'intensity_threshold': args.intensity_threshold,
        'candidate_budget': args.candidate_budget,
        'threads': args.threads,
    }
    return {name: value for name, value in overrides.items() if value is not None}


def run_command(args: argparse.Namespace) -> int:
    # imported here so list-examples stays light
    from app import ModelSetApp
    from data.experiment import load_experiment

    logger = logging.getLogger(__name__)
    config = load_experiment(args.config, overrides=_flag_overrides(args))
    if args.command == 'verify':
        config.tasks = ['verify']
    if args.out:
        config.output = args.out
    if args.seed is not None:
        config.seed = args.seed

    app = ModelSetApp(config, threads=args.threads, svg=args.svg, log_scale=args.log_scale)
    code = app.run()
    logger.info(f"Finished '{config.name}' with exit code {code}")
    return code


def list_examples() -> int:
    from data.catalog import Catalog
    print(Catalog().format_table())
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> NoReturn:
    """
    Main entry point.

    Parses arguments, configures logging and runs the subcommand, making
    sure every failure is logged before the process exits.
    """
    args = build_parser().parse_args(argv)
    logger = setup_logger(args.log_level, args.log_file)
    code = EXIT_FAILED
    try:
        if args.command == 'list-examples':
            code = list_examples()
        else:
            code = run_command(args)
    except KeyboardInterrupt:
        logger.info("Run terminated by user")
        code = EXIT_INTERRUPTED
    except ConfigError as e:
        logger.error(f"Invalid configuration: {e}")
        code = EXIT_CONFIG
    except ModelSetError as e:
        logger.error(f"Run failed: {e}", exc_info=True)
        code = EXIT_FAILED
    except Exception as e:
        logger.error(f"Application failed: {e}", exc_info=True)
        code = EXIT_FAILED
    finally:
        sys.exit(code)


if __name__ == "__main__":
    main()
