import argparse
from pathlib import Path
from typing import Sequence

from bpire import __version__
from bpire.cli.experiments import run_experiment
from bpire.on_startup.logger import LOG_LEVELS, setup_logger
from bpire.schema.enums import ExperimentKindEnum, OutputFormatEnum
from bpire.utils.rng import MASK_64b
from conf.config import settings


def _seed(value: str) -> int:
    seed = int(value, 0)
    if not 0 <= seed <= MASK_64b:
        raise argparse.ArgumentTypeError(f'seed must be an unsigned 64-bit integer, got {value}')
    return seed


def _positive(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f'expected a positive integer, got {value}')
    return number


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='bpire',
        description='Monte Carlo experiments on single-clan survival in a critical BPRE with immigration',
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('kind', choices=[kind.value for kind in ExperimentKindEnum])
    parser.add_argument('--config', required=True, type=Path, help='experiment TOML file')
    parser.add_argument('--seed', type=_seed, default=None, help='master seed, overrides the config')
    parser.add_argument(
        '--workers', type=_positive, default=None, help=f'worker processes (default BPIRE_WORKERS={settings.WORKERS})'
    )
    parser.add_argument('--out', type=Path, default=None, help='artifact directory')
    parser.add_argument('--format', choices=[fmt.value for fmt in OutputFormatEnum], default=None)
    parser.add_argument('--log-level', choices=list(LOG_LEVELS), default=None)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = create_parser().parse_args(argv)
    setup_logger(args.log_level)
    return run_experiment(
        args.config,
        kind=ExperimentKindEnum(args.kind),
        seed=args.seed,
        workers=args.workers,
        out=args.out,
        fmt=OutputFormatEnum(args.format) if args.format else None,
    )
