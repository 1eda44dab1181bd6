"""Main entry point for the three-well mode splitter simulator."""
import sys
import logging
import argparse
from typing import Dict, List, Optional

from src.constants import (
    EXIT_CONFIG_ERROR,
    EXIT_DIVERGENCE,
    EXIT_FAILURE,
    EXIT_IO_ERROR,
    EXIT_OK,
    FULL_SCALE_TRAJECTORIES,
    PRESETS,
    SCHEMES,
)
from src.errors import ConfigError, DivergenceError
from src.parsers.config_parser import ConfigParser
from src.runners.runner import RunMode, RunSpec, Runner, preset_specs

# Flags that map straight onto configuration keys
OVERRIDE_FLAGS = ('J', 'chi', 'atoms', 'state', 'seed', 'trajectories', 'dt', 'tmax',
                  'grid_step', 'scheme', 'workers', 'eta', 'input', 'squeeze')


def build_parser() -> argparse.ArgumentParser:
    """
    Build the command-line parser with one subcommand per run mode plus `preset`.

    Returns:
        argparse.ArgumentParser: Parser sharing the common flags across subcommands
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='Path to a key = value configuration file')
    common.add_argument('--out', default='results.csv', help='Output file path')
    common.add_argument('--format', choices=('csv', 'json'), default='csv', help='Output format')
    common.add_argument('--seed', type=int, help='64-bit seed of the trajectory streams')
    common.add_argument('--trajectories', type=int, help='Number of stochastic trajectories')
    common.add_argument('--dt', type=float, help='Integration step')
    common.add_argument('--tmax', type=float, help='End of the time grid')
    common.add_argument('--grid-step', type=float, help='Spacing of the output time grid')
    common.add_argument('--scheme', choices=SCHEMES, help='Stochastic integration scheme')
    common.add_argument('--workers', type=int, help='Worker threads for the ensemble')
    common.add_argument('--J', type=float, help='Tunneling rate')
    common.add_argument('--chi', type=float, help='Collisional nonlinearity')
    common.add_argument('--atoms', type=float, help='Initial atom number in well 2')
    common.add_argument('--state', choices=('fock', 'coherent'), help='Initial state of well 2')
    common.add_argument('--eta', type=float, help='Beamsplitter transmission')
    common.add_argument('--input', choices=('fock', 'coherent', 'squeezed'),
                        help='Beamsplitter port-a input')
    common.add_argument('--squeeze', type=float, help='Squeeze parameter r of a squeezed input')
    common.add_argument('--verbose', action='store_true', help='Enable debug logging')

    parser = argparse.ArgumentParser(description='Three-well Bose-Hubbard mode splitter simulator')
    commands = parser.add_subparsers(dest='command', required=True)
    for mode in RunMode:
        commands.add_parser(mode.value, parents=[common], help=f'Run the {mode.value} path')
    preset = commands.add_parser('preset', parents=[common], help='Run a named parameter preset')
    preset.add_argument('name', choices=sorted(PRESETS), help='Preset name')
    preset.add_argument('--full-scale', action='store_true',
                        help=f'Raise the trajectory count to {FULL_SCALE_TRAJECTORIES}')
    return parser


def collect_overrides(args: argparse.Namespace) -> Dict[str, object]:
    """
    Pick out the configuration flags that were given on the command line.

    Args:
        args: Parsed command-line arguments

    Returns:
        Dict[str, object]: Flag name to value, unset flags omitted
    """
    return {flag: getattr(args, flag) for flag in OVERRIDE_FLAGS if getattr(args, flag, None) is not None}


def build_specs(args: argparse.Namespace) -> List[RunSpec]:
    """Resolve command-line arguments into the runs to perform."""
    config_parser = ConfigParser()
    base = config_parser.parse_file(args.config) if args.config else {}
    values = config_parser.merge(base, collect_overrides(args))

    if args.command == 'preset':
        if args.full_scale:
            values['n_traj'] = FULL_SCALE_TRAJECTORIES
        return preset_specs(args.name, args.out, args.format, values)

    mode = RunMode(args.command)
    if mode is RunMode.BEAMSPLITTER:
        return [RunSpec(mode=mode, beamsplitter=config_parser.build_bs_config(values),
                        out=args.out, fmt=args.format)]
    return [RunSpec(mode=mode, system=config_parser.build_system_config(values),
                    out=args.out, fmt=args.format)]


def main(argv: Optional[List[str]] = None) -> int:
    """Run the simulator.

    Returns:
        int: Exit code (0 success, 2 config error, 3 divergence, 4 I/O error, 1 other)
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(asctime)s - %(levelname)s - %(name)s - %(message)s'
    )
    logger = logging.getLogger(__name__)
    try:
        for spec in build_specs(args):
            Runner(spec).run()
        return EXIT_OK
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG_ERROR
    except DivergenceError as e:
        logger.error(f"Ensemble diverged: {e}")
        return EXIT_DIVERGENCE
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return EXIT_IO_ERROR
    except Exception as e:
        logger.error(f"Fatal error: {str(e)}", exc_info=True)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
