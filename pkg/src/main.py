#! python3
# -*- encoding: utf-8 -*-
'''
@File    :   main.py
@Desc    :   Command-line entry of the approximate EMD solver
@Usage   :   python src/main.py <command> [options]
'''

import sys, argparse, json, logging, os
from datetime import datetime
from pathlib import Path

from pydantic import ValidationError

from emdapprox import __version__
from emdapprox.commands import CommandRegistry, run_command
from emdapprox.core.config import get_settings
from emdapprox.core.defaults import SolverDefaultsManager
from emdapprox.core.exceptions import EmdApproxError, InputError
from emdapprox.core.logging_utils import ProgressLogger, setup_logging
from emdapprox.models.run import RunConfig, RunReport, to_builtin

log = logging.getLogger("emdapprox.main")


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(
        description='Approximate Earth Mover\'s Distance under l1',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Exact EMD of two point files
  python src/main.py exact --x X.txt --y Y.txt

  # Approximate EMD with a (1 + 0.1) target
  python src/main.py approx --x X.txt --y Y.txt --eps 0.1 --seed 7

  # Close pairs with the grid oracle
  python src/main.py closepairs --x X.txt --y Y.txt --oracle grid

  # Accuracy and runtime sweep, rows saved next to the report
  python src/main.py bench --sizes 64 128 256 --trials 3 --out output/bench.json
        """
    )
    parser.add_argument('command', choices=CommandRegistry.list_commands(), help='Command to run')
    parser.add_argument('--eps', type=float, default=settings.eps, help='Accuracy parameter in (0, 0.5)')
    parser.add_argument('--phi', dest='phi_exp', type=float, default=settings.phi_exp,
                        help='Sublinearity exponent in (0, 1)')
    parser.add_argument('--seed', type=int, default=settings.seed, help='Root seed')
    parser.add_argument('--mode', choices=['faithful', 'practical'], default=settings.mode, help='Solver schedule')
    parser.add_argument('--oracle', default=settings.oracle, help='Closest-pair oracle (brute, grid)')
    parser.add_argument('--lambda-source', dest='lambda_source', choices=['auto', 'explicit', 'sampler'],
                        default=settings.lambda_source, help='How MWU rounds see lambda')
    parser.add_argument('--x', help='Point file for X')
    parser.add_argument('--y', help='Point file for Y')
    parser.add_argument('--b', help='Supply file; with --x only, runs EMD_X(b)')
    parser.add_argument('--out', help='Report path (stdout when omitted)')
    parser.add_argument('--trials', type=int, default=5, help='Seeds per benchmark size')
    parser.add_argument('--relax', type=float, help='Divide rounds and samples by this factor (practical mode)')
    parser.add_argument('--sizes', type=int, nargs='+', default=[16, 32], help='Benchmark sizes')
    parser.add_argument('--dim', type=int, default=4, help='Dimension of generated benchmark points')
    parser.add_argument('--samples', type=int, default=10000, help='Draws for the sample command')
    parser.add_argument('--config', dest='config_file', default=settings.defaults_file,
                        help='Solver defaults YAML')
    parser.add_argument('--no-timings', dest='timings', action='store_false',
                        help='Leave wall-clock timings out of the report')
    parser.add_argument('-v', '--verbose', action='store_true', help='Increases output verbosity')
    parser.add_argument('-sl', '--save_log', action='store_true', default=False, help='Save log output to a file')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    return parser


def emit(report: RunReport, out) -> None:
    text = report.to_json()
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n")
        log.info(f"Report written to {path}")
    else:
        sys.stdout.write(text + "\n")


def emit_error(error: EmdApproxError) -> None:
    sys.stdout.write(json.dumps({"error": to_builtin(error.to_dict())}, sort_keys=True, indent=2) + "\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    settings = get_settings()

    log_file = None
    if args.save_log:
        timestamp = datetime.now().strftime("%Y%m%d_%H%M")
        log_file = Path(settings.output_dir) / f"emdapprox_{args.command}_{timestamp}.log"
    setup_logging(logging.DEBUG if args.verbose else settings.log_level, log_file)

    options = {key: value for key, value in vars(args).items() if key != 'save_log' and value is not None}
    log.debug(f"Script called with the following arguments: {options}")
    try:
        config = RunConfig(**options)
    except ValidationError as e:
        error = InputError("; ".join(err["msg"] for err in e.errors()))
        log.error(f"Invalid arguments: {error}")
        emit_error(error)
        return error.exit_code

    try:
        defaults = SolverDefaultsManager(config.config_file)
    except OSError as e:
        error = InputError(f"Cannot read solver defaults: {e}")
        emit_error(error)
        return error.exit_code

    progress = ProgressLogger(logging.getLogger("emdapprox.progress"))
    exit_code, report = run_command(config, defaults, progress)
    if exit_code:
        sys.stdout.write(json.dumps(to_builtin(report.result), sort_keys=True, indent=2) + "\n")
    else:
        emit(report, config.out)
    return exit_code


if __name__ == '__main__':
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        log.critical('Interrupted by user')
        try:
            sys.exit(0)
        except SystemExit:
            os._exit(0)
