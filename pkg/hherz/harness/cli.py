"""
Command line interface.

Subcommands::

    hherz axioms      [--n N] [--samples M] [--seed S]
    hherz calibrate   [--budget N] [--seed S]
    hherz norms       --scenario PATH
    hherz constants   --scenario PATH
    hherz inequality  --scenario PATH [--baselines PATH] [--invariance]
    hherz report      --scenario PATH [PATH ...] [--baselines PATH]

Every subcommand takes `--out PATH`, `--format {json,csv}` and `-v`/`-vv`.
Exit status is 0 when every check passes, 1 on any failed check and 2 on a
malformed scenario or violated hypotheses.
"""
import argparse
import logging
import sys

from ..errors import HypothesisError, ScenarioError
from ..quadrature import DEFAULT_BUDGET
from .report import load_baselines, save_baselines, write_reports
from .scenario import load_scenario
from .suites import run_axioms, run_batch, run_calibration, run_constants, run_inequality, run_norms

__all__ = "EXIT_OK", "EXIT_VIOLATION", "EXIT_INVALID", "build_parser", "main"

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INVALID = 2


def _u64(value: str) -> int:
    seed = int(value)
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer (got {value})")
    return seed

def _positive(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer (got {value})")
    return number

def _add_output(parser: argparse.ArgumentParser):
    parser.add_argument("--out", default=None, help="Write the report here instead of stdout")
    parser.add_argument("--format", choices=["json", "csv"], default="json")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")

def _add_overrides(parser: argparse.ArgumentParser):
    parser.add_argument("--seed", type=_u64, default=None, help="Override the scenario seed")
    parser.add_argument("--budget", type=_positive, default=None, help="Override the scenario budget")
    parser.add_argument("--n", type=_positive, default=None, help="Override the scenario dimension")

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hherz",
        description="Numerical checks of weighted Herz-space estimates on the Heisenberg group.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    axioms = sub.add_parser("axioms", help="Group axioms and graded-matrix properties")
    axioms.add_argument("--n", type=_positive, default=1)
    axioms.add_argument("--samples", type=_positive, default=10_000)
    axioms.add_argument("--seed", type=_u64, default=0)
    _add_output(axioms)

    calibrate = sub.add_parser("calibrate", help="Compare numerical results with closed-form oracles")
    calibrate.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET)
    calibrate.add_argument("--seed", type=_u64, default=0)
    _add_output(calibrate)

    for name, help_text in (
        ("norms", "Herz norm of f and CBMO norm of b"),
        ("constants", "Bound constant of a scenario"),
    ):
        command = sub.add_parser(name, help=help_text)
        command.add_argument("--scenario", required=True)
        _add_overrides(command)
        _add_output(command)

    inequality = sub.add_parser("inequality", help="Both sides of the commutator estimate")
    inequality.add_argument("--scenario", required=True)
    inequality.add_argument("--baselines", default=None, help="Pinned ratio table (JSON)")
    inequality.add_argument("--invariance", action="store_true", help="Also check f -> 3f and b -> b + 5")
    _add_overrides(inequality)
    _add_output(inequality)

    report = sub.add_parser("report", help="Run many scenarios and collect their reports")
    report.add_argument("--scenario", required=True, nargs="+")
    report.add_argument("--baselines", default=None, help="Pinned ratio table (JSON)")
    report.add_argument("--invariance", action="store_true")
    _add_overrides(report)
    _add_output(report)

    return parser

def _configure_logging(verbosity: int):
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(verbosity, 2)]
    logging.basicConfig(format="%(asctime)s - %(levelname)s - %(message)s", level=level)

def _scenario(path: str, args: argparse.Namespace):
    return load_scenario(path).with_overrides(seed=args.seed, budget=args.budget, n=args.n)

def _reports(args: argparse.Namespace) -> list:
    match args.command:
        case "axioms":
            return [run_axioms(args.n, args.samples, args.seed)]
        case "calibrate":
            return [run_calibration(args.budget, args.seed)]
        case "norms":
            return [run_norms(_scenario(args.scenario, args))]
        case "constants":
            return [run_constants(_scenario(args.scenario, args))]

    baselines = None if args.baselines is None else load_baselines(args.baselines)
    if args.command == "inequality":
        reports = [run_inequality(_scenario(args.scenario, args), baselines, args.invariance)]
    else:
        reports = run_batch([_scenario(path, args) for path in args.scenario], baselines, args.invariance)

    if baselines is not None:
        save_baselines(args.baselines, baselines)
    return reports

def main(argv: list[str] | None=None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)

    try:
        reports = _reports(args)
    except ScenarioError as e:
        print(f"malformed scenario: {e}", file=sys.stderr)
        return EXIT_INVALID
    except HypothesisError as e:
        print("hypotheses violated:", file=sys.stderr)
        for violation in e.violations:
            print(f"  - {violation}", file=sys.stderr)
        return EXIT_INVALID

    write_reports(reports, args.out, args.format)

    if any(report.status == "rejected" for report in reports):
        return EXIT_INVALID
    if all(report.passed for report in reports):
        return EXIT_OK
    for report in reports:
        for check in report.checks:
            if not check.passed:
                logger.warning("%s: %s failed (residual %.3g, tolerance %.3g)", report.name, check.name, check.residual, check.tolerance)
    return EXIT_VIOLATION
