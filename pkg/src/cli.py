"""Command-line entry point: lattice-kinetics run | diff | validate-model | validate-profile"""

import argparse
import json
import logging
import sys
from typing import List, Optional, Sequence

from pydantic import ValidationError

from .core.experiment_config import load_experiment_config
from .core.experiments import run_experiment
from .core.reports import diff_reports, write_table
from .core.settings import LabSettings, load_settings
from .errors import ModelInvalidError, ResourceLimitError, SchemaMismatchError, WraparoundError
from .lattice.conditions import validate_conditions
from .lattice.dispersion import build_dispersion_table
from .parsers.model_parser import ModelParser
from .sampling.profile_validation import validate_profile

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_REFUSED = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lattice-kinetics",
        description="Numerical laboratory for harmonic lattices and their kinetic limit",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    parser.add_argument("--settings", help="Settings YAML (defaults to config.yaml)")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run a configured experiment")
    run.add_argument("--config", required=True, help="Experiment document (JSON or YAML)")
    run.add_argument("--seed", type=int, help="Override the experiment seed")
    run.add_argument("--out", help="Override the output directory")
    run.add_argument("--threads", type=int, help="Worker threads for sampling and evolution")
    run.add_argument("--set", dest="overrides", action="append", default=[], metavar="PATH=VALUE",
                     help="Override any config field by its JSON path, e.g. model.N=512")

    diff = sub.add_parser("diff", help="Compare an empirical report with a theory report")
    diff.add_argument("empirical")
    diff.add_argument("theory")
    diff.add_argument("--sigma", type=float, help="z-score threshold (default from settings)")
    diff.add_argument("--out", help="Write the per-entry comparison table to this CSV")

    model = sub.add_parser("validate-model", help="Check a force field against E1-E6")
    model.add_argument("model", help="Model document (JSON or YAML)")

    profile = sub.add_parser("validate-profile", help="Check a slow profile on sample positions")
    profile.add_argument("profile", help="Profile document (JSON or YAML)")
    profile.add_argument("--model", required=True, help="Model document supplying the dual grid")
    profile.add_argument("--r", dest="positions", action="append", default=None, metavar="R",
                         help="Comma-separated macroscopic position; repeatable (default 0)")
    return parser


def _positions(raw: Optional[List[str]], d: int) -> List[List[float]]:
    if not raw:
        return [[0.0] * d]
    return [[float(c) for c in item.split(",")] for item in raw]


def cmd_run(args, settings: LabSettings) -> int:
    cfg = load_experiment_config(
        args.config, args.overrides, seed=args.seed, output_dir=args.out, threads=args.threads,
    )
    outcome = run_experiment(cfg, settings)
    failed = [v.name for v in outcome.result.verdicts if not v.passed]
    print(f"{cfg.experiment.value}: {'PASS' if not failed else 'FAIL'} "
          f"({len(outcome.result.verdicts) - len(failed)}/{len(outcome.result.verdicts)} verdicts)")
    for name in failed:
        print(f"  failed: {name}")
    print(f"Manifest: {outcome.out_dir / 'manifest.json'}")
    return outcome.exit_code


def cmd_diff(args, settings: LabSettings) -> int:
    sigma = args.sigma if args.sigma is not None else settings.statistics.sigma
    result = diff_reports(args.empirical, args.theory, sigma)
    if args.out:
        write_table(result.table, args.out, settings.output.float_format)
    print(json.dumps(result.summary(), indent=2))
    for row in result.failures().head(20).itertuples(index=False):
        print(f"  {row.quantity} [{row.index}] ({row.row},{row.col}): z = {row.z:.2f}")
    return EXIT_PASS if result.passed else EXIT_FAIL


def cmd_validate_model(args, settings: LabSettings) -> int:
    try:
        field = ModelParser().parse_force_field(args.model)
        section = settings.lattice
        table = build_dispersion_table(field, singular_tol=section.singular_tol, e3_floor=section.e3_floor,
                                       degeneracy_rel_tol=section.degeneracy_rel_tol)
    except ModelInvalidError as e:
        witness = list(e.witness) if e.witness is not None else None
        print(json.dumps({"passed": False, "error": str(e), "witness": witness}, indent=2))
        return EXIT_FAIL
    report = validate_conditions(field, table, settings.condition_tolerances())
    print(report.to_json())
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_validate_profile(args, settings: LabSettings) -> int:
    parser = ModelParser()
    field = parser.parse_force_field(args.model)
    profile = parser.parse_profile(args.profile)
    table = build_dispersion_table(field, singular_tol=settings.lattice.singular_tol)
    report = validate_profile(profile, _positions(args.positions, field.lattice.d), table)
    print(report.to_json())
    return EXIT_PASS if report.passed else EXIT_FAIL


COMMANDS = {
    "run": cmd_run,
    "diff": cmd_diff,
    "validate-model": cmd_validate_model,
    "validate-profile": cmd_validate_profile,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_PASS

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        settings = load_settings(args.settings)
        return COMMANDS[args.command](args, settings)
    except ResourceLimitError as e:
        logger.error("Refused: %s", e)
        return EXIT_REFUSED
    except ValidationError as e:
        logger.error("Invalid configuration:\n%s", e)
        return EXIT_USAGE
    except WraparoundError as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except SchemaMismatchError as e:
        logger.error("Report schema mismatch: %s", e)
        return EXIT_USAGE
    except (FileNotFoundError, ValueError) as e:
        logger.error("%s", e)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
