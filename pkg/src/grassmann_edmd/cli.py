#!/usr/bin/env python3
"""
grassmann-edmd - train, reduce and evaluate EDMD Koopman models.

Usage:
    grassmann-edmd train --preset duffing --scale desk --out runs/desk
    grassmann-edmd optimize --out runs/desk
    grassmann-edmd evaluate --out runs/desk --json
    grassmann-edmd replicate-duffing --scale desk --seed 3
    grassmann-edmd check --seed 0

Every subcommand reads its configuration from --config, from config.json
in the output directory, or from a preset, in that order.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from grassmann_edmd.errors import ConfigError, GrassmannEDMDError, NumericalError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

PRESETS = ("duffing", "linear")


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)-7s %(name)s: %(message)s",
        datefmt="%H:%M:%S",
        stream=sys.stderr,
        force=True,
    )


def load_config(args):
    """Resolve the configuration of a subcommand and apply the overrides."""
    from grassmann_edmd.experiment import ExperimentConfig
    from grassmann_edmd.experiment.pipeline import CONFIG_FILE

    if args.config:
        config = ExperimentConfig.load(args.config)
    elif args.out and (Path(args.out) / CONFIG_FILE).exists():
        config = ExperimentConfig.load(Path(args.out) / CONFIG_FILE)
    elif args.preset == "linear":
        config = ExperimentConfig.linear()
    else:
        config = ExperimentConfig.duffing(args.scale)
    return config.with_overrides(seed=args.seed, threads=args.threads, output_dir=args.out)


def print_banner(title: str, config) -> None:
    print("=" * 60)
    print(title)
    print("=" * 60)
    print(f"Experiment: {config.name}")
    print(f"System: {config.system.name} (dt={config.system.dt})")
    print(f"Dictionary: M={config.M}, s={config.s}, r={config.reduction.r}")
    print(f"Output: {config.output_dir}")
    print("=" * 60)


def cmd_train(args) -> int:
    """Train the full model and write it with the configuration."""
    from grassmann_edmd.experiment import train
    from grassmann_edmd.experiment.pipeline import CONFIG_FILE, FULL_MODEL
    from grassmann_edmd.utils import format_value

    config = load_config(args)
    print_banner("EDMD Training", config)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    config.save(out / CONFIG_FILE)

    model = train(config, out)
    print(f"\nGram residual: {format_value(model.tm.gram_residual())}")
    for warning in model.provenance.get("warnings", []):
        print(f"WARNING: {warning}")
    print(f"Model saved to: {out / FULL_MODEL}.json")
    return EXIT_OK


def _model_path(args, config, default: str) -> Path:
    return Path(args.model) if getattr(args, "model", None) else Path(config.output_dir) / default


def cmd_optimize(args) -> int:
    """Optimise the subspace of a stored full model."""
    from grassmann_edmd.experiment import FullModel, merge_summary, optimize_subspace
    from grassmann_edmd.experiment.pipeline import FULL_MODEL, REDUCED_MODEL
    from grassmann_edmd.utils import format_value

    config = load_config(args)
    print_banner("Subspace Optimisation", config)
    model_path = _model_path(args, config, FULL_MODEL)
    model = FullModel.load(model_path)

    result = optimize_subspace(
        config,
        model,
        config.output_dir,
        full_model_path=model_path if getattr(args, "model", None) else None,
    )
    merge_summary({"optimization": result.to_dict()}, config.output_dir)
    trace = result.trace
    print(f"\nStatus: {trace.status} after {trace.iterations} iterations")
    print(f"g_N(U0) = {format_value(result.subspace.value_initial)}")
    print(f"g_N(U*) = {format_value(result.subspace.value_final)}")
    print(f"Subspace saved to: {Path(config.output_dir) / REDUCED_MODEL}.json")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    """Compare the full and reduced models on the evaluation grids."""
    from grassmann_edmd.edmd import koopman_eigenvalues, subspace_compression
    from grassmann_edmd.experiment import (
        FullModel,
        SubspaceModel,
        build_summary,
        evaluate_models,
        format_summary,
        merge_summary,
    )
    from grassmann_edmd.experiment.pipeline import FULL_MODEL, REDUCED_MODEL

    config = load_config(args)
    out = Path(config.output_dir)
    model = FullModel.load(_model_path(args, config, FULL_MODEL))
    subspace = SubspaceModel.load(Path(args.subspace) if args.subspace else out / REDUCED_MODEL)

    if not args.json_output:
        print_banner("Prediction Error Evaluation", config)
    grids = evaluate_models(config, model, subspace, out)
    summary = build_summary(config, model, None, grids)
    summary["subspace"] = {
        "r": subspace.r,
        "full_model": subspace.full_model,
        "status": subspace.status,
        "value_initial": subspace.value_initial,
        "value_final": subspace.value_final,
    }
    summary = merge_summary(summary, out)

    if args.json_output:
        print(json.dumps(summary, indent=2))
    else:
        reduced_K = subspace_compression(model.tm, subspace.U).K
        print(format_summary(summary, koopman_eigenvalues(model.tm.A_E)[:6], reduced_K))
    return EXIT_OK


def cmd_replicate(args) -> int:
    """Run the complete Duffing experiment."""
    from grassmann_edmd.edmd import koopman_eigenvalues, subspace_compression
    from grassmann_edmd.experiment import ExperimentConfig, format_summary, run_experiment

    config = ExperimentConfig.duffing(args.scale).with_overrides(
        seed=args.seed, threads=args.threads, output_dir=args.out
    )
    print_banner("Duffing Replication", config)
    result = run_experiment(config, config.output_dir)
    tm = result.full_model.tm
    reduced_K = subspace_compression(tm, result.optimization.subspace.U).K
    print(format_summary(result.summary, koopman_eigenvalues(tm.A_E)[:6], reduced_K))
    print(f"\nResults written to: {result.output_dir}")
    return EXIT_OK


def cmd_check(args) -> int:
    """Run the property suite; exits 1 if any property fails."""
    from grassmann_edmd.experiment import run_property_suite

    results = run_property_suite(seed=args.seed or 0)
    failed = [r for r in results if not r.passed]

    if args.json_output:
        print(json.dumps([r.to_dict() for r in results], indent=2))
    else:
        print("=" * 60)
        print("Property Suite")
        print("=" * 60)
        for r in results:
            status = "PASS" if r.passed else "FAIL"
            print(f"  {status}  {r.name:<24} {r.value:.3e} <= {r.tolerance:.0e}")
        print("=" * 60)
        print(f"{len(results) - len(failed)}/{len(results)} properties passed")
    return EXIT_FAILURE if failed else EXIT_OK


def report_error(error: BaseException, label: str, code: int, debug: bool = False) -> int:
    print(f"{label}: {error}", file=sys.stderr)
    if debug:
        import traceback

        traceback.print_exception(type(error), error, error.__traceback__)
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grassmann-edmd",
        description="EDMD Koopman models reduced by Grassmann trust-region optimisation",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Train the desk-scale Duffing model
  %(prog)s train --scale desk --out runs/desk

  # Optimise and evaluate the stored model
  %(prog)s optimize --out runs/desk
  %(prog)s evaluate --out runs/desk

  # Everything in one go, reseeded
  %(prog)s replicate-duffing --scale desk --seed 3 --threads 4

  # Property suite as JSON
  %(prog)s check --json

Exit codes: 0 success, 1 failure, 2 configuration error, 3 numerical failure
        """,
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="Warnings and errors only")
    parser.add_argument(
        "--debug", action="store_true", help="Show the traceback on errors"
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="Experiment configuration (JSON)")
    common.add_argument("--seed", type=int, help="Reseed train/test/init streams")
    common.add_argument("--threads", type=int, help="Worker threads for the error grids")
    common.add_argument("--out", metavar="DIR", help="Output directory")
    common.add_argument(
        "--preset", choices=PRESETS, default="duffing", help="Preset without --config"
    )
    common.add_argument(
        "--scale", choices=("full", "desk"), default="full", help="Duffing preset scale"
    )

    train_parser = subparsers.add_parser(
        "train", parents=[common], help="Train and store the full model"
    )
    train_parser.set_defaults(func=cmd_train)

    optimize_parser = subparsers.add_parser(
        "optimize", parents=[common], help="Optimise the subspace of a stored model"
    )
    optimize_parser.add_argument("--model", metavar="PATH", help="Full model file")
    optimize_parser.set_defaults(func=cmd_optimize)

    evaluate_parser = subparsers.add_parser(
        "evaluate", parents=[common], help="Compare full and reduced models on grids"
    )
    evaluate_parser.add_argument("--model", metavar="PATH", help="Full model file")
    evaluate_parser.add_argument("--subspace", metavar="PATH", help="Subspace model file")
    evaluate_parser.add_argument(
        "--json", dest="json_output", action="store_true", help="Print the summary as JSON"
    )
    evaluate_parser.set_defaults(func=cmd_evaluate)

    replicate_parser = subparsers.add_parser(
        "replicate-duffing", help="Train, optimise and evaluate the Duffing experiment"
    )
    replicate_parser.add_argument("--seed", type=int, help="Reseed train/test/init streams")
    replicate_parser.add_argument("--threads", type=int, help="Worker threads for the error grids")
    replicate_parser.add_argument("--out", metavar="DIR", help="Output directory")
    replicate_parser.add_argument(
        "--scale", choices=("full", "desk"), default="full", help="Experiment scale"
    )
    replicate_parser.set_defaults(func=cmd_replicate)

    check_parser = subparsers.add_parser("check", help="Run the property suite")
    check_parser.add_argument("--seed", type=int, default=0, help="Seed of the random instances")
    check_parser.add_argument(
        "--json", dest="json_output", action="store_true", help="Print results as JSON"
    )
    check_parser.set_defaults(func=cmd_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return EXIT_FAILURE
    configure_logging(args.verbose, args.quiet)

    try:
        return args.func(args)
    except KeyboardInterrupt:
        print("\nInterrupted by user", file=sys.stderr)
        return EXIT_FAILURE
    except ConfigError as e:
        return report_error(e, "Configuration error", EXIT_CONFIG, args.debug)
    except NumericalError as e:
        return report_error(e, "Numerical failure", EXIT_NUMERICAL, args.debug)
    except (GrassmannEDMDError, OSError) as e:
        return report_error(e, "Error", EXIT_FAILURE, args.debug)


if __name__ == "__main__":
    sys.exit(main())
