"""Command-line entry point: validate configs, run experiments, list experiments.

Exit codes: 0 success, 1 config validation failure, 2 runtime failure,
3 validity-horizon breach.  The output directory resolves in order:
--output-dir flag, DIRACLAB_OUTPUT_DIR environment variable, config value.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import experiment_names, parse_config
from .errors import ConfigParseError, LabError
from .experiments import run_experiment

ENV_OUTPUT_DIR = "DIRACLAB_OUTPUT_DIR"


def _load_config(path: str):
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        print(f"error: cannot read config {path}: {exc}", file=sys.stderr)
        return None
    try:
        return parse_config(text)
    except ConfigParseError as exc:
        print(f"invalid config {path}:", file=sys.stderr)
        for item in exc.errors:
            print(f"  - {item}", file=sys.stderr)
        return None


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="diraclab",
        description="Desk-scale experiments on positive-energy Dirac fields, "
        "detector operators, and a Fock-lattice jump process.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="run an experiment from a config file")
    run_parser.add_argument("config", help="path to a key = value config file")
    run_parser.add_argument("--output-dir", default=None, help="override the output directory")

    validate_parser = sub.add_parser("validate", help="check a config file without running")
    validate_parser.add_argument("config", help="path to a key = value config file")

    sub.add_parser("list-experiments", help="print the available experiment names")

    args = parser.parse_args(argv)

    if args.command == "list-experiments":
        for name in experiment_names():
            print(name)
        return 0

    config = _load_config(args.config)
    if config is None:
        return 1

    if args.command == "validate":
        print(f"OK: experiment '{config.experiment}' (seed {config.seed})")
        return 0

    output_dir = args.output_dir or os.environ.get(ENV_OUTPUT_DIR) or config.output_dir
    try:
        manifest = run_experiment(config, output_dir)
    except LabError as exc:
        print(f"error running '{config.experiment}': {exc}", file=sys.stderr)
        return 2
    for name, digest in sorted(manifest.artifacts.items()):
        print(f"{name}  sha256={digest}")
    print(
        f"{config.experiment}: {len(manifest.artifacts)} artifacts in {output_dir} "
        f"({manifest.duration_seconds:.2f}s)"
    )
    if not manifest.all_valid:
        breached = [k for k, ok in manifest.validity_flags.items() if not ok]
        print(f"validity breach: {', '.join(breached)}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
