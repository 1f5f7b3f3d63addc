"""Command-line interface.

    emlab <experiment> [--config FILE] [--set key=value ...] [--output-dir DIR]

Experiments: simulate, linear-decay, resonances, phase-bound, cs-sweep,
scattering.  Configuration keys and defaults are listed in
docs/config_schema.md; unknown keys are rejected.  Exit codes: 0 success,
2 configuration error, 3 numerical divergence.
"""

import argparse
import json
import sys

from .config import EXPERIMENTS, load_config
from .errors import ConfigError, EmlabError


def build_parser():
    parser = argparse.ArgumentParser(
        prog="emlab",
        description="Pseudo-spectral Euler-Maxwell laboratory: simulation and "
                    "resonance analysis experiments.")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", default=None, help="configuration file")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override one config key")
        p.add_argument("--output-dir", default=None,
                       help="output directory (overrides config and "
                            "EMLAB_OUTPUT_DIR)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.experiment, path=args.config,
                          overrides=args.overrides, output_dir=args.output_dir)
    except (ConfigError, OSError) as exc:
        print(json.dumps({"error": "config", "message": str(exc),
                          "key": getattr(exc, "key", None)}),
              file=sys.stderr)
        return 2
    from .experiments import run_experiment
    try:
        return run_experiment(cfg)
    except EmlabError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
