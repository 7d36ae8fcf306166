"""``tactsim`` command line: evolve, scaling, maps, portrait, approx.

Exit codes: 0 success, 1 configuration error, 2 numerical failure, 3 I/O error.
"""
from __future__ import annotations

import argparse
import sys

from .config import ConfigError, ExperimentConfig, FORMATS, load
from .dynamics import NumericalError
from .experiments import RUNNERS

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3


def build_parser():
    parser = argparse.ArgumentParser(prog="tactsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {"evolve": "trajectory and metrology sweep",
             "scaling": "best squeezing and QFI versus N",
             "maps": "Husimi/Wigner maps at events A-H",
             "portrait": "mean-field vector field, fixed points, trajectories",
             "approx": "Gaussian-model and frozen-spin closed forms"}
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", metavar="PATH", help="TOML configuration file")
        p.add_argument("--out", metavar="DIR", help="output directory")
        p.add_argument("--n", type=int, nargs="+", metavar="N", help="particle number(s)")
        p.add_argument("--tmax", type=float, help="end of the chi*t window")
        p.add_argument("--samples", type=int, help="number of time samples")
        p.add_argument("--format", choices=FORMATS, help="table format")
        if name == "scaling":
            p.add_argument("--workers", type=int, help="parallel processes")
    return parser


def resolve_config(args):
    """File values first, then command-line flags (last writer wins)."""
    config = load(args.config) if args.config else ExperimentConfig()
    overrides = {}
    for flag, name in (("out", "out"), ("n", "N"), ("tmax", "t_max"),
                       ("samples", "samples"), ("format", "format"), ("workers", "workers")):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[name] = tuple(value) if flag == "n" else value
    return config.replace(**overrides) if overrides else config


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        manifest = RUNNERS[args.command](config)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for entry in manifest.files:
        print(f"{config.out}/{entry['path']}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
