"""Command-line entry points.

Exit codes: 0 success, 2 config unreadable/unparseable, 3 config invalid,
4 run completed but a truncation warning was raised under --strict.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from ._version import __version__
from .config import ConfigError, ValidationError, expand_sweep, load_config
from .physical import physical_units
from .runner import run_scenario

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fluxlattice",
        description="Driven photonic lattices with artificial magnetic flux: "
                    "exact and effective evolution, effective hoppings, "
                    "magnetic band structure, and fabrication-unit conversion.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario config "
                                     "(INI file or metadata JSON of a previous run)")
    run.add_argument("config", help="path to the scenario config")
    run.add_argument("--out-dir", default=".", help="directory for output files")
    run.add_argument("--strict", action="store_true",
                     help="treat window-truncation warnings as fatal (exit 4)")
    run.add_argument("--quiet", action="store_true",
                     help="suppress the run summary on stdout")

    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("config", help="path to the scenario config")

    sweep = sub.add_parser("sweep", help="expand a template config and a "
                                         "parameter grid into numbered configs")
    sweep.add_argument("template", help="scenario config used as the base")
    sweep.add_argument("grid", help="INI of comma-separated value lists, "
                                    "sections/keys mirroring the template")
    sweep.add_argument("--out-dir", default="sweep",
                       help="directory for the generated configs")

    units = sub.add_parser("units", help="convert normalized drive parameters "
                                         "to fabrication numbers")
    units.add_argument("--J", type=float, required=True, metavar="RATE",
                       help="bare coupling rate J (1/cm)")
    units.add_argument("--Gamma", type=float, required=True,
                       help="dimensionless drive strength A/omega")
    units.add_argument("--omega-over-J", type=float, required=True,
                       help="modulation frequency in units of J")
    units.add_argument("--M", type=int, default=1,
                       help="resonance harmonic (default 1)")
    units.add_argument("--d", type=float, required=True, metavar="METERS",
                       help="waveguide spacing (m)")
    units.add_argument("--wavelength", type=float, required=True,
                       metavar="METERS", help="operating wavelength (m)")
    units.add_argument("--n-s", type=float, required=True,
                       help="substrate refractive index")
    units.add_argument("--J-t-max", type=float, default=10.0,
                       help="run horizon J*t realized by the sample length")
    units.add_argument("--json", action="store_true", dest="as_json",
                       help="emit the result as JSON")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            result = run_scenario(args.config, out_dir=args.out_dir,
                                  strict=args.strict, quiet=args.quiet)
            return result.exit_code
        if args.command == "validate":
            scenario = load_config(args.config)
            print(f"OK: {scenario.kind} scenario {scenario.label!r}")
            return 0
        if args.command == "sweep":
            paths = expand_sweep(args.template, args.grid, args.out_dir)
            print(f"wrote {len(paths)} config(s) to {args.out_dir}")
            for path in paths:
                print(f"  {path}")
            return 0
        if args.command == "units":
            params = physical_units(
                J_per_cm=args.J, Gamma=args.Gamma,
                omega_over_J=args.omega_over_J, M=args.M, d_m=args.d,
                lambda_m=args.wavelength, n_s=args.n_s, J_t_max=args.J_t_max)
            record = dataclasses.asdict(params)
            if args.as_json:
                print(json.dumps(record, indent=2, sort_keys=True))
            else:
                for key, value in record.items():
                    print(f"{key} = {value:.10g}")
            return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 3
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
