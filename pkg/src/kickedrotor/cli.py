"""Command-line entry point: ``kickedrotor <mode> [flags]``.

Exit codes: 0 success, 2 configuration error, 3 numeric-guard failure,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from kickedrotor.errors import NumericGuardError, ParameterError
from kickedrotor.experiment import MODES, ConfigError, build_config, read_config_file, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

# flag name -> config key
_FLAGS = {
    "kappa": "kappa",
    "k": "k",
    "tau": "tau",
    "schedule": "schedule",
    "kicks": "kicks",
    "basis": "basis",
    "ensemble": "ensemble",
    "seed": "seed",
    "boundary_mult": "boundary_mult",
    "init": "init",
    "out": "out",
    "fit_window": "fit_window",
    "break_threshold": "break_threshold",
    "break_sustained": "break_sustained",
    "grid": "grid",
    "section_kicks": "section_kicks",
    "band": "band",
    "sweep_mode": "sweep_mode",
    "jobs": "jobs",
    "input": "input",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 too; keep the message style uniform
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: config error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat 'key = value' config file; flags override it")
    common.add_argument("--kappa", help="classical kick strength (comma list in sweep mode)")
    common.add_argument("--k", help="quantum kick strength k = kappa / tau, instead of --kappa")
    common.add_argument("--tau", help="effective Planck constant (comma list in sweep mode)")
    common.add_argument("--schedule", help="kr, mkr or genN; comma list runs several arms")
    common.add_argument("--kicks", help="number of kicks")
    common.add_argument("--basis", help="quantum basis half-size B (e.g. 131072 or 2^17); default from kicks")
    common.add_argument("--ensemble", help="classical ensemble size")
    common.add_argument("--seed", help="random seed for sampled ensembles")
    common.add_argument("--boundary-mult", dest="boundary_mult", help="spatial period multiplier M (period 2*pi*M)")
    common.add_argument("--init", help="fock:m0 | gaussian:s | uniform | wigner[:s]")
    common.add_argument("--out", help="output directory (default $KICKEDROTOR_OUT/<mode> or runs/<mode>)")
    common.add_argument("--fit-window", dest="fit_window", help="LO:HI kicks for the log-log fit")
    common.add_argument("--break-threshold", dest="break_threshold", help="relative deviation defining the break time")
    common.add_argument("--break-sustained", dest="break_sustained", help="consecutive kicks above threshold")
    common.add_argument("--grid", help="phase-space grid points per axis")
    common.add_argument("--section-kicks", dest="section_kicks", help="kicks per phase-space trajectory")
    common.add_argument("--band", help="|m| band LO:HI for distribution ratios")
    common.add_argument("--sweep-mode", dest="sweep_mode", help="mode run at each sweep point")
    common.add_argument("--jobs", help="parallel sweep workers")
    common.add_argument("--input", help="energy CSV for the fit mode")
    common.add_argument("--no-plots", action="store_true", help="skip SVG figures")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="kickedrotor", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="mode", required=True, parser_class=_Parser)
    helps = {
        "phase-space": "stroboscopic sections and transporting-island fractions",
        "evolve": "energy growth of a single quantum or classical run",
        "compare": "quantum vs classical energies, break time and exponents",
        "distribution": "final momentum distributions and control contrast",
        "sweep": "Cartesian grid over kappa, tau and schedule",
        "fit": "log-log fit of an existing energy CSV",
    }
    for mode in MODES:
        sub.add_parser(mode, parents=[common], help=helps[mode])
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    overrides = {"mode": args.mode}
    for flag, key in _FLAGS.items():
        value = getattr(args, flag)
        if value is not None:
            overrides[key] = value
    if args.no_plots:
        overrides["plots"] = "false"
    try:
        file_values = read_config_file(args.config) if args.config else {}
        file_values.pop("mode", None)
        cfg = build_config(file_values, overrides)
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        manifest = run_experiment(cfg)
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericGuardError as exc:
        print(f"numeric guard: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(json.dumps({"out": manifest.out_dir, "status": manifest.to_dict()["status"],
                      "files": [o["path"] for o in manifest.outputs]}, indent=2))
    for f in manifest.failures:
        print(f"numeric guard: {f}", file=sys.stderr)
    return EXIT_OK if manifest.ok else EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
