"""Command line entry point: ``floqbound <command> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from floqbound.harness.config import ConfigError, ExperimentConfig, load_config, with_overrides
from floqbound.harness.experiments import (
    NumericalCheckError,
    cmd_compare,
    cmd_derive,
    cmd_fig,
    cmd_strobe,
    cmd_sweep_omega,
    failed_checks,
    format_derive,
)
from floqbound.linalg import NotHermitianError
from floqbound.rabi import OutsideValidityError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDITY = 3
EXIT_NUMERICAL = 4

log = logging.getLogger("floqbound")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="YAML experiment document")
    p.add_argument("--g", type=float, help="drive strength (rabi)")
    p.add_argument("--omega", type=float, help="drive frequency (rabi)")
    p.add_argument("--omega0", type=float, help="qubit splitting (rabi); defaults to --omega")
    p.add_argument("--order", type=int, help="effective Hamiltonian order L")
    p.add_argument("--t-max", type=float, dest="t_max")
    p.add_argument("--samples", type=int)
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--step", type=float, help="integrator step")
    p.add_argument("--method", choices=("exp2", "cf4", "exp-midpoint-2", "magnus-cf4"))
    p.add_argument("--grid", type=int, dest="grid_points", help="grid size for sup norms")
    p.add_argument("--strict-bounds", action="store_true", help="fail on bound validity violations")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="floqbound",
        description="Effective Hamiltonians and error bounds for periodically driven systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("derive", parents=[common], help="print H_eff terms and bound ingredients")
    sub.add_parser("compare", parents=[common], help="distance and bound curves in time")
    sub.add_parser("strobe", parents=[common], help="distances at multiples of the period")
    sub.add_parser("sweep-omega", parents=[common], help="distances against the drive frequency")
    fig = sub.add_parser("fig", parents=[common], help="data behind figures 1-5")
    fig.add_argument("which", type=int, choices=range(1, 6))
    return parser


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    return with_overrides(
        cfg,
        g=args.g,
        omega=args.omega,
        omega0=args.omega0,
        order=args.order,
        t_max=args.t_max,
        samples=args.samples,
        path=args.out,
        format=args.format,
        step=args.step,
        method=args.method,
        grid_points=args.grid_points,
    )


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = _config(args)
        if args.command == "derive":
            summary = cmd_derive(cfg)
            text = json.dumps(summary, indent=1) + "\n" if cfg.output.format == "json" else format_derive(summary)
            _emit(text, cfg.output.path)
            return EXIT_OK
        if args.command == "compare":
            table = cmd_compare(cfg, args.strict_bounds)
        elif args.command == "strobe":
            table = cmd_strobe(cfg, args.strict_bounds)
        elif args.command == "sweep-omega":
            table = cmd_sweep_omega(cfg, args.strict_bounds)
        else:
            table = cmd_fig(cfg, args.which, args.strict_bounds)
        _emit(table.dumps(cfg.output.format), cfg.output.path)
        bad = failed_checks(table)
        if bad:
            log.error("numerical checks failed: %s", ", ".join(bad))
            return EXIT_NUMERICAL
        return EXIT_OK
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except OutsideValidityError as exc:
        log.error("validity-region error: %s", exc)
        return EXIT_VALIDITY
    except (NotHermitianError, NumericalCheckError) as exc:
        log.error("numerical assertion failed: %s", exc)
        return EXIT_NUMERICAL
    except ValueError as exc:
        log.error("invalid request: %s", exc)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
