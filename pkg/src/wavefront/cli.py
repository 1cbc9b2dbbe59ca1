"""Command-line interface.

Exit codes: 0 success, 2 configuration problems (bad file, unknown key,
unknown subcommand), 1 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path
from typing import List, Optional

from .config import ConfigError, ScenarioConfig
from .geometry import ARCHITECTURES
from . import harness


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavefront",
        description="Single-aperture positioning from spherical wavefront curvature",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def common(p):
        p.add_argument("--config", type=str, default=None, help="scenario config file")
        p.add_argument("--seed", type=int, default=None, help="override the global seed")
        p.add_argument("--out", type=str, default=None, help="override the output directory")
        p.add_argument("--arch", type=str, default=None,
                       help="comma-separated architecture subset "
                            f"({', '.join(ARCHITECTURES)})")
        p.add_argument("--quadrature-step", type=float, default=None,
                       help="surface quadrature step as a fraction of the wavelength")

    common(sub.add_parser("fraunhofer", help="far-field onset table"))
    common(sub.add_parser("rmse-sweep", help="RMSE vs range Monte Carlo sweep"))
    common(sub.add_parser("rmse-map", help="RMSE map over the room"))
    common(sub.add_parser("sir-sweep", help="single-interferer radial SIR sweeps"))
    common(sub.add_parser("sir-map", help="single-interferer SIR room map"))
    common(sub.add_parser("coverage-ppp", help="Poisson-field coverage-rate maps"))
    dump = sub.add_parser("dump-response", help="per-antenna response of one source")
    common(dump)
    dump.add_argument("--d", type=float, default=10.0, help="source range (m)")
    dump.add_argument("--theta-deg", type=float, default=0.0, help="source angle (deg)")
    return parser


def load_config(args) -> ScenarioConfig:
    cfg = ScenarioConfig.load(args.config) if args.config else ScenarioConfig().validate()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.arch is not None:
        overrides["architectures"] = [a.strip() for a in args.arch.split(",") if a.strip()]
    if args.quadrature_step is not None:
        overrides["quadrature_step_fraction"] = args.quadrature_step
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides).validate()
    return cfg


COMMANDS = {
    "fraunhofer": harness.run_fraunhofer,
    "rmse-sweep": harness.run_rmse_sweep,
    "rmse-map": harness.run_rmse_map,
    "sir-sweep": harness.run_sir_sweep,
    "sir-map": harness.run_sir_map,
    "coverage-ppp": harness.run_ppp_map,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out_dir = Path(cfg.out_dir)
    try:
        if args.command == "dump-response":
            paths = harness.run_dump_response(cfg, out_dir, args.d, args.theta_deg)
        else:
            paths = COMMANDS[args.command](cfg, out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure: report, exit 1
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
