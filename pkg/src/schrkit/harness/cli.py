"""Command-line interface.

Subcommands: run, stability, lyapunov, converge, presets.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from ..errors import SchrkitError
from ..rdsolver import get_backend
from . import runner
from .presets import PRESET_NAMES, get_preset
from .scenario import LYAPUNOV_CHOICES, load_scenario


class UsageError(Exception):
    """Bad invocation; mapped to exit code 2."""


def _add_scenario_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", metavar="PATH", help="scenario config file")
    sub.add_argument("--preset", metavar="NAME",
                     help=f"built-in scenario: {', '.join(PRESET_NAMES)}")
    sub.add_argument("--out", metavar="DIR", default=".",
                     help="output directory (default: current directory)")


def _resolve_scenario(args):
    if bool(args.config) == bool(args.preset):
        raise UsageError("exactly one of --config or --preset is required")
    if args.preset:
        s = get_preset(args.preset)
    else:
        s = load_scenario(args.config)
    s = s.with_out_dir(args.out)
    if getattr(args, "stepper", None):
        s = dataclasses.replace(
            s, config=dataclasses.replace(s.config, stepper=args.stepper))
    return s


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="schrkit",
        description="Reaction-diffusion cocaine-heroin epidemic toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate a scenario and export CSVs")
    _add_scenario_flags(p_run)
    p_run.add_argument("--stepper", choices=("explicit", "imex"),
                       help="override the scenario stepper")
    p_run.add_argument("--threads", type=int, default=1,
                       help="worker threads (integration itself is sequential)")

    p_st = sub.add_parser("stability", help="classify equilibria across modes")
    _add_scenario_flags(p_st)
    p_st.add_argument("--jmax", type=int, default=50,
                      help="largest Laplacian mode index (default 50)")
    p_st.add_argument("--threads", type=int, default=1,
                      help="threads for per-mode root computations")

    p_ly = sub.add_parser("lyapunov", help="dissipation trace along a run")
    _add_scenario_flags(p_ly)
    p_ly.add_argument("--functional", default="auto",
                      choices=[c for c in LYAPUNOV_CHOICES if c != "none"],
                      help="functional choice (default: auto)")

    p_cv = sub.add_parser("converge",
                          help="manufactured-solution convergence study")
    p_cv.add_argument("--kind", choices=("spatial", "temporal"),
                      required=True)
    p_cv.add_argument("--levels", default=None,
                      help="comma-separated refinement levels "
                           "(mx values or dt values)")
    p_cv.add_argument("--out", metavar="DIR", default=".")
    p_cv.add_argument("--config", metavar="PATH",
                      help="optional scenario supplying d and the grid")
    p_cv.add_argument("--preset", metavar="NAME")

    sub.add_parser("presets", help="list built-in scenarios")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        if args.command == "presets":
            for name in PRESET_NAMES:
                s = get_preset(name)
                print(f"{name}: {s.config.model.value} model, "
                      f"t_end={s.config.t_end:g}, dt={s.config.dt:g}, "
                      f"mx={s.config.grid.mx}")
            print(f"kernel backend: {get_backend()}")
            return runner.EXIT_OK

        if args.command == "run":
            s = _resolve_scenario(args)
            return runner.run(s, threads=args.threads)

        if args.command == "stability":
            s = _resolve_scenario(args)
            return runner.stability_report_cmd(s, j_max=args.jmax,
                                               threads=args.threads)

        if args.command == "lyapunov":
            s = _resolve_scenario(args)
            return runner.lyapunov_cmd(s, args.functional)

        if args.command == "converge":
            d, length, mx = 0.1, 2.0, 40
            if args.config or args.preset:
                base = get_preset(args.preset) if args.preset \
                    else load_scenario(args.config)
                d = base.config.params.d
                length = base.config.grid.length
                mx = base.config.grid.mx
            if args.levels:
                levels = [v.strip() for v in args.levels.split(",") if v.strip()]
            else:
                levels = ["20", "40", "80"] if args.kind == "spatial" \
                    else ["4e-3", "2e-3", "1e-3"]
            return runner.convergence_study_cmd(
                args.kind, levels, args.out, d=d, length=length, mx=mx)

        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"usage error: {exc}")
        return runner.EXIT_USAGE
    except SchrkitError as exc:
        print(f"error: {exc}")
        return runner.EXIT_CONFIG


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
