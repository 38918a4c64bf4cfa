"""Command-line interface.

Subcommands: simulate-classical, simulate-quantum, analyze-collapse,
analyze-crossing, make-synthetic, validate.  Exit codes: 0 success,
2 configuration error, 3 numerical/analysis error, 4 capacity error.
"""

import argparse
import sys

from .config import ExperimentConfig, load_config, parse_config
from .errors import AnalysisError, CapacityError, ConfigError, NumericalError

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CAPACITY = 4


def _add_common(parser, needs_config: bool):
    parser.add_argument("--config", required=needs_config, help="configuration file")
    parser.add_argument("--out", help="output directory (overrides [output] out_dir)")
    parser.add_argument("--seed", type=int, help="master seed (overrides [ensemble] seed)")
    parser.add_argument("--threads", type=int, help="worker count (overrides [ensemble] threads)")
    parser.add_argument(
        "--override", action="append", default=[], metavar="KEY=VALUE",
        help="set a config option as section.key=value (repeatable)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isingquench",
        description="Critical Ising quench ensembles and scaling-collapse analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate-classical", help="Glauber quench ensembles at T_c")
    _add_common(p, needs_config=True)

    p = sub.add_parser("simulate-quantum", help="exact quantum quenches at g_c")
    _add_common(p, needs_config=True)

    p = sub.add_parser("analyze-collapse", help="estimate the collapse exponent")
    _add_common(p, needs_config=False)
    p.add_argument("inputs", nargs="+", help="series CSV files or directories")

    p = sub.add_parser("analyze-crossing", help="relative-spread crossing diagnostic")
    _add_common(p, needs_config=False)
    p.add_argument("--w", type=float, required=True, help="plotting exponent for the x axis")
    p.add_argument("inputs", nargs="+", help="series CSV files or directories")

    p = sub.add_parser("make-synthetic", help="exactly-collapsing fixture series")
    _add_common(p, needs_config=True)

    p = sub.add_parser("validate", help="run the fast invariant suite")

    return parser


def _config_from_args(args, require_seed: bool) -> ExperimentConfig:
    overrides = list(args.override)
    if args.seed is not None:
        overrides.append(f"ensemble.seed={args.seed}")
    if args.threads is not None:
        overrides.append(f"ensemble.threads={args.threads}")
    if args.config:
        config = load_config(args.config, overrides)
    else:
        config = parse_config("", overrides)
    if args.out:
        config.out_dir = args.out
    if require_seed and config.seed is None:
        raise ConfigError("[ensemble] seed: required (pass --seed or set it in the config)")
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AnalysisError, NumericalError) as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY


def _dispatch(args) -> int:
    if args.command == "validate":
        from .selfcheck import run_selfcheck

        return 0 if run_selfcheck() else EXIT_NUMERICAL

    if args.command in ("simulate-classical", "simulate-quantum", "make-synthetic"):
        from . import runner

        config = _config_from_args(args, require_seed=True).validate()
        out_dir = {
            "simulate-classical": runner.simulate_classical,
            "simulate-quantum": runner.simulate_quantum,
            "make-synthetic": runner.make_synthetic_files,
        }[args.command](config, config.out_dir)
        print(f"wrote series and manifest to {out_dir}")
        return 0

    from . import reports
    from .io import collect_series_paths

    config = _config_from_args(args, require_seed=False)
    paths = collect_series_paths(args.inputs)
    if args.command == "analyze-collapse":
        report = reports.analyze_collapse(paths, config.out_dir, config if args.config else None)
        print(
            f"w_rep = {report['w_rep']:.4f}  sigma_sys = {report['sigma_sys']:.4f}  "
            f"band(k={report['k']:g}) = [{report['band'][0]:.4f}, {report['band'][1]:.4f}]  "
            f"({report['n_accepted']}/{report['n_windows']} windows accepted)"
        )
        print(f"wrote report to {config.out_dir}")
        return 0
    if args.command == "analyze-crossing":
        report = reports.analyze_crossing(paths, args.w, config.out_dir,
                                          config if args.config else None)
        print(
            f"Delta minimum {report['delta_min']:.4f} at x = {report['x_min']:.4g} "
            f"(L = {report['L_values']}, h = {report['h']:g})"
        )
        print(f"wrote report to {config.out_dir}")
        return 0
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    raise SystemExit(main())
