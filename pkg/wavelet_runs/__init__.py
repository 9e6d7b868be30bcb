"""Wavelet filtering of time series by the runs criterion.

A noisy series is approximated by a sparse wavelet expansion whose residuals
look as sign-random as possible, measured by the sum of squared run lengths
of the residual signs. A genetic algorithm chooses which coefficients are
nonzero and then tunes their values, with the coefficient budget taken from
standard minimax hard thresholding so the two filters compete on equal terms.

The ``wavelet-runs`` command filters word-frequency CSVs, generates noisy
test signals and reruns the benchmarks.
"""

from __future__ import annotations

import sys
from argparse import ArgumentParser, ArgumentTypeError
from pathlib import Path
from typing import TYPE_CHECKING, NoReturn

import numpy as np
from loguru import logger

from . import bench, plots
from .base import AcceptanceError, ConfigError, ExitCode, InvalidInputError
from .config import load_filter_config
from .datagen import NOISE_MODELS, BumpsSpec, NoiseModel, bumps, write_generated_csv
from .ingest import RunSpec, YearRange, method_choices, run_filter
from .pipeline import FilterConfig, FilterReport, filter_baseline, filter_runs_criterion

if TYPE_CHECKING:
    from argparse import Namespace
    from collections.abc import Sequence

__all__ = [
    "FilterConfig",
    "FilterReport",
    "build_parser",
    "filter_baseline",
    "filter_runs_criterion",
    "main",
]

# CalVer: YY.month.patch, e.g. first release of July 2022 == "22.7.1"
__version__ = "26.10.1"

# silent when embedded; main() turns logging on
logger.disable(__name__)

LOG_FORMAT = "{time:HH:mm:ss.SS} | {process} | {level} | {message}"


class _Parser(ArgumentParser):
    # usage errors exit 1, leaving 2 for bad data
    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(ExitCode.USAGE, f"{self.prog}: error: {message}\n")


def comma_separated_floats(raw_value: str) -> list[float]:
    try:
        return [float(s) for s in raw_value.split(",") if s.strip()]
    except ValueError:
        raise ArgumentTypeError(
            f"{raw_value!r} is not a comma-separated list of numbers"
        ) from None


def year_range(raw_value: str) -> YearRange:
    try:
        return YearRange.parse(raw_value)
    except ConfigError as e:
        raise ArgumentTypeError(str(e)) from None


def _filter_config(args: Namespace) -> FilterConfig:
    return load_filter_config(args.config) if args.config else FilterConfig()


def _run_filter(args: Namespace) -> ExitCode:
    return run_filter(
        RunSpec(
            input=args.input,
            output=args.output,
            tokens=tuple(args.token) if args.token is not None else None,
            years=args.years,
            method=args.method,
            config=args.config,
            seed=args.seed,
            plot=args.plot,
            workers=args.workers,
        )
    )


def _run_gen(args: Namespace) -> ExitCode:
    noise = NoiseModel(
        args.noise,
        sigma=args.sigma,
        lambda_min=args.lambda_min,
        lambda_max=args.lambda_max,
        alpha=args.alpha,
        scale=args.scale,
    )
    signal = bumps(BumpsSpec(n=args.length, target_std=args.target_std))
    rng = np.random.default_rng(args.seed or 0)
    sample = noise.apply(signal, rng)
    write_generated_csv(args.output, sample)
    if args.plot:
        cfg = _filter_config(args).with_seed(args.seed or 0)
        example = bench.compare_filters(noise.kind, sample, cfg)
        plots.write_law_plot(args.output.with_suffix(".svg"), [example])
    return ExitCode.OK


def _run_bench(args: Namespace) -> ExitCode:
    cfg = _filter_config(args)
    first = args.seed or 0
    seeds = range(first, first + args.trials)
    if args.experiment == "table1":
        summary = bench.run_table1(args.trials, cfg, seeds, workers=args.workers)
        write, check = bench.write_table1_csv, bench.check_table1
    else:
        summary = bench.run_fig2_sweep(
            args.sigmas, args.trials, cfg, seeds, workers=args.workers
        )
        write, check = bench.write_sweep_csv, bench.check_sweep
    print(bench.summary_table(summary))
    if args.output is not None:
        write(args.output, summary)
    if args.plot is not None:
        if args.experiment == "table1":
            plots.write_law_plot(args.plot, bench.law_examples(first, cfg))
        else:
            plots.write_sweep_plot(args.plot, summary.sweep)
    if args.check:
        check(summary)
    return ExitCode.OK


def _configure_logging(verbose: bool, quiet: bool) -> None:
    level = "DEBUG" if verbose else "WARNING" if quiet else "INFO"
    logger.remove()
    logger.add(sys.stderr, format=LOG_FORMAT, level=level)
    logger.enable(__name__)


def build_parser() -> ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument(
        "--verbose", action="store_true", help="Log every GA generation."
    )
    common.add_argument(
        "--quiet", action="store_true", help="Only log warnings and errors."
    )
    common.add_argument(
        "--seed", type=int, help="Seed for every random draw."
    )

    parser = _Parser(prog="wavelet-runs", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True, metavar="command")

    filter_cmd = commands.add_parser(
        "filter", parents=[common], help="Filter annual frequency series from a CSV."
    )
    filter_cmd.add_argument("--input", type=Path, required=True, help="Frequency CSV.")
    filter_cmd.add_argument("--output", type=Path, required=True, help="Filtered CSV.")
    filter_cmd.add_argument(
        "--token",
        action="append",
        help="Token to filter; repeat for several. Default: every token.",
    )
    filter_cmd.add_argument(
        "--years",
        type=year_range,
        default=YearRange(),
        help="Inclusive year window as FIRST:LAST (default 1800:2008).",
    )
    filter_cmd.add_argument("--method", choices=method_choices(), default="both")
    filter_cmd.add_argument("--config", type=Path, help="TOML filter config.")
    filter_cmd.add_argument(
        "--plot",
        action="store_true",
        help="Also write an SVG plot next to the output (needs matplotlib).",
    )
    filter_cmd.add_argument(
        "--workers", type=int, default=1, help="Filter tokens in this many processes."
    )
    filter_cmd.set_defaults(run=_run_filter)

    gen_cmd = commands.add_parser(
        "gen", parents=[common], help="Write a noisy Bumps signal as CSV."
    )
    gen_cmd.add_argument("--output", type=Path, required=True)
    gen_cmd.add_argument("--noise", choices=sorted(NOISE_MODELS), default="normal")
    gen_cmd.add_argument("--length", type=int, default=1024)
    gen_cmd.add_argument("--sigma", type=float, default=2.0)
    gen_cmd.add_argument("--lambda-min", type=float, default=0.5)
    gen_cmd.add_argument("--lambda-max", type=float, default=15.0)
    gen_cmd.add_argument("--alpha", type=float, default=1.3)
    gen_cmd.add_argument("--scale", type=float, default=1.0)
    gen_cmd.add_argument(
        "--target-std",
        type=float,
        help="Rescale the clean signal to this standard deviation before adding noise.",
    )
    gen_cmd.add_argument("--config", type=Path, help="TOML filter config for --plot.")
    gen_cmd.add_argument(
        "--plot",
        action="store_true",
        help="Filter the series with both methods and write an SVG next to the output.",
    )
    gen_cmd.set_defaults(run=_run_gen)

    bench_cmd = commands.add_parser("bench", help="Rerun the benchmarks.")
    experiments = bench_cmd.add_subparsers(
        dest="experiment", required=True, metavar="experiment"
    )
    for name, help_text in (
        ("table1", "Mean RMS of both filters under normal, Poisson and stable noise."),
        ("sweep", "Error ratio of the two filters against the normal noise level."),
    ):
        experiment = experiments.add_parser(name, parents=[common], help=help_text)
        experiment.add_argument("--trials", type=int, default=50)
        experiment.add_argument("--config", type=Path, help="TOML filter config.")
        experiment.add_argument("--output", type=Path, help="Write results as CSV.")
        experiment.add_argument("--plot", type=Path, help="Write an SVG figure here.")
        experiment.add_argument(
            "--check",
            action="store_true",
            help="Exit with status 3 if the results miss the acceptance bounds.",
        )
        experiment.add_argument(
            "--workers", type=int, default=1, help="Run trials in this many processes."
        )
        experiment.set_defaults(run=_run_bench)
    experiments.choices["sweep"].add_argument(
        "--sigmas",
        type=comma_separated_floats,
        default=list(bench.SWEEP_SIGMAS),
        help="Increasing noise levels, comma-separated.",
    )
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose, args.quiet)
    try:
        return int(args.run(args))
    except ConfigError as e:
        print(f"wavelet-runs: {e}", file=sys.stderr)
        return ExitCode.USAGE
    except AcceptanceError as e:
        print(f"wavelet-runs: acceptance check failed: {e}", file=sys.stderr)
        return ExitCode.ACCEPTANCE
    except (InvalidInputError, OSError) as e:
        print(f"wavelet-runs: {e}", file=sys.stderr)
        return ExitCode.DATA
