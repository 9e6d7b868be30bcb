"""Benchmarks comparing the runs-criterion filter with minimax thresholding.

``run_table1`` filters noisy Bumps under three noise laws and averages the RMS
error against the truth over trials. ``run_fig2_sweep`` tracks the error ratio
of the two methods as the normal noise level grows.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from itertools import repeat
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
import pandas as pd
from loguru import logger

from .base import AcceptanceError, InvalidInputError, samples_of
from .datagen import CSV_FLOAT_FORMAT, BumpsSpec, NoiseModel, bumps
from .pipeline import FilterConfig, filter_baseline, filter_runs_criterion

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence
    from pathlib import Path

    from .base import SeriesLike, TimeSeries
    from .datagen import NoisySeries

TABLE1_LAWS = (
    NoiseModel("normal", sigma=2.0),
    NoiseModel("poisson", lambda_min=0.5, lambda_max=15.0),
    NoiseModel("stable", alpha=1.3, scale=1.0),
)
# published mean RMS (baseline, runs criterion) per noise law
PUBLISHED_RMS = {
    "normal": (0.6792, 0.3944),
    "poisson": (0.7846, 0.5064),
    "stable": (1.8670, 0.8794),
}
SWEEP_SIGMAS = (0.5, 1.0, 2.0, 3.0, 4.0, 6.0)
# sweep trials draw from streams disjoint from the noise-law trials
_SWEEP_STREAM = 1000


def rms(a: SeriesLike, b: SeriesLike) -> float:
    x, y = samples_of(a), samples_of(b)
    if x.shape != y.shape:
        raise InvalidInputError(f"length mismatch: {x.size} != {y.size}")
    return float(np.sqrt(np.mean((x - y) ** 2)))


class TrialResult(NamedTuple):
    noise_kind: str
    seed: int
    rms_baseline: float
    rms_runs: float
    k: int
    wall_time: float
    # noise level for sweep trials
    sigma: float | None = None

    @property
    def ratio(self) -> float:
        return self.rms_runs / self.rms_baseline


class LawSummary(NamedTuple):
    noise_kind: str
    trials: int
    mean_rms_baseline: float
    mean_rms_runs: float
    median_rms_baseline: float
    median_rms_runs: float

    @property
    def ratio(self) -> float:
        """Ratio of mean errors, the form the published values are quoted in."""
        return self.mean_rms_runs / self.mean_rms_baseline


class SweepPoint(NamedTuple):
    sigma: float
    # mean over trials of the per-trial error ratio
    ratio: float
    trials: int


@dataclass(frozen=True)
class BenchSummary:
    laws: tuple[LawSummary, ...] = ()
    sweep: tuple[SweepPoint, ...] = ()
    results: tuple[TrialResult, ...] = ()


class LawExample(NamedTuple):
    """One noisy realisation with both filtered versions, for plotting."""

    noise_kind: str
    noisy: TimeSeries
    truth: TimeSeries
    baseline: TimeSeries
    runs: TimeSeries
    k: int


def compare_filters(
    noise_kind: str, sample: NoisySeries, cfg: FilterConfig
) -> LawExample:
    baseline = filter_baseline(sample.noisy, cfg)
    runs = filter_runs_criterion(sample.noisy, cfg)
    assert cfg.k_override is not None or runs.k == baseline.k, "unequal budgets"
    return LawExample(
        noise_kind, sample.noisy, sample.truth, baseline.filtered, runs.filtered, runs.k
    )


def filter_example(
    noise: NoiseModel,
    seed: int,
    stream: int,
    cfg: FilterConfig,
    signal: TimeSeries,
) -> LawExample:
    """Filter one noisy realisation with both methods at the same budget."""
    noise_seed, ga_seed = np.random.SeedSequence([seed, stream]).spawn(2)
    sample = noise.apply(signal, np.random.default_rng(noise_seed))
    trial_cfg = cfg.with_seed(int(ga_seed.generate_state(1)[0]))
    return compare_filters(noise.kind, sample, trial_cfg)


def run_trial(
    noise: NoiseModel,
    seed: int,
    stream: int,
    cfg: FilterConfig,
    signal: TimeSeries,
) -> TrialResult:
    start = time.perf_counter()
    example = filter_example(noise, seed, stream, cfg, signal)
    wall_time = time.perf_counter() - start

    result = TrialResult(
        noise_kind=noise.kind,
        seed=seed,
        rms_baseline=rms(example.baseline, example.truth),
        rms_runs=rms(example.runs, example.truth),
        k=example.k,
        wall_time=wall_time,
        sigma=noise.sigma if noise.kind == "normal" else None,
    )
    logger.info(
        "{} seed {}: rms baseline {:.4f}, runs {:.4f} (K = {}, {:.1f}s)",
        noise.kind,
        seed,
        result.rms_baseline,
        result.rms_runs,
        result.k,
        wall_time,
    )
    return result


def _seed_list(trials: int, seeds: Sequence[int] | None) -> list[int]:
    if trials < 1:
        raise InvalidInputError(f"trials must be positive, got {trials}")
    if seeds is None:
        return list(range(trials))
    if len(seeds) != trials:
        raise InvalidInputError(f"got {len(seeds)} seeds for {trials} trials")
    return [int(s) for s in seeds]


def _run_all(
    tasks: Iterable[tuple[NoiseModel, int, int]],
    cfg: FilterConfig,
    signal: TimeSeries,
    workers: int,
) -> list[TrialResult]:
    noises, seeds, streams = zip(*tasks)
    if workers <= 1:
        return list(map(run_trial, noises, seeds, streams, repeat(cfg), repeat(signal)))
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(
            executor.map(run_trial, noises, seeds, streams, repeat(cfg), repeat(signal))
        )


def _summarise_law(kind: str, results: Sequence[TrialResult]) -> LawSummary:
    baseline = np.array([r.rms_baseline for r in results])
    runs = np.array([r.rms_runs for r in results])
    return LawSummary(
        noise_kind=kind,
        trials=len(results),
        mean_rms_baseline=float(np.mean(baseline)),
        mean_rms_runs=float(np.mean(runs)),
        median_rms_baseline=float(np.median(baseline)),
        median_rms_runs=float(np.median(runs)),
    )


def run_table1(
    trials: int,
    cfg: FilterConfig | None = None,
    seeds: Sequence[int] | None = None,
    workers: int = 1,
    laws: Sequence[NoiseModel] = TABLE1_LAWS,
    signal: BumpsSpec | None = None,
) -> BenchSummary:
    cfg = cfg or FilterConfig()
    seed_list = _seed_list(trials, seeds)
    bumps_signal = bumps(signal)
    tasks = [(law, seed, i) for i, law in enumerate(laws) for seed in seed_list]
    logger.info(
        "noise-law benchmark: {} trials per law over {} samples", trials, bumps_signal.n
    )

    results = _run_all(tasks, cfg, bumps_signal, workers)
    order = {law.kind: i for i, law in enumerate(laws)}
    results.sort(key=lambda r: (order[r.noise_kind], r.seed))
    summaries = tuple(
        _summarise_law(law.kind, [r for r in results if r.noise_kind == law.kind])
        for law in laws
    )
    return BenchSummary(laws=summaries, results=tuple(results))


def law_examples(
    seed: int = 0,
    cfg: FilterConfig | None = None,
    laws: Sequence[NoiseModel] = TABLE1_LAWS,
    signal: BumpsSpec | None = None,
) -> list[LawExample]:
    """The trial ``run_table1`` draws for ``seed`` under each law, kept whole."""
    cfg = cfg or FilterConfig()
    bumps_signal = bumps(signal)
    return [
        filter_example(law, seed, i, cfg, bumps_signal) for i, law in enumerate(laws)
    ]


def run_fig2_sweep(
    sigmas: Sequence[float] = SWEEP_SIGMAS,
    trials: int = 50,
    cfg: FilterConfig | None = None,
    seeds: Sequence[int] | None = None,
    workers: int = 1,
    signal: BumpsSpec | None = None,
) -> BenchSummary:
    if len(sigmas) == 0:
        raise InvalidInputError("sweep needs at least one noise level")
    if any(b <= a for a, b in zip(sigmas, sigmas[1:])):
        raise InvalidInputError(f"noise levels must be strictly increasing, got {sigmas}")
    cfg = cfg or FilterConfig()
    seed_list = _seed_list(trials, seeds)
    bumps_signal = bumps(signal)
    base = NoiseModel("normal")
    tasks = [
        (replace(base, sigma=float(sigma)), seed, _SWEEP_STREAM + i)
        for i, sigma in enumerate(sigmas)
        for seed in seed_list
    ]

    results = _run_all(tasks, cfg, bumps_signal, workers)
    results.sort(key=lambda r: (r.sigma, r.seed))
    points = []
    for sigma in sigmas:
        ratios = [r.ratio for r in results if r.sigma == sigma]
        points.append(SweepPoint(float(sigma), float(np.mean(ratios)), len(ratios)))
    return BenchSummary(sweep=tuple(points), results=tuple(results))


def check_table1(summary: BenchSummary, max_ratio: float = 0.9) -> None:
    """Raise AcceptanceError unless the runs criterion wins under every law
    with an error ratio of at most ``max_ratio``."""
    failures = []
    for law in summary.laws:
        if not law.mean_rms_runs < law.mean_rms_baseline:
            failures.append(
                f"{law.noise_kind}: runs criterion {law.mean_rms_runs:.4f} "
                f"not below baseline {law.mean_rms_baseline:.4f}"
            )
        elif law.ratio > max_ratio:
            failures.append(f"{law.noise_kind}: ratio {law.ratio:.4f} > {max_ratio}")
    if failures:
        raise AcceptanceError("; ".join(failures))


def check_sweep(
    summary: BenchSummary, max_ratio: float = 1.05, require_rise: bool = True
) -> None:
    """Raise AcceptanceError unless every ratio lies in ``(0, max_ratio)`` and,
    with ``require_rise``, the ratio at the largest noise level exceeds the
    smallest ratio on the grid."""
    points = summary.sweep
    if not points:
        raise AcceptanceError("sweep summary is empty")
    failures = [
        f"sigma {p.sigma:g}: ratio {p.ratio:.4f} outside (0, {max_ratio})"
        for p in points
        if not 0 < p.ratio < max_ratio
    ]
    lowest = min(points, key=lambda p: p.ratio)
    if require_rise and len(points) > 1 and not points[-1].ratio > lowest.ratio:
        failures.append(
            f"ratio at sigma {points[-1].sigma:g} ({points[-1].ratio:.4f}) does not "
            f"exceed the lowest ratio, {lowest.ratio:.4f} at sigma {lowest.sigma:g}"
        )
    if failures:
        raise AcceptanceError("; ".join(failures))


def summary_table(summary: BenchSummary) -> str:
    lines = []
    if summary.laws:
        lines.append(
            f"{'noise':<8} {'trials':>6} {'baseline':>9} {'runs':>9} {'ratio':>7}"
            f" {'med base':>9} {'med runs':>9} {'published':>15}"
        )
        for law in summary.laws:
            published = PUBLISHED_RMS.get(law.noise_kind)
            reference = f"{published[0]:.4f}/{published[1]:.4f}" if published else "-"
            lines.append(
                f"{law.noise_kind:<8} {law.trials:>6} {law.mean_rms_baseline:>9.4f}"
                f" {law.mean_rms_runs:>9.4f} {law.ratio:>7.4f}"
                f" {law.median_rms_baseline:>9.4f} {law.median_rms_runs:>9.4f}"
                f" {reference:>15}"
            )
    if summary.sweep:
        if lines:
            lines.append("")
        lines.append(f"{'sigma':>6} {'trials':>6} {'ratio':>7}")
        lines.extend(
            f"{p.sigma:>6g} {p.trials:>6} {p.ratio:>7.4f}" for p in summary.sweep
        )
    return "\n".join(lines)


def write_table1_csv(path: Path, summary: BenchSummary) -> None:
    frame = pd.DataFrame(
        [{**law._asdict(), "ratio": law.ratio} for law in summary.laws],
        columns=[*LawSummary._fields, "ratio"],
    )
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")


def write_sweep_csv(path: Path, summary: BenchSummary) -> None:
    frame = pd.DataFrame(summary.sweep, columns=list(SweepPoint._fields))
    frame[["sigma", "ratio"]].to_csv(
        path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n"
    )
