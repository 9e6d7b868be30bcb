"""SVG figures for filtered series and benchmark results.

matplotlib comes with the ``plot`` extra and is only imported when a figure is
drawn, so the rest of the package works without it.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

from .base import ConfigError

if TYPE_CHECKING:
    from collections.abc import Sequence
    from pathlib import Path

    from matplotlib.figure import Figure

    from .bench import LawExample, SweepPoint
    from .ingest import TokenResult

SVG_HASH_SALT = "wavelet-runs"


def _new_figure(width: float, height: float) -> Figure:
    try:
        from matplotlib.figure import Figure
    except ImportError:
        raise ConfigError("--plot needs matplotlib, install wavelet-runs[plot]") from None
    return Figure(figsize=(width, height))


def _save_svg(fig: Figure, path: Path) -> None:
    import matplotlib

    fig.tight_layout()
    # fixed salt and no date keep the document byte-identical across runs
    with matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT}):
        fig.savefig(path, format="svg", metadata={"Date": None})


def write_token_plot(
    path: Path, results: Sequence[TokenResult], methods: Sequence[str]
) -> None:
    rows = max(len(results), 1)
    fig = _new_figure(8, 2.5 * rows)
    axes = fig.subplots(rows, 1, squeeze=False)[:, 0]
    for ax, result in zip(axes, results):
        series = result.series
        ax.plot(series.index, series.samples, color="0.6", lw=0.8, label="raw")
        for method in methods:
            filtered = result.reports[method].filtered
            ax.plot(series.index, filtered.samples, lw=1.2, label=method)
        ax.set_title(result.token)
        ax.set_ylabel("relative frequency")
        ax.legend(loc="upper right", fontsize="small")
    axes[-1].set_xlabel("year")
    _save_svg(fig, path)


def write_law_plot(path: Path, examples: Sequence[LawExample]) -> None:
    """One panel per noise law: noisy samples, truth and both filtered curves."""
    rows = max(len(examples), 1)
    fig = _new_figure(9, 2.8 * rows)
    axes = fig.subplots(rows, 1, squeeze=False)[:, 0]
    for ax, example in zip(axes, examples):
        index = example.truth.index
        ax.plot(index, example.noisy.samples, ".", color="0.7", ms=2, label="noisy")
        ax.plot(index, example.truth.samples, color="black", lw=1.0, label="truth")
        ax.plot(index, example.baseline.samples, lw=1.0, label="baseline")
        ax.plot(index, example.runs.samples, lw=1.0, label="runs")
        ax.set_title(f"{example.noise_kind} noise, K = {example.k}")
        ax.legend(loc="upper right", fontsize="small", ncol=4)
    axes[-1].set_xlabel("sample")
    _save_svg(fig, path)


def write_sweep_plot(path: Path, points: Sequence[SweepPoint]) -> None:
    fig = _new_figure(6, 4)
    ax = fig.subplots()
    ax.plot([p.sigma for p in points], [p.ratio for p in points], "o-")
    ax.axhline(1.0, color="0.6", lw=0.8, ls="--")
    ax.set_xlabel("noise standard deviation")
    ax.set_ylabel("RMS ratio, runs / baseline")
    _save_svg(fig, path)
