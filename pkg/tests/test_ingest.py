"""Tests for the frequency CSV reader and the command line."""

from __future__ import annotations

import subprocess
import sys
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd
import pytest

from wavelet_runs import __version__, bench, main
from wavelet_runs.base import ConfigError, DataFormatError, ExitCode, TimeSeries
from wavelet_runs.bench import BenchSummary, LawSummary, SweepPoint
from wavelet_runs.datagen import BumpsSpec, add_normal_noise, bumps
from wavelet_runs.ingest import (
    FrequencyRecord,
    RunSpec,
    YearRange,
    parse_frequency_csv,
    run_filter,
)
from wavelet_runs.pipeline import filter_baseline

if TYPE_CHECKING:
    from pathlib import Path

SMALL_CONFIG = """\
outer_rounds = 1

[ga_binary]
population_size = 12
max_generations = 8
stall_generations = 3

[ga_real]
population_size = 12
max_generations = 8
stall_generations = 3
"""
YEARS = range(1800, 2009)


def frequency_series(seed: int) -> np.ndarray:
    """209 positive yearly frequencies shaped like a few usage bursts."""
    shape = bumps(BumpsSpec(n=209)).samples
    noisy = add_normal_noise(TimeSeries(shape), 0.5, np.random.default_rng(seed))
    return 1e-6 * (np.abs(noisy.samples) + 0.1)


@pytest.fixture
def corpus(tmp_path: Path) -> Path:
    rows = ["token,year,frequency"]
    for seed, token in enumerate(("nation", "wireless")):
        values = frequency_series(seed)
        rows.extend(f"{token},{y},{float(v)!r}" for y, v in zip(YEARS, values))
    rows.extend(f"steady,{y},0.001" for y in YEARS)
    path = tmp_path / "corpus.csv"
    path.write_text("\n".join(rows) + "\n")
    return path


@pytest.fixture
def config(tmp_path: Path) -> Path:
    path = tmp_path / "small.toml"
    path.write_text(SMALL_CONFIG)
    return path


def filter_args(corpus: Path, output: Path, config: Path, *extra: str) -> list[str]:
    return [
        "filter",
        "--input",
        str(corpus),
        "--output",
        str(output),
        "--config",
        str(config),
        "--seed",
        "7",
        "--quiet",
        *extra,
    ]


def test_header_only():
    assert parse_frequency_csv(b"token,year,frequency\n") == []
    assert parse_frequency_csv(b"token,year,frequency\n\n\n") == []


def test_frequency_row():
    assert parse_frequency_csv(b"token,year,frequency\nword,1900,0.5\n") == [
        FrequencyRecord("word", 1900, 0.5)
    ]


def test_count_rows():
    data = b"token,year,match_count,total_count\nword,1900,5,1000\n"
    (record,) = parse_frequency_csv(data)
    assert record.relative_frequency == 0.005


def test_gap_years_filled():
    data = b"token,year,frequency\nb,1903,0.4\na,1900,0.1\nb,1900,0.2\n"
    records = parse_frequency_csv(data)
    assert [(r.token, r.year, r.relative_frequency, r.filled) for r in records] == [
        ("a", 1900, 0.1, False),
        ("b", 1900, 0.2, False),
        ("b", 1901, 0.0, True),
        ("b", 1902, 0.0, True),
        ("b", 1903, 0.4, False),
    ]


def test_year_window():
    data = b"token,year,frequency\nw,1850,0.3\nw,1900,0.1\n"
    records = parse_frequency_csv(data, YearRange(1899, 1901))
    assert [(r.year, r.filled) for r in records] == [
        (1899, True),
        (1900, False),
        (1901, True),
    ]


@pytest.mark.parametrize(
    ("data", "lineno", "match"),
    [
        (b"token,year,frequency\nw,1900,0.1\nw,19x0,0.5\n", 3, "year"),
        (b"token,year,frequency\n\nw,1900,abc\n", 3, "frequency"),
        (b"token,year,frequency\nw,1900,-0.5\n", 2, "nonnegative"),
        (b"token,year,frequency\nw,1900.5,0.5\n", 2, "integer"),
        (b"token,year,frequency\n,1900,0.5\n", 2, "empty token"),
        (b"token,year,frequency\nw,1900,0.1\nw,1900,0.2\n", 3, "duplicate"),
        (b"token,year,match_count,total_count\nw,1900,1,0\n", 2, "total_count"),
        (b"word,year,frequency\nw,1900,0.1\n", 1, "header"),
        (b"", 1, "header"),
    ],
)
def test_malformed_input(data: bytes, lineno: int, match: str):
    with pytest.raises(DataFormatError, match=match) as exc_info:
        parse_frequency_csv(data)
    assert exc_info.value.lineno == lineno
    assert str(exc_info.value).startswith(f"line {lineno}:")


def test_not_utf8():
    with pytest.raises(DataFormatError, match="UTF-8"):
        parse_frequency_csv(b"token,year,frequency\n\xff,1900,0.1\n")


def test_year_range_parse():
    assert YearRange.parse("1900:1950") == YearRange(1900, 1950)
    assert YearRange.parse("1900:1900") == (1900, 1900)
    for bad in ("1900", "1950:1900", "a:b", "1900-1950"):
        with pytest.raises(ConfigError):
            YearRange.parse(bad)


def test_run_spec_paths(tmp_path: Path):
    spec = RunSpec(tmp_path / "in.csv", tmp_path / "out.csv")
    assert spec.summary_path == tmp_path / "out.summary.csv"
    assert spec.plot_path == tmp_path / "out.svg"
    assert spec.methods == ["baseline", "runs"]
    assert RunSpec(spec.input, spec.output, method="runs").methods == ["runs"]
    with pytest.raises(ConfigError, match="unknown method"):
        RunSpec(spec.input, spec.output, method="lowess")


def test_filter_command(corpus: Path, config: Path, tmp_path: Path):
    output = tmp_path / "filtered.csv"
    assert main(filter_args(corpus, output, config, "--token", "nation")) == ExitCode.OK

    frame = pd.read_csv(output, float_precision="round_trip")
    assert list(frame.columns) == [
        "token",
        "year",
        "raw",
        "filtered_baseline",
        "filtered_runs",
    ]
    assert len(frame) == 209
    assert set(frame["token"]) == {"nation"}
    np.testing.assert_array_equal(frame["year"], np.arange(1800, 2009))
    raw = frame["raw"].to_numpy()
    np.testing.assert_allclose(raw, frequency_series(0), rtol=1e-15)
    expected = filter_baseline(TimeSeries(raw, origin=1800)).filtered.samples
    np.testing.assert_array_equal(frame["filtered_baseline"].to_numpy(), expected)

    summary = pd.read_csv(output.with_name("filtered.summary.csv"))
    assert list(summary.columns) == [
        "token",
        "method",
        "k",
        "hard_R",
        "soft_R",
        "fallback",
    ]
    assert list(summary["method"]) == ["baseline", "runs"]
    assert summary["k"].nunique() == 1
    assert summary["hard_R"].iloc[1] <= summary["hard_R"].iloc[0]


def test_filter_is_byte_identical_across_runs(
    corpus: Path, config: Path, tmp_path: Path
):
    first, second = tmp_path / "first.csv", tmp_path / "second.csv"
    assert main(filter_args(corpus, first, config, "--token", "wireless")) == 0
    assert main(filter_args(corpus, second, config, "--token", "wireless")) == 0
    assert first.read_bytes() == second.read_bytes()
    assert (
        tmp_path.joinpath("first.summary.csv").read_bytes()
        == tmp_path.joinpath("second.summary.csv").read_bytes()
    )


def test_every_token_by_default(corpus: Path, config: Path, tmp_path: Path):
    output = tmp_path / "all.csv"
    assert main(filter_args(corpus, output, config, "--method", "baseline")) == 0
    frame = pd.read_csv(output)
    assert list(frame["token"].unique()) == ["nation", "steady", "wireless"]
    assert "filtered_runs" not in frame
    # only --method both writes the comparison sidecar
    assert not tmp_path.joinpath("all.summary.csv").exists()


def test_constant_series_passes_through(corpus: Path, config: Path, tmp_path: Path):
    output = tmp_path / "steady.csv"
    assert main(filter_args(corpus, output, config, "--token", "steady")) == 0
    frame = pd.read_csv(output, float_precision="round_trip")
    for column in ("filtered_baseline", "filtered_runs"):
        np.testing.assert_allclose(frame[column], 0.001, rtol=1e-9)


def test_unknown_token(corpus: Path, config: Path, tmp_path: Path, warnings_log):
    output = tmp_path / "none.csv"
    spec = RunSpec(corpus, output, tokens=("telegraph",), config=config, seed=1)
    assert run_filter(spec) == ExitCode.OK
    assert output.read_text() == "token,year,raw,filtered_baseline,filtered_runs\n"
    assert spec.summary_path.read_text() == "token,method,k,hard_R,soft_R,fallback\n"
    assert any("telegraph" in m for m in warnings_log)


def test_short_series_skipped(corpus: Path, config: Path, tmp_path: Path, warnings_log):
    output = tmp_path / "short.csv"
    spec = RunSpec(corpus, output, years=YearRange(1800, 1810), config=config)
    assert run_filter(spec) == ExitCode.OK
    assert len(pd.read_csv(output)) == 0
    assert sum("shorter than 16" in m for m in warnings_log) == 3


def test_worker_processes_match_sequential(corpus: Path, config: Path, tmp_path: Path):
    sequential, parallel = tmp_path / "seq.csv", tmp_path / "par.csv"
    assert main(filter_args(corpus, sequential, config)) == 0
    assert main(filter_args(corpus, parallel, config, "--workers", "2")) == 0
    assert sequential.read_bytes() == parallel.read_bytes()


def test_plot(corpus: Path, config: Path, tmp_path: Path):
    pytest.importorskip("matplotlib")
    output = tmp_path / "plotted.csv"
    args = filter_args(corpus, output, config, "--token", "nation", "--plot")
    assert main(args) == 0
    svg = tmp_path / "plotted.svg"
    first = svg.read_bytes()
    assert first.startswith(b"<?xml")
    assert main(args) == 0
    assert svg.read_bytes() == first


def test_usage_errors_exit_one(capsys: pytest.CaptureFixture[str]):
    with pytest.raises(SystemExit) as exc_info:
        main(["filter", "--input", "x.csv"])
    assert exc_info.value.code == ExitCode.USAGE
    assert "--output" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc_info:
        main(["filter", "--input", "a", "--output", "b", "--years", "2000:1900"])
    assert exc_info.value.code == ExitCode.USAGE


def test_bad_data_exits_two(tmp_path: Path, capsys: pytest.CaptureFixture[str]):
    path = tmp_path / "bad.csv"
    path.write_text("token,year,frequency\nw,1900,oops\n")
    args = ["filter", "--input", str(path), "--output", str(tmp_path / "o.csv")]
    assert main(args) == ExitCode.DATA
    assert "line 2" in capsys.readouterr().err
    missing = ["filter", "--input", str(tmp_path / "nope.csv"), "--output", "o.csv"]
    assert main(missing) == ExitCode.DATA


def test_bad_config_exits_one(corpus: Path, tmp_path: Path):
    config = tmp_path / "bad.toml"
    config.write_text("outer_rounds = 0\n")
    assert main(filter_args(corpus, tmp_path / "o.csv", config)) == ExitCode.USAGE


def test_failed_acceptance_exits_three(
    monkeypatch: pytest.MonkeyPatch, tmp_path: Path, capsys: pytest.CaptureFixture[str]
):
    losing = BenchSummary(laws=(LawSummary("normal", 2, 0.5, 0.6, 0.5, 0.6),))
    monkeypatch.setattr(bench, "run_table1", lambda *args, **kwargs: losing)
    output = tmp_path / "table1.csv"
    args = ["bench", "table1", "--trials", "2", "--output", str(output), "--check"]
    assert main(args) == ExitCode.ACCEPTANCE
    assert output.exists()
    assert "acceptance check failed" in capsys.readouterr().err
    assert main(args[:-1]) == ExitCode.OK


def test_gen_command(tmp_path: Path):
    output = tmp_path / "poisson.csv"
    args = ["gen", "--output", str(output), "--noise", "poisson", "--length", "128"]
    assert main([*args, "--seed", "1"]) == 0
    frame = pd.read_csv(output)
    assert len(frame) == 128
    assert frame["truth"].min() == 0.5
    assert frame["truth"].max() == 15.0
    assert (frame["noisy"] % 1 == 0).all()


def test_gen_target_std(tmp_path: Path):
    output = tmp_path / "scaled.csv"
    args = ["gen", "--output", str(output), "--target-std", "3.77", "--seed", "2"]
    assert main(args) == 0
    truth = pd.read_csv(output, float_precision="round_trip")["truth"]
    assert truth.std(ddof=0) == pytest.approx(3.77, rel=1e-12)


def test_gen_plot(config: Path, tmp_path: Path):
    pytest.importorskip("matplotlib")
    output = tmp_path / "normal.csv"
    args = ["gen", "--output", str(output), "--length", "128", "--plot"]
    assert main([*args, "--config", str(config), "--seed", "3"]) == 0
    assert output.exists()
    assert (tmp_path / "normal.svg").read_bytes().startswith(b"<?xml")


def test_bench_plots(monkeypatch: pytest.MonkeyPatch, config: Path, tmp_path: Path):
    pytest.importorskip("matplotlib")
    sweep = BenchSummary(sweep=(SweepPoint(0.5, 0.98, 2), SweepPoint(2.0, 0.83, 2)))
    monkeypatch.setattr(bench, "run_fig2_sweep", lambda *args, **kwargs: sweep)
    sweep_svg = tmp_path / "sweep.svg"
    assert main(["bench", "sweep", "--trials", "2", "--plot", str(sweep_svg)]) == 0
    assert sweep_svg.read_bytes().startswith(b"<?xml")

    table = BenchSummary(laws=(LawSummary("normal", 1, 0.5, 0.4, 0.5, 0.4),))
    monkeypatch.setattr(bench, "run_table1", lambda *args, **kwargs: table)
    laws_svg = tmp_path / "laws.svg"
    args = ["bench", "table1", "--trials", "1", "--config", str(config)]
    assert main([*args, "--plot", str(laws_svg)]) == 0
    assert laws_svg.read_bytes().startswith(b"<?xml")


def test_version():
    result = subprocess.run(
        [sys.executable, "-m", "wavelet_runs", "--version"],
        capture_output=True,
        text=True,
        check=True,
    )
    assert result.stdout.strip() == __version__
