"""Filter annual word-frequency series read from a per-token CSV.

Input is a simplified form of the Google Books Ngram data with one row per
token and year, either ``token,year,frequency`` or
``token,year,match_count,total_count``. Gap years become zero frequency.
"""

from __future__ import annotations

import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import repeat
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
import pandas as pd
from loguru import logger

from .base import ConfigError, DataFormatError, ExitCode, TimeSeries
from .config import load_filter_config
from .datagen import CSV_FLOAT_FORMAT
from .pipeline import METHODS, MIN_FILTER_LENGTH, FilterConfig
from .plots import write_token_plot

if TYPE_CHECKING:
    from collections.abc import Sequence
    from pathlib import Path

    from numpy.typing import NDArray

    from .pipeline import FilterReport

FREQUENCY_COLUMNS = ("token", "year", "frequency")
COUNT_COLUMNS = ("token", "year", "match_count", "total_count")
BOTH = "both"


class YearRange(NamedTuple):
    first: int = 1800
    last: int = 2008

    @classmethod
    def parse(cls, raw_value: str) -> YearRange:
        first, sep, last = raw_value.partition(":")
        try:
            years = cls(int(first), int(last))
        except ValueError:
            raise ConfigError(
                f"year range must look like 1800:2008, got {raw_value!r}"
            ) from None
        if not sep or years.first > years.last:
            raise ConfigError(f"empty year range {raw_value!r}")
        return years


class FrequencyRecord(NamedTuple):
    token: str
    year: int
    relative_frequency: float
    # year absent from the input, frequency set to zero
    filled: bool = False


def _numeric_column(
    frame: pd.DataFrame, column: str, lines: NDArray[np.int64]
) -> NDArray[np.float64]:
    values = pd.to_numeric(frame[column].str.strip(), errors="coerce").to_numpy(
        dtype=np.float64
    )
    bad = np.flatnonzero(~np.isfinite(values) | (values < 0))
    if bad.size:
        i = bad[0]
        raise DataFormatError(
            f"{column} must be a nonnegative number, got {frame[column].iloc[i]!r}",
            int(lines[i]),
        )
    return values


def _read_frame(data: bytes) -> pd.DataFrame:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise DataFormatError(f"input is not UTF-8: {e}") from e
    if not text.strip():
        raise DataFormatError("missing header row", 1)
    try:
        frame = pd.read_csv(
            io.StringIO(text), dtype=str, keep_default_na=False, skip_blank_lines=False
        )
    except pd.errors.ParserError as e:
        raise DataFormatError(str(e)) from e
    header = tuple(c.strip() for c in frame.columns)
    if header not in (FREQUENCY_COLUMNS, COUNT_COLUMNS):
        raise DataFormatError(
            f"header must be {','.join(FREQUENCY_COLUMNS)} or "
            f"{','.join(COUNT_COLUMNS)}, got {','.join(header)}",
            1,
        )
    frame.columns = list(header)
    # pandas fills short rows with NaN even with keep_default_na off
    return frame.fillna("")


def parse_frequency_csv(
    data: bytes, years: YearRange | None = None
) -> list[FrequencyRecord]:
    """Parse frequency rows, keeping those inside ``years`` and filling gaps.

    Without a year window each token's gaps are filled between its first and
    last year. Records come back sorted by token, then year.
    """
    frame = _read_frame(data)
    # data rows start on line 2
    lines = np.arange(2, len(frame) + 2)
    blank = (frame == "").all(axis=1).to_numpy()
    frame, lines = frame[~blank].reset_index(drop=True), lines[~blank]
    if frame.empty:
        return []

    tokens = frame["token"].str.strip()
    if (empty := np.flatnonzero((tokens == "").to_numpy())).size:
        raise DataFormatError("empty token", int(lines[empty[0]]))
    year_values = _numeric_column(frame, "year", lines)
    if (fractional := np.flatnonzero(year_values % 1 != 0)).size:
        raise DataFormatError(
            f"year must be an integer, got {frame['year'].iloc[fractional[0]]!r}",
            int(lines[fractional[0]]),
        )
    if "frequency" in frame:
        frequency = _numeric_column(frame, "frequency", lines)
    else:
        matches = _numeric_column(frame, "match_count", lines)
        totals = _numeric_column(frame, "total_count", lines)
        if (zero := np.flatnonzero(totals == 0)).size:
            raise DataFormatError("total_count is zero", int(lines[zero[0]]))
        frequency = matches / totals

    parsed = pd.DataFrame(
        {"token": tokens, "year": year_values.astype(np.int64), "frequency": frequency}
    )
    duplicated = np.flatnonzero(parsed.duplicated(["token", "year"]).to_numpy())
    if duplicated.size:
        i = duplicated[0]
        raise DataFormatError(
            f"duplicate year {parsed['year'].iloc[i]}"
            f" for token {parsed['token'].iloc[i]!r}",
            int(lines[i]),
        )
    if years is not None:
        parsed = parsed[parsed["year"].between(years.first, years.last)]

    records = []
    for token, group in parsed.groupby("token", sort=True):
        observed = dict(zip(group["year"].tolist(), group["frequency"].tolist()))
        window = years or YearRange(min(observed), max(observed))
        for year in range(window.first, window.last + 1):
            if year in observed:
                records.append(FrequencyRecord(str(token), year, observed[year]))
            else:
                records.append(FrequencyRecord(str(token), year, 0.0, filled=True))
    return records


@dataclass(frozen=True)
class RunSpec:
    input: Path
    output: Path
    # None selects every token in the input
    tokens: tuple[str, ...] | None = None
    years: YearRange = YearRange()
    method: str = BOTH
    config: Path | None = None
    seed: int | None = None
    plot: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.method != BOTH and self.method not in METHODS:
            raise ConfigError(
                f"unknown method {self.method!r}, expected one of {method_choices()}"
            )
        if self.years.first > self.years.last:
            raise ConfigError(f"empty year range {self.years}")

    @property
    def methods(self) -> list[str]:
        return sorted(METHODS) if self.method == BOTH else [self.method]

    @property
    def summary_path(self) -> Path:
        return self.output.with_name(f"{self.output.stem}.summary.csv")

    @property
    def plot_path(self) -> Path:
        return self.output.with_suffix(".svg")


def method_choices() -> list[str]:
    return [*sorted(METHODS), BOTH]


class TokenResult(NamedTuple):
    token: str
    series: TimeSeries
    reports: dict[str, FilterReport]


def filter_token(
    token: str, series: TimeSeries, methods: Sequence[str], cfg: FilterConfig
) -> TokenResult:
    reports = {}
    for method in methods:
        reports[method] = METHODS[method](series, cfg)
        logger.info(
            "{} {}: K = {}, R = {}",
            token,
            method,
            reports[method].k,
            reports[method].hard_r,
        )
    return TokenResult(token, series, reports)


def _series_by_token(
    records: Sequence[FrequencyRecord],
) -> dict[str, tuple[int, list[float]]]:
    series: dict[str, tuple[int, list[float]]] = {}
    for record in records:
        _, values = series.setdefault(record.token, (record.year, []))
        values.append(record.relative_frequency)
    return series


def _select(spec: RunSpec, available: dict[str, tuple[int, list[float]]]) -> list[str]:
    tokens = sorted(available) if spec.tokens is None else sorted(set(spec.tokens))
    unknown = [t for t in tokens if t not in available]
    if unknown:
        logger.warning("skipping tokens not in the input: {}", ", ".join(unknown))
    selected = []
    for token in tokens:
        if token not in available:
            continue
        n = len(available[token][1])
        if n < MIN_FILTER_LENGTH:
            logger.warning(
                "skipping {!r}: {} years is shorter than {}", token, n, MIN_FILTER_LENGTH
            )
            continue
        selected.append(token)
    return selected


def write_filtered_csv(
    path: Path, results: Sequence[TokenResult], methods: Sequence[str]
) -> None:
    columns = ["token", "year", "raw", *(f"filtered_{m}" for m in methods)]
    frames = [
        pd.DataFrame(
            {
                "token": result.token,
                "year": result.series.index,
                "raw": result.series.samples,
                **{f"filtered_{m}": result.reports[m].filtered.samples for m in methods},
            },
            columns=columns,
        )
        for result in results
    ]
    if frames:
        frame = pd.concat(frames, ignore_index=True)
    else:
        frame = pd.DataFrame(columns=columns)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")


def write_summary_csv(
    path: Path, results: Sequence[TokenResult], methods: Sequence[str]
) -> None:
    rows = [
        {
            "token": result.token,
            "method": method,
            "k": report.k,
            "hard_R": report.hard_r,
            "soft_R": report.soft_r,
            "fallback": report.fallback,
        }
        for result in results
        for method, report in ((m, result.reports[m]) for m in methods)
    ]
    frame = pd.DataFrame(
        rows, columns=["token", "method", "k", "hard_R", "soft_R", "fallback"]
    )
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")


def run_filter(spec: RunSpec) -> ExitCode:
    cfg = load_filter_config(spec.config) if spec.config is not None else FilterConfig()
    if spec.seed is not None:
        cfg = cfg.with_seed(spec.seed)
    records = parse_frequency_csv(spec.input.read_bytes(), spec.years)
    available = _series_by_token(records)
    tokens = _select(spec, available)
    series = [TimeSeries(available[t][1], origin=available[t][0]) for t in tokens]
    methods = spec.methods
    logger.info("filtering {} tokens with {}", len(tokens), ", ".join(methods))

    if spec.workers > 1 and len(tokens) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as executor:
            results = list(
                executor.map(filter_token, tokens, series, repeat(methods), repeat(cfg))
            )
    else:
        results = list(map(filter_token, tokens, series, repeat(methods), repeat(cfg)))

    write_filtered_csv(spec.output, results, methods)
    if spec.method == BOTH:
        write_summary_csv(spec.summary_path, results, methods)
    if spec.plot:
        write_token_plot(spec.plot_path, results, methods)
    return ExitCode.OK
