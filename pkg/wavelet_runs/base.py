"""Contains base classes used across multiple parts of the package."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import TYPE_CHECKING, Union

import numpy as np

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

# a series must support at least one level of a 6-tap periodized transform
MIN_SERIES_LENGTH = 8


class ExitCode(IntEnum):
    OK = 0
    USAGE = 1
    DATA = 2
    ACCEPTANCE = 3


class WaveletRunsError(Exception):
    """Base class for all errors raised by wavelet-runs."""


class InvalidInputError(WaveletRunsError, ValueError):
    """An input violated a documented precondition."""


class DataFormatError(InvalidInputError):
    def __init__(self, message: str, lineno: int | None = None):
        super().__init__(message if lineno is None else f"line {lineno}: {message}")
        self.lineno = lineno


class ConfigError(WaveletRunsError, ValueError):
    """Invalid configuration file or command-line option."""


class AcceptanceError(WaveletRunsError):
    """A benchmark result fell outside its acceptance bounds."""


def as_float_array(values: ArrayLike, *, name: str = "values") -> NDArray[np.float64]:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Uniformly sampled real-valued series; ``origin`` is the index of sample 0."""

    samples: NDArray[np.float64]
    origin: int = 0
    n: int = field(init=False)

    def __post_init__(self):
        arr = as_float_array(self.samples, name="samples")
        if arr.size < MIN_SERIES_LENGTH:
            raise InvalidInputError(
                f"series needs at least {MIN_SERIES_LENGTH} samples, got {arr.size}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "n", int(arr.size))

    def __len__(self) -> int:
        return self.n

    @property
    def index(self) -> NDArray[np.int64]:
        return np.arange(self.origin, self.origin + self.n, dtype=np.int64)

    def with_samples(self, samples: ArrayLike) -> TimeSeries:
        """Return a series with the same origin and new samples."""
        return TimeSeries(np.asarray(samples, dtype=np.float64), self.origin)


SeriesLike = Union[TimeSeries, "ArrayLike"]


def samples_of(x: SeriesLike) -> NDArray[np.float64]:
    if isinstance(x, TimeSeries):
        return x.samples
    return as_float_array(x)
