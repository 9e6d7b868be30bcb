"""Residual runs and the Ramachandran-Ranganathan runs statistic.

The hard statistic is the sum of squared run lengths. The soft statistic keeps
the hard partition into runs but replaces sign(e) by tanh(e / lambda) inside
each run, which makes it continuous in the residuals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from .base import InvalidInputError, as_float_array

if TYPE_CHECKING:
    from collections.abc import Iterator

    from numpy.typing import ArrayLike, NDArray


class Run(NamedTuple):
    sign: int
    start: int
    stop: int

    @property
    def length(self) -> int:
        return self.stop - self.start


class RunPartition(NamedTuple):
    signs: NDArray[np.int8]
    starts: NDArray[np.intp]
    lengths: NDArray[np.intp]

    @property
    def runs(self) -> Iterator[Run]:
        for sign, start, length in zip(self.signs, self.starts, self.lengths):
            yield Run(int(sign), int(start), int(start + length))

    def __len__(self) -> int:
        return int(self.lengths.size)


@dataclass(frozen=True)
class SoftRunsConfig:
    # None means "use the estimated noise level"
    lam: float | None = None

    def __post_init__(self):
        if self.lam is not None and not self.lam > 0:
            raise InvalidInputError(f"soft runs scale must be positive, got {self.lam}")

    def resolve(self, noise_level: float) -> SoftRunsConfig:
        if self.lam is not None:
            return self
        return SoftRunsConfig(noise_level)

    @property
    def scale(self) -> float:
        assert self.lam is not None, "unresolved soft runs config"
        return self.lam


def _residuals(e: ArrayLike) -> NDArray[np.float64]:
    residuals = as_float_array(e, name="residuals")
    if residuals.size == 0:
        raise InvalidInputError("cannot partition an empty residual series into runs")
    return residuals


def residual_signs(e: ArrayLike) -> NDArray[np.int8]:
    """Sign of each residual, with zeros resolved deterministically.

    A zero takes the sign of the preceding run; leading zeros take the sign of
    the first nonzero residual; an all-zero series is one positive run.
    """
    signs = np.sign(_residuals(e)).astype(np.int8)
    nonzero = np.flatnonzero(signs)
    if nonzero.size == 0:
        return np.ones_like(signs)
    signs[: nonzero[0]] = signs[nonzero[0]]
    last_nonzero = np.where(signs != 0, np.arange(signs.size), 0)
    np.maximum.accumulate(last_nonzero, out=last_nonzero)
    return signs[last_nonzero]


def partition_runs(e: ArrayLike) -> RunPartition:
    signs = residual_signs(e)
    changes = np.flatnonzero(signs[1:] != signs[:-1]) + 1
    starts = np.concatenate(([0], changes))
    lengths = np.diff(np.concatenate((starts, [signs.size])))
    return RunPartition(signs[starts], starts, lengths)


def hard_runs_statistic(e: ArrayLike) -> int:
    lengths = partition_runs(e).lengths
    return int(np.dot(lengths, lengths))


def soft_runs_statistic(e: ArrayLike, cfg: SoftRunsConfig) -> float:
    residuals = _residuals(e)
    partition = partition_runs(residuals)
    run_sums = np.add.reduceat(np.tanh(residuals / cfg.scale), partition.starts)
    return float(np.dot(run_sums, run_sums))


def runs_count(e: ArrayLike) -> int:
    return len(partition_runs(e))
