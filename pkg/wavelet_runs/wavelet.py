"""Orthogonal multilevel periodized DWT with the sym3 basis.

Single-level filtering is delegated to PyWavelets in ``periodization`` mode. Odd
lengths are padded by one sample of periodic extension at each level, and the
pre-padding length is kept in the layout so the inverse can truncate back.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
import pywt

from .base import (
    MIN_SERIES_LENGTH,
    InvalidInputError,
    SeriesLike,
    TimeSeries,
    as_float_array,
    samples_of,
)

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from numpy.typing import ArrayLike, NDArray

BOUNDARY_MODE = "periodized"
# tolerance for the filter-bank identities checked in WaveletBasisSpec.check
FILTER_TOLERANCE = 1e-13
_POLISH_ITERATIONS = 8


def _quadrature_mirror(lowpass: NDArray[np.float64]) -> NDArray[np.float64]:
    signs = np.where(np.arange(lowpass.size) % 2, 1.0, -1.0)
    return signs * lowpass[::-1]


def polish_filter(taps: Sequence[float], vanishing_moments: int) -> tuple[float, ...]:
    """Refine published low-pass taps to full double precision.

    Newton steps on the orthonormality conditions at every even shift and the
    vanishing moments of the matching high-pass filter, starting from ``taps``.
    Tables usually carry about twelve digits, which leaves the high-pass sum of
    a constant series visibly away from zero.
    """
    h = np.asarray(taps, dtype=np.float64).copy()
    size = h.size
    if size != 2 * vanishing_moments:
        raise InvalidInputError(
            f"{size} taps cannot carry {vanishing_moments} vanishing moments"
        )
    k = np.arange(size)
    # moment p of the high-pass filter, written on the low-pass taps
    moments = np.array(
        [(-1.0) ** k * k.astype(np.float64) ** p for p in range(vanishing_moments)]
    )
    for _ in range(_POLISH_ITERATIONS):
        residual = np.empty(size)
        jacobian = np.empty((size, size))
        for m in range(vanishing_moments):
            shift = 2 * m
            residual[m] = np.dot(h[: size - shift], h[shift:]) - float(m == 0)
            jacobian[m] = np.pad(h[shift:], (0, shift))
            jacobian[m] += np.pad(h[: size - shift], (shift, 0))
        residual[vanishing_moments:] = moments @ h
        jacobian[vanishing_moments:] = moments
        if np.max(np.abs(residual)) <= 4 * np.finfo(np.float64).eps:
            break
        h -= np.linalg.solve(jacobian, residual)
    if abs(h.sum() - math.sqrt(2)) > 1e-6:
        raise InvalidInputError("filter polishing converged to a different filter bank")
    return tuple(float(v) for v in h)


@functools.lru_cache
def _pywt_wavelet(family: str, lowpass: tuple[float, ...]) -> pywt.Wavelet:
    dec_lo = np.asarray(lowpass)
    dec_hi = _quadrature_mirror(dec_lo)
    bank = [dec_lo, dec_hi, dec_lo[::-1], dec_hi[::-1]]
    return pywt.Wavelet(family, filter_bank=[f.tolist() for f in bank])


@dataclass(frozen=True)
class WaveletBasisSpec:
    family: str
    decomposition_filter: tuple[float, ...]
    reconstruction_filter: tuple[float, ...]
    # optional cap on top of the feasibility bound in max_levels()
    max_levels: int | None = None

    @classmethod
    def sym3(cls, max_levels: int | None = None) -> WaveletBasisSpec:
        lowpass = polish_filter(pywt.Wavelet("sym3").dec_lo, vanishing_moments=3)
        return cls(
            family="sym3",
            decomposition_filter=lowpass,
            reconstruction_filter=lowpass[::-1],
            max_levels=max_levels,
        )

    @property
    def wavelet(self) -> pywt.Wavelet:
        return _pywt_wavelet(self.family, self.decomposition_filter)

    @property
    def filter_length(self) -> int:
        return len(self.decomposition_filter)

    @property
    def decomposition_highpass(self) -> NDArray[np.float64]:
        return _quadrature_mirror(np.asarray(self.decomposition_filter, dtype=np.float64))

    def check(self, vanishing_moments: int = 3) -> None:
        """Verify the filter bank is orthonormal with the expected vanishing moments.

        The taps start from a published table, so they are checked rather than trusted.
        """
        lo = np.asarray(self.decomposition_filter, dtype=np.float64)
        hi = self.decomposition_highpass
        if abs(lo.sum() - math.sqrt(2)) > FILTER_TOLERANCE:
            raise InvalidInputError(f"{self.family}: low-pass taps do not sum to sqrt(2)")
        for shift in range(0, lo.size, 2):
            inner = float(np.dot(lo[shift:], lo[: lo.size - shift]))
            expected = 1.0 if shift == 0 else 0.0
            if abs(inner - expected) > FILTER_TOLERANCE:
                raise InvalidInputError(
                    f"{self.family}: low-pass taps not orthonormal at shift {shift}"
                )
        k = np.arange(hi.size, dtype=np.float64)
        for degree in range(vanishing_moments):
            if abs(float(np.dot(k**degree, hi))) > FILTER_TOLERANCE * 10**degree:
                raise InvalidInputError(
                    f"{self.family}: high-pass moment of degree {degree} is nonzero"
                )
        rec = np.asarray(self.reconstruction_filter, dtype=np.float64)
        if not np.allclose(rec, lo[::-1], atol=FILTER_TOLERANCE):
            raise InvalidInputError(
                f"{self.family}: reconstruction taps are not"
                " the reversed decomposition taps"
            )


SYM3 = WaveletBasisSpec.sym3()


class DecompositionLayout(NamedTuple):
    # (start, stop) per band: approximation first, then details coarsest to finest
    level_bounds: tuple[tuple[int, int], ...]
    # length of the signal entering each level before padding, finest level first
    signal_lengths: tuple[int, ...]
    original_length: int
    origin: int = 0
    boundary_mode: str = BOUNDARY_MODE

    @property
    def levels(self) -> int:
        return len(self.signal_lengths)

    @property
    def size(self) -> int:
        return self.level_bounds[-1][1]

    @property
    def approximation_bounds(self) -> tuple[int, int]:
        return self.level_bounds[0]

    @property
    def finest_detail_bounds(self) -> tuple[int, int]:
        return self.level_bounds[-1]

    def validate(self) -> None:
        if len(self.level_bounds) != self.levels + 1:
            raise InvalidInputError(
                f"expected {self.levels + 1} coefficient bands,"
                f" got {len(self.level_bounds)}"
            )
        position = 0
        for start, stop in self.level_bounds:
            if start != position or stop <= start:
                raise InvalidInputError(
                    f"level bounds {self.level_bounds} do not partition the coefficients"
                )
            position = stop
        # band j (finest first) holds ceil(len_j / 2) coefficients
        detail_sizes = [b - a for a, b in reversed(self.level_bounds[1:])]
        for size, length in zip(detail_sizes, self.signal_lengths):
            if size != (length + 1) // 2:
                raise InvalidInputError(
                    f"band of {size} coefficients inconsistent"
                    f" with signal length {length}"
                )
        approx_start, approx_stop = self.approximation_bounds
        if approx_stop - approx_start != detail_sizes[-1]:
            raise InvalidInputError(
                "approximation band size differs from coarsest details"
            )
        if self.signal_lengths[0] != self.original_length:
            raise InvalidInputError("finest signal length differs from original length")


@dataclass(frozen=True, eq=False)
class WaveletDecomposition:
    coefficients: NDArray[np.float64]
    layout: DecompositionLayout
    basis: WaveletBasisSpec = SYM3

    def __post_init__(self):
        coeffs = as_float_array(self.coefficients, name="coefficients")
        self.layout.validate()
        if coeffs.size != self.layout.size:
            raise InvalidInputError(
                f"{coeffs.size} coefficients do not match"
                f" layout of size {self.layout.size}"
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def levels(self) -> int:
        return self.layout.levels

    @property
    def level_bounds(self) -> tuple[tuple[int, int], ...]:
        return self.layout.level_bounds

    @property
    def original_length(self) -> int:
        return self.layout.original_length

    @property
    def boundary_mode(self) -> str:
        return self.layout.boundary_mode

    def band(self, index: int) -> NDArray[np.float64]:
        start, stop = self.layout.level_bounds[index]
        return self.coefficients[start:stop]

    def with_coefficients(self, coefficients: ArrayLike) -> WaveletDecomposition:
        return WaveletDecomposition(
            np.asarray(coefficients, dtype=np.float64), self.layout, self.basis
        )


@dataclass(frozen=True, eq=False)
class SparseWaveletModel:
    """Filtered signal as a sum over a support set of basis functions."""

    support: NDArray[np.bool_]
    values: NDArray[np.float64]
    layout: DecompositionLayout
    basis: WaveletBasisSpec = SYM3

    def __post_init__(self):
        support = np.array(self.support, dtype=bool)
        values = as_float_array(self.values, name="values")
        if support.shape != (self.layout.size,):
            raise InvalidInputError(
                f"support mask of shape {support.shape} does not match "
                f"{self.layout.size} coefficients"
            )
        if int(support.sum()) != values.size:
            raise InvalidInputError(
                f"support has {int(support.sum())} entries but {values.size} values given"
            )
        support.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_mask(
        cls,
        decomposition: WaveletDecomposition,
        mask: ArrayLike,
        values: ArrayLike | None = None,
    ) -> SparseWaveletModel:
        """Build a model on ``mask``; values default to the decomposition's own."""
        support = np.asarray(mask, dtype=bool)
        if values is None:
            values = decomposition.coefficients[support]
        return cls(support, np.asarray(values), decomposition.layout, decomposition.basis)

    @property
    def k(self) -> int:
        return int(self.values.size)

    @property
    def levels(self) -> int:
        return self.layout.levels

    @property
    def original_length(self) -> int:
        return self.layout.original_length

    def dense(self) -> NDArray[np.float64]:
        coeffs = np.zeros(self.layout.size)
        coeffs[self.support] = self.values
        return coeffs


def max_levels(n: int, basis: WaveletBasisSpec = SYM3) -> int:
    """Return the deepest feasible decomposition for a series of length n.

    floor(log2(n / (filter_length - 1))), but never below one level for a
    series long enough to be decomposed at all.
    """
    if n < MIN_SERIES_LENGTH:
        raise InvalidInputError(
            f"series of length {n} is too short, need at least {MIN_SERIES_LENGTH}"
        )
    bound = max(1, pywt.dwt_max_level(n, basis.filter_length))
    if basis.max_levels is not None:
        bound = min(bound, basis.max_levels)
    return bound


def dwt(
    x: SeriesLike, basis: WaveletBasisSpec = SYM3, levels: int | None = None
) -> WaveletDecomposition:
    # PyWavelets rejects read-only buffers such as TimeSeries samples
    data = np.array(samples_of(x), dtype=np.float64)
    feasible = max_levels(data.size, basis)
    if levels is None:
        levels = feasible
    if not 1 <= levels <= feasible:
        raise InvalidInputError(
            f"cannot decompose {data.size} samples into {levels} levels "
            f"(at most {feasible} are feasible with {basis.family})"
        )

    approx = data
    signal_lengths: list[int] = []
    details: list[NDArray[np.float64]] = []
    for _ in range(levels):
        signal_lengths.append(approx.size)
        if approx.size % 2:
            approx = np.append(approx, approx[0])
        approx, detail = pywt.dwt(approx, basis.wavelet, mode="periodization")
        details.append(detail)

    bands = [approx, *reversed(details)]
    bounds: list[tuple[int, int]] = []
    position = 0
    for band in bands:
        bounds.append((position, position + band.size))
        position += band.size

    layout = DecompositionLayout(
        level_bounds=tuple(bounds),
        signal_lengths=tuple(signal_lengths),
        original_length=data.size,
        origin=x.origin if isinstance(x, TimeSeries) else 0,
    )
    return WaveletDecomposition(np.concatenate(bands), layout, basis)


def _inverse(
    coefficients: NDArray[np.float64],
    layout: DecompositionLayout,
    basis: WaveletBasisSpec,
) -> NDArray[np.float64]:
    coefficients = np.array(coefficients, dtype=np.float64)
    start, stop = layout.approximation_bounds
    approx = coefficients[start:stop]
    for (start, stop), length in zip(
        layout.level_bounds[1:], reversed(layout.signal_lengths)
    ):
        detail = coefficients[start:stop]
        approx = pywt.idwt(approx, detail, basis.wavelet, mode="periodization")[:length]
    return approx


def idwt(d: WaveletDecomposition) -> TimeSeries:
    return TimeSeries(_inverse(d.coefficients, d.layout, d.basis), d.layout.origin)


def reconstruct_sparse(m: SparseWaveletModel) -> TimeSeries:
    return TimeSeries(_inverse(m.dense(), m.layout, m.basis), m.layout.origin)


def synthesis_matrix(
    layout: DecompositionLayout,
    indices: Iterable[int] | Sequence[int],
    basis: WaveletBasisSpec = SYM3,
) -> NDArray[np.float64]:
    """Return the basis functions for ``indices`` as columns of an n x k matrix."""
    indices = list(indices)
    matrix = np.empty((layout.original_length, len(indices)))
    unit = np.zeros(layout.size)
    for column, index in enumerate(indices):
        unit[index] = 1.0
        matrix[:, column] = _inverse(unit, layout, basis)
        unit[index] = 0.0
    return matrix
