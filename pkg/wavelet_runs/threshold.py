"""Minimax hard-thresholding baseline and MAD noise estimation."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from .base import InvalidInputError
from .wavelet import SYM3, SparseWaveletModel, dwt

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from .base import SeriesLike
    from .wavelet import WaveletBasisSpec, WaveletDecomposition

# median |N(0, 1)|, the normal quartile constant
MAD_NORMAL_CONSTANT = 0.6745
# below this many samples the minimax rule does not threshold at all
MINIMAX_MIN_LENGTH = 32


class ThresholdResult(NamedTuple):
    model: SparseWaveletModel
    threshold: float
    sigma_hat: float
    k_nonzero: int


def estimate_sigma(d: WaveletDecomposition) -> float:
    """Estimate the noise level from the finest detail band (MAD rule)."""
    start, stop = d.layout.finest_detail_bounds
    finest = d.coefficients[start:stop]
    if finest.size == 0:
        raise InvalidInputError("decomposition has no finest-level detail coefficients")
    return float(np.median(np.abs(finest))) / MAD_NORMAL_CONSTANT


def minimax_threshold(n: int, sigma: float) -> float:
    if n < 1:
        raise InvalidInputError(f"series length must be positive, got {n}")
    if sigma < 0:
        raise InvalidInputError(f"noise level must be nonnegative, got {sigma}")
    if n <= MINIMAX_MIN_LENGTH:
        return 0.0
    return sigma * (0.3936 + 0.1829 * math.log2(n))


def hard_threshold(d: WaveletDecomposition, threshold: float) -> NDArray[np.bool_]:
    """Return the support surviving a hard threshold.

    The approximation band always survives.
    """
    support = np.abs(d.coefficients) > threshold
    start, stop = d.layout.approximation_bounds
    support[start:stop] = True
    return support


def threshold_minimax(
    x: SeriesLike, basis: WaveletBasisSpec = SYM3, levels: int | None = None
) -> ThresholdResult:
    d = dwt(x, basis, levels)
    sigma_hat = estimate_sigma(d)
    threshold = minimax_threshold(d.original_length, sigma_hat)
    model = SparseWaveletModel.from_mask(d, hard_threshold(d, threshold))
    return ThresholdResult(model, threshold, sigma_hat, model.k)
