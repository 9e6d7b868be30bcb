"""Tests for the periodized sym3 transform and sparse models."""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest
import pywt
from hypothesis import given, settings
from hypothesis import strategies as st

from wavelet_runs.base import InvalidInputError, TimeSeries
from wavelet_runs.wavelet import (
    SYM3,
    SparseWaveletModel,
    WaveletBasisSpec,
    dwt,
    idwt,
    max_levels,
    polish_filter,
    reconstruct_sparse,
    synthesis_matrix,
)


def random_series(n: int, seed: int = 0) -> np.ndarray:
    return np.random.default_rng(seed).normal(size=n)


def test_sym3_taps_verified():
    SYM3.check()
    assert SYM3.filter_length == 6
    assert math.isclose(sum(SYM3.decomposition_filter), math.sqrt(2), abs_tol=1e-12)


@pytest.mark.parametrize(
    "broken",
    [
        # scaled taps break the sqrt(2) sum
        lambda b: replace(
            b, decomposition_filter=tuple(2 * t for t in b.decomposition_filter)
        ),
        # reconstruction taps must be the reversed decomposition taps
        lambda b: replace(b, reconstruction_filter=b.decomposition_filter),
    ],
)
def test_corrupted_taps_rejected(broken):
    with pytest.raises(InvalidInputError):
        broken(SYM3).check()


def test_vanishing_moments_demanded_beyond_sym3_rejected():
    with pytest.raises(InvalidInputError, match="moment of degree 3"):
        SYM3.check(vanishing_moments=4)


@pytest.mark.parametrize(
    ("n", "expected"), [(8, 1), (16, 1), (64, 3), (209, 5), (1024, 7)]
)
def test_max_levels(n: int, expected: int):
    assert max_levels(n) == expected


def test_max_levels_capped_by_basis():
    assert max_levels(1024, WaveletBasisSpec.sym3(max_levels=4)) == 4


def test_too_short_series_rejected():
    with pytest.raises(InvalidInputError):
        max_levels(7)
    with pytest.raises(InvalidInputError):
        TimeSeries(np.zeros(7))


def test_too_many_levels_rejected():
    with pytest.raises(InvalidInputError, match="levels"):
        dwt(random_series(64), levels=4)
    with pytest.raises(InvalidInputError):
        dwt(random_series(64), levels=0)


def test_eight_samples_single_level():
    d = dwt(random_series(8))
    assert d.levels == 1
    assert d.coefficients.size == 8
    assert d.level_bounds == ((0, 4), (4, 8))


def test_power_of_two_layout():
    d = dwt(random_series(1024))
    assert d.coefficients.size == 1024
    assert d.levels == 7


@given(
    n=st.sampled_from([16, 64, 256, 1024]),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
@settings(max_examples=40, deadline=None)
def test_power_of_two_preserves_energy(n: int, seed: int):
    x = random_series(n, seed)
    d = dwt(x)
    assert math.isclose(np.linalg.norm(d.coefficients), np.linalg.norm(x), rel_tol=1e-10)
    np.testing.assert_allclose(idwt(d).samples, x, rtol=0, atol=1e-10)


@given(
    a=st.floats(min_value=-10, max_value=10),
    b=st.floats(min_value=-10, max_value=10),
    n=st.sampled_from([8, 64, 209]),
)
@settings(max_examples=40, deadline=None)
def test_transform_is_linear(a: float, b: float, n: int):
    x = random_series(n, seed=1)
    y = random_series(n, seed=2)
    combined = dwt(a * x + b * y).coefficients
    expected = a * dwt(x).coefficients + b * dwt(y).coefficients
    np.testing.assert_allclose(combined, expected, rtol=0, atol=1e-10)


def test_constant_series_has_zero_details():
    d = dwt([5.0] * 8, levels=1)
    assert np.max(np.abs(d.band(1))) < 1e-12
    np.testing.assert_allclose(d.band(0), 5 * math.sqrt(2), rtol=1e-13)


@pytest.mark.parametrize("n", [8, 64, 1024])
def test_time_series_input(n: int):
    series = TimeSeries(random_series(n))
    d = dwt(series)
    assert d.original_length == n
    np.testing.assert_allclose(idwt(d).samples, series.samples, atol=1e-10)


def test_polished_taps_match_published_table():
    published = np.asarray(pywt.Wavelet("sym3").dec_lo)
    np.testing.assert_allclose(SYM3.decomposition_filter, published, atol=1e-10)
    assert abs(float(np.sum(SYM3.decomposition_highpass))) < 1e-14


def test_polish_rejects_mismatched_moment_count():
    with pytest.raises(InvalidInputError, match="6 taps"):
        polish_filter(SYM3.decomposition_filter, vanishing_moments=2)


@given(
    n=st.integers(min_value=8, max_value=300),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
@settings(max_examples=60, deadline=None)
def test_perfect_reconstruction(n: int, seed: int):
    x = random_series(n, seed)
    d = dwt(x)
    assert d.original_length == n
    assert d.coefficients.size >= n
    np.testing.assert_allclose(idwt(d).samples, x, rtol=0, atol=1e-10)


def test_odd_length_layout_records_padding():
    d = dwt(random_series(209))
    assert d.layout.signal_lengths == (209, 105, 53, 27, 14)
    # one extra coefficient per padded level
    assert d.coefficients.size == 209 + 4


def test_origin_is_carried_through():
    series = TimeSeries(random_series(209), origin=1800)
    d = dwt(series)
    assert d.layout.origin == 1800
    assert idwt(d).index[0] == 1800


def test_quadratic_gives_vanishing_details():
    t = np.arange(16) / 16
    x = t**2
    hi = SYM3.decomposition_highpass
    # away from the wrap-around, a 3-moment high-pass annihilates a quadratic
    np.testing.assert_allclose(np.convolve(x, hi, "valid"), 0, atol=1e-12)

    d = dwt(x, levels=1)
    details = d.band(1)
    assert details.size == 8
    assert np.sum(np.abs(details) < 1e-9) >= 5


def test_coefficients_read_only():
    d = dwt(random_series(64))
    with pytest.raises(ValueError, match="read-only"):
        d.coefficients[0] = 1.0


def test_sparse_model_popcount_mismatch_rejected():
    d = dwt(random_series(64))
    mask = np.zeros(64, dtype=bool)
    mask[:5] = True
    with pytest.raises(InvalidInputError, match="5 entries"):
        SparseWaveletModel(mask, np.ones(4), d.layout)
    with pytest.raises(InvalidInputError, match="shape"):
        SparseWaveletModel(mask[:10], np.ones(5), d.layout)


def test_full_support_model_reconstructs_input():
    x = random_series(100)
    d = dwt(x)
    model = SparseWaveletModel.from_mask(d, np.ones(d.layout.size, dtype=bool))
    assert model.k == d.layout.size
    np.testing.assert_allclose(reconstruct_sparse(model).samples, x, atol=1e-10)
    np.testing.assert_array_equal(model.dense(), d.coefficients)


def test_empty_support_reconstructs_zero():
    d = dwt(random_series(64))
    model = SparseWaveletModel.from_mask(d, np.zeros(64, dtype=bool))
    assert model.k == 0
    np.testing.assert_array_equal(reconstruct_sparse(model).samples, np.zeros(64))


@pytest.mark.parametrize("n", [64, 209])
def test_synthesis_matrix_matches_reconstruction(n: int):
    rng = np.random.default_rng(n)
    d = dwt(random_series(n))
    indices = np.sort(rng.choice(d.layout.size, size=12, replace=False))
    values = rng.normal(size=12)
    mask = np.zeros(d.layout.size, dtype=bool)
    mask[indices] = True

    atoms = synthesis_matrix(d.layout, indices)
    assert atoms.shape == (n, 12)
    model = SparseWaveletModel.from_mask(d, mask, values)
    np.testing.assert_allclose(
        atoms @ values, reconstruct_sparse(model).samples, atol=1e-12
    )


def test_basis_functions_have_unit_norm():
    d = dwt(random_series(256))
    atoms = synthesis_matrix(d.layout, range(d.layout.size))
    np.testing.assert_allclose(atoms.T @ atoms, np.eye(256), atol=1e-10)
