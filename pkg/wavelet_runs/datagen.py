"""Synthetic test signals: the Bumps signal and its noisy versions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, NamedTuple

import numpy as np
import pandas as pd

from .base import InvalidInputError, TimeSeries

if TYPE_CHECKING:
    from pathlib import Path

    NoiseFunction = Callable[
        ["NoiseModel", TimeSeries, np.random.Generator], "NoisySeries"
    ]

NOISE_MODELS: dict[str, NoiseFunction] = {}

# Donoho-Johnstone Bumps: positions, heights, widths
BUMPS_POSITIONS = (0.10, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81)
BUMPS_HEIGHTS = (4.0, 5.0, 3.0, 4.0, 5.0, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2)
BUMPS_WIDTHS = (0.005, 0.005, 0.006, 0.01, 0.01, 0.03, 0.01, 0.01, 0.005, 0.008, 0.005)

CSV_FLOAT_FORMAT = "%.17g"


@dataclass(frozen=True)
class BumpsSpec:
    n: int = 1024
    positions: tuple[float, ...] = BUMPS_POSITIONS
    heights: tuple[float, ...] = BUMPS_HEIGHTS
    widths: tuple[float, ...] = BUMPS_WIDTHS
    # rescale to this standard deviation, None keeps the raw amplitude
    target_std: float | None = None

    def __post_init__(self):
        if not len(self.positions) == len(self.heights) == len(self.widths):
            raise InvalidInputError("positions, heights and widths differ in length")
        if not all(0 < t < 1 for t in self.positions):
            raise InvalidInputError("bump positions must lie in (0, 1)")
        if any(h < 0 for h in self.heights) or not all(w > 0 for w in self.widths):
            raise InvalidInputError(
                "bump heights must be nonnegative and widths positive"
            )
        if self.target_std is not None and not self.target_std > 0:
            raise InvalidInputError(f"target_std must be positive, got {self.target_std}")


def bumps(spec: BumpsSpec | None = None) -> TimeSeries:
    spec = spec or BumpsSpec()
    t = np.arange(spec.n) / spec.n
    positions = np.asarray(spec.positions)[:, None]
    heights = np.asarray(spec.heights)[:, None]
    widths = np.asarray(spec.widths)[:, None]
    g = np.sum(heights * (1 + np.abs(t - positions) / widths) ** -4, axis=0)
    std = float(np.std(g))
    if spec.target_std is not None and std > 0:
        # pure scaling keeps the signal nonnegative with its zero floor
        g *= spec.target_std / std
    return TimeSeries(g)


class NoisySeries(NamedTuple):
    noisy: TimeSeries
    # reference for RMS: the clean signal, or the Poisson mean function
    truth: TimeSeries


def add_normal_noise(g: TimeSeries, sigma: float, rng: np.random.Generator) -> TimeSeries:
    if sigma < 0:
        raise InvalidInputError(f"sigma must be nonnegative, got {sigma}")
    if sigma == 0:
        return g
    return g.with_samples(g.samples + rng.normal(0.0, sigma, size=g.n))


def poisson_intensity(
    g: TimeSeries, lambda_min: float, lambda_max: float
) -> TimeSeries:
    """Map g affinely onto [lambda_min, lambda_max]."""
    if not 0 < lambda_min < lambda_max:
        raise InvalidInputError(
            f"need 0 < lambda_min < lambda_max, got {lambda_min}, {lambda_max}"
        )
    low, high = float(np.min(g.samples)), float(np.max(g.samples))
    if high == low:
        raise InvalidInputError("cannot map a constant signal onto a Poisson intensity")
    unit = (g.samples - low) / (high - low)
    lam = np.clip(lambda_min + unit * (lambda_max - lambda_min), lambda_min, lambda_max)
    return g.with_samples(lam)


def sample_poisson_series(
    g: TimeSeries, lambda_min: float, lambda_max: float, rng: np.random.Generator
) -> NoisySeries:
    truth = poisson_intensity(g, lambda_min, lambda_max)
    counts = rng.poisson(truth.samples).astype(np.float64)
    return NoisySeries(g.with_samples(counts), truth)


def stable_variates(
    alpha: float, scale: float, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Symmetric alpha-stable variates by the Chambers-Mallows-Stuck construction.

    Uses the parametrisation in which alpha = 2 is normal with variance
    ``2 * scale**2`` and alpha = 1 is Cauchy with the given scale.
    """
    if not 0 < alpha <= 2:
        raise InvalidInputError(f"alpha must be in (0, 2], got {alpha}")
    if not scale > 0:
        raise InvalidInputError(f"scale must be positive, got {scale}")
    phi = (rng.uniform(size=size) - 0.5) * np.pi
    w = rng.standard_exponential(size=size)
    if alpha == 1:
        return scale * np.tan(phi)
    if alpha == 2:
        return 2 * scale * np.sqrt(w) * np.sin(phi)
    return scale * (
        np.sin(alpha * phi)
        / np.cos(phi) ** (1 / alpha)
        * (np.cos((1 - alpha) * phi) / w) ** ((1 - alpha) / alpha)
    )


def add_stable_noise(
    g: TimeSeries, alpha: float, scale: float, rng: np.random.Generator
) -> TimeSeries:
    return g.with_samples(g.samples + stable_variates(alpha, scale, g.n, rng))


@dataclass(frozen=True)
class NoiseModel:
    kind: str
    sigma: float = 2.0
    lambda_min: float = 0.5
    lambda_max: float = 15.0
    alpha: float = 1.3
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in NOISE_MODELS:
            raise InvalidInputError(
                f"unknown noise kind {self.kind!r},"
                f" expected one of {sorted(NOISE_MODELS)}"
            )
        if self.kind == "normal" and not self.sigma > 0:
            raise InvalidInputError(f"sigma must be positive, got {self.sigma}")
        if self.kind == "poisson" and not 0 < self.lambda_min < self.lambda_max:
            raise InvalidInputError("need 0 < lambda_min < lambda_max")
        if self.kind == "stable" and not (0 < self.alpha <= 2 and self.scale > 0):
            raise InvalidInputError("need 0 < alpha <= 2 and scale > 0")

    def apply(self, g: TimeSeries, rng: np.random.Generator) -> NoisySeries:
        return NOISE_MODELS[self.kind](self, g, rng)


def noise_model(kind: str) -> Callable[[NoiseFunction], NoiseFunction]:
    def decorator(func: NoiseFunction) -> NoiseFunction:
        assert kind not in NOISE_MODELS, f"noise model {kind!r} registered twice"
        NOISE_MODELS[kind] = func
        return func

    return decorator


@noise_model("normal")
def _normal(model: NoiseModel, g: TimeSeries, rng: np.random.Generator) -> NoisySeries:
    return NoisySeries(add_normal_noise(g, model.sigma, rng), g)


@noise_model("poisson")
def _poisson(model: NoiseModel, g: TimeSeries, rng: np.random.Generator) -> NoisySeries:
    return sample_poisson_series(g, model.lambda_min, model.lambda_max, rng)


@noise_model("stable")
def _stable(model: NoiseModel, g: TimeSeries, rng: np.random.Generator) -> NoisySeries:
    return NoisySeries(add_stable_noise(g, model.alpha, model.scale, rng), g)


def write_generated_csv(path: Path, series: NoisySeries) -> None:
    frame = pd.DataFrame(
        {
            "index": series.truth.index,
            "truth": series.truth.samples,
            "noisy": series.noisy.samples,
        }
    )
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
