"""Variation operators for the two GA stages.

Binary chromosomes are boolean masks holding exactly K ones; every operator
here preserves that count. Real chromosomes are coefficient vectors that must
never contain a (numerically) zero gene.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from ..base import InvalidInputError

if TYPE_CHECKING:
    from numpy.typing import NDArray

    BinaryChromosome = NDArray[np.bool_]
    RealChromosome = NDArray[np.float64]

# genes smaller than this count as zeroed
ZERO_GENE = 1e-12


@dataclass(frozen=True)
class BlendCrossoverConfig:
    alpha: float = 0.25

    def __post_init__(self):
        if not self.alpha >= 0:
            raise InvalidInputError(f"blend alpha must be nonnegative, got {self.alpha}")


def random_mask(n: int, k: int, rng: np.random.Generator) -> BinaryChromosome:
    """Uniformly random mask of length n with exactly k ones."""
    mask = np.zeros(n, dtype=bool)
    mask[rng.choice(n, size=k, replace=False)] = True
    return mask


def binary_crossover_uniform(
    a: BinaryChromosome, b: BinaryChromosome, rng: np.random.Generator
) -> BinaryChromosome:
    k = int(a.sum())
    assert int(b.sum()) == k, "parents hold different numbers of ones"
    child = np.where(rng.random(a.size) < 0.5, a, b)
    disagree = a != b
    surplus = int(child.sum()) - k
    # repair only touches loci where the parents disagree, so every one in the
    # child is still inherited from some parent
    if surplus > 0:
        candidates = np.flatnonzero(disagree & child)
        child[rng.choice(candidates, size=surplus, replace=False)] = False
    elif surplus < 0:
        candidates = np.flatnonzero(disagree & ~child)
        child[rng.choice(candidates, size=-surplus, replace=False)] = True
    assert int(child.sum()) == k
    return child


def swap_genes(
    c: BinaryChromosome, n_swaps: int, rng: np.random.Generator
) -> BinaryChromosome:
    """Move n_swaps ones to zero loci, each 0->1 paired with a 1->0."""
    ones = np.flatnonzero(c)
    zeros = np.flatnonzero(~c)
    n_swaps = min(n_swaps, ones.size, zeros.size)
    if n_swaps == 0:
        return c
    child = c.copy()
    child[rng.choice(ones, size=n_swaps, replace=False)] = False
    child[rng.choice(zeros, size=n_swaps, replace=False)] = True
    return child


def binary_mutate(
    c: BinaryChromosome, rate: float, rng: np.random.Generator
) -> BinaryChromosome:
    if rate <= 0:
        return c
    return swap_genes(c, int(rng.binomial(int(c.sum()), min(rate, 1.0))), rng)


def _redraw_zeros(
    child: RealChromosome,
    low: NDArray[np.float64],
    high: NDArray[np.float64],
    rng: np.random.Generator,
) -> RealChromosome:
    redrawable = high > low
    while (zeroed := np.flatnonzero((np.abs(child) < ZERO_GENE) & redrawable)).size:
        child[zeroed] = rng.uniform(low[zeroed], high[zeroed])
    return child


def real_crossover_blend(
    x: RealChromosome,
    y: RealChromosome,
    cfg: BlendCrossoverConfig,
    rng: np.random.Generator,
) -> RealChromosome:
    if x.shape != y.shape:
        raise InvalidInputError(f"parents differ in length: {x.size} != {y.size}")
    lower = np.minimum(x, y)
    upper = np.maximum(x, y)
    spread = cfg.alpha * (upper - lower)
    low, high = lower - spread, upper + spread
    child = rng.uniform(low, high)
    return _redraw_zeros(child, low, high, rng)


def real_mutate(
    c: RealChromosome, sigma_mut: float, rng: np.random.Generator
) -> RealChromosome:
    """Perturb one randomly chosen gene by N(0, sigma_mut^2), never zeroing it."""
    if sigma_mut <= 0:
        return c
    child = c.copy()
    gene = int(rng.integers(c.size))
    while True:
        value = c[gene] + rng.normal(0.0, sigma_mut)
        if abs(value) >= ZERO_GENE:
            break
    child[gene] = value
    return child
