"""Genetic algorithm for fixed-cardinality support selection and coefficient tuning."""

from __future__ import annotations

from .evolve import GaConfig, GaState, Individual, Operators, evolve, stall_measure
from .operators import (
    BlendCrossoverConfig,
    binary_crossover_uniform,
    binary_mutate,
    random_mask,
    real_crossover_blend,
    real_mutate,
    swap_genes,
)

__all__ = [
    "BlendCrossoverConfig",
    "GaConfig",
    "GaState",
    "Individual",
    "Operators",
    "binary_crossover_uniform",
    "binary_mutate",
    "evolve",
    "random_mask",
    "real_crossover_blend",
    "real_mutate",
    "stall_measure",
    "swap_genes",
]
