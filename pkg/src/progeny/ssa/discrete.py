"""Discrete-time binary-splitting demo.

Each generation, every individual independently produces two children with
probability p2 = K/(K + sqrt(x)) (progeny mode, x = total progeny) or
p2 = K/(K + z) (popsize mode, z = population), else none.  The probability
argument is frozen at its start-of-generation value.  Progeny mode loses
supercriticality for good once sqrt(x) crosses K; popsize mode hovers
around the carrying capacity K.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..rng import Xoshiro256

__all__ = ["GenerationSeries", "simulate_discrete_generations"]

MODES = ("progeny", "popsize")


@dataclass(frozen=True)
class GenerationSeries:
    """Rows (generation, population, total progeny), one per generation."""

    mode: str
    k_const: float
    generations: list[tuple[int, int, int]]


def split_probability(mode: str, k_const: float, z: int, x: int) -> float:
    if mode == "progeny":
        return k_const / (k_const + math.sqrt(x))
    return k_const / (k_const + z)


def simulate_discrete_generations(
    mode: str, k_const: float, n_gens: int, seed: int
) -> GenerationSeries:
    """Simulate n_gens generations from one founder (population 1, progeny 1).

    Row g records the state at the start of generation g; the series keeps
    emitting rows after extinction (population 0, progeny frozen).
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if not k_const > 0:
        raise ValueError(f"K must be > 0, got {k_const}")
    if n_gens < 0:
        raise ValueError("n_gens must be >= 0")
    gen = Xoshiro256(seed, 0)
    z, x = 1, 1
    rows: list[tuple[int, int, int]] = []
    for g in range(n_gens):
        rows.append((g, z, x))
        if z == 0:
            continue
        p2 = split_probability(mode, k_const, z, x)
        pairs = sum(1 for _ in range(z) if gen.uniform() < p2)
        children = 2 * pairs
        z = children
        x += children
    return GenerationSeries(mode=mode, k_const=k_const, generations=rows)
