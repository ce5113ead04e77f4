"""Random test states that stay well inside the default grid."""

from __future__ import annotations

import numpy as np

from .grid import Grid, PhysicalConstants, WaveFunction
from .states import number_states


def random_gaussian_state(grid: Grid, rng: np.random.Generator,
                          constants: PhysicalConstants, max_terms: int = 3) -> WaveFunction:
    """Normalized superposition of 1..max_terms chirped, squeezed Gaussians."""
    lam = constants.lam
    x = grid.x
    out = np.zeros(grid.n_points, dtype=np.complex128)
    for _ in range(rng.integers(1, max_terms + 1)):
        centre = rng.uniform(-3, 3) * lam
        width = rng.uniform(0.4, 1.5) * lam
        chirp = rng.uniform(-1, 1)
        k = rng.uniform(-2, 2) / lam
        amp = rng.normal() + 1j * rng.normal()
        out += amp * np.exp(-((x - centre) ** 2) / (4 * width**2) * (1 - 1j * chirp) + 1j * k * x)
    return WaveFunction(grid, out).normalized()


def random_number_superposition(grid: Grid, rng: np.random.Generator,
                                constants: PhysicalConstants, n_max: int = 10) -> WaveFunction:
    """Normalized random complex combination of chi_0..chi_{n_max}."""
    chi = number_states(grid, n_max + 1, constants)
    coeffs = rng.normal(size=n_max + 1) + 1j * rng.normal(size=n_max + 1)
    return WaveFunction(grid, coeffs @ chi).normalized()
