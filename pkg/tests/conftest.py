"""Shared fixtures and deterministic random-trajectory helpers."""

import numpy as np
import pytest

from mpass.trajectory import TimeGrid, Trajectory


def smooth_trajectory(grid: TimeGrid, dim: int, rng: np.random.Generator,
                      modes: int = 6, amplitude: float = 1.0) -> Trajectory:
    """Random band-limited periodic loop.

    A few low Fourier modes with 1/(1+m^2) decay, so derivatives stay
    O(amplitude) and finite-difference checks are well scaled.
    """
    t = grid.nodes
    omega = np.pi / grid.half_period
    values = np.zeros((grid.node_count, dim))
    for j in range(dim):
        values[:, j] = rng.normal() * 0.3
        for m in range(1, modes + 1):
            a, b = rng.normal(size=2) / (1.0 + m * m)
            values[:, j] += a * np.cos(m * omega * t) + b * np.sin(m * omega * t)
    scale = amplitude * rng.uniform(0.2, 1.5)
    return Trajectory(grid, scale * values)


def rough_trajectory(grid: TimeGrid, dim: int, rng: np.random.Generator) -> Trajectory:
    """Unsmoothed white-noise node values (stress case for inequalities)."""
    return Trajectory(grid, rng.normal(size=(grid.node_count, dim)))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260821)
