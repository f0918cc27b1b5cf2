"""Space-time white-noise cell increments drawn from counter-based streams."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from wallspde.core.errors import GridMismatchError
from wallspde.core.rng import RNG, SeedSpec
from wallspde.domain.circle import CircleGrid, Field


@dataclass(frozen=True, slots=True, eq=False)
class NoiseIncrement:
    """Brownian-sheet masses of the n_x cells over one time step."""

    grid: CircleGrid
    dt: float
    values: np.ndarray

    def __post_init__(self) -> None:
        if not self.dt > 0.0:
            raise ValueError("dt must be > 0.")
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n_x,):
            raise ValueError(f"Increment needs {self.grid.n_x} values, got shape {values.shape}.")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: CircleGrid, dt: float) -> NoiseIncrement:
        return cls(grid, dt, np.zeros(grid.n_x))

    def density(self) -> np.ndarray:
        """Nodal noise density dW/dx."""
        return self.values / self.grid.dx


def sample_increment(grid: CircleGrid, dt: float, stream: SeedSpec, step_index: int) -> NoiseIncrement:
    """Draw n_x independent N(0, dx*dt) cell masses for one step of one stream."""
    if not dt > 0.0:
        raise ValueError("dt must be > 0.")
    rng = RNG(stream, step_index)
    return NoiseIncrement(grid, dt, rng.normal(math.sqrt(grid.dx * dt), grid.n_x))


def sample_refined_increment(
    grid: CircleGrid, dt: float, stream: SeedSpec, step_index: int, refinement: int = 0
) -> NoiseIncrement:
    """
    Increment over [k*dt, (k+1)*dt) summed from 2**refinement substeps.

    Substep j of step k uses counter k * 2**refinement + j at size dt / 2**refinement,
    so a run at dt/2 with refinement r sees the same sheet as a run at dt with r + 1.
    """
    if refinement < 0:
        raise ValueError("refinement must be >= 0.")
    if refinement == 0:
        return sample_increment(grid, dt, stream, step_index)
    parts = 2**refinement
    fine_dt = dt / parts
    total = np.zeros(grid.n_x)
    for j in range(parts):
        total += sample_increment(grid, fine_dt, stream, step_index * parts + j).values
    return NoiseIncrement(grid, dt, total)


@dataclass(frozen=True, slots=True)
class NoiseStream:
    """Step-indexed increments of one stream at a fixed step size."""

    grid: CircleGrid
    dt: float
    spec: SeedSpec
    refinement: int = 0
    silent: bool = False

    def increment(self, step_index: int) -> NoiseIncrement:
        if self.silent:
            return NoiseIncrement.zeros(self.grid, self.dt)
        return sample_refined_increment(self.grid, self.dt, self.spec, step_index, self.refinement)


def white_noise_pairing(increment: NoiseIncrement, field: Field) -> float:
    """One-step stochastic integral sum_i field_i * dW_i (the increment carries the cell measure)."""
    if increment.grid != field.grid:
        raise GridMismatchError(
            f"Grid mismatch: n_x={increment.grid.n_x} vs n_x={field.grid.n_x}."
        )
    return float(np.dot(field.values, increment.values))
