"""Periodic heat kernel, grid heat propagators, and the stochastic convolution."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from wallspde.core.errors import GridMismatchError
from wallspde.core.types import KernelRepresentation, PropagatorName
from wallspde.domain.circle import TWO_PI, CircleGrid, Field, FieldPath, PathLike, arc_distance, as_path
from wallspde.domain.noise import NoiseIncrement

KERNEL_TAIL = 1e-14
IMAGE_CUTOFF_TIME = 0.5
_LOG_TAIL = math.log(1.0 / KERNEL_TAIL)


@dataclass(frozen=True, slots=True)
class KernelEval:
    """A truncated series for G_t together with its term count."""

    t: float
    representation: KernelRepresentation
    truncation: int

    def __call__(self, x, y):
        r = np.asarray(arc_distance(x, y), dtype=float)
        if self.representation == "spectral":
            k = np.arange(1, self.truncation + 1, dtype=float)
            terms = np.exp(-(k**2) * self.t) * np.cos(np.multiply.outer(r, k))
            value = (1.0 + 2.0 * terms.sum(axis=-1)) / TWO_PI
        else:
            m = np.arange(-self.truncation, self.truncation + 1, dtype=float)
            shifted = np.add.outer(r, TWO_PI * m)
            value = np.exp(-(shifted**2) / (4.0 * self.t)).sum(axis=-1) / math.sqrt(4.0 * math.pi * self.t)
        value = np.maximum(value, 0.0)
        return float(value) if value.ndim == 0 else value


def image_terms(t: float) -> int:
    """Number of images M on each side so the dropped tail is below KERNEL_TAIL."""
    base = math.ceil(6.0 * math.sqrt(t) / TWO_PI) + 2
    tail = math.ceil((math.pi + math.sqrt(4.0 * t * _LOG_TAIL)) / TWO_PI) + 1
    return max(base, tail)


def spectral_terms(t: float) -> int:
    """Number of Fourier modes K so the dropped tail is below KERNEL_TAIL."""
    floor = KERNEL_TAIL * -math.expm1(-t) * math.pi
    return math.ceil(math.sqrt(-math.log(floor) / t)) + 1


def kernel_eval(t: float, rep: KernelRepresentation = "auto") -> KernelEval:
    if not t > 0.0:
        raise ValueError("Kernel time t must be > 0.")
    if rep == "auto":
        rep = "image" if t < IMAGE_CUTOFF_TIME else "spectral"
    if rep == "image":
        return KernelEval(t, "image", image_terms(t))
    if rep == "spectral":
        return KernelEval(t, "spectral", spectral_terms(t))
    raise ValueError(f"Unknown kernel representation '{rep}'.")


def kernel_value(t: float, x, y, rep: KernelRepresentation = "auto"):
    """G_t(x, y) on the circle, from the image sum or the Fourier series."""
    return kernel_eval(t, rep)(x, y)


@dataclass(frozen=True, slots=True)
class HeatPropagator:
    """
    One heat step of size dt on a grid, applied through the real FFT.

    `exponential` multiplies mode k by exp(-k^2 dt), the exact semigroup on grid
    modes. `implicit` multiplies by 1 / (1 + dt * (4/dx^2) sin^2(k dx / 2)), the
    backward-Euler step of the three-point Laplacian, which preserves order.
    """

    grid: CircleGrid
    dt: float
    kind: PropagatorName = "exponential"
    multiplier: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.dt > 0.0:
            raise ValueError("dt must be > 0.")
        k = self.grid.wavenumbers()
        if self.kind == "exponential":
            multiplier = np.exp(-(k**2) * self.dt)
        elif self.kind == "implicit":
            symbol = (4.0 / self.grid.dx**2) * np.sin(0.5 * k * self.grid.dx) ** 2
            multiplier = 1.0 / (1.0 + self.dt * symbol)
        else:
            raise ValueError(f"Unknown propagator '{self.kind}'.")
        multiplier.setflags(write=False)
        object.__setattr__(self, "multiplier", multiplier)

    def apply(self, values: np.ndarray, steps: int = 1) -> np.ndarray:
        """Apply the step `steps` times to nodal values (or to each row of a 2-D array)."""
        if steps < 0:
            raise ValueError("steps must be >= 0.")
        values = np.asarray(values, dtype=float)
        if steps == 0:
            return values.copy()
        spectrum = np.fft.rfft(values, axis=-1) * self.multiplier**steps
        return np.fft.irfft(spectrum, n=self.grid.n_x, axis=-1)

    def apply_field(self, item: Field) -> Field:
        _require_grid(self.grid, item.grid)
        return Field(self.grid, self.apply(item.values), item.time + self.dt)


def apply_semigroup(item: Field, t: float) -> Field:
    """Heat flow S_t of a field through the spectral multiplier exp(-k^2 t)."""
    if not t >= 0.0:
        raise ValueError("t must be >= 0.")
    if t == 0.0:
        return item
    k = item.grid.wavenumbers()
    spectrum = np.fft.rfft(item.values) * np.exp(-(k**2) * t)
    return Field(item.grid, np.fft.irfft(spectrum, n=item.grid.n_x), item.time + t)


def stochastic_convolution(
    drift_path: PathLike,
    sigma_path: PathLike,
    noise_path: Sequence[NoiseIncrement],
    t_grid: Sequence[float] | np.ndarray,
    propagator: PropagatorName = "exponential",
) -> FieldPath:
    """
    Mild-form convolution v_{k+1} = S_dt(v_k + dt*drift_k + sigma_k * dW_k / dx), v_0 = 0.

    drift_k and sigma_k are the path values at t_k; samples past the last step are ignored.
    """
    times = np.asarray(t_grid, dtype=float).reshape(-1)
    steps = times.size - 1
    if steps < 1:
        raise ValueError("t_grid needs at least two times.")
    if len(noise_path) != steps:
        raise ValueError(f"Expected {steps} noise increments for {times.size} times, got {len(noise_path)}.")
    drift = as_path(drift_path)
    sigma = as_path(sigma_path)
    if len(drift) < steps or len(sigma) < steps:
        raise ValueError("Drift and sigma paths must cover every step of t_grid.")
    grid = drift.grid
    _require_grid(grid, sigma.grid)
    values = np.zeros((times.size, grid.n_x))
    current = np.zeros(grid.n_x)
    propagators: dict[float, HeatPropagator] = {}
    for k in range(steps):
        dt = float(times[k + 1] - times[k])
        increment = noise_path[k]
        _require_grid(grid, increment.grid)
        if not math.isclose(increment.dt, dt, rel_tol=1e-9, abs_tol=1e-15):
            raise ValueError(f"Noise increment {k} has dt={increment.dt}, expected {dt}.")
        step = propagators.get(dt)
        if step is None:
            step = propagators[dt] = HeatPropagator(grid, dt, propagator)
        current = step.apply(current + dt * drift.values[k] + sigma.values[k] * increment.density())
        values[k + 1] = current
    return FieldPath(grid, times, values)


def _require_grid(a: CircleGrid, b: CircleGrid) -> None:
    if a != b:
        raise GridMismatchError(f"Grid mismatch: n_x={a.n_x} vs n_x={b.n_x}.")
