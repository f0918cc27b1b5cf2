"""Named scalar functionals of a field, used by occupation and strong-Feller studies."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from wallspde.domain.circle import CircleGrid

# Acts on the last axis, so a whole path of rows is evaluated in one call.
Functional = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, slots=True)
class Observable:
    """A functional of nodal values with an optional known sup bound."""

    name: str
    fn: Functional
    sup_bound: float | None = None

    def __call__(self, values: np.ndarray):
        result = self.fn(np.asarray(values, dtype=float))
        if np.ndim(result) == 0:
            return float(result)
        return result

    @property
    def bounded(self) -> bool:
        return self.sup_bound is not None


def _point(grid: CircleGrid, raw: str, descriptor: str) -> int:
    try:
        index = int(raw)
    except ValueError as exc:
        raise ValueError(f"Observable '{descriptor}' needs an integer node index.") from exc
    if not 0 <= index < grid.n_x:
        raise ValueError(f"Observable '{descriptor}' node is outside 0..{grid.n_x - 1}.")
    return index


def parse_observable(descriptor: str, grid: CircleGrid) -> Observable:
    """
    Build an observable from its descriptor:
    point:<i>, mean, sup, sin_mean, mean_sign, tanh_point:<i>, mean_positive, constant:<c>.
    """
    name, _, argument = descriptor.strip().partition(":")
    if name == "point":
        i = _point(grid, argument, descriptor)
        return Observable(descriptor, lambda u: u[..., i])
    if name == "mean":
        return Observable(descriptor, lambda u: np.mean(u, axis=-1))
    if name == "sup":
        return Observable(descriptor, lambda u: np.max(u, axis=-1))
    if name == "sin_mean":
        return Observable(descriptor, lambda u: np.sin(np.mean(u, axis=-1)), 1.0)
    if name == "mean_sign":
        return Observable(descriptor, lambda u: (np.mean(u, axis=-1) > 0.0).astype(float), 1.0)
    if name == "tanh_point":
        i = _point(grid, argument or "0", descriptor)
        return Observable(descriptor, lambda u: np.tanh(u[..., i]), 1.0)
    if name == "mean_positive":
        return Observable(descriptor, lambda u: np.mean(u > 0.0, axis=-1), 1.0)
    if name == "constant":
        try:
            value = float(argument or "1")
        except ValueError as exc:
            raise ValueError(f"Observable '{descriptor}' needs a numeric value.") from exc
        return Observable(descriptor, lambda u: np.full(u.shape[:-1], value), abs(value))
    raise ValueError(f"Unknown observable '{descriptor}'.")


def default_observable_names(grid: CircleGrid) -> tuple[str, ...]:
    """Four evenly spaced point evaluations, the mean and the sup."""
    quarter = grid.n_x // 4
    points = tuple(f"point:{k * quarter}" for k in range(4))
    return points + ("mean", "sup")


def parse_observables(descriptors: tuple[str, ...] | list[str], grid: CircleGrid) -> list[Observable]:
    return [parse_observable(descriptor, grid) for descriptor in descriptors]
