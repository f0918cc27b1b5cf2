"""Closed-form functions on the circle used for walls and initial data."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from wallspde.domain.circle import CircleGrid, Field, WallPair

ProfileKind = Literal["constant", "fourier"]


@dataclass(frozen=True, slots=True)
class Profile:
    """a0 + sum_m cos[m-1] cos(m x) + sin[m-1] sin(m x); `constant` keeps only a0."""

    kind: ProfileKind
    a0: float = 0.0
    cos: tuple[float, ...] = ()
    sin: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("constant", "fourier"):
            raise ValueError(f"Unknown profile kind '{self.kind}'.")
        if self.kind == "constant" and (self.cos or self.sin):
            raise ValueError("A constant profile has no Fourier coefficients.")
        object.__setattr__(self, "cos", tuple(float(value) for value in self.cos))
        object.__setattr__(self, "sin", tuple(float(value) for value in self.sin))

    @classmethod
    def constant(cls, value: float) -> Profile:
        return cls("constant", float(value))

    @classmethod
    def fourier(cls, a0: float = 0.0, cos=(), sin=()) -> Profile:
        return cls("fourier", float(a0), tuple(cos), tuple(sin))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        value = np.full_like(x, self.a0)
        for m, coefficient in enumerate(self.cos, start=1):
            value = value + coefficient * np.cos(m * x)
        for m, coefficient in enumerate(self.sin, start=1):
            value = value + coefficient * np.sin(m * x)
        return value

    def sample(self, grid: CircleGrid, time: float = 0.0) -> Field:
        return grid.sample(self, time)

    def to_payload(self) -> dict[str, object]:
        payload: dict[str, object] = {"kind": self.kind, "a0": self.a0}
        if self.kind == "fourier":
            payload["cos"] = list(self.cos)
            payload["sin"] = list(self.sin)
        return payload


def build_walls(grid: CircleGrid, lower: Profile, upper: Profile) -> WallPair:
    return WallPair(lower.sample(grid), upper.sample(grid))


def constant_walls(grid: CircleGrid, lower: float = -1.0, upper: float = 1.0) -> WallPair:
    return WallPair(Field.constant(grid, lower), Field.constant(grid, upper))
