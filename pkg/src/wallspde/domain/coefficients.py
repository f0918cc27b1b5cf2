"""Closed-form scalar drift and diffusion coefficients."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

CoefficientKind = Literal["constant", "linear", "sine", "tanh"]
COEFFICIENT_KINDS: tuple[CoefficientKind, ...] = ("constant", "linear", "sine", "tanh")

# Sampling resolution for the finite-difference checks on a value range.
CHECK_SAMPLES = 2001


@dataclass(frozen=True, slots=True)
class Coefficient:
    """
    A scalar map z -> c(z) of one of four shapes:

    constant: offset
    linear:   offset + amplitude * z
    sine:     offset + amplitude * sin(frequency * z)
    tanh:     offset + amplitude * tanh(frequency * z)
    """

    kind: CoefficientKind
    offset: float = 0.0
    amplitude: float = 0.0
    frequency: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in COEFFICIENT_KINDS:
            raise ValueError(f"Unknown coefficient kind '{self.kind}'.")
        for name in ("offset", "amplitude", "frequency"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"Coefficient {name} must be finite.")

    @classmethod
    def constant(cls, value: float) -> Coefficient:
        return cls("constant", offset=float(value))

    @classmethod
    def linear(cls, slope: float, intercept: float = 0.0) -> Coefficient:
        return cls("linear", offset=float(intercept), amplitude=float(slope))

    @classmethod
    def sine(cls, offset: float, amplitude: float, frequency: float = 1.0) -> Coefficient:
        return cls("sine", float(offset), float(amplitude), float(frequency))

    @classmethod
    def tanh(cls, offset: float, amplitude: float, frequency: float = 1.0) -> Coefficient:
        return cls("tanh", float(offset), float(amplitude), float(frequency))

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if self.kind == "constant":
            return np.full_like(z, self.offset)
        if self.kind == "linear":
            return self.offset + self.amplitude * z
        if self.kind == "sine":
            return self.offset + self.amplitude * np.sin(self.frequency * z)
        return self.offset + self.amplitude * np.tanh(self.frequency * z)

    def derivative(self, z):
        z = np.asarray(z, dtype=float)
        if self.kind == "constant":
            return np.zeros_like(z)
        if self.kind == "linear":
            return np.full_like(z, self.amplitude)
        if self.kind == "sine":
            return self.amplitude * self.frequency * np.cos(self.frequency * z)
        return self.amplitude * self.frequency / np.cosh(self.frequency * z) ** 2

    @property
    def lipschitz(self) -> float:
        if self.kind == "constant":
            return 0.0
        if self.kind == "linear":
            return abs(self.amplitude)
        return abs(self.amplitude * self.frequency)

    @property
    def is_constant(self) -> bool:
        return self.lipschitz == 0.0

    def is_nonincreasing(self) -> bool:
        if self.kind == "constant":
            return True
        if self.kind == "linear":
            return self.amplitude <= 0.0
        if self.kind == "sine":
            return self.amplitude == 0.0 or self.frequency == 0.0
        return self.amplitude * self.frequency <= 0.0

    def check_lipschitz(self, lo: float, hi: float, bound: float | None = None, tol: float = 1e-9) -> bool:
        """Sampled finite differences on [lo, hi] stay within `bound` (default: own constant)."""
        limit = self.lipschitz if bound is None else bound
        z = np.linspace(lo, hi, CHECK_SAMPLES)
        slopes = np.abs(np.diff(self(z))) / np.diff(z)
        return bool(np.max(slopes, initial=0.0) <= limit + tol)

    def bounds_on(self, lo: float, hi: float) -> tuple[float, float]:
        """Sampled (min |c|, max |c|) over [lo, hi]."""
        values = np.abs(self(np.linspace(lo, hi, CHECK_SAMPLES)))
        return float(np.min(values)), float(np.max(values))

    def to_payload(self) -> dict[str, object]:
        return {
            "kind": self.kind,
            "offset": self.offset,
            "amplitude": self.amplitude,
            "frequency": self.frequency,
        }
