"""Heat kernel identity checks."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from wallspde.domain.circle import TWO_PI, CircleGrid, Field
from wallspde.domain.heat_kernel import apply_semigroup, kernel_eval

logger = logging.getLogger(__name__)

CHECK_TIMES = (0.01, 0.1, 1.0)
# Below t = 0.1 the Nyquist cut leaves O(exp(-k_max^2 t)) negative kernel weights on a grid.
MAXIMUM_TIMES = (0.1, 1.0)
# Uniform quadrature of a smooth periodic integrand converges geometrically.
QUADRATURE_POINTS = 2048
KERNEL_TOLERANCE = 1e-10
SEMIGROUP_TOLERANCE = 1e-12


@dataclass(frozen=True, slots=True)
class KernelCheckRow:
    check: str
    error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.error <= self.tolerance


@dataclass(frozen=True, slots=True)
class KernelCheckReport:
    rows: tuple[KernelCheckRow, ...]

    csv_header = ("check", "error", "tolerance")

    def csv_rows(self):
        for row in self.rows:
            yield (row.check, row.error, row.tolerance)

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    def failed(self) -> list[str]:
        return [row.check for row in self.rows if not row.passed]

    def max_error(self) -> float:
        return max(row.error for row in self.rows)

    def summary(self) -> dict[str, object]:
        return {"checks": len(self.rows), "max_error": self.max_error(), "failed": self.failed()}


def mass_error(t: float) -> float:
    """|int G_t(0, y) dy - 1| by the periodic rectangle rule."""
    y = np.linspace(0.0, TWO_PI, QUADRATURE_POINTS, endpoint=False)
    values = kernel_eval(t)(0.0, y)
    return abs(float(np.sum(values)) * TWO_PI / QUADRATURE_POINTS - 1.0)


def representation_gap(t: float, points: int = 64) -> float:
    """max |spectral - image| over a uniform grid of separations."""
    r = np.linspace(0.0, TWO_PI, points, endpoint=False)
    return float(np.max(np.abs(kernel_eval(t, "spectral")(0.0, r) - kernel_eval(t, "image")(0.0, r))))


def symmetry_gap(t: float, points: int = 64) -> float:
    x = np.linspace(0.0, TWO_PI, points, endpoint=False)
    y = np.roll(x, 7) + 0.3
    kernel = kernel_eval(t)
    return float(np.max(np.abs(kernel(x, y) - kernel(y, x))))


def semigroup_gap(grid: CircleGrid, s: float, t: float, seed: int = 0) -> float:
    """max |S_t S_s g - S_{s+t} g| for a random field g."""
    g = Field(grid, np.random.default_rng(seed).standard_normal(grid.n_x))
    composed = apply_semigroup(apply_semigroup(g, s), t)
    direct = apply_semigroup(g, s + t)
    return float(np.max(np.abs(composed.values - direct.values)))


def eigenfunction_gap(grid: CircleGrid, t: float = 1.0) -> float:
    g = grid.sample(np.cos)
    return float(np.max(np.abs(apply_semigroup(g, t).values - math.exp(-t) * g.values)))


def mean_drift(grid: CircleGrid, t: float, seed: int = 0) -> float:
    g = Field(grid, np.random.default_rng(seed).standard_normal(grid.n_x))
    return abs(float(np.mean(apply_semigroup(g, t).values) - np.mean(g.values)))


def maximum_excess(grid: CircleGrid, t: float, seed: int = 0) -> float:
    """(sup S_t g - sup g)^+ for a random field g."""
    g = Field(grid, np.random.default_rng(seed).standard_normal(grid.n_x))
    return max(float(np.max(apply_semigroup(g, t).values) - np.max(g.values)), 0.0)


def run_kernel_check(grid: CircleGrid, seed: int = 0) -> KernelCheckReport:
    """All kernel and semigroup identities at the standard check times."""
    rows: list[KernelCheckRow] = []
    for t in CHECK_TIMES:
        rows.append(KernelCheckRow(f"mass_t={t:g}", mass_error(t), KERNEL_TOLERANCE))
        rows.append(KernelCheckRow(f"representations_t={t:g}", representation_gap(t), KERNEL_TOLERANCE))
        rows.append(KernelCheckRow(f"symmetry_t={t:g}", symmetry_gap(t), KERNEL_TOLERANCE))
        rows.append(KernelCheckRow(f"mean_t={t:g}", mean_drift(grid, t, seed), SEMIGROUP_TOLERANCE))
    for t in MAXIMUM_TIMES:
        rows.append(KernelCheckRow(f"maximum_t={t:g}", maximum_excess(grid, t, seed), SEMIGROUP_TOLERANCE))
    rows.append(KernelCheckRow("semigroup", semigroup_gap(grid, 0.1, 0.3, seed), SEMIGROUP_TOLERANCE))
    rows.append(KernelCheckRow("eigenfunction_cos", eigenfunction_gap(grid), SEMIGROUP_TOLERANCE))
    report = KernelCheckReport(tuple(rows))
    logger.info("Kernel check: %d identities, max error %.3e", len(rows), report.max_error())
    return report
