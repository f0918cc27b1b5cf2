"""Mollified coefficients, smooth penalized dynamics and their derivative flow."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import cumulative_trapezoid, trapezoid

from wallspde.core.errors import NumericalBlowUpError, SeedMismatchError
from wallspde.core.rng import SeedSpec
from wallspde.domain.circle import Field, FieldPath, WallPair, l2_inner
from wallspde.domain.coefficients import Coefficient
from wallspde.domain.reflected import PenalizedParams, step_count

TABLE_POINTS = 4097
QUADRATURE_NODES = 64


def bump(s):
    """Unnormalized mollifier exp(-1/(1 - s^2)) on (-1, 1), zero outside."""
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0
    safe = np.where(inside, 1.0 - s * s, 1.0)
    return np.where(inside, np.exp(-1.0 / safe), 0.0)


@lru_cache(maxsize=1)
def _cdf_tables() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Grid s, distribution F(s) of the normalized bump, and G(a) = int_a^1 (1 - F)."""
    s = np.linspace(-1.0, 1.0, TABLE_POINTS)
    density = bump(s)
    density = density / trapezoid(density, s)
    cdf = cumulative_trapezoid(density, s, initial=0.0)
    cdf = cdf / cdf[-1]
    upper_tail = cumulative_trapezoid(1.0 - cdf, s, initial=0.0)
    excess = upper_tail[-1] - upper_tail
    for table in (s, cdf, excess):
        table.setflags(write=False)
    return s, cdf, excess


@lru_cache(maxsize=8)
def _quadrature(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    s, w = leggauss(nodes)
    weights = w * bump(s)
    return s, weights / weights.sum()


def mollifier_cdf(a):
    s, cdf, _ = _cdf_tables()
    return np.interp(a, s, cdf, left=0.0, right=1.0)


def mollifier_excess(a):
    """E[(S - a)^+] for S distributed with the normalized bump."""
    s, _, excess = _cdf_tables()
    a = np.asarray(a, dtype=float)
    return np.where(a < -1.0, -a, np.interp(a, s, excess, left=excess[0], right=0.0))


@dataclass(frozen=True, slots=True)
class MollifiedCoefficients:
    """
    f_n = f * phi_n, sigma_n = sigma * phi_n, and the smoothed wall penalties
    k_n(z, x) ~ (z - h1(x))^- and l_n(z, x) ~ (z - h2(x))^+ at bandwidth 1/n.
    """

    n: int
    drift: Coefficient
    sigma: Coefficient
    walls: WallPair
    quadrature_nodes: int = QUADRATURE_NODES

    def __post_init__(self) -> None:
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ValueError("Mollifier bandwidth n must be a positive integer.")

    def _smooth(self, fn, z):
        s, weights = _quadrature(self.quadrature_nodes)
        z = np.asarray(z, dtype=float)
        return np.sum(fn(z[..., None] - s / self.n) * weights, axis=-1)

    def f(self, z):
        return self._smooth(self.drift, z)

    def df(self, z):
        return self._smooth(self.drift.derivative, z)

    def sigma_n(self, z):
        return self._smooth(self.sigma, z)

    def dsigma(self, z):
        return self._smooth(self.sigma.derivative, z)

    def k(self, z):
        return mollifier_excess(self.n * (np.asarray(z) - self.walls.lower.values)) / self.n

    def dk(self, z):
        return -(1.0 - mollifier_cdf(self.n * (np.asarray(z) - self.walls.lower.values)))

    def l(self, z):
        return mollifier_excess(-self.n * (np.asarray(z) - self.walls.upper.values)) / self.n

    def dl(self, z):
        return mollifier_cdf(self.n * (np.asarray(z) - self.walls.upper.values))

    def sign_check(self, lo: float, hi: float, samples: int = 401) -> tuple[float, float]:
        """(max dk, min dl) over z in [lo, hi] at every node."""
        z = np.linspace(lo, hi, samples)[:, None]
        return float(np.max(self.dk(z))), float(np.min(self.dl(z)))


@dataclass(frozen=True, slots=True, eq=False)
class MollifiedRun:
    path: FieldPath
    seeds: SeedSpec
    epsilon: float
    delta: float


@dataclass(frozen=True, slots=True, eq=False)
class DerivativeFlow:
    """Directional derivative X of the mollified run along `direction`."""

    base: MollifiedRun
    direction: Field
    path: FieldPath

    def energy_ratio(self) -> np.ndarray:
        """|X(t)|_H^2 / |direction|_H^2 per recorded time (0 for a zero direction)."""
        norm = l2_inner(self.direction, self.direction)
        energy = np.sum(self.path.values**2, axis=1) * self.path.grid.dx
        if norm == 0.0:
            return np.zeros_like(energy)
        return energy / norm


def _require_finite(values: np.ndarray) -> None:
    if not np.all(np.isfinite(values)):
        raise NumericalBlowUpError("Time step produced non-finite values.")


def _require_penalty(epsilon: float, delta: float, p: PenalizedParams) -> None:
    if not (epsilon > 0.0 and delta > 0.0):
        raise ValueError("epsilon and delta must be > 0.")
    if p.dt > min(epsilon, delta) * (1.0 + 1e-12):
        raise ValueError("The explicit mollified penalty needs dt <= min(epsilon, delta).")


def run_mollified(
    u0: Field,
    mc: MollifiedCoefficients,
    epsilon: float,
    delta: float,
    T: float,
    p: PenalizedParams,
    seeds: SeedSpec,
) -> MollifiedRun:
    """u_{k+1} = S(u + dt[f_n(u) + k_n(u)/delta - l_n(u)/epsilon] + sigma_n(u) dW/dx)."""
    _require_penalty(epsilon, delta, p)
    heat = p.heat(u0.grid)
    noise = p.noise(u0.grid, seeds)
    steps = step_count(T, p.dt)
    rows = np.empty((steps + 1, u0.grid.n_x))
    rows[0] = u0.values
    dx = u0.grid.dx
    for k in range(steps):
        u = rows[k]
        forcing = mc.f(u) + mc.k(u) / delta - mc.l(u) / epsilon
        rows[k + 1] = heat.apply(u + p.dt * forcing + mc.sigma_n(u) * noise.increment(k).values / dx)
        _require_finite(rows[k + 1])
    times = u0.time + p.dt * np.arange(steps + 1)
    return MollifiedRun(FieldPath(u0.grid, times, rows), seeds, epsilon, delta)


def derivative_flow(
    u0: Field,
    direction: Field,
    mc: MollifiedCoefficients,
    epsilon: float,
    delta: float,
    T: float,
    p: PenalizedParams,
    seeds: SeedSpec,
    base: MollifiedRun | None = None,
) -> DerivativeFlow:
    """
    Exact derivative of the mollified scheme:
    X_{k+1} = S(X + dt[f_n'(u) + dk_n(u)/delta - dl_n(u)/epsilon] X + sigma_n'(u) X dW/dx),
    evaluated along the base path driven by the same noise.
    """
    if base is None:
        base = run_mollified(u0, mc, epsilon, delta, T, p, seeds)
    elif base.seeds != seeds:
        raise SeedMismatchError("The base path was driven by another noise stream.")
    elif len(base.path) != step_count(T, p.dt) + 1:
        raise ValueError("The base path does not cover [0, T] at this step size.")
    _require_penalty(epsilon, delta, p)
    heat = p.heat(u0.grid)
    noise = p.noise(u0.grid, seeds)
    dx = u0.grid.dx
    rows = np.empty_like(base.path.values)
    rows[0] = direction.values
    for k in range(len(base.path) - 1):
        u = base.path.values[k]
        x = rows[k]
        gain = mc.df(u) + mc.dk(u) / delta - mc.dl(u) / epsilon
        rows[k + 1] = heat.apply(x + p.dt * gain * x + mc.dsigma(u) * x * noise.increment(k).values / dx)
        _require_finite(rows[k + 1])
    return DerivativeFlow(base, direction, FieldPath(u0.grid, base.path.times, rows))


def finite_difference_flow(
    u0: Field,
    direction: Field,
    h: float,
    mc: MollifiedCoefficients,
    epsilon: float,
    delta: float,
    T: float,
    p: PenalizedParams,
    seeds: SeedSpec,
) -> FieldPath:
    """(u(u0 + h*direction) - u(u0)) / h on shared noise."""
    if not h > 0.0 or not math.isfinite(h):
        raise ValueError("h must be a positive finite number.")
    shifted = u0.with_values(u0.values + h * direction.values)
    plain = run_mollified(u0, mc, epsilon, delta, T, p, seeds).path
    moved = run_mollified(shifted, mc, epsilon, delta, T, p, seeds).path
    return FieldPath(u0.grid, plain.times, (moved.values - plain.values) / h)
