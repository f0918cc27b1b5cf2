"""Periodic grid on the circle, field containers, walls, and path norms."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from wallspde.core.errors import GridMismatchError, WallViolationError

TWO_PI = 2.0 * math.pi
FULL_PAIR_LIMIT = 2**12
HOLDER_SUBSAMPLE = 2**16


@dataclass(frozen=True, slots=True)
class CircleGrid:
    """Uniform periodic discretization of S^1 = R mod 2*pi."""

    n_x: int

    def __post_init__(self) -> None:
        if isinstance(self.n_x, bool) or not isinstance(self.n_x, (int, np.integer)):
            raise ValueError("n_x must be an integer.")
        if self.n_x < 4:
            raise ValueError("n_x must be >= 4.")

    @property
    def dx(self) -> float:
        return TWO_PI / self.n_x

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n_x) * self.dx

    def index(self, i: int) -> int:
        """Reduce a node index periodically."""
        return i % self.n_x

    def wavenumbers(self) -> np.ndarray:
        """Nonnegative integer wavenumbers of the real FFT on this grid."""
        return np.fft.rfftfreq(self.n_x, d=1.0 / self.n_x)

    def sample(self, fn: Callable[[np.ndarray], np.ndarray], time: float = 0.0) -> Field:
        """Sample a closed-form function at the nodes."""
        values = np.broadcast_to(np.asarray(fn(self.nodes), dtype=float), (self.n_x,))
        return Field(self, values, time)


@dataclass(frozen=True, slots=True, eq=False)
class Field:
    """Nodal values of a function on the circle at one time."""

    grid: CircleGrid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n_x,):
            raise ValueError(f"Field needs {self.grid.n_x} values, got shape {values.shape}.")
        if not np.all(np.isfinite(values)):
            raise ValueError("Field values must be finite.")
        if not self.time >= 0.0:
            raise ValueError("Field time must be >= 0.")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "time", float(self.time))

    @classmethod
    def constant(cls, grid: CircleGrid, value: float, time: float = 0.0) -> Field:
        return cls(grid, np.full(grid.n_x, float(value)), time)

    def with_values(self, values: np.ndarray, time: float | None = None) -> Field:
        return Field(self.grid, values, self.time if time is None else time)

    def h_norm(self) -> float:
        """The L^2(S^1) norm |.|_H."""
        return math.sqrt(max(l2_inner(self, self), 0.0))


@dataclass(frozen=True, slots=True, eq=False)
class FieldPath:
    """Fields on one grid sampled at nondecreasing times; values has shape (n_t, n_x)."""

    grid: CircleGrid
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        times = np.array(self.times, dtype=float).reshape(-1)
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape != (times.size, self.grid.n_x):
            raise ValueError(
                f"Path values must have shape ({times.size}, {self.grid.n_x}), got {values.shape}."
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("Path values must be finite.")
        if times.size > 1 and np.any(np.diff(times) < 0.0):
            raise ValueError("Path times must be nondecreasing.")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_fields(cls, fields: Sequence[Field]) -> FieldPath:
        if len(fields) == 0:
            raise ValueError("A path needs at least one field.")
        grid = fields[0].grid
        for item in fields:
            _require_same_grid(grid, item.grid)
        return cls(
            grid,
            np.array([item.time for item in fields]),
            np.stack([item.values for item in fields]),
        )

    def __len__(self) -> int:
        return int(self.times.size)

    def field(self, k: int) -> Field:
        return Field(self.grid, self.values[k], float(self.times[k]))

    def fields(self) -> list[Field]:
        return [self.field(k) for k in range(len(self))]

    def window(self, t_max: float) -> FieldPath:
        """Restrict to samples with time <= t_max."""
        keep = self.times <= t_max + 1e-12
        return FieldPath(self.grid, self.times[keep], self.values[keep])


PathLike = Union[FieldPath, Sequence[Field]]


@dataclass(frozen=True, slots=True, eq=False)
class WallPair:
    """Lower and upper reflecting walls h1 < h2 sampled at the nodes."""

    lower: Field
    upper: Field

    def __post_init__(self) -> None:
        _require_same_grid(self.lower.grid, self.upper.grid)
        if not np.all(self.lower.values < self.upper.values):
            raise WallViolationError("Walls must satisfy lower < upper at every node.")

    @property
    def grid(self) -> CircleGrid:
        return self.lower.grid

    def violation(self, values: np.ndarray) -> float:
        """Largest distance by which `values` leaves the walls (0 inside)."""
        below = np.max(self.lower.values - values, initial=0.0)
        above = np.max(values - self.upper.values, initial=0.0)
        return float(max(below, above, 0.0))

    def contains(self, field: Field, tol: float = 1e-12) -> bool:
        _require_same_grid(self.grid, field.grid)
        return self.violation(field.values) <= tol

    def clip(self, values: np.ndarray) -> np.ndarray:
        return np.clip(values, self.lower.values, self.upper.values)

    def magnitude(self) -> float:
        return float(max(np.max(np.abs(self.lower.values)), np.max(np.abs(self.upper.values))))

    def midpoint(self) -> Field:
        return Field(self.grid, 0.5 * (self.lower.values + self.upper.values))

    def value_range(self) -> tuple[float, float]:
        return float(np.min(self.lower.values)), float(np.max(self.upper.values))

    def scaled(self, factor: float) -> WallPair:
        """Walls multiplied by a positive factor."""
        if not factor > 0.0:
            raise ValueError("Wall scaling factor must be > 0.")
        return WallPair(
            self.lower.with_values(factor * self.lower.values),
            self.upper.with_values(factor * self.upper.values),
        )


class SpaceTimeMetric:
    """d((x,t),(y,s)) = (r(x,y)^2 + (t-s)^2)^(1/2) with r the shortest arc length."""

    def __call__(self, a: tuple[float, float], b: tuple[float, float]) -> float:
        return float(self.distance(a[0], a[1], b[0], b[1]))

    @staticmethod
    def distance(x, t, y, s) -> np.ndarray:
        r = arc_distance(x, y)
        return np.hypot(r, np.asarray(t, dtype=float) - np.asarray(s, dtype=float))


def arc_distance(x, y):
    """Length of the shortest arc between two angles."""
    gap = np.abs(np.mod(x, TWO_PI) - np.mod(y, TWO_PI))
    r = np.minimum(gap, TWO_PI - gap)
    if np.ndim(r) == 0:
        return float(r)
    return r


def l2_inner(a: Field, b: Field) -> float:
    """Rectangle-rule L^2(S^1) inner product."""
    _require_same_grid(a.grid, b.grid)
    return float(np.dot(a.values, b.values) * a.grid.dx)


def as_path(path: PathLike) -> FieldPath:
    if isinstance(path, FieldPath):
        return path
    return FieldPath.from_fields(list(path))


def sup_norm(path: PathLike) -> float:
    """Maximum of |value| over all nodes and recorded times."""
    if not isinstance(path, FieldPath) and len(path) == 0:
        raise ValueError("sup_norm needs a nonempty path.")
    resolved = as_path(path)
    if len(resolved) == 0:
        raise ValueError("sup_norm needs a nonempty path.")
    return float(np.max(np.abs(resolved.values)))


def holder_norm(
    path: PathLike,
    alpha: float,
    *,
    full_pair_limit: int = FULL_PAIR_LIMIT,
    subsample: int = HOLDER_SUBSAMPLE,
    seed: int = 0,
) -> float:
    """
    Space-time Holder quotient sup |v(x,t) - v(y,s)| / d((x,t),(y,s))^alpha.

    All pairs are used when the path has at most `full_pair_limit` samples;
    larger paths use every nearest-neighbour pair plus `subsample` random pairs
    drawn from a generator seeded with `seed`.
    """
    if not 0.0 < alpha < 0.25:
        raise ValueError("alpha must lie in (0, 1/4).")
    resolved = as_path(path)
    n_t, n_x = resolved.values.shape
    xs = np.tile(resolved.grid.nodes, n_t)
    ts = np.repeat(resolved.times, n_x)
    vs = resolved.values.reshape(-1)
    total = vs.size
    if total <= full_pair_limit:
        best = 0.0
        for i in range(total - 1):
            quotient = _quotients(xs, ts, vs, np.full(total - 1 - i, i), np.arange(i + 1, total), alpha)
            if quotient.size:
                best = max(best, float(np.max(quotient)))
        return best

    index = np.arange(total).reshape(n_t, n_x)
    right = np.roll(index, -1, axis=1)
    left = np.roll(index, 1, axis=1)
    first = [index.reshape(-1), index[:-1].reshape(-1), index[:-1].reshape(-1), index[:-1].reshape(-1)]
    second = [right.reshape(-1), index[1:].reshape(-1), right[1:].reshape(-1), left[1:].reshape(-1)]
    rng = np.random.default_rng(seed)
    first.append(rng.integers(0, total, size=subsample))
    second.append(rng.integers(0, total, size=subsample))
    quotient = _quotients(xs, ts, vs, np.concatenate(first), np.concatenate(second), alpha)
    return float(np.max(quotient)) if quotient.size else 0.0


def _quotients(
    xs: np.ndarray, ts: np.ndarray, vs: np.ndarray, a: np.ndarray, b: np.ndarray, alpha: float
) -> np.ndarray:
    distance = SpaceTimeMetric.distance(xs[a], ts[a], xs[b], ts[b])
    keep = distance > 0.0
    return np.abs(vs[a][keep] - vs[b][keep]) / distance[keep] ** alpha


def _require_same_grid(a: CircleGrid, b: CircleGrid) -> None:
    if a != b:
        raise GridMismatchError(f"Grid mismatch: n_x={a.n_x} vs n_x={b.n_x}.")
