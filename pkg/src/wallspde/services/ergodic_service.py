"""Invariant-measure diagnostics: occupation laws, two-chain distances and Holder tightness."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import ks_2samp

from wallspde.core.rng import SeedSpec
from wallspde.domain.circle import Field, FieldPath, WallPair, holder_norm
from wallspde.domain.coupling import CouplingParams, run_coupled_general, run_coupled_ordered
from wallspde.domain.heat_kernel import stochastic_convolution
from wallspde.domain.observables import Observable
from wallspde.domain.reflected import PenalizedParams, iterate_steps, run_reflected, step_count
from wallspde.services.coupling_service import proportion
from wallspde.services.replica_runner import run_replicas

logger = logging.getLogger(__name__)

KS_ALPHA = 0.05
TIGHTNESS_WINDOW = 1.0


def ks_null_band(n: int, m: int, alpha: float = KS_ALPHA) -> float:
    """Asymptotic two-sample KS critical distance c(alpha) * sqrt((n + m) / (n m))."""
    if n < 1 or m < 1:
        raise ValueError("Both samples must be nonempty.")
    return math.sqrt(-0.5 * math.log(alpha / 2.0)) * math.sqrt((n + m) / (n * m))


def ks_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(ks_2samp(a, b).statistic)


def _sample_indices(dt: float, times: tuple[float, ...]) -> dict[int, float]:
    return {step_count(t, dt): t for t in times}


@dataclass(frozen=True, slots=True, eq=False)
class OccupationSummary:
    """Pooled, sorted observable samples taken every `stride` steps after `burn_in`."""

    observables: tuple[str, ...]
    burn_in: float
    stride: int
    samples: dict[str, np.ndarray]
    replicas: int

    csv_header = ("observable", "value")

    def csv_rows(self):
        for name in self.observables:
            for value in self.samples[name]:
                yield (name, float(value))

    def summary(self) -> dict[str, object]:
        return {
            "replicas": self.replicas,
            "burn_in": self.burn_in,
            "stride": self.stride,
            "samples_per_observable": int(self.samples[self.observables[0]].size),
            "medians": {name: float(np.median(self.samples[name])) for name in self.observables},
        }


def occupation_measure(
    u0: Field,
    walls: WallPair,
    horizon: float,
    burn_in: float,
    stride: int,
    observables: list[Observable],
    p: PenalizedParams,
    master_seed: int,
    replicas: int,
    threads: int | None = None,
) -> OccupationSummary:
    if not horizon > burn_in:
        raise ValueError("horizon must exceed burn_in.")
    if stride < 1:
        raise ValueError("stride must be >= 1.")
    if not observables:
        raise ValueError("At least one observable is required.")
    steps = step_count(horizon, p.dt)
    first = int(math.ceil(burn_in / p.dt - 1e-9))

    def task(replica_id: int) -> np.ndarray:
        rows = []
        for state in iterate_steps(u0, walls, p, SeedSpec(master_seed, replica_id), steps):
            if state.index >= first and (state.index - first) % stride == 0:
                rows.append([obs(state.values) for obs in observables])
        return np.array(rows).reshape(-1, len(observables))

    batch = run_replicas(task, replicas, threads)
    pooled = np.concatenate(batch.require_complete(), axis=0)
    names = tuple(obs.name for obs in observables)
    samples = {name: np.sort(pooled[:, j]) for j, name in enumerate(names)}
    return OccupationSummary(names, burn_in, stride, samples, replicas)


@dataclass(frozen=True, slots=True)
class BurnInStability:
    distances: dict[str, float]
    null_band: float

    @property
    def passed(self) -> bool:
        return all(value <= self.null_band for value in self.distances.values())


def burn_in_stability(
    u0: Field,
    walls: WallPair,
    horizon: float,
    burn_in: float,
    stride: int,
    observables: list[Observable],
    p: PenalizedParams,
    master_seed: int,
    replicas: int,
    threads: int | None = None,
) -> tuple[OccupationSummary, BurnInStability]:
    """Occupation laws after burn-in B and 2B over windows of equal length, compared by KS."""
    base = occupation_measure(u0, walls, horizon, burn_in, stride, observables, p, master_seed, replicas, threads)
    shifted = occupation_measure(
        u0, walls, horizon + burn_in, 2.0 * burn_in, stride, observables, p, master_seed, replicas, threads
    )
    distances = {name: ks_distance(base.samples[name], shifted.samples[name]) for name in base.observables}
    first = base.samples[base.observables[0]].size
    second = shifted.samples[shifted.observables[0]].size
    return base, BurnInStability(distances, ks_null_band(first, second))


@dataclass(frozen=True, slots=True, eq=False)
class TwoChainReport:
    """KS distances of independent chains and coupled-gap probabilities per time."""

    t_list: tuple[float, ...]
    ks: dict[str, tuple[float, ...]]
    null_band: float
    gap_probability: tuple[float, ...]
    gap_stderr: tuple[float, ...]

    csv_header = ("t", "observable", "ks_distance", "null_band")
    gap_csv_header = ("t", "gap_probability", "stderr")

    def csv_rows(self):
        for name, values in self.ks.items():
            for t, value in zip(self.t_list, values):
                yield (t, name, value, self.null_band)

    def gap_rows(self):
        for t, p, se in zip(self.t_list, self.gap_probability, self.gap_stderr):
            yield (t, p, se)

    def ks_nonincreasing(self) -> bool:
        return all(
            all(b <= a + self.null_band for a, b in zip(values, values[1:])) for values in self.ks.values()
        )

    def gap_nonincreasing(self) -> bool:
        p, s = self.gap_probability, self.gap_stderr
        return all(p[j + 1] <= p[j] + 2.0 * math.hypot(s[j], s[j + 1]) for j in range(len(p) - 1))

    def final_ks(self) -> float:
        return max(values[-1] for values in self.ks.values())

    def summary(self) -> dict[str, object]:
        return {
            "t_list": list(self.t_list),
            "ks": {name: list(values) for name, values in self.ks.items()},
            "null_band": self.null_band,
            "gap_probability": list(self.gap_probability),
            "gap_stderr": list(self.gap_stderr),
        }


@dataclass(frozen=True, slots=True)
class _ChainSample:
    a: np.ndarray
    b: np.ndarray
    gaps: tuple[bool, ...]


def two_chain_tv_proxy(
    u0_a: Field,
    u0_b: Field,
    walls: WallPair,
    t_list: tuple[float, ...],
    observables: list[Observable],
    p: PenalizedParams,
    cp: CouplingParams,
    master_seed: int,
    replicas: int,
    threads: int | None = None,
) -> TwoChainReport:
    """
    Independent chains from u0_a (substream 0) and u0_b (substream 1) compared by KS per
    observable at each t, and the probability that a coupled pair is still apart at t.
    """
    times = tuple(sorted(t_list))
    if not times:
        raise ValueError("t_list must not be empty.")
    wanted = _sample_indices(p.dt, times)
    steps = max(wanted)
    ordered = bool(np.all(u0_a.values >= u0_b.values))

    def chain(u0: Field, seeds: SeedSpec) -> np.ndarray:
        rows = np.zeros((len(times), len(observables)))
        for state in iterate_steps(u0, walls, p, seeds, steps):
            if state.index in wanted:
                rows[times.index(wanted[state.index])] = [obs(state.values) for obs in observables]
        return rows

    def task(replica_id: int) -> _ChainSample:
        seeds = SeedSpec(master_seed, replica_id)
        a = chain(u0_a, seeds.with_substream(0))
        b = chain(u0_b, seeds.with_substream(1))
        coupled = seeds.with_substream(2)
        if ordered:
            diag = run_coupled_ordered(u0_a, u0_b, walls, times[-1], p, coupled, cp).diagnostics
            gaps = tuple(diag.gap_at(t) > cp.zeta for t in times)
        else:
            run = run_coupled_general(u0_a, u0_b, walls, times[-1], p, coupled, cp)
            gaps = tuple(not run.coupled_by(t) for t in times)
        return _ChainSample(a, b, gaps)

    batch = run_replicas(task, replicas, threads)
    samples = batch.require_complete()
    a = np.stack([sample.a for sample in samples])
    b = np.stack([sample.b for sample in samples])
    ks = {
        obs.name: tuple(ks_distance(a[:, j, i], b[:, j, i]) for j in range(len(times)))
        for i, obs in enumerate(observables)
    }
    probabilities = [proportion(sum(sample.gaps[j] for sample in samples), len(samples)) for j in range(len(times))]
    report = TwoChainReport(
        t_list=times,
        ks=ks,
        null_band=ks_null_band(len(samples), len(samples)),
        gap_probability=tuple(value for value, _ in probabilities),
        gap_stderr=tuple(se for _, se in probabilities),
    )
    logger.info("Two chains: max KS at t=%g is %.4f (null band %.4f)", times[-1], report.final_ks(), report.null_band)
    return report


@dataclass(frozen=True, slots=True, eq=False)
class TightnessReport:
    """Holder statistics Y of the stochastic convolution on [0, 1] per initial datum."""

    initials: tuple[str, ...]
    holder: dict[str, np.ndarray]
    exponent: float
    kappa: float
    radius: float

    csv_header = ("initial", "replica", "holder")

    def csv_rows(self):
        for name in self.initials:
            for replica, value in enumerate(self.holder[name]):
                yield (name, replica, float(value))

    def moment(self, name: str) -> float:
        """Raw moment E[Y^(1/kappa)]."""
        return float(np.mean(self.holder[name] ** (1.0 / self.kappa)))

    def moment_root(self, name: str) -> float:
        """The kappa-th root of the raw moment, computed in log space."""
        values = self.holder[name]
        positive = values[values > 0.0]
        if positive.size == 0:
            return 0.0
        logs = np.log(positive) / self.kappa
        top = float(np.max(logs))
        log_mean = top + math.log(float(np.sum(np.exp(logs - top))) / values.size)
        return math.exp(self.kappa * log_mean)

    def ratio(self) -> float:
        roots = [self.moment_root(name) for name in self.initials]
        if max(roots) == 0.0:
            return 1.0
        if min(roots) == 0.0:
            return math.inf
        return max(roots) / min(roots)

    def compact_probability(self, name: str) -> float:
        return float(np.mean(self.holder[name] <= self.radius))

    def summary(self) -> dict[str, object]:
        return {
            "exponent": self.exponent,
            "moment_roots": {name: self.moment_root(name) for name in self.initials},
            "moment_ratio": self.ratio(),
            "compact_probability": {name: self.compact_probability(name) for name in self.initials},
            "compact_probability_min": min(self.compact_probability(name) for name in self.initials),
            "radius": self.radius,
        }


def convolution_along(u0: Field, walls: WallPair, T: float, p: PenalizedParams, seeds: SeedSpec) -> FieldPath:
    """The stochastic convolution driven by f(u) and sigma(u) along the reflected path from u0."""
    record = run_reflected(u0, walls, T, p, seeds)
    grid = record.grid
    noise = p.noise(grid, seeds)
    u = record.path.values
    drift = FieldPath(grid, record.times, p.drift(u))
    sigma = FieldPath(grid, record.times, p.sigma(u))
    increments = [noise.increment(k) for k in range(len(u) - 1)]
    return stochastic_convolution(drift, sigma, increments, record.times, p.propagator)


def tightness_stats(
    g_list: dict[str, Field],
    walls: WallPair,
    alpha: float,
    kappa: float,
    p: PenalizedParams,
    master_seed: int,
    replicas: int,
    threads: int | None = None,
    radius: float = 10.0,
) -> TightnessReport:
    exponent = alpha - kappa
    if not (kappa > 0.0 and 0.0 < exponent < 0.25):
        raise ValueError("alpha - kappa must lie in (0, 1/4) with kappa > 0.")
    names = tuple(g_list)
    holder: dict[str, np.ndarray] = {}
    for name in names:
        g = g_list[name]

        def task(replica_id: int, g: Field = g) -> float:
            path = convolution_along(g, walls, TIGHTNESS_WINDOW, p, SeedSpec(master_seed, replica_id))
            return holder_norm(path, exponent, seed=replica_id)

        holder[name] = np.array(run_replicas(task, replicas, threads).require_complete())
    report = TightnessReport(names, holder, exponent, kappa, radius)
    logger.info("Tightness: moment-root ratio %.3f over %d initial data", report.ratio(), len(names))
    return report
