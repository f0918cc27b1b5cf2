"""Two-noise coupling of reflected solutions, meeting step and drift tilt."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from wallspde.core.errors import OrderingViolationError
from wallspde.core.rng import RNG, SeedSpec
from wallspde.domain.circle import CircleGrid, Field, FieldPath, WallPair, l2_inner
from wallspde.domain.coefficients import Coefficient
from wallspde.domain.heat_kernel import HeatPropagator
from wallspde.domain.noise import NoiseIncrement, NoiseStream
from wallspde.domain.reflected import (
    PenalizedParams,
    advance,
    penalty_substep,
    projection_substep,
    require_initial,
    step_count,
)

ORDER_TOLERANCE = 1e-10
# Standard deviations between a step's gap contraction and its noise.
ORDER_MARGIN = 8.0
DEFAULT_ZETA = 1e-9
DEFAULT_MIXING_INDEX = 1.0
DEFAULT_MEETING_RADIUS = 6.0
SCALE_MATCH = 1e-12


def mixing(z, n: float = math.inf):
    """
    (f_n(z), g_n(z)) with f_n(z) = sqrt(z + 1/n) - sqrt(1/n), g_n = sqrt(1 - f_n^2).

    n = inf gives (sqrt(z), sqrt(1 - z)). Works elementwise on arrays.
    """
    if not n > 0:
        raise ValueError("n must be positive.")
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr < 0.0) or np.any(z_arr > 1.0) or np.any(np.isnan(z_arr)):
        raise ValueError("z must lie in [0, 1]; clamp with min(|u - v|, 1).")
    if math.isinf(n):
        f = np.sqrt(z_arr)
    else:
        f = np.sqrt(z_arr + 1.0 / n) - math.sqrt(1.0 / n)
    g = np.sqrt(np.maximum(1.0 - f * f, 0.0))
    if f.ndim == 0:
        return float(f), float(g)
    return f, g


def mixing_slope(n: float) -> float:
    """sup f_n(z) / z over (0, 1], attained at z -> 0."""
    if not n > 0:
        raise ValueError("n must be positive.")
    return math.inf if math.isinf(n) else 0.5 * math.sqrt(n)


@dataclass(frozen=True, slots=True)
class MixingCoefficients:
    n: float = math.inf

    def __call__(self, z):
        return mixing(z, self.n)

    def sup_gap_to_limit(self, samples: int = 10001) -> float:
        """sup over [0, 1] of the distance of (f_n, g_n) to the limit coefficients."""
        z = np.linspace(0.0, 1.0, samples)
        f, g = mixing(z, self.n)
        f_inf, g_inf = mixing(z)
        return float(max(np.max(np.abs(f - f_inf)), np.max(np.abs(g - g_inf))))


@dataclass(frozen=True, slots=True)
class CouplingParams:
    """Mixing index, fusion threshold and meeting radius of a coupled run (radius 0 disables meetings)."""

    n: float = DEFAULT_MIXING_INDEX
    zeta: float = DEFAULT_ZETA
    sigma_floor: float | None = None
    meeting_radius: float = DEFAULT_MEETING_RADIUS

    def __post_init__(self) -> None:
        if not self.n > 0:
            raise ValueError("n must be positive.")
        if not self.zeta >= 0.0:
            raise ValueError("zeta must be >= 0.")
        if self.sigma_floor is not None and not self.sigma_floor > 0.0:
            raise ValueError("sigma_floor must be > 0 when given.")
        if not (self.meeting_radius >= 0.0 and math.isfinite(self.meeting_radius)):
            raise ValueError("meeting_radius must be a finite number >= 0.")

    def to_payload(self) -> dict[str, object]:
        return {
            "n": "inf" if math.isinf(self.n) else self.n,
            "zeta": self.zeta,
            "sigma_floor": self.sigma_floor,
            "meeting_radius": self.meeting_radius,
        }


def crossing_margin(p: PenalizedParams, walls: WallPair, n: float) -> float:
    """
    Lower bound, in standard deviations of the step noise, on how far a coupled step
    keeps v below u.

    Per node the free gap after one step is at least d[(1 - L_f dt) - kappa |Z|] with
    Z standard normal and kappa = (Lip(sigma) + sup|sigma| c_n (1 + f_n(1))) sqrt(dt/dx),
    c_n = mixing_slope(n). The order-preserving heat step and the wall clipping keep it.
    """
    keep = 1.0 - p.drift.lipschitz * p.dt
    slope = mixing_slope(n)
    if keep <= 0.0 or math.isinf(slope):
        return 0.0
    lo, hi = walls.value_range()
    _, sigma_max = p.sigma.bounds_on(lo, hi)
    f_one, _ = mixing(1.0, n)
    kappa = (p.sigma.lipschitz + sigma_max * slope * (1.0 + f_one)) * math.sqrt(p.dt / walls.grid.dx)
    return math.inf if kappa == 0.0 else keep / kappa


def require_order_preserving(p: PenalizedParams, walls: WallPair, cp: CouplingParams) -> float:
    """Reject settings under which a coupled step can push v above u; returns the margin."""
    if p.propagator != "implicit":
        raise ValueError("Coupled pairs need the order-preserving 'implicit' propagator.")
    margin = crossing_margin(p, walls, cp.n)
    if margin < ORDER_MARGIN:
        raise ValueError(
            f"Coupling with n={cp.n:g} at dt={p.dt:g} keeps only {margin:.2f} standard deviations "
            f"between the members (need {ORDER_MARGIN:g}); reduce dt or n."
        )
    return margin


@dataclass(frozen=True, slots=True, eq=False)
class CoupledState:
    u: Field
    v: Field
    ordered: bool
    fused: bool = False

    def sup_gap(self) -> float:
        return float(np.max(np.abs(self.u.values - self.v.values)))


@dataclass(frozen=True, slots=True, eq=False)
class CoupledStepResult:
    """
    New state plus the realized sigma-weighted noise cells of both members.

    `crossing` is max(v - u) after the step and `crossing_mass` the integral of its
    positive part; both stay 0 for unordered or fused pairs.
    """

    state: CoupledState
    noise_u: np.ndarray
    noise_v: np.ndarray
    bracket_rate: float
    crossing: float = 0.0
    crossing_mass: float = 0.0
    met: bool = False
    attempted: bool = False


@dataclass(frozen=True, slots=True)
class MeetingOutcome:
    proposal: np.ndarray
    met: bool


def attempt_meeting(
    y_u: np.ndarray,
    mean_u: np.ndarray,
    mean_v: np.ndarray,
    scale: np.ndarray,
    rng: RNG,
) -> MeetingOutcome:
    """
    Reflection-maximal coupling of N(mean_v, scale^2) with the realized draw y_u ~ N(mean_u, scale^2).

    y_u is kept with probability min(1, p_v(y_u) / p_u(y_u)). Otherwise the whitened
    draw is reflected in the hyperplane orthogonal to (mean_u - mean_v) / scale, which
    leaves y_u - proposal a nonnegative multiple of (mean_u - mean_v) / scale when
    mean_u >= mean_v.
    """
    z = (y_u - mean_u) / scale
    shift = (mean_u - mean_v) / scale
    distance = float(np.linalg.norm(shift))
    if distance == 0.0:
        return MeetingOutcome(np.array(y_u), True)
    log_ratio = -float(np.dot(z, shift)) - 0.5 * distance * distance
    if math.log(max(float(rng.random()), 1e-300)) <= log_ratio:
        return MeetingOutcome(np.array(y_u), True)
    e = shift / distance
    reflected = z - 2.0 * float(np.dot(e, z)) * e
    return MeetingOutcome(mean_v + scale * reflected, False)


def coupled_update(
    state: CoupledState,
    dW1: NoiseIncrement,
    dW2: NoiseIncrement,
    walls: WallPair,
    p: PenalizedParams,
    cp: CouplingParams,
    heat: HeatPropagator | None = None,
    aux: SeedSpec | None = None,
    step_index: int = 0,
) -> CoupledStepResult:
    """
    Advance u with sigma(u) dW1 and v with sigma(v)[g dW1 + f dW2], both projected.

    With an `aux` stream, equal noise scales at every node and the free-step means
    within `meeting_radius` (whitened), v's free value comes from attempt_meeting
    instead. Nothing is clipped between the members: a crossing is only reported.
    """
    grid = state.u.grid
    heat = heat or p.heat(grid)
    projected = p.with_scheme("projected")
    u = state.u.values
    v = state.v.values
    sigma_u = p.sigma(u)
    sigma_v = p.sigma(v)
    if cp.sigma_floor is not None:
        floor = float(min(np.min(np.abs(sigma_u)), np.min(np.abs(sigma_v))))
        if floor < cp.sigma_floor - 1e-12:
            raise ValueError(f"sigma fell to {floor:.3e}, below the floor {cp.sigma_floor}.")
    time = state.u.time + p.dt
    noise_u = sigma_u * dW1.values

    if state.fused:
        moved = advance(u, walls, heat, noise_u, projected).values
        fused = Field(grid, moved, time)
        return CoupledStepResult(CoupledState(fused, fused, state.ordered, True), noise_u, noise_u, 0.0)

    f, g = mixing(np.minimum(np.abs(u - v), 1.0), cp.n)
    noise_v = sigma_v * (g * dW1.values + f * dW2.values)
    bracket_rate = float(np.sum(sigma_u**2 - 2.0 * sigma_u * sigma_v * g + sigma_v**2) * grid.dx)

    met = attempted = False
    if cp.meeting_radius > 0.0 and aux is not None:
        scale = np.abs(sigma_u) * math.sqrt(p.dt / grid.dx)
        same_law = np.allclose(np.abs(sigma_v), np.abs(sigma_u), rtol=SCALE_MATCH, atol=0.0)
        if same_law and np.all(scale > 0.0):
            mean_u = u + p.dt * p.drift(u)
            mean_v = v + p.dt * p.drift(v)
            shift = (mean_u - mean_v) / scale
            if float(np.linalg.norm(shift)) <= cp.meeting_radius:
                attempted = True
                outcome = attempt_meeting(mean_u + noise_u / grid.dx, mean_u, mean_v, scale, RNG(aux, step_index))
                met = outcome.met
                noise_v = (outcome.proposal - mean_v) * grid.dx
                bracket_rate = _reflection_rate(shift, scale, grid.dx, p.dt)

    new_u = advance(u, walls, heat, noise_u, projected).values
    new_v = new_u.copy() if met else advance(v, walls, heat, noise_v, projected).values
    crossing = crossing_mass = 0.0
    if state.ordered:
        excess = new_v - new_u
        crossing = max(float(np.max(excess)), 0.0)
        crossing_mass = float(np.sum(np.maximum(excess, 0.0)) * grid.dx)
    fused = bool(np.max(np.abs(new_u - new_v)) <= cp.zeta)
    if fused:
        new_v = new_u
    next_state = CoupledState(Field(grid, new_u, time), Field(grid, new_v, time), state.ordered, fused)
    return CoupledStepResult(
        next_state, noise_u, noise_v, bracket_rate, crossing, crossing_mass, met, attempted
    )


def step_coupled(
    state: CoupledState,
    dW1: NoiseIncrement,
    dW2: NoiseIncrement,
    walls: WallPair,
    p: PenalizedParams,
    cp: CouplingParams | None = None,
) -> CoupledState:
    return coupled_update(state, dW1, dW2, walls, p, cp or CouplingParams()).state


@dataclass(frozen=True, slots=True, eq=False)
class CouplingDiagnostics:
    """
    Recorded series of U = (u - v, 1), the martingale part M, its realized bracket QV,
    the predictable bracket, the residual A = U - U(0) - M, and the sup gap.

    step_U, step_dqv and step_rate hold per-step values for the bracket checks.
    """

    times: np.ndarray
    U: np.ndarray
    M: np.ndarray
    QV: np.ndarray
    bracket: np.ndarray
    A: np.ndarray
    sup_gap: np.ndarray
    step_U: np.ndarray
    step_dqv: np.ndarray
    step_rate: np.ndarray
    dt: float
    tau: float | None
    max_crossing: float
    crossing_mass: float
    min_order_gap: float
    meetings: int = 0
    attempts: int = 0

    def coupled_by(self, t: float) -> bool:
        return self.tau is not None and self.tau <= t + 1e-12

    def gap_at(self, t: float) -> float:
        index = int(np.searchsorted(self.times, t + 1e-12, side="right")) - 1
        return float(self.sup_gap[max(index, 0)])

    csv_header = ("t", "U", "M", "QV", "sup_gap")

    def csv_rows(self) -> Iterator[tuple[float, float, float, float, float]]:
        for k, t in enumerate(self.times):
            yield (float(t), float(self.U[k]), float(self.M[k]), float(self.QV[k]), float(self.sup_gap[k]))


@dataclass(frozen=True, slots=True, eq=False)
class CoupledRun:
    u_path: FieldPath
    v_path: FieldPath
    diagnostics: CouplingDiagnostics
    final: CoupledState


@dataclass(slots=True)
class _Recorder:
    """Accumulates coupling diagnostics while a pair is stepped."""

    dt: float
    record_every: int
    U0: float
    times: list[float] = field(default_factory=list)
    U: list[float] = field(default_factory=list)
    M: list[float] = field(default_factory=list)
    QV: list[float] = field(default_factory=list)
    bracket: list[float] = field(default_factory=list)
    gaps: list[float] = field(default_factory=list)
    u_rows: list[np.ndarray] = field(default_factory=list)
    v_rows: list[np.ndarray] = field(default_factory=list)
    step_U: list[float] = field(default_factory=list)
    step_dqv: list[float] = field(default_factory=list)
    step_rate: list[float] = field(default_factory=list)
    martingale: float = 0.0
    quadratic: float = 0.0
    predictable: float = 0.0
    max_crossing: float = 0.0
    crossing_mass: float = 0.0
    min_order_gap: float = math.inf
    tau: float | None = None
    meetings: int = 0
    attempts: int = 0

    def record(self, state: CoupledState) -> None:
        self.times.append(state.u.time)
        self.U.append(_area(state))
        self.M.append(self.martingale)
        self.QV.append(self.quadratic)
        self.bracket.append(self.predictable)
        self.gaps.append(state.sup_gap())
        self.u_rows.append(np.array(state.u.values))
        self.v_rows.append(np.array(state.v.values))

    def absorb(self, index: int, before: CoupledState, result: CoupledStepResult) -> None:
        increment = float(np.sum(result.noise_u - result.noise_v))
        self.step_U.append(_area(before))
        self.step_dqv.append(increment * increment)
        self.step_rate.append(result.bracket_rate)
        self.martingale += increment
        self.quadratic += increment * increment
        self.predictable += result.bracket_rate * self.dt
        self.max_crossing = max(self.max_crossing, result.crossing)
        self.crossing_mass += result.crossing_mass
        self.meetings += int(result.met)
        self.attempts += int(result.attempted)
        after = result.state
        if after.ordered:
            self.min_order_gap = min(self.min_order_gap, float(np.min(after.u.values - after.v.values)))
        if self.tau is None and after.fused:
            self.tau = after.u.time
        if index % self.record_every == 0:
            self.record(after)

    def build(self, final: CoupledState) -> CoupledRun:
        grid = final.u.grid
        if self.times[-1] != final.u.time:
            self.record(final)
        times = np.array(self.times)
        U = np.array(self.U)
        M = np.array(self.M)
        diagnostics = CouplingDiagnostics(
            times=times,
            U=U,
            M=M,
            QV=np.array(self.QV),
            bracket=np.array(self.bracket),
            A=U - self.U0 - M,
            sup_gap=np.array(self.gaps),
            step_U=np.array(self.step_U),
            step_dqv=np.array(self.step_dqv),
            step_rate=np.array(self.step_rate),
            dt=self.dt,
            tau=self.tau,
            max_crossing=self.max_crossing,
            crossing_mass=self.crossing_mass,
            min_order_gap=self.min_order_gap if math.isfinite(self.min_order_gap) else 0.0,
            meetings=self.meetings,
            attempts=self.attempts,
        )
        return CoupledRun(
            FieldPath(grid, times, np.stack(self.u_rows)),
            FieldPath(grid, times, np.stack(self.v_rows)),
            diagnostics,
            final,
        )


def coupling_streams(
    seeds: SeedSpec, grid: CircleGrid, dt: float, refinement: int, pair: int = 0
) -> tuple[NoiseStream, NoiseStream, SeedSpec]:
    """W1 for the upper member, W2 for the mixed noise, AUX (one substream per pair) for meetings."""
    w1 = NoiseStream(grid, dt, seeds.with_tag("W1"), refinement)
    w2 = NoiseStream(grid, dt, seeds.with_tag("W2"), refinement)
    aux = seeds.with_tag("AUX").with_substream(seeds.substream + pair)
    return w1, w2, aux


def run_coupled_ordered(
    u0: Field,
    v0: Field,
    walls: WallPair,
    T: float,
    p: PenalizedParams,
    seeds: SeedSpec,
    cp: CouplingParams | None = None,
    record_every: int = 1,
) -> CoupledRun:
    """Couple u (from u0) above v (from v0 <= u0) and record U, M, QV and the coupling time."""
    cp = cp or CouplingParams()
    if np.any(u0.values < v0.values - ORDER_TOLERANCE):
        raise OrderingViolationError("run_coupled_ordered needs u0 >= v0 at every node.")
    require_initial(u0, walls)
    require_initial(v0, walls)
    require_order_preserving(p, walls, cp)
    heat = p.heat(u0.grid)
    w1, w2, aux = coupling_streams(seeds, u0.grid, p.dt, p.noise_refinement)
    state = CoupledState(u0, v0, ordered=True, fused=bool(np.max(np.abs(u0.values - v0.values)) <= cp.zeta))
    if state.fused:
        state = CoupledState(u0, u0, True, True)
    recorder = _Recorder(p.dt, record_every, _area(state))
    recorder.record(state)
    if state.fused:
        recorder.tau = u0.time
    for k in range(step_count(T, p.dt)):
        result = coupled_update(state, w1.increment(k), w2.increment(k), walls, p, cp, heat, aux, k)
        _require_ordered(result)
        recorder.absorb(k + 1, state, result)
        state = result.state
    return recorder.build(state)


@dataclass(frozen=True, slots=True, eq=False)
class GeneralCouplingRun:
    """Both members coupled below the dominating process started from max(u0_a, u0_b)."""

    times: np.ndarray
    gap_ab: np.ndarray
    triangle_bound: np.ndarray
    tau_a: float | None
    tau_b: float | None

    @property
    def tau(self) -> float | None:
        if self.tau_a is None or self.tau_b is None:
            return None
        return max(self.tau_a, self.tau_b)

    def triangle_holds(self, tol: float = 1e-12) -> bool:
        return bool(np.all(self.gap_ab <= self.triangle_bound + tol))

    def coupled_by(self, t: float) -> bool:
        tau = self.tau
        return tau is not None and tau <= t + 1e-12


def run_coupled_general(
    u0_a: Field,
    u0_b: Field,
    walls: WallPair,
    T: float,
    p: PenalizedParams,
    seeds: SeedSpec,
    cp: CouplingParams | None = None,
    record_every: int = 1,
) -> GeneralCouplingRun:
    """Couple two unordered data through the dominating process; W2 is shared, AUX substreams differ."""
    cp = cp or CouplingParams()
    require_initial(u0_a, walls)
    require_initial(u0_b, walls)
    require_order_preserving(p, walls, cp)
    top = u0_a.with_values(np.maximum(u0_a.values, u0_b.values))
    heat = p.heat(u0_a.grid)
    w1, w2, aux_a = coupling_streams(seeds, u0_a.grid, p.dt, p.noise_refinement, pair=0)
    _, _, aux_b = coupling_streams(seeds, u0_a.grid, p.dt, p.noise_refinement, pair=1)
    pair_a = _initial_pair(top, u0_a, cp)
    pair_b = _initial_pair(top, u0_b, cp)
    tau_a = u0_a.time if pair_a.fused else None
    tau_b = u0_b.time if pair_b.fused else None
    times = [top.time]
    gaps = [float(np.max(np.abs(u0_a.values - u0_b.values)))]
    bounds = [pair_a.sup_gap() + pair_b.sup_gap()]
    steps = step_count(T, p.dt)
    for k in range(steps):
        dW1 = w1.increment(k)
        dW2 = w2.increment(k)
        result_a = coupled_update(pair_a, dW1, dW2, walls, p, cp, heat, aux_a, k)
        result_b = coupled_update(pair_b, dW1, dW2, walls, p, cp, heat, aux_b, k)
        _require_ordered(result_a)
        _require_ordered(result_b)
        pair_a, pair_b = result_a.state, result_b.state
        if tau_a is None and pair_a.fused:
            tau_a = pair_a.u.time
        if tau_b is None and pair_b.fused:
            tau_b = pair_b.u.time
        if (k + 1) % record_every == 0 or k + 1 == steps:
            times.append(pair_a.u.time)
            gaps.append(float(np.max(np.abs(pair_a.v.values - pair_b.v.values))))
            bounds.append(pair_a.sup_gap() + pair_b.sup_gap())
    return GeneralCouplingRun(np.array(times), np.array(gaps), np.array(bounds), tau_a, tau_b)


@dataclass(frozen=True, slots=True)
class DriftTilt:
    """
    Change of variables u~ = exp(-L tau) u, re-anchored every 1/L time units.

    In tilted coordinates the discrete drift
    exp(-L dt) exp(-L tau) f(exp(L tau) u~) - (1 - exp(-L dt)) / dt * u~
    is nonincreasing whenever f is L-Lipschitz.
    """

    rate: float

    def __post_init__(self) -> None:
        if not self.rate >= 0.0:
            raise ValueError("Tilt rate must be >= 0.")

    @property
    def window(self) -> float:
        return math.inf if self.rate == 0.0 else 1.0 / self.rate

    def factor(self, tau: float) -> float:
        return math.exp(-self.rate * tau)

    def drift(self, f: Coefficient, tilted: np.ndarray, tau: float, dt: float) -> np.ndarray:
        if self.rate == 0.0:
            return f(tilted)
        scale = math.exp(self.rate * tau)
        decay = math.exp(-self.rate * dt)
        return decay * f(scale * tilted) / scale + (math.expm1(-self.rate * dt) / dt) * tilted

    def drift_is_nonincreasing(
        self, f: Coefficient, lo: float, hi: float, dt: float, samples: int = 2001, tol: float = 1e-12
    ) -> bool:
        """Sampled derivative check of the tilted drift on [lo, hi] over one window."""
        z = np.linspace(lo, hi, samples)
        taus = [0.0] if self.rate == 0.0 else np.linspace(0.0, self.window, 5)
        for tau in taus:
            slope = math.exp(-self.rate * dt) * f.derivative(math.exp(self.rate * tau) * z)
            slope = slope + math.expm1(-self.rate * dt) / dt
            if np.max(slope) > tol:
                return False
        return True


def run_tilted(
    u0: Field, walls: WallPair, T: float, p: PenalizedParams, seeds: SeedSpec, tilt: DriftTilt
) -> FieldPath:
    """Step the run in tilted coordinates and map every state back to the original ones."""
    require_initial(u0, walls)
    heat = p.heat(u0.grid)
    noise = p.noise(u0.grid, seeds)
    dx = u0.grid.dx
    steps = step_count(T, p.dt)
    rows = [np.array(u0.values)]
    tilted = np.array(u0.values)
    original = np.array(u0.values)
    tau = 0.0
    for k in range(steps):
        scale_next = tilt.factor(tau + p.dt)
        noise_cells = scale_next * p.sigma(original) * noise.increment(k).values
        u_star = heat.apply(tilted + p.dt * tilt.drift(p.drift, tilted, tau, p.dt) + noise_cells / dx)
        shrunk = walls if scale_next == 1.0 else walls.scaled(scale_next)
        if p.scheme == "penalized":
            tilted = penalty_substep(u_star, shrunk, p.dt, p.epsilon, p.delta).values
        else:
            tilted = projection_substep(u_star, shrunk).values
        tau += p.dt
        original = tilted / scale_next
        rows.append(original)
        if tau >= tilt.window - 0.5 * p.dt:
            tilted = original
            tau = 0.0
    times = u0.time + p.dt * np.arange(steps + 1)
    return FieldPath(u0.grid, times, np.stack(rows))


def _area(state: CoupledState) -> float:
    return l2_inner(state.u.with_values(state.u.values - state.v.values), Field.constant(state.u.grid, 1.0))


def _initial_pair(top: Field, lower: Field, cp: CouplingParams) -> CoupledState:
    if float(np.max(np.abs(top.values - lower.values))) <= cp.zeta:
        return CoupledState(top, top, True, True)
    return CoupledState(top, lower, True, False)


def _require_ordered(result: CoupledStepResult) -> None:
    if result.crossing > ORDER_TOLERANCE:
        raise OrderingViolationError(
            f"Ordered pair crossed by {result.crossing:.3e} at t={result.state.u.time:g}."
        )


def _reflection_rate(shift: np.ndarray, scale: np.ndarray, dx: float, dt: float) -> float:
    """Predictable bracket rate of (u - v, 1) when v's draw is the reflection of u's."""
    distance = float(np.linalg.norm(shift))
    if distance == 0.0:
        return 0.0
    return 4.0 * (dx * float(np.dot(scale, shift)) / distance) ** 2 / dt
