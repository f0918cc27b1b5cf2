"""Experiment configuration data structures."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

from .coefficient_def import CoefficientDef
from .profile_def import ProfileDef


@dataclass(slots=True)
class GridConfig:
    n_x: int = 64


@dataclass(slots=True)
class TimeConfig:
    dt: float = 1e-3
    T: float = 1.0
    burn_in: float = 2.0
    stride: int = 10
    record_every: int = 1


@dataclass(slots=True)
class WallsConfig:
    """Resolved wall profiles; `preset` names the definition they came from, if any."""

    lower: ProfileDef = field(default_factory=lambda: ProfileDef.constant(-1.0, "lower"))
    upper: ProfileDef = field(default_factory=lambda: ProfileDef.constant(1.0, "upper"))
    preset: str | None = "constant"


@dataclass(slots=True)
class CoefficientsConfig:
    """Drift and noise coefficients with the declared constants they must respect."""

    drift: CoefficientDef = field(default_factory=lambda: CoefficientDef.constant(0.0, "zero"))
    sigma: CoefficientDef = field(default_factory=lambda: CoefficientDef.constant(1.0, "unit"))
    lipschitz: float | None = None
    sigma_floor: float | None = None
    sigma_lower: float | None = None
    sigma_upper: float | None = None


@dataclass(slots=True)
class SchemeConfig:
    epsilon: float = 1e-2
    delta: float = 1e-2
    scheme: str = "projected"
    propagator: str = "exponential"
    noise_refinement: int = 0


@dataclass(slots=True)
class SeedsConfig:
    master_seed: int = 0
    replicas: int = 8
    threads: int | None = None


@dataclass(slots=True)
class SweepConfig:
    """Penalization sweep, sandwich bounds and the weak-form refinement study."""

    levels: int = 5
    epsilon0: float = 1e-1
    delta0: float = 1e-1
    tolerance: float = 0.05
    slack: float = 0.1
    weak_form_halvings: int = 1


@dataclass(slots=True)
class ObstacleConfig:
    pairs: int = 100
    window: float = 1.0
    amplitude: float = 3.0
    bound: float = 2.0


@dataclass(slots=True)
class CouplingConfig:
    """`n = None` selects the limit mixing coefficients, which ordered runs reject."""

    n: float | None = 1.0
    zeta: float = 1e-9
    horizons: tuple[float, ...] = (5.0, 10.0, 20.0)
    upper: ProfileDef = field(default_factory=lambda: ProfileDef.constant(0.5, "plus_half"))
    lower: ProfileDef = field(default_factory=lambda: ProfileDef.constant(-0.5, "minus_half"))
    general: bool = False
    meeting_radius: float = 6.0
    u_threshold: float = 0.01
    c0_estimate: float | None = None
    record_every: int = 10


@dataclass(slots=True)
class ErgodicConfig:
    horizon: float = 20.0
    t_list: tuple[float, ...] = (2.0, 20.0)
    observables: tuple[str, ...] = ()
    initial_a: ProfileDef = field(default_factory=lambda: ProfileDef.constant(0.9, "plus_09"))
    initial_b: ProfileDef = field(default_factory=lambda: ProfileDef.constant(-0.9, "minus_09"))
    alpha: float = 0.24
    kappa: float = 0.04
    radius: float = 10.0
    tightness_initials: tuple[str, ...] = ("lower", "upper", "midpoint")


@dataclass(slots=True)
class StrongFellerConfig:
    observable: str = "mean_sign"
    g1: ProfileDef = field(default_factory=lambda: ProfileDef.constant(0.05, "plus_005"))
    g2: ProfileDef = field(default_factory=lambda: ProfileDef.constant(-0.05, "minus_005"))
    t_list: tuple[float, ...] = (0.05, 0.2, 1.0, 5.0)
    slope_limit: float = 0.1


@dataclass(slots=True)
class DerivativeConfig:
    n: int = 100
    epsilon: float = 1e-2
    delta: float = 1e-2
    T: float = 0.2
    direction: ProfileDef = field(
        default_factory=lambda: ProfileDef(id="cos1", kind="fourier", cos=(1.0,))
    )
    fd_step: float = 1e-4
    fd_tolerance: float = 0.05


@dataclass(slots=True)
class ExperimentConfig:
    """Everything a subcommand needs; every block has usable defaults."""

    grid: GridConfig = field(default_factory=GridConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    walls: WallsConfig = field(default_factory=WallsConfig)
    coefficients: CoefficientsConfig = field(default_factory=CoefficientsConfig)
    scheme: SchemeConfig = field(default_factory=SchemeConfig)
    seeds: SeedsConfig = field(default_factory=SeedsConfig)
    initial: ProfileDef = field(default_factory=lambda: ProfileDef.constant(0.0, "zero"))
    sweep: SweepConfig = field(default_factory=SweepConfig)
    obstacle: ObstacleConfig = field(default_factory=ObstacleConfig)
    coupling: CouplingConfig = field(default_factory=CouplingConfig)
    ergodic: ErgodicConfig = field(default_factory=ErgodicConfig)
    strong_feller: StrongFellerConfig = field(default_factory=StrongFellerConfig)
    derivative: DerivativeConfig = field(default_factory=DerivativeConfig)

    def to_payload(self) -> dict[str, object]:
        """Plain-data echo of the whole configuration for manifests."""
        return asdict(self)
