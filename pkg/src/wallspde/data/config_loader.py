"""TOML experiment configs: parsing, preset resolution and validation."""
from __future__ import annotations

import math
from dataclasses import replace
from pathlib import Path

import numpy as np

from wallspde.data.errors import DataReferenceError, DataValidationError
from wallspde.data.repositories import CoefficientsRepository, ProfilesRepository, WallsRepository
from wallspde.data.repositories.walls_repo import require_separated, to_profile
from wallspde.data.toml_loader import load_toml
from wallspde.domain.coefficients import Coefficient
from wallspde.domain.defs import (
    CoefficientDef,
    CoefficientsConfig,
    CouplingConfig,
    DerivativeConfig,
    ErgodicConfig,
    ExperimentConfig,
    GridConfig,
    ObstacleConfig,
    ProfileDef,
    SchemeConfig,
    SeedsConfig,
    StrongFellerConfig,
    SweepConfig,
    TimeConfig,
    WallsConfig,
)

SECTIONS = (
    "grid",
    "time",
    "walls",
    "coefficients",
    "scheme",
    "seeds",
    "initial",
    "sweep",
    "obstacle",
    "coupling",
    "ergodic",
    "strong_feller",
    "derivative",
)
WALL_RELATIVE_PROFILES = ("lower", "upper", "midpoint")


class ConfigLoader:
    """Turns a TOML document into a validated ExperimentConfig."""

    def __init__(self, base_path: Path | str | None = None) -> None:
        self._profiles = ProfilesRepository(base_path)
        self._coefficients = CoefficientsRepository(base_path)
        self._walls = WallsRepository(base_path)

    def load(self, path: Path | str) -> ExperimentConfig:
        return self.from_mapping(load_toml(Path(path)))

    def default(self) -> ExperimentConfig:
        return self.from_mapping({})

    def from_mapping(self, raw: dict[str, object]) -> ExperimentConfig:
        self._reject_unknown(raw, SECTIONS, "config")
        config = ExperimentConfig(
            grid=self._grid(self._section(raw, "grid")),
            time=self._time(self._section(raw, "time")),
            walls=self._walls_block(self._section(raw, "walls")),
            coefficients=self._coefficients_block(self._section(raw, "coefficients")),
            scheme=self._scheme(self._section(raw, "scheme")),
            seeds=self._seeds(self._section(raw, "seeds")),
            initial=self._profile(raw.get("initial", "zero"), "initial"),
            sweep=self._sweep(self._section(raw, "sweep")),
            obstacle=self._obstacle(self._section(raw, "obstacle")),
            coupling=self._coupling(self._section(raw, "coupling")),
            ergodic=self._ergodic(self._section(raw, "ergodic")),
            strong_feller=self._strong_feller(self._section(raw, "strong_feller")),
            derivative=self._derivative(self._section(raw, "derivative")),
        )
        validate_config(config)
        return config

    def _grid(self, mapping: dict[str, object]) -> GridConfig:
        self._reject_unknown(mapping, ("n_x",), "grid")
        n_x = self._int(mapping, "n_x", "grid", GridConfig().n_x)
        if n_x < 4:
            raise DataValidationError("grid.n_x must be >= 4.")
        return GridConfig(n_x=n_x)

    def _time(self, mapping: dict[str, object]) -> TimeConfig:
        self._reject_unknown(mapping, ("dt", "T", "burn_in", "stride", "record_every"), "time")
        time = TimeConfig(
            dt=self._positive(mapping, "dt", "time", TimeConfig().dt),
            T=self._positive(mapping, "T", "time", TimeConfig().T),
            burn_in=self._float(mapping, "burn_in", "time", TimeConfig().burn_in),
            stride=self._int(mapping, "stride", "time", TimeConfig().stride),
            record_every=self._int(mapping, "record_every", "time", TimeConfig().record_every),
        )
        if time.burn_in < 0.0:
            raise DataValidationError("time.burn_in must be >= 0.")
        if time.stride < 1:
            raise DataValidationError("time.stride must be >= 1.")
        if time.record_every < 1:
            raise DataValidationError("time.record_every must be >= 1.")
        if time.dt > time.T:
            raise DataValidationError("time.dt must not exceed time.T.")
        return time

    def _walls_block(self, mapping: dict[str, object]) -> WallsConfig:
        self._reject_unknown(mapping, ("preset", "lower", "upper"), "walls")
        if "lower" in mapping or "upper" in mapping:
            if "preset" in mapping:
                raise DataValidationError("walls takes either preset or lower/upper, not both.")
            lower = self._profile(mapping.get("lower"), "walls.lower")
            upper = self._profile(mapping.get("upper"), "walls.upper")
            require_separated(lower, upper, "walls")
            return WallsConfig(lower=lower, upper=upper, preset=None)
        preset = self._str(mapping, "preset", "walls", "constant")
        try:
            definition = self._walls.get(preset)
        except KeyError as exc:
            known = ", ".join(self._walls.ids())
            raise DataReferenceError(f"walls.preset '{preset}' not found in walls.json (known: {known}).") from exc
        return WallsConfig(lower=definition.lower, upper=definition.upper, preset=preset)

    def _coefficients_block(self, mapping: dict[str, object]) -> CoefficientsConfig:
        allowed = ("drift", "sigma", "lipschitz", "sigma_floor", "sigma_lower", "sigma_upper")
        self._reject_unknown(mapping, allowed, "coefficients")
        return CoefficientsConfig(
            drift=self._coefficient(mapping.get("drift", "zero"), "coefficients.drift"),
            sigma=self._coefficient(mapping.get("sigma", "unit"), "coefficients.sigma"),
            lipschitz=self._optional_nonnegative(mapping, "lipschitz", "coefficients"),
            sigma_floor=self._optional_nonnegative(mapping, "sigma_floor", "coefficients"),
            sigma_lower=self._optional_nonnegative(mapping, "sigma_lower", "coefficients"),
            sigma_upper=self._optional_nonnegative(mapping, "sigma_upper", "coefficients"),
        )

    def _scheme(self, mapping: dict[str, object]) -> SchemeConfig:
        allowed = ("epsilon", "delta", "scheme", "propagator", "noise_refinement")
        self._reject_unknown(mapping, allowed, "scheme")
        scheme = SchemeConfig(
            epsilon=self._positive(mapping, "epsilon", "scheme", SchemeConfig().epsilon),
            delta=self._positive(mapping, "delta", "scheme", SchemeConfig().delta),
            scheme=self._str(mapping, "scheme", "scheme", SchemeConfig().scheme),
            propagator=self._str(mapping, "propagator", "scheme", SchemeConfig().propagator),
            noise_refinement=self._int(mapping, "noise_refinement", "scheme", SchemeConfig().noise_refinement),
        )
        if scheme.scheme not in ("penalized", "projected"):
            raise DataValidationError("scheme.scheme must be 'penalized' or 'projected'.")
        if scheme.propagator not in ("exponential", "implicit"):
            raise DataValidationError("scheme.propagator must be 'exponential' or 'implicit'.")
        if scheme.noise_refinement < 0:
            raise DataValidationError("scheme.noise_refinement must be >= 0.")
        return scheme

    def _seeds(self, mapping: dict[str, object]) -> SeedsConfig:
        self._reject_unknown(mapping, ("master_seed", "replicas", "threads"), "seeds")
        seeds = SeedsConfig(
            master_seed=self._int(mapping, "master_seed", "seeds", SeedsConfig().master_seed),
            replicas=self._int(mapping, "replicas", "seeds", SeedsConfig().replicas),
            threads=self._optional_int(mapping, "threads", "seeds"),
        )
        _check_seeds(seeds)
        return seeds

    def _sweep(self, mapping: dict[str, object]) -> SweepConfig:
        allowed = ("levels", "epsilon0", "delta0", "tolerance", "slack", "weak_form_halvings")
        self._reject_unknown(mapping, allowed, "sweep")
        sweep = SweepConfig(
            levels=self._int(mapping, "levels", "sweep", SweepConfig().levels),
            epsilon0=self._positive(mapping, "epsilon0", "sweep", SweepConfig().epsilon0),
            delta0=self._positive(mapping, "delta0", "sweep", SweepConfig().delta0),
            tolerance=self._positive(mapping, "tolerance", "sweep", SweepConfig().tolerance),
            slack=self._float(mapping, "slack", "sweep", SweepConfig().slack),
            weak_form_halvings=self._int(mapping, "weak_form_halvings", "sweep", SweepConfig().weak_form_halvings),
        )
        if sweep.levels < 1:
            raise DataValidationError("sweep.levels must be >= 1.")
        if sweep.slack < 0.0:
            raise DataValidationError("sweep.slack must be >= 0.")
        if sweep.weak_form_halvings < 1:
            raise DataValidationError("sweep.weak_form_halvings must be >= 1.")
        return sweep

    def _obstacle(self, mapping: dict[str, object]) -> ObstacleConfig:
        self._reject_unknown(mapping, ("pairs", "window", "amplitude", "bound"), "obstacle")
        obstacle = ObstacleConfig(
            pairs=self._int(mapping, "pairs", "obstacle", ObstacleConfig().pairs),
            window=self._positive(mapping, "window", "obstacle", ObstacleConfig().window),
            amplitude=self._positive(mapping, "amplitude", "obstacle", ObstacleConfig().amplitude),
            bound=self._positive(mapping, "bound", "obstacle", ObstacleConfig().bound),
        )
        if obstacle.pairs < 1:
            raise DataValidationError("obstacle.pairs must be >= 1.")
        return obstacle

    def _coupling(self, mapping: dict[str, object]) -> CouplingConfig:
        allowed = (
            "n",
            "zeta",
            "horizons",
            "upper",
            "lower",
            "general",
            "meeting_radius",
            "u_threshold",
            "c0_estimate",
            "record_every",
        )
        self._reject_unknown(mapping, allowed, "coupling")
        n_raw = mapping.get("n", CouplingConfig().n)
        if n_raw == "inf":
            n = None
        else:
            n = self._require_float(n_raw, "coupling.n")
            if n <= 0.0:
                raise DataValidationError("coupling.n must be > 0 or 'inf'.")
        general = mapping.get("general", False)
        if not isinstance(general, bool):
            raise DataValidationError("coupling.general must be a boolean.")
        coupling = CouplingConfig(
            n=n,
            zeta=self._float(mapping, "zeta", "coupling", CouplingConfig().zeta),
            horizons=self._positive_list(mapping, "horizons", "coupling", (5.0, 10.0, 20.0)),
            upper=self._profile(mapping.get("upper", "plus_half"), "coupling.upper"),
            lower=self._profile(mapping.get("lower", "minus_half"), "coupling.lower"),
            general=general,
            meeting_radius=self._float(mapping, "meeting_radius", "coupling", CouplingConfig().meeting_radius),
            u_threshold=self._positive(mapping, "u_threshold", "coupling", CouplingConfig().u_threshold),
            c0_estimate=self._optional_nonnegative(mapping, "c0_estimate", "coupling"),
            record_every=self._int(mapping, "record_every", "coupling", CouplingConfig().record_every),
        )
        if coupling.zeta < 0.0:
            raise DataValidationError("coupling.zeta must be >= 0.")
        if not (coupling.meeting_radius >= 0.0 and math.isfinite(coupling.meeting_radius)):
            raise DataValidationError("coupling.meeting_radius must be a finite number >= 0.")
        if coupling.record_every < 1:
            raise DataValidationError("coupling.record_every must be >= 1.")
        return coupling

    def _ergodic(self, mapping: dict[str, object]) -> ErgodicConfig:
        allowed = (
            "horizon",
            "t_list",
            "observables",
            "initial_a",
            "initial_b",
            "alpha",
            "kappa",
            "radius",
            "tightness_initials",
        )
        self._reject_unknown(mapping, allowed, "ergodic")
        ergodic = ErgodicConfig(
            horizon=self._positive(mapping, "horizon", "ergodic", ErgodicConfig().horizon),
            t_list=self._positive_list(mapping, "t_list", "ergodic", (2.0, 20.0)),
            observables=self._str_list(mapping, "observables", "ergodic", ()),
            initial_a=self._profile(mapping.get("initial_a", "plus_09"), "ergodic.initial_a"),
            initial_b=self._profile(mapping.get("initial_b", "minus_09"), "ergodic.initial_b"),
            alpha=self._positive(mapping, "alpha", "ergodic", ErgodicConfig().alpha),
            kappa=self._positive(mapping, "kappa", "ergodic", ErgodicConfig().kappa),
            radius=self._positive(mapping, "radius", "ergodic", ErgodicConfig().radius),
            tightness_initials=self._str_list(
                mapping, "tightness_initials", "ergodic", ("lower", "upper", "midpoint")
            ),
        )
        exponent = ergodic.alpha - ergodic.kappa
        if not 0.0 < exponent < 0.25:
            raise DataValidationError("ergodic.alpha - ergodic.kappa must lie in (0, 1/4).")
        if not ergodic.tightness_initials:
            raise DataValidationError("ergodic.tightness_initials must not be empty.")
        for name in ergodic.tightness_initials:
            if name not in WALL_RELATIVE_PROFILES:
                self._profile(name, "ergodic.tightness_initials")
        return ergodic

    def _strong_feller(self, mapping: dict[str, object]) -> StrongFellerConfig:
        self._reject_unknown(mapping, ("observable", "g1", "g2", "t_list", "slope_limit"), "strong_feller")
        return StrongFellerConfig(
            observable=self._str(mapping, "observable", "strong_feller", StrongFellerConfig().observable),
            g1=self._profile(mapping.get("g1", "plus_005"), "strong_feller.g1"),
            g2=self._profile(mapping.get("g2", "minus_005"), "strong_feller.g2"),
            t_list=self._positive_list(mapping, "t_list", "strong_feller", (0.05, 0.2, 1.0, 5.0)),
            slope_limit=self._float(mapping, "slope_limit", "strong_feller", StrongFellerConfig().slope_limit),
        )

    def _derivative(self, mapping: dict[str, object]) -> DerivativeConfig:
        allowed = ("n", "epsilon", "delta", "T", "direction", "fd_step", "fd_tolerance")
        self._reject_unknown(mapping, allowed, "derivative")
        derivative = DerivativeConfig(
            n=self._int(mapping, "n", "derivative", DerivativeConfig().n),
            epsilon=self._positive(mapping, "epsilon", "derivative", DerivativeConfig().epsilon),
            delta=self._positive(mapping, "delta", "derivative", DerivativeConfig().delta),
            T=self._positive(mapping, "T", "derivative", DerivativeConfig().T),
            direction=self._profile(mapping.get("direction", "cos1"), "derivative.direction"),
            fd_step=self._positive(mapping, "fd_step", "derivative", DerivativeConfig().fd_step),
            fd_tolerance=self._positive(mapping, "fd_tolerance", "derivative", DerivativeConfig().fd_tolerance),
        )
        if derivative.n < 1:
            raise DataValidationError("derivative.n must be >= 1.")
        return derivative

    def _profile(self, value: object, context: str) -> ProfileDef:
        if isinstance(value, str):
            try:
                return self._profiles.get(value)
            except KeyError as exc:
                known = ", ".join(self._profiles.ids())
                raise DataReferenceError(f"{context} '{value}' not found in profiles.json (known: {known}).") from exc
        if isinstance(value, dict):
            return ProfilesRepository.parse("inline", value, context)
        raise DataValidationError(f"{context} must be a profile id or an inline table.")

    def _coefficient(self, value: object, context: str) -> CoefficientDef:
        if isinstance(value, str):
            try:
                return self._coefficients.get(value)
            except KeyError as exc:
                known = ", ".join(self._coefficients.ids())
                raise DataReferenceError(f"{context} '{value}' not found in coefficients.json (known: {known}).") from exc
        if isinstance(value, dict):
            return CoefficientsRepository.parse("inline", value, context)
        raise DataValidationError(f"{context} must be a coefficient id or an inline table.")

    @staticmethod
    def _section(raw: dict[str, object], name: str) -> dict[str, object]:
        value = raw.get(name, {})
        if not isinstance(value, dict):
            raise DataValidationError(f"{name} must be a table.")
        return value

    @staticmethod
    def _reject_unknown(mapping: dict[str, object], allowed: tuple[str, ...], context: str) -> None:
        unknown = sorted(set(mapping) - set(allowed))
        if unknown:
            raise DataValidationError(f"{context} has unknown keys: {', '.join(unknown)}.")

    @staticmethod
    def _require_float(value: object, context: str) -> float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise DataValidationError(f"{context} must be a number.")
        if not math.isfinite(value):
            raise DataValidationError(f"{context} must be finite.")
        return float(value)

    @staticmethod
    def _require_int(value: object, context: str) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise DataValidationError(f"{context} must be an integer.")
        return value

    def _float(self, mapping: dict[str, object], key: str, section: str, default: float) -> float:
        if key not in mapping:
            return default
        return self._require_float(mapping[key], f"{section}.{key}")

    def _positive(self, mapping: dict[str, object], key: str, section: str, default: float) -> float:
        value = self._float(mapping, key, section, default)
        if value <= 0.0:
            raise DataValidationError(f"{section}.{key} must be > 0.")
        return value

    def _optional_nonnegative(self, mapping: dict[str, object], key: str, section: str) -> float | None:
        if key not in mapping:
            return None
        value = self._require_float(mapping[key], f"{section}.{key}")
        if value < 0.0:
            raise DataValidationError(f"{section}.{key} must be >= 0.")
        return value

    def _int(self, mapping: dict[str, object], key: str, section: str, default: int) -> int:
        if key not in mapping:
            return default
        return self._require_int(mapping[key], f"{section}.{key}")

    def _optional_int(self, mapping: dict[str, object], key: str, section: str) -> int | None:
        if key not in mapping:
            return None
        return self._require_int(mapping[key], f"{section}.{key}")

    def _str(self, mapping: dict[str, object], key: str, section: str, default: str) -> str:
        value = mapping.get(key, default)
        if not isinstance(value, str) or not value.strip():
            raise DataValidationError(f"{section}.{key} must be a non-empty string.")
        return value.strip()

    def _str_list(
        self, mapping: dict[str, object], key: str, section: str, default: tuple[str, ...]
    ) -> tuple[str, ...]:
        if key not in mapping:
            return default
        value = mapping[key]
        if not isinstance(value, list) or not all(isinstance(item, str) for item in value):
            raise DataValidationError(f"{section}.{key} must be a list of strings.")
        return tuple(value)

    def _positive_list(
        self, mapping: dict[str, object], key: str, section: str, default: tuple[float, ...]
    ) -> tuple[float, ...]:
        if key not in mapping:
            return default
        value = mapping[key]
        if not isinstance(value, list) or not value:
            raise DataValidationError(f"{section}.{key} must be a non-empty list of numbers.")
        items = tuple(self._require_float(item, f"{section}.{key}[{i}]") for i, item in enumerate(value))
        if any(item <= 0.0 for item in items):
            raise DataValidationError(f"{section}.{key} entries must be > 0.")
        if list(items) != sorted(items):
            raise DataValidationError(f"{section}.{key} must be increasing.")
        return items


def to_coefficient(definition: CoefficientDef) -> Coefficient:
    return Coefficient(definition.kind, definition.offset, definition.amplitude, definition.frequency)


def wall_range(config: ExperimentConfig, samples: int = 1024) -> tuple[float, float]:
    """(min h1, max h2) of the configured walls."""
    x = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
    return float(np.min(to_profile(config.walls.lower)(x))), float(np.max(to_profile(config.walls.upper)(x)))


def validate_config(config: ExperimentConfig) -> None:
    """Cross-block checks: declared coefficient constants and the mollified step restriction."""
    coefficients = config.coefficients
    drift = to_coefficient(coefficients.drift)
    sigma = to_coefficient(coefficients.sigma)
    lo, hi = wall_range(config)
    if coefficients.lipschitz is not None:
        worst = max(drift.lipschitz, sigma.lipschitz)
        if worst > coefficients.lipschitz + 1e-12:
            raise DataValidationError(
                f"coefficients.lipschitz {coefficients.lipschitz} is below the coefficients' constant {worst}."
            )
    smallest, largest = sigma.bounds_on(lo, hi)
    if coefficients.sigma_floor is not None and smallest < coefficients.sigma_floor - 1e-12:
        raise DataValidationError(
            f"coefficients.sigma_floor {coefficients.sigma_floor} exceeds min |sigma| = {smallest:.6g} on the walls' range."
        )
    if coefficients.sigma_lower is not None and smallest < coefficients.sigma_lower - 1e-12:
        raise DataValidationError(
            f"coefficients.sigma_lower {coefficients.sigma_lower} exceeds min |sigma| = {smallest:.6g} on the walls' range."
        )
    if coefficients.sigma_upper is not None and largest > coefficients.sigma_upper + 1e-12:
        raise DataValidationError(
            f"coefficients.sigma_upper {coefficients.sigma_upper} is below max |sigma| = {largest:.6g} on the walls' range."
        )
    if config.time.dt > min(config.derivative.epsilon, config.derivative.delta):
        raise DataValidationError("derivative.epsilon and derivative.delta must be >= time.dt.")
    if config.ergodic.horizon <= config.time.burn_in:
        raise DataValidationError("ergodic.horizon must exceed time.burn_in.")


def apply_overrides(
    config: ExperimentConfig,
    *,
    seed: int | None = None,
    replicas: int | None = None,
    threads: int | None = None,
) -> ExperimentConfig:
    """Return a copy with CLI seed/replica/thread overrides applied and re-checked."""
    seeds = config.seeds
    if seed is not None:
        seeds = replace(seeds, master_seed=seed)
    if replicas is not None:
        seeds = replace(seeds, replicas=replicas)
    if threads is not None:
        seeds = replace(seeds, threads=threads)
    _check_seeds(seeds)
    return replace(config, seeds=seeds)


def _check_seeds(seeds: SeedsConfig) -> None:
    if not 0 <= seeds.master_seed < 2**64:
        raise DataValidationError("seeds.master_seed must be a 64-bit non-negative integer.")
    if seeds.replicas < 1:
        raise DataValidationError("seeds.replicas must be >= 1.")
    if seeds.threads is not None and seeds.threads < 1:
        raise DataValidationError("seeds.threads must be >= 1.")
