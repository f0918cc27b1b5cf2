"""Factory turning an ExperimentConfig into domain objects."""
from __future__ import annotations

import math
from dataclasses import dataclass

from wallspde.core.rng import SeedSpec
from wallspde.data.config_loader import to_coefficient
from wallspde.data.repositories.walls_repo import to_profile
from wallspde.domain.circle import CircleGrid, Field, WallPair
from wallspde.domain.coupling import CouplingParams
from wallspde.domain.defs import ExperimentConfig, ProfileDef
from wallspde.domain.profiles import build_walls
from wallspde.domain.reflected import PenalizedParams


@dataclass(frozen=True, slots=True, eq=False)
class Experiment:
    """Grid, walls, scheme parameters and base seeds shared by every study of a run."""

    config: ExperimentConfig
    grid: CircleGrid
    walls: WallPair
    params: PenalizedParams

    @property
    def master_seed(self) -> int:
        return self.config.seeds.master_seed

    @property
    def replicas(self) -> int:
        return self.config.seeds.replicas

    @property
    def threads(self) -> int | None:
        return self.config.seeds.threads

    def seeds(self, replica_id: int = 0) -> SeedSpec:
        return SeedSpec(self.master_seed, replica_id)

    def field(self, definition: ProfileDef | str) -> Field:
        """Sample a profile, or one of the wall-relative names lower/upper/midpoint."""
        if isinstance(definition, str):
            if definition == "lower":
                return self.walls.lower
            if definition == "upper":
                return self.walls.upper
            if definition == "midpoint":
                return self.walls.midpoint()
            raise ValueError(f"Unknown wall-relative profile '{definition}'.")
        return to_profile(definition).sample(self.grid)

    def initial(self) -> Field:
        return self.field(self.config.initial)

    def coupling_params(self) -> CouplingParams:
        block = self.config.coupling
        return CouplingParams(
            n=math.inf if block.n is None else block.n,
            zeta=block.zeta,
            sigma_floor=self.config.coefficients.sigma_floor,
            meeting_radius=block.meeting_radius,
        )


def build_params(config: ExperimentConfig) -> PenalizedParams:
    scheme = config.scheme
    return PenalizedParams(
        epsilon=scheme.epsilon,
        delta=scheme.delta,
        dt=config.time.dt,
        drift=to_coefficient(config.coefficients.drift),
        sigma=to_coefficient(config.coefficients.sigma),
        scheme=scheme.scheme,
        propagator=scheme.propagator,
        noise_refinement=scheme.noise_refinement,
        lipschitz=config.coefficients.lipschitz,
    )


def build_experiment(config: ExperimentConfig) -> Experiment:
    grid = CircleGrid(config.grid.n_x)
    walls = build_walls(grid, to_profile(config.walls.lower), to_profile(config.walls.upper))
    return Experiment(config=config, grid=grid, walls=walls, params=build_params(config))
