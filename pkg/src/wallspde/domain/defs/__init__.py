"""Domain definition exports."""

from .coefficient_def import CoefficientDef
from .experiment_def import (
    CoefficientsConfig,
    CouplingConfig,
    DerivativeConfig,
    ErgodicConfig,
    ExperimentConfig,
    GridConfig,
    ObstacleConfig,
    SchemeConfig,
    SeedsConfig,
    StrongFellerConfig,
    SweepConfig,
    TimeConfig,
    WallsConfig,
)
from .profile_def import ProfileDef
from .walls_def import WallsDef

__all__ = [
    "CoefficientDef",
    "CoefficientsConfig",
    "CouplingConfig",
    "DerivativeConfig",
    "ErgodicConfig",
    "ExperimentConfig",
    "GridConfig",
    "ObstacleConfig",
    "ProfileDef",
    "SchemeConfig",
    "SeedsConfig",
    "StrongFellerConfig",
    "SweepConfig",
    "TimeConfig",
    "WallsConfig",
    "WallsDef",
]
