"""Pure numerics on the circle: fields, noise, heat flow, walls and couplings."""

from .circle import CircleGrid, Field, FieldPath, WallPair
from .coefficients import Coefficient
from .reflected import PenalizedParams, TrajectoryRecord, run_reflected

__all__ = [
    "CircleGrid",
    "Coefficient",
    "Field",
    "FieldPath",
    "PenalizedParams",
    "TrajectoryRecord",
    "WallPair",
    "run_reflected",
]
