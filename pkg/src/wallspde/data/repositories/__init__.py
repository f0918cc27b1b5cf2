"""Repository exports."""

from .coefficients_repo import CoefficientsRepository
from .profiles_repo import ProfilesRepository
from .walls_repo import WallsRepository

__all__ = [
    "CoefficientsRepository",
    "ProfilesRepository",
    "WallsRepository",
]
