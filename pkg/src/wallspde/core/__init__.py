"""Core systems such as counter-based random streams."""

from .rng import RNG, SeedSpec, seed_manifest

__all__ = ["RNG", "SeedSpec", "seed_manifest"]
