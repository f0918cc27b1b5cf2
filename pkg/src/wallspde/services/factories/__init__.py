"""Factory helpers for experiment objects."""

from .experiment_factory import Experiment, build_experiment, build_params

__all__ = ["Experiment", "build_experiment", "build_params"]
