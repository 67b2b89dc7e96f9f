"""Regularized softmax policy gradient for the multi-armed bandit."""

from ._core import *  # noqa: F401,F403
from ._core import (
    ConfigError,
    ConvergenceError,
    DivergenceError,
    PreconditionError,
    RunError,
    ValidationError,
)

__all__ = [name for name in dir() if not name.startswith("_")]
