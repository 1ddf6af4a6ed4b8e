"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit with 2,
numeric failures (rank deficiency, divergence, non-coercive problems)
with 3.
"""
from __future__ import annotations


class DomainError(ValueError):
    """Arguments outside an operation's stated domain (a >= b, h <= 0, ...)."""


class ConfigError(ValueError):
    """Malformed or out-of-range run configuration."""


class SolveError(RuntimeError):
    """Numeric failure: rank-deficient system, non-finite entries, divergence."""


class CoercivityError(SolveError):
    """Diffusion coefficient not uniformly positive over the parameter box."""

    def __init__(self, floor: float, location: tuple[float, float]):
        self.floor = floor
        self.location = location
        super().__init__(
            f"coefficient floor {floor:.6g} <= 0 at (x, y) = "
            f"({location[0]:.6g}, {location[1]:.6g})"
        )
