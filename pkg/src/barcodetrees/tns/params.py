"""Parameters for stochastic tree synthesis."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = ["AngleSampler", "TNSParams"]


@dataclass(frozen=True)
class AngleSampler:
    """Bifurcation-angle distribution: polar angle uniform on
    [polar_min, polar_max] relative to the parent direction, azimuth uniform.
    """

    polar_min: float = math.pi / 12
    polar_max: float = math.pi / 3

    def __post_init__(self):
        if not (0.0 <= self.polar_min <= self.polar_max <= math.pi):
            raise ValueError("need 0 <= polar_min <= polar_max <= pi")


@dataclass(frozen=True)
class TNSParams:
    """Knobs of the synthesis process.

    ``lam`` is the exponential steepness (inverse length) of the targeting
    toward birth/death distances; the overshoot past each target follows
    Exp(lam).  ``rho``, ``tau``, ``mu`` weight the random / target / memory
    components of each elongation step and must sum to 1.  ``step_size`` is
    the segment length of the directed random walk.
    """

    lam: float = 1.0
    rho: float = 0.3
    tau: float = 0.4
    mu: float = 0.3
    step_size: float = 0.1
    seed: int = 0
    angle_sampler: AngleSampler = field(default_factory=AngleSampler)

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if min(self.rho, self.tau, self.mu) < 0:
            raise ValueError("weights must be non-negative")
        if abs(self.rho + self.tau + self.mu - 1.0) > 1e-9:
            raise ValueError("rho + tau + mu must equal 1")
        if not self.step_size > 0:
            raise ValueError("step_size must be positive")
