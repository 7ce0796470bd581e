"""Systems-heterogeneity simulation.

Each client owns a fixed Gaussian capacity profile; the workload it can
actually afford is redrawn from that profile every round.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MU_LOW, MU_HIGH = 5.0, 10.0
SIGMA_LOW_FACTOR, SIGMA_HIGH_FACTOR = 0.25, 0.5


@dataclass(frozen=True)
class CapacityProfile:
    mu: float
    sigma: float

    def __post_init__(self) -> None:
        if not MU_LOW <= self.mu < MU_HIGH:
            raise ValueError(f"mu must lie in [{MU_LOW}, {MU_HIGH}), got {self.mu}")
        if not self.mu * SIGMA_LOW_FACTOR <= self.sigma < self.mu * SIGMA_HIGH_FACTOR:
            raise ValueError(
                f"sigma must lie in [mu/4, mu/2) = "
                f"[{self.mu * SIGMA_LOW_FACTOR}, {self.mu * SIGMA_HIGH_FACTOR}), got {self.sigma}"
            )


def sample_profile(stream: np.random.Generator) -> CapacityProfile:
    """Draw a profile: mu uniform on [5, 10), sigma uniform on [mu/4, mu/2)."""
    mu = float(stream.uniform(MU_LOW, MU_HIGH))
    sigma = float(stream.uniform(mu * SIGMA_LOW_FACTOR, mu * SIGMA_HIGH_FACTOR))
    return CapacityProfile(mu, sigma)


def draw_capacity(profile: CapacityProfile, stream: np.random.Generator) -> float:
    """One round's affordable workload: a Gaussian draw clamped below at 0."""
    return max(0.0, float(stream.normal(profile.mu, profile.sigma)))
