"""Shared fixtures and the random valid-parameter sampler used by the
oracle-equivalence suites."""

from __future__ import annotations

import numpy as np
import pytest

from lwisim import CavitySpec, DriveConfig, RateSet

# Reference operating point: the anchored rate set used by the presets.
PRESET_RATES = RateSet(gamma_a=5.75, gamma_b=0.013, gamma_c=0.013,
                       gamma_bc=0.013, gamma_ba=2.875, gamma_ac=2.875, f=0.3)
PRESET_COLLECTIVE = 3000.0   # MHz
PRESET_DENSITY = 2.4e18      # m^-3


@pytest.fixture
def preset_rates() -> RateSet:
    return PRESET_RATES


@pytest.fixture
def preset_drive() -> DriveConfig:
    return DriveConfig.from_collective(160.0, 0.0, PRESET_COLLECTIVE, PRESET_DENSITY)


@pytest.fixture
def preset_cavity() -> CavitySpec:
    return CavitySpec(round_trip_length=0.37, transmissivity_m1=0.03,
                      transmissivity_m2=0.014, linewidth_fwhm=17.0)


def sample_rates(rng: np.random.Generator) -> RateSet:
    """Valid rate tuple: log-uniform rates in [1e-3, 10] MHz respecting the
    ground-coherence floor, branching fraction uniform in [0, 1]."""
    def lu():
        return float(10.0 ** rng.uniform(-3, 1))

    gamma_b, gamma_c = lu(), lu()
    gamma_bc = max(lu(), 0.5 * (gamma_b + gamma_c))
    return RateSet(
        gamma_a=lu(), gamma_b=gamma_b, gamma_c=gamma_c, gamma_bc=gamma_bc,
        gamma_ba=lu(), gamma_ac=lu(), f=float(rng.uniform(0.0, 1.0)),
    )


def sample_drive(rng: np.random.Generator, a_max: float = 50.0) -> DriveConfig:
    """Drive with omega in [0, 500] MHz and g*a in [0, a_max] MHz (g = 1);
    collective coupling fixed at 3000 MHz."""
    return DriveConfig(
        omega=float(rng.uniform(0.0, 500.0)),
        a=float(rng.uniform(0.0, a_max)),
        g=1.0,
        n_density=PRESET_COLLECTIVE**2,   # g sqrt(N) = 3000 with g = 1
    )
