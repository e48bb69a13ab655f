"""Hot-vapor context quantities: Doppler width, saturated vapor density,
resonant optical depth, thermal velocities, collision-rate estimates and
the density-scaling template used by the sweeps.

The vapor-pressure correlation coefficients live in the constants table,
not here; the packaged set reproduces the 2.4e18 m^-3 density anchor at
90 C to within a few percent.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

from .bloch import RateSet
from .constants import ConstantsTable, default_constants

__all__ = [
    "VaporConditions",
    "CollisionModel",
    "VelocityConvention",
    "doppler_fwhm",
    "vapor_density",
    "temperature_for_density",
    "optical_depth",
    "thermal_velocity",
    "collision_rate",
    "density_template",
]


class VelocityConvention(enum.Enum):
    """Which Maxwell-Boltzmann speed enters a collision-rate estimate."""

    MOST_PROBABLE = "most-probable"
    MEAN = "mean"
    MEAN_RELATIVE = "mean-relative"


@dataclass(frozen=True)
class VaporConditions:
    """Cell and line parameters for the optical-depth pipeline."""

    temperature: float        # K
    wavelength: float         # m
    atomic_mass: float        # kg
    cell_length: float        # m
    refractive_index: float = 1.0
    natural_linewidth: float = 5.75   # MHz

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("temperature must be > 0")
        if self.cell_length <= 0:
            raise ValueError("cell_length must be > 0")
        if self.refractive_index < 1:
            raise ValueError("refractive_index must be >= 1")

    @classmethod
    def from_constants(cls, temperature: float, cell_length: float = 0.07,
                       table: ConstantsTable | None = None) -> "VaporConditions":
        t = table or default_constants()
        return cls(
            temperature=temperature,
            wavelength=t.d1_wavelength,
            atomic_mass=t.atomic_mass,
            cell_length=cell_length,
            refractive_index=1.0,
            natural_linewidth=t.natural_linewidth,
        )


@dataclass(frozen=True)
class CollisionModel:
    """Exchange-collision cross-section and the velocity convention."""

    cross_section: float   # m^2
    velocity_convention: VelocityConvention = VelocityConvention.MOST_PROBABLE

    def __post_init__(self):
        # plausibility window, guards against cm^2 <-> m^2 unit slips
        if not 1e-19 <= self.cross_section <= 1e-16:
            raise ValueError(
                f"cross_section {self.cross_section} m^2 outside the "
                "plausibility window [1e-19, 1e-16] m^2"
            )


def doppler_fwhm(cond: VaporConditions, table: ConstantsTable | None = None) -> float:
    """Doppler FWHM of the optical line in MHz.

    (c / lambda) * sqrt(8 kB T ln2 / (m c^2)).
    """
    t = table or default_constants()
    c = t.speed_of_light
    width_hz = (c / cond.wavelength) * math.sqrt(
        8.0 * t.boltzmann * cond.temperature * math.log(2.0)
        / (cond.atomic_mass * c * c)
    )
    return width_hz / 1e6


def vapor_density(temperature: float, table: ConstantsTable | None = None) -> float:
    """Saturated rubidium vapor density in m^-3 from the pressure correlation.

    Uses the solid- or liquid-phase coefficient set depending on the
    melting point and converts through the ideal-gas law.  Temperatures
    outside the correlation's validity window are rejected.
    """
    t = table or default_constants()
    if not t.vp_valid_min < temperature < t.vp_valid_max:
        raise ValueError(
            f"temperature {temperature} K outside the vapor-pressure "
            f"correlation window ({t.vp_valid_min}, {t.vp_valid_max}) K"
        )
    a, b, c, d = t.vp_liquid if temperature >= t.vp_melting_point else t.vp_solid
    log10_p_torr = a + b / temperature + c * temperature + d * math.log10(temperature)
    pressure = 10.0**log10_p_torr * t.torr_to_pa
    return pressure / (t.boltzmann * temperature)


def temperature_for_density(density: float, table: ConstantsTable | None = None) -> float:
    """Invert :func:`vapor_density` by bisection over its validity window."""
    t = table or default_constants()
    lo = t.vp_valid_min + 1e-9
    hi = t.vp_valid_max - 1e-9
    if not vapor_density(lo, t) <= density <= vapor_density(hi, t):
        raise ValueError(f"density {density} m^-3 unreachable within the "
                         "correlation's temperature window")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if vapor_density(mid, t) < density:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-9:
            break
    return 0.5 * (lo + hi)


def optical_depth(cond: VaporConditions, density: float, doppler: float) -> float:
    """Resonant optical depth N * (3 lambda^2 / 8 pi n^2) * (gamma / doppler) * l.

    ``doppler`` is the Doppler FWHM in MHz; the upper-level decay rate is
    taken from ``cond.natural_linewidth`` (MHz), so only their ratio enters.
    """
    if doppler <= 0:
        raise ValueError("doppler width must be > 0")
    sigma = (3.0 * cond.wavelength**2 / (8.0 * math.pi * cond.refractive_index**2)
             * (cond.natural_linewidth / doppler))
    return density * sigma * cond.cell_length


def thermal_velocity(
    temperature: float,
    mass: float,
    convention: VelocityConvention = VelocityConvention.MOST_PROBABLE,
    table: ConstantsTable | None = None,
) -> float:
    """Maxwell-Boltzmann speed in m/s under the requested convention."""
    t = table or default_constants()
    most_probable = math.sqrt(2.0 * t.boltzmann * temperature / mass)
    if convention is VelocityConvention.MOST_PROBABLE:
        return most_probable
    mean = math.sqrt(8.0 * t.boltzmann * temperature / (math.pi * mass))
    if convention is VelocityConvention.MEAN:
        return mean
    return math.sqrt(2.0) * mean   # mean relative speed of two thermal atoms


def collision_rate(
    density: float,
    model: CollisionModel,
    temperature: float,
    mass: float | None = None,
    table: ConstantsTable | None = None,
) -> float:
    """Exchange-collision depolarization rate N * sigma * v, in MHz (1e6/s)."""
    t = table or default_constants()
    m = mass if mass is not None else t.atomic_mass
    v = thermal_velocity(temperature, m, model.velocity_convention, t)
    return density * model.cross_section * v / 1e6


def density_template(
    n_ref: float,
    rates_ref: RateSet,
    collective_ref: float,
) -> Callable[[float], tuple[RateSet, float]]:
    """Scaling map N -> (RateSet, collective coupling) around a reference.

    Collision-driven rates (gamma_b, gamma_c, gamma_bc) scale linearly in
    N / N_ref; gamma_a, gamma_ba, gamma_ac and f stay fixed; the collective
    coupling scales as sqrt(N / N_ref).  Linearity keeps the coherence
    floor satisfied whenever the reference satisfies it.
    """
    if n_ref <= 0 or collective_ref <= 0:
        raise ValueError("reference density and coupling must be positive")

    def at_density(n: float) -> tuple[RateSet, float]:
        if n <= 0:
            raise ValueError("density must be positive")
        ratio = n / n_ref
        scaled = rates_ref.replace(
            gamma_b=rates_ref.gamma_b * ratio,
            gamma_c=rates_ref.gamma_c * ratio,
            gamma_bc=rates_ref.gamma_bc * ratio,
        )
        return scaled, collective_ref * math.sqrt(ratio)

    return at_density
