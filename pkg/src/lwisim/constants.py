"""Physical-constants table.

All constants live in a versioned TOML file (``data/constants.toml``) rather
than inline numbers, so a run can swap in a different table via the
``LWISIM_CONSTANTS`` environment variable or the CLI ``--constants`` flag.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

ENV_CONSTANTS_PATH = "LWISIM_CONSTANTS"


@dataclass(frozen=True)
class ConstantsTable:
    """Flattened view of the constants file."""

    speed_of_light: float          # m/s
    boltzmann: float               # J/K
    atomic_mass: float             # kg, Rb-87
    d1_wavelength: float           # m, vacuum
    natural_linewidth: float       # MHz, upper-level decay rate
    vp_melting_point: float        # K
    vp_liquid: tuple[float, float, float, float]
    vp_solid: tuple[float, float, float, float]
    vp_valid_min: float            # K
    vp_valid_max: float            # K
    torr_to_pa: float
    exchange_cross_section: float  # m^2
    cross_section_low: float       # m^2
    cross_section_high: float      # m^2

    @classmethod
    def from_mapping(cls, data: dict) -> "ConstantsTable":
        fund = data["fundamental"]
        rb = data["rb87"]
        vp = data["vapor_pressure"]
        col = data["collisions"]
        return cls(
            speed_of_light=float(fund["speed_of_light_m_per_s"]),
            boltzmann=float(fund["boltzmann_j_per_k"]),
            atomic_mass=float(rb["atomic_mass_kg"]),
            d1_wavelength=float(rb["d1_wavelength_m"]),
            natural_linewidth=float(rb["natural_linewidth_mhz"]),
            vp_melting_point=float(vp["melting_point_k"]),
            vp_liquid=tuple(float(c) for c in vp["liquid_coefficients"]),
            vp_solid=tuple(float(c) for c in vp["solid_coefficients"]),
            vp_valid_min=float(vp["valid_min_k"]),
            vp_valid_max=float(vp["valid_max_k"]),
            torr_to_pa=float(vp["torr_to_pa"]),
            exchange_cross_section=float(col["exchange_cross_section_m2"]),
            cross_section_low=float(col["cross_section_low_m2"]),
            cross_section_high=float(col["cross_section_high_m2"]),
        )


def load_constants(path: str | Path | None = None) -> ConstantsTable:
    """Load the constants table.

    Resolution order: explicit ``path`` argument, then the
    ``LWISIM_CONSTANTS`` environment variable, then the packaged default.
    """
    if path is None:
        path = os.environ.get(ENV_CONSTANTS_PATH)
    if path is None:
        text = resources.files("lwisim").joinpath("data/constants.toml").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return ConstantsTable.from_mapping(tomllib.loads(text))


_default: ConstantsTable | None = None


def default_constants() -> ConstantsTable:
    """Cached table from the default resolution order."""
    global _default
    if _default is None:
        _default = load_constants()
    return _default


def reset_default() -> None:
    """Drop the cached table (after changing the environment override)."""
    global _default
    _default = None
