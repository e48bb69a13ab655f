"""Run configuration: scenario presets, override parsing, validation and
the resolved-config echo that makes every run regenerable.

The configuration format is TOML with a fixed key schema (documented in
README.md).  Unknown keys are rejected by name.  A parsed configuration is
always the scenario preset overlaid with the user's overrides, and the
fully resolved result is written next to the run outputs so that the same
numbers can be regenerated from that file alone.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, replace
from importlib import resources

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .bloch import RateSet, validate_rates
from .cavity import CavitySpec
from .vapor import CollisionModel, VaporConditions, VelocityConvention

__all__ = [
    "ConfigError",
    "SweepSpec",
    "GainMapSpec",
    "RunConfig",
    "SCENARIOS",
    "parse_config",
    "load_preset",
    "preset_names",
    "resolved_config_toml",
]

SCENARIOS = (
    "fig3-pump-sweep",
    "fig4-density-sweep",
    "gain-map",
    "single-point",
    "transient",
)

FORMATS = ("csv", "json", "svg")


class ConfigError(ValueError):
    """Configuration could not be parsed or validated."""


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    minimum: float
    maximum: float
    points: int
    spacing: str = "linear"


@dataclass(frozen=True)
class GainMapSpec:
    density_min: float
    density_max: float
    density_points: int
    density_spacing: str = "log"


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration of one scenario run."""

    scenario: str
    description: str
    rates: RateSet
    collective_coupling: float   # MHz
    n_density: float             # m^-3
    omega: float                 # MHz (fixed-pump scenarios)
    cavity: CavitySpec
    vapor: VaporConditions
    collision: CollisionModel
    calibration: float           # MHz per sqrt(mW)
    sweep: SweepSpec
    gain_map: GainMapSpec | None
    transient_t_final: float     # 1/MHz units
    intensity_mode: str
    steady_tolerance: float
    rtol: float
    atol: float
    output_directory: str
    formats: tuple[str, ...]


# Allowed keys per table; parsing rejects anything else by name.
_SCHEMA: dict[str, tuple[str, ...]] = {
    "": ("scenario", "description"),
    "rates": ("gamma_a", "gamma_b", "gamma_c", "gamma_bc", "gamma_ba", "gamma_ac", "f"),
    "drive": ("collective_coupling_mhz", "n_density_m3", "omega_mhz"),
    "cavity": ("round_trip_length_m", "transmissivity_m1", "transmissivity_m2",
               "linewidth_fwhm_mhz", "amplitude_decay_mhz"),
    "vapor": ("temperature_k", "wavelength_m", "atomic_mass_kg", "cell_length_m",
              "refractive_index", "natural_linewidth_mhz"),
    "collisions": ("cross_section_m2", "velocity_convention"),
    "pump": ("calibration_mhz_per_sqrt_mw", "anchor_power_mw", "anchor_rabi_mhz"),
    "sweep": ("parameter", "minimum", "maximum", "points", "spacing"),
    "gain_map": ("density_min", "density_max", "density_points", "density_spacing"),
    "transient": ("t_final_us",),
    "solver": ("intensity_mode", "steady_tolerance", "rtol", "atol"),
    "output": ("directory", "formats"),
}


def _check_keys(data: dict) -> None:
    for key, value in data.items():
        if isinstance(value, dict):
            if key not in _SCHEMA:
                raise ConfigError(f"unknown configuration table [{key}]")
            for sub in value:
                if sub not in _SCHEMA[key]:
                    raise ConfigError(f"unknown configuration key '{key}.{sub}'")
        else:
            if key not in _SCHEMA[""]:
                raise ConfigError(f"unknown configuration key '{key}'")


def _merge(base: dict, override: dict) -> dict:
    out = {k: (dict(v) if isinstance(v, dict) else v) for k, v in base.items()}
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key].update(value)
        else:
            out[key] = value
    return out


def preset_names() -> tuple[str, ...]:
    return SCENARIOS


def _preset_text(scenario: str) -> str:
    if scenario not in SCENARIOS:
        raise ConfigError(
            f"unknown scenario '{scenario}'; available: {', '.join(SCENARIOS)}")
    return resources.files("lwisim").joinpath(
        f"data/presets/{scenario}.toml").read_text("utf-8")


def load_preset(scenario: str) -> dict:
    """Raw preset mapping for a scenario."""
    return tomllib.loads(_preset_text(scenario))


def preset_description(scenario: str) -> str:
    return load_preset(scenario).get("description", "")


def _num(data: dict, table: str, key: str) -> float:
    try:
        value = data[table][key]
    except KeyError:
        raise ConfigError(f"missing configuration key '{table}.{key}'") from None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{table}.{key}' must be a number, got {value!r}")
    return float(value)


def _build(data: dict) -> RunConfig:
    _check_keys(data)
    scenario = data.get("scenario")
    if scenario not in SCENARIOS:
        raise ConfigError(
            f"unknown scenario '{scenario}'; available: {', '.join(SCENARIOS)}")

    rates = RateSet(
        gamma_a=_num(data, "rates", "gamma_a"),
        gamma_b=_num(data, "rates", "gamma_b"),
        gamma_c=_num(data, "rates", "gamma_c"),
        gamma_bc=_num(data, "rates", "gamma_bc"),
        gamma_ba=_num(data, "rates", "gamma_ba"),
        gamma_ac=_num(data, "rates", "gamma_ac"),
        f=_num(data, "rates", "f"),
    )
    violations = validate_rates(rates)
    if violations:
        raise ConfigError("invalid rates: " + "; ".join(violations))

    pump = data.get("pump", {})
    if "calibration_mhz_per_sqrt_mw" in pump:
        calibration = float(pump["calibration_mhz_per_sqrt_mw"])
    elif "anchor_power_mw" in pump and "anchor_rabi_mhz" in pump:
        calibration = float(pump["anchor_rabi_mhz"]) / math.sqrt(float(pump["anchor_power_mw"]))
    else:
        raise ConfigError("pump table needs calibration_mhz_per_sqrt_mw or the "
                          "anchor_power_mw / anchor_rabi_mhz pair")

    cav = data.get("cavity", {})
    try:
        cavity = CavitySpec(
            round_trip_length=_num(data, "cavity", "round_trip_length_m"),
            transmissivity_m1=_num(data, "cavity", "transmissivity_m1"),
            transmissivity_m2=_num(data, "cavity", "transmissivity_m2"),
            linewidth_fwhm=_num(data, "cavity", "linewidth_fwhm_mhz"),
            amplitude_decay=(float(cav["amplitude_decay_mhz"])
                             if "amplitude_decay_mhz" in cav else None),
        )
        vapor = VaporConditions(
            temperature=_num(data, "vapor", "temperature_k"),
            wavelength=_num(data, "vapor", "wavelength_m"),
            atomic_mass=_num(data, "vapor", "atomic_mass_kg"),
            cell_length=_num(data, "vapor", "cell_length_m"),
            refractive_index=_num(data, "vapor", "refractive_index"),
            natural_linewidth=_num(data, "vapor", "natural_linewidth_mhz"),
        )
        convention = data.get("collisions", {}).get("velocity_convention", "most-probable")
        try:
            convention = VelocityConvention(convention)
        except ValueError:
            raise ConfigError(
                f"unknown collisions.velocity_convention '{convention}'") from None
        collision = CollisionModel(
            cross_section=_num(data, "collisions", "cross_section_m2"),
            velocity_convention=convention,
        )
    except ConfigError:
        raise
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc

    sweep_data = data.get("sweep")
    if not sweep_data:
        raise ConfigError("missing [sweep] table")
    sweep = SweepSpec(
        parameter=str(sweep_data.get("parameter", "")),
        minimum=_num(data, "sweep", "minimum"),
        maximum=_num(data, "sweep", "maximum"),
        points=int(_num(data, "sweep", "points")),
        spacing=str(sweep_data.get("spacing", "linear")),
    )
    if sweep.points < 2:
        raise ConfigError("sweep.points must be >= 2")
    if not sweep.minimum < sweep.maximum:
        raise ConfigError("sweep.minimum must be < sweep.maximum")
    if sweep.spacing not in ("linear", "log"):
        raise ConfigError(f"unknown sweep.spacing '{sweep.spacing}'")

    gm = data.get("gain_map")
    gain_map = None
    if gm:
        gain_map = GainMapSpec(
            density_min=_num(data, "gain_map", "density_min"),
            density_max=_num(data, "gain_map", "density_max"),
            density_points=int(_num(data, "gain_map", "density_points")),
            density_spacing=str(gm.get("density_spacing", "log")),
        )

    solver = data.get("solver", {})
    intensity_mode = str(solver.get("intensity_mode", "full-model"))
    if intensity_mode not in ("full-model", "strong-pump-approx"):
        raise ConfigError(f"unknown solver.intensity_mode '{intensity_mode}'")

    out = data.get("output", {})
    formats = tuple(out.get("formats", ["csv"]))
    for fmt in formats:
        if fmt not in FORMATS:
            raise ConfigError(f"unknown output format '{fmt}'")

    return RunConfig(
        scenario=scenario,
        description=str(data.get("description", "")),
        rates=rates,
        collective_coupling=_num(data, "drive", "collective_coupling_mhz"),
        n_density=_num(data, "drive", "n_density_m3"),
        omega=float(data["drive"].get("omega_mhz", 0.0)),
        cavity=cavity,
        vapor=vapor,
        collision=collision,
        calibration=calibration,
        sweep=sweep,
        gain_map=gain_map,
        transient_t_final=float(data.get("transient", {}).get("t_final_us", 150.0)),
        intensity_mode=intensity_mode,
        steady_tolerance=float(solver.get("steady_tolerance", 1e-10)),
        rtol=float(solver.get("rtol", 1e-9)),
        atol=float(solver.get("atol", 1e-12)),
        output_directory=str(out.get("directory", f"runs/{scenario}")),
        formats=formats,
    )


def parse_config(text: str, overrides: dict | None = None) -> RunConfig:
    """Resolve a configuration: preset defaults overlaid with the user text.

    ``text`` must at least name a scenario; anything else it contains
    replaces the corresponding preset value.  ``overrides`` (for example
    from CLI ``--set`` flags) are applied on top.
    """
    try:
        user = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    _check_keys(user)
    scenario = user.get("scenario")
    if scenario is None:
        raise ConfigError("configuration must name a scenario "
                          f"(one of: {', '.join(SCENARIOS)})")
    merged = _merge(load_preset(scenario), user)
    if overrides:
        _check_keys(overrides)
        merged = _merge(merged, overrides)
    return _build(merged)


def config_for_scenario(scenario: str, overrides: dict | None = None) -> RunConfig:
    """Preset configuration for a scenario plus optional overrides."""
    return parse_config(f'scenario = "{scenario}"', overrides)


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {value!r}")


def resolved_config_toml(config: RunConfig) -> str:
    """Serialize a RunConfig so that parse_config(text) reproduces it exactly."""
    r, c, v = config.rates, config.cavity, config.vapor
    lines = [
        "# Resolved configuration; rerunning from this file regenerates the run.",
        f"scenario = {_toml_value(config.scenario)}",
        f"description = {_toml_value(config.description)}",
        "",
        "[rates]",
        *(f"{k} = {_toml_value(getattr(r, k))}"
          for k in _SCHEMA["rates"]),
        "",
        "[drive]",
        f"collective_coupling_mhz = {_toml_value(config.collective_coupling)}",
        f"n_density_m3 = {_toml_value(config.n_density)}",
        f"omega_mhz = {_toml_value(config.omega)}",
        "",
        "[cavity]",
        f"round_trip_length_m = {_toml_value(c.round_trip_length)}",
        f"transmissivity_m1 = {_toml_value(c.transmissivity_m1)}",
        f"transmissivity_m2 = {_toml_value(c.transmissivity_m2)}",
        f"linewidth_fwhm_mhz = {_toml_value(c.linewidth_fwhm)}",
    ]
    if c.amplitude_decay is not None:
        lines.append(f"amplitude_decay_mhz = {_toml_value(c.amplitude_decay)}")
    lines += [
        "",
        "[vapor]",
        f"temperature_k = {_toml_value(v.temperature)}",
        f"wavelength_m = {_toml_value(v.wavelength)}",
        f"atomic_mass_kg = {_toml_value(v.atomic_mass)}",
        f"cell_length_m = {_toml_value(v.cell_length)}",
        f"refractive_index = {_toml_value(v.refractive_index)}",
        f"natural_linewidth_mhz = {_toml_value(v.natural_linewidth)}",
        "",
        "[collisions]",
        f"cross_section_m2 = {_toml_value(config.collision.cross_section)}",
        f"velocity_convention = {_toml_value(config.collision.velocity_convention.value)}",
        "",
        "[pump]",
        f"calibration_mhz_per_sqrt_mw = {_toml_value(config.calibration)}",
        "",
        "[sweep]",
        f"parameter = {_toml_value(config.sweep.parameter)}",
        f"minimum = {_toml_value(config.sweep.minimum)}",
        f"maximum = {_toml_value(config.sweep.maximum)}",
        f"points = {_toml_value(config.sweep.points)}",
        f"spacing = {_toml_value(config.sweep.spacing)}",
    ]
    if config.gain_map is not None:
        g = config.gain_map
        lines += [
            "",
            "[gain_map]",
            f"density_min = {_toml_value(g.density_min)}",
            f"density_max = {_toml_value(g.density_max)}",
            f"density_points = {_toml_value(g.density_points)}",
            f"density_spacing = {_toml_value(g.density_spacing)}",
        ]
    lines += [
        "",
        "[transient]",
        f"t_final_us = {_toml_value(config.transient_t_final)}",
        "",
        "[solver]",
        f"intensity_mode = {_toml_value(config.intensity_mode)}",
        f"steady_tolerance = {_toml_value(config.steady_tolerance)}",
        f"rtol = {_toml_value(config.rtol)}",
        f"atol = {_toml_value(config.atol)}",
        "",
        "[output]",
        f"directory = {_toml_value(config.output_directory)}",
        f"formats = {_toml_value(list(config.formats))}",
        "",
    ]
    return "\n".join(lines)
