"""Command-line front end.

Verbs:

* ``run <scenario> [--config FILE] [--set key=value ...] [--out DIR]
  [--format csv,json,svg] [--constants PATH]``
* ``validate <config-file>``
* ``presets list``

Exit codes: 0 success, 2 configuration error, 3 numerical failure.  On a
numerical failure a machine-readable ``error.json`` is left in the output
directory.  All files are written atomically (write-temp-then-rename).
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import constants
from .bloch import DriveConfig, rho_cc, validate_rates
from .cavity import (
    SweepResult,
    cavity_derived,
    steady_intensity,
    sweep_density,
    sweep_pump,
)
from .config import (
    ConfigError,
    RunConfig,
    SCENARIOS,
    parse_config,
    preset_description,
    resolved_config_toml,
)
from .gain import (
    classify_legs,
    inversion_closed,
    linear_gain_closed,
    linear_gain_numeric,
    rough_gain,
)
from .steady import (
    StepControl,
    integrate_to_steady,
    integrate_transient,
    unpumped_equilibrium,
    write_trajectory_csv,
)
from .svgplot import emit_svg
from .vapor import (
    density_template,
    doppler_fwhm,
    optical_depth,
    temperature_for_density,
    vapor_density,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


@dataclass(frozen=True)
class RunReport:
    status: int
    files: tuple[Path, ...]


def _atomic_write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)
    return path


def _drive(config: RunConfig, omega: float | None = None) -> DriveConfig:
    return DriveConfig.from_collective(
        omega=config.omega if omega is None else omega,
        a=0.0,
        collective_coupling=config.collective_coupling,
        n_density=config.n_density,
    )


def _od_fn(config: RunConfig):
    """Density -> optical depth along the saturated-vapor curve."""
    cond = config.vapor

    def od(n: float) -> float:
        t = temperature_for_density(n)
        dop = doppler_fwhm(replace(cond, temperature=t))
        return optical_depth(cond, n, dop)

    return od


def _emit_sweep(result: SweepResult, config: RunConfig, out: Path,
                xlabel: str, title: str) -> list[Path]:
    files = []
    stem = config.scenario
    if "csv" in config.formats:
        buf = io.StringIO()
        result.write_csv(buf)
        files.append(_atomic_write(out / f"{stem}.csv", buf.getvalue()))
    if "json" in config.formats:
        files.append(_atomic_write(out / f"{stem}.json", result.to_json()))
    if "svg" in config.formats:
        svg = emit_svg(
            result.swept,
            [("intensity (a^2)", result.intensity)],
            title=title,
            xlabel=xlabel,
            ylabel="steady intensity, dimensionless a^2",
        )
        files.append(_atomic_write(out / f"{stem}.svg", svg))
    return files


def _run_fig3(config: RunConfig, out: Path) -> list[Path]:
    result = sweep_pump(
        config.rates, _drive(config), config.cavity,
        (config.sweep.minimum, config.sweep.maximum),
        points=config.sweep.points,
        calibration=config.calibration,
        spacing=config.sweep.spacing,
        mode=config.intensity_mode,
    )
    return _emit_sweep(result, config, out,
                       xlabel="pump power, mW",
                       title="Lasing intensity vs pump power")


def _run_fig4(config: RunConfig, out: Path) -> list[Path]:
    template = density_template(config.n_density, config.rates,
                                config.collective_coupling)
    result = sweep_density(
        template, config.omega, config.cavity,
        (config.sweep.minimum, config.sweep.maximum),
        points=config.sweep.points,
        spacing=config.sweep.spacing,
        mode=config.intensity_mode,
        od_fn=_od_fn(config),
    )
    return _emit_sweep(result, config, out,
                       xlabel="atomic density, m^-3",
                       title="Lasing intensity vs atomic density")


def _run_gain_map(config: RunConfig, out: Path) -> list[Path]:
    gm = config.gain_map
    if gm is None:
        raise ConfigError("gain-map scenario needs a [gain_map] table")
    template = density_template(config.n_density, config.rates,
                                config.collective_coupling)
    s = config.sweep
    if s.spacing == "log":
        omegas = [s.minimum * (s.maximum / s.minimum) ** (i / (s.points - 1))
                  for i in range(s.points)]
    else:
        omegas = [s.minimum + (s.maximum - s.minimum) * i / (s.points - 1)
                  for i in range(s.points)]
    if gm.density_spacing == "log":
        densities = [gm.density_min * (gm.density_max / gm.density_min)
                     ** (i / (gm.density_points - 1))
                     for i in range(gm.density_points)]
    else:
        densities = [gm.density_min + (gm.density_max - gm.density_min)
                     * i / (gm.density_points - 1)
                     for i in range(gm.density_points)]

    rows = []
    curves = []
    for n in densities:
        rates_n, collective_n = template(n)
        gains = []
        for om in omegas:
            d = DriveConfig.from_collective(om, 0.0, collective_n, n)
            g = linear_gain_closed(rates_n, d).value
            gains.append(g)
            rows.append((om, n, g))
        curves.append((f"N={n:.3g}", gains))

    files = []
    if "csv" in config.formats:
        lines = ["omega_mhz,n_density_m3,linear_gain_mhz"]
        lines += [f"{om!r},{n!r},{g!r}" for om, n, g in rows]
        files.append(_atomic_write(out / "gain-map.csv", "\n".join(lines) + "\n"))
    if "json" in config.formats:
        payload = {"rows": [{"omega_mhz": om, "n_density_m3": n, "linear_gain_mhz": g}
                            for om, n, g in rows]}
        files.append(_atomic_write(out / "gain-map.json",
                                   json.dumps(payload, indent=2) + "\n"))
    if "svg" in config.formats:
        svg = emit_svg(omegas, curves,
                       title="Small-signal gain vs pump Rabi frequency",
                       xlabel="pump Rabi frequency, MHz",
                       ylabel="linear gain, MHz")
        files.append(_atomic_write(out / "gain-map.svg", svg))
    return files


def _run_single_point(config: RunConfig, out: Path) -> list[Path]:
    drive = _drive(config)
    breakdown = linear_gain_closed(config.rates, drive)
    steady = integrate_to_steady(config.rates, drive,
                                 tolerance=config.steady_tolerance)
    lasing = steady_intensity(config.rates, drive, config.cavity,
                              config.intensity_mode)
    derived = cavity_derived(config.cavity)
    dop = doppler_fwhm(config.vapor)
    density = vapor_density(config.vapor.temperature)
    s = steady.final_state
    report = {
        "scenario": config.scenario,
        "omega_mhz": config.omega,
        "linear_gain_mhz": breakdown.value,
        "linear_gain_numeric_mhz": linear_gain_numeric(config.rates, drive),
        "rough_gain_mhz": rough_gain(config.rates, drive),
        "inversion": inversion_closed(config.rates, config.omega),
        "leg_class": classify_legs(config.rates).value,
        "steady_state": {
            "rho_aa": s.rho_aa, "rho_bb": s.rho_bb, "rho_cc": rho_cc(s),
            "i_rho_ab": s.u, "rho_cb": s.v, "i_rho_ca": s.w,
            "converged": steady.converged,
            "residual_norm_mhz": steady.residual_norm,
        },
        "cavity": {
            "fsr_mhz": derived.fsr,
            "finesse": derived.finesse,
            "amplitude_decay_mhz": derived.amplitude_decay,
        },
        "lasing": {
            "intensity": lasing.intensity,
            "amplitude": lasing.amplitude,
            "gain_at_solution_mhz": lasing.gain_at_solution,
            "branch": lasing.branch,
        },
        "vapor": {
            "doppler_fwhm_mhz": dop,
            "density_m3": density,
            "optical_depth": optical_depth(config.vapor, density, dop),
        },
    }
    files = []
    if "json" in config.formats:
        files.append(_atomic_write(out / "single-point.json",
                                   json.dumps(report, indent=2) + "\n"))
    if "csv" in config.formats:
        flat = []

        def walk(prefix, obj):
            for k, v in obj.items():
                if isinstance(v, dict):
                    walk(f"{prefix}{k}.", v)
                else:
                    flat.append((prefix + k, v))

        walk("", report)
        lines = ["key,value"] + [f"{k},{v!r}" if not isinstance(v, str)
                                 else f"{k},{v}" for k, v in flat]
        files.append(_atomic_write(out / "single-point.csv", "\n".join(lines) + "\n"))
    if "svg" in config.formats:
        raise ConfigError("svg output is not defined for the single-point scenario")
    return files


def _run_transient(config: RunConfig, out: Path) -> list[Path]:
    drive = _drive(config)
    trajectory = integrate_transient(
        config.rates, drive, unpumped_equilibrium(config.rates),
        t_final=config.transient_t_final,
        control=StepControl(rtol=config.rtol, atol=config.atol),
    )
    files = []
    if "csv" in config.formats:
        buf = io.StringIO()
        write_trajectory_csv(trajectory, buf)
        files.append(_atomic_write(out / "transient.csv", buf.getvalue()))
    if "json" in config.formats:
        payload = {"rows": [
            {"t_us": t, "rho_aa": s.rho_aa, "rho_bb": s.rho_bb,
             "rho_cc": rho_cc(s), "i_rho_ab": s.u, "rho_cb": s.v, "i_rho_ca": s.w}
            for t, s in trajectory]}
        files.append(_atomic_write(out / "transient.json",
                                   json.dumps(payload, indent=2) + "\n"))
    if "svg" in config.formats:
        times = [t for t, _ in trajectory]
        svg = emit_svg(
            times,
            [("rho_aa", [s.rho_aa for _, s in trajectory]),
             ("rho_bb", [s.rho_bb for _, s in trajectory]),
             ("rho_cc", [rho_cc(s) for _, s in trajectory])],
            title="Turn-on transient populations",
            xlabel="model time, microsecond-equivalent (1/MHz)",
            ylabel="population",
        )
        files.append(_atomic_write(out / "transient.svg", svg))
    return files


_PIPELINES = {
    "fig3-pump-sweep": _run_fig3,
    "fig4-density-sweep": _run_fig4,
    "gain-map": _run_gain_map,
    "single-point": _run_single_point,
    "transient": _run_transient,
}


def run_scenario(config: RunConfig, out_dir: str | Path | None = None) -> RunReport:
    """Execute a resolved configuration and write its outputs.

    The resolved configuration itself is echoed to the output directory so
    the run can be regenerated from that file alone.
    """
    out = Path(out_dir) if out_dir is not None else Path(config.output_directory)
    if out_dir is not None:
        config = replace(config, output_directory=str(out))
    files = [_atomic_write(out / "resolved-config.toml", resolved_config_toml(config))]
    try:
        files += _PIPELINES[config.scenario](config, out)
    except ConfigError:
        raise
    except Exception as exc:  # numerical failure: leave a machine-readable record
        record = {"error": type(exc).__name__, "message": str(exc)}
        _atomic_write(out / "error.json", json.dumps(record, indent=2) + "\n")
        return RunReport(status=EXIT_NUMERICAL, files=tuple(files))
    return RunReport(status=EXIT_OK, files=tuple(files))


def _parse_set(pairs: list[str]) -> dict:
    """Turn --set key.path=value flags into a nested override mapping."""
    overrides: dict = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got '{pair}'")
        key, raw = pair.split("=", 1)
        try:
            value = tomllib.loads(f"v = {raw}")["v"]
        except tomllib.TOMLDecodeError:
            value = raw   # bare strings like full-model
        node = overrides
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    return overrides


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="lwisim",
        description="Gain, inversion and cavity-threshold calculations for a "
                    "collision-coupled lambda medium in a ring cavity.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run a scenario")
    p_run.add_argument("scenario", choices=SCENARIOS)
    p_run.add_argument("--config", help="TOML file overlaid on the preset")
    p_run.add_argument("--set", dest="sets", action="append", default=[],
                       metavar="KEY=VALUE", help="dotted-key override")
    p_run.add_argument("--out", help="output directory")
    p_run.add_argument("--format", help="comma-separated subset of csv,json,svg")
    p_run.add_argument("--constants", help="alternative constants table")

    p_val = sub.add_parser("validate", help="validate a configuration file")
    p_val.add_argument("config")

    p_pre = sub.add_parser("presets", help="preset utilities")
    p_pre.add_argument("action", choices=["list"])

    args = parser.parse_args(argv)

    try:
        if args.verb == "presets":
            for name in SCENARIOS:
                print(f"{name:20s} {preset_description(name)}")
            return EXIT_OK

        if args.verb == "validate":
            text = Path(args.config).read_text(encoding="utf-8")
            config = parse_config(text)
            problems = validate_rates(config.rates)
            if problems:
                print("invalid rates: " + "; ".join(problems), file=sys.stderr)
                return EXIT_CONFIG
            print(f"ok: scenario {config.scenario}")
            return EXIT_OK

        # run
        if args.constants:
            os.environ[constants.ENV_CONSTANTS_PATH] = args.constants
            constants.reset_default()
        text = f'scenario = "{args.scenario}"\n'
        if args.config:
            text = Path(args.config).read_text(encoding="utf-8")
        overrides = _parse_set(args.sets)
        if args.format:
            overrides.setdefault("output", {})["formats"] = args.format.split(",")
        config = parse_config(text, overrides)
        if config.scenario != args.scenario:
            raise ConfigError(
                f"config file names scenario '{config.scenario}' but the "
                f"command line asked for '{args.scenario}'")
        report = run_scenario(config, out_dir=args.out)
        for f in report.files:
            print(f)
        return report.status
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
