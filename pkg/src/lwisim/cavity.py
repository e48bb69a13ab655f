"""Closing the loop between medium gain and ring-cavity loss.

The lasing steady state is gain clamping: the saturated gain equals the
cavity amplitude decay rate.  Solving that condition for the intensity,
either with the large-pump approximation (an explicit quadratic) or
against the full steady-state model (bracketing plus bisection), yields
the threshold curves versus pump strength and atomic density.

Below threshold the reported intensity is exactly zero; the model has no
spontaneous-emission seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import IO, Callable, Literal

from .bloch import DriveConfig, RateSet
from .constants import default_constants
from .gain import (
    classify_legs,
    inversion_closed,
    linear_gain_closed,
    saturated_gain_approx,
    saturated_gain_full,
)

__all__ = [
    "CavitySpec",
    "CavityDerived",
    "LasingSolution",
    "SweepResult",
    "ThresholdResult",
    "BracketingError",
    "DEFAULT_PUMP_CALIBRATION",
    "cavity_derived",
    "power_to_rabi",
    "steady_intensity",
    "lasing_window_omega",
    "threshold_density",
    "sweep_pump",
    "sweep_density",
    "SWEEP_CSV_HEADER",
]

# Pump-power calibration anchored to the measured pair 21.8 mW <-> 148 MHz.
DEFAULT_PUMP_CALIBRATION = 148.0 / math.sqrt(21.8)   # MHz per sqrt(mW)

SWEEP_CSV_HEADER = "sweep_param,omega_mhz,linear_gain_mhz,intensity,inversion,leg_class"

GAIN_CLAMP_TOL = 1e-6   # MHz, |saturated gain - cavity decay| at a solution


class BracketingError(RuntimeError):
    """Full-model intensity solve failed to bracket the clamping condition."""

    def __init__(self, message: str, scanned: list[tuple[float, float]]):
        self.scanned = scanned   # (amplitude, gain) pairs already evaluated
        super().__init__(message + f" (scanned {len(scanned)} points; "
                         f"grid attached as .scanned)")


@dataclass(frozen=True)
class CavitySpec:
    """Ring-cavity geometry and loss figures.

    ``amplitude_decay`` may be given explicitly; when left ``None`` it
    defaults to half the intensity-linewidth FWHM.
    """

    round_trip_length: float      # m
    transmissivity_m1: float
    transmissivity_m2: float
    linewidth_fwhm: float         # MHz
    amplitude_decay: float | None = None   # MHz

    def __post_init__(self):
        if not 0 < self.transmissivity_m1 < 1 or not 0 < self.transmissivity_m2 < 1:
            raise ValueError("mirror transmissivities must lie in (0, 1)")
        if self.linewidth_fwhm <= 0:
            raise ValueError("linewidth_fwhm must be > 0")
        if self.round_trip_length <= 0:
            raise ValueError("round_trip_length must be > 0")


@dataclass(frozen=True)
class CavityDerived:
    fsr: float              # MHz
    finesse: float
    amplitude_decay: float  # MHz


@dataclass(frozen=True)
class LasingSolution:
    """Steady lasing intensity from the gain-clamping condition."""

    intensity: float          # dimensionless a^2
    amplitude: float          # a
    gain_at_solution: float   # MHz (the small-signal gain when not lasing)
    branch: Literal["stable", "unstable", "none"]


@dataclass(frozen=True)
class ThresholdResult:
    """Outcome of a density-threshold search."""

    status: Literal["found", "always-lasing", "no-threshold-in-range"]
    density: float | None


@dataclass(frozen=True)
class SweepResult:
    """Ordered table of a one-parameter sweep, ready for CSV/JSON emission.

    ``extra`` holds optional trailing columns (for example the optical
    depth of a density sweep) appended after the six contracted ones.
    """

    param_name: str
    swept: tuple[float, ...]
    omega: tuple[float, ...]
    linear_gain: tuple[float, ...]
    intensity: tuple[float, ...]
    inversion: tuple[float, ...]
    leg_class: tuple[str, ...]
    extra: tuple[tuple[str, tuple[float, ...]], ...] = field(default=())

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.swept, self.swept[1:])):
            raise ValueError("swept values must be strictly increasing")

    @property
    def header(self) -> str:
        names = [name for name, _ in self.extra]
        return SWEEP_CSV_HEADER + ("," + ",".join(names) if names else "")

    def rows(self):
        extras = [vals for _, vals in self.extra]
        for i in range(len(self.swept)):
            yield (self.swept[i], self.omega[i], self.linear_gain[i],
                   self.intensity[i], self.inversion[i], self.leg_class[i],
                   *[col[i] for col in extras])

    def write_csv(self, stream: IO[str]) -> None:
        stream.write(self.header + "\n")
        for row in self.rows():
            stream.write(",".join(x if isinstance(x, str) else repr(x) for x in row))
            stream.write("\n")

    def to_json(self) -> str:
        names = self.header.split(",")
        rows = [dict(zip(names, row)) for row in self.rows()]
        return json.dumps({"sweep_param_name": self.param_name, "rows": rows},
                          indent=2) + "\n"


def cavity_derived(spec: CavitySpec) -> CavityDerived:
    """Free spectral range, finesse and amplitude decay rate of the cavity."""
    c = default_constants().speed_of_light
    fsr = c / spec.round_trip_length / 1e6
    decay = spec.amplitude_decay if spec.amplitude_decay is not None \
        else 0.5 * spec.linewidth_fwhm
    return CavityDerived(fsr=fsr, finesse=fsr / spec.linewidth_fwhm,
                         amplitude_decay=decay)


def power_to_rabi(power_mw: float, calibration: float = DEFAULT_PUMP_CALIBRATION) -> float:
    """Coupling Rabi frequency in MHz from pump power via omega = cal * sqrt(P)."""
    if power_mw < 0:
        raise ValueError("pump power must be >= 0")
    return calibration * math.sqrt(power_mw)


def _intensity_root_approx(rates: RateSet, drive: DriveConfig, decay: float) -> float:
    """Positive root x = (g a)^2 of approx-gain == decay, 0.0 when below threshold.

    Setting the large-pump gain equal to the loss rate k gives a quadratic,
    16 k (1-f) x^2 + (4 k om^2 + 8 g2n gamma_c) x + (k f om^4 - 2 g2n om^2 B) = 0
    with B = gamma_b - 2 f gamma_bc.  Above threshold the constant term is
    negative, so exactly one root is positive; that root is the stable
    branch (gain falls through the loss there).
    """
    om2 = drive.omega**2
    g2n = drive.collective_coupling**2
    bcoef = rates.gamma_b - 2.0 * rates.f * rates.gamma_bc
    qa = 16.0 * decay * (1.0 - rates.f)
    qb = 4.0 * decay * om2 + 8.0 * g2n * rates.gamma_c
    qc = decay * rates.f * om2**2 - 2.0 * g2n * om2 * bcoef
    if qc >= 0.0:
        return 0.0
    if qa == 0.0:   # f == 1, the quadratic degenerates
        return -qc / qb
    x = (-qb + math.sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa)
    # one Newton polish keeps the clamping residual at rounding level
    fx = qa * x * x + qb * x + qc
    dfx = 2.0 * qa * x + qb
    if dfx != 0.0:
        x -= fx / dfx
    return max(x, 0.0)


def steady_intensity(
    rates: RateSet,
    drive: DriveConfig,
    cavity: CavitySpec,
    mode: Literal["strong-pump-approx", "full-model"] = "full-model",
) -> LasingSolution:
    """Solve the gain-clamping condition for the steady lasing intensity.

    ``drive.a`` is ignored; the amplitude is the unknown.  Returns
    ``branch="none"`` with zero intensity when the small-signal gain does
    not reach the cavity decay rate.
    """
    if mode not in ("strong-pump-approx", "full-model"):
        raise ValueError(f"unknown intensity mode {mode!r}")
    decay = cavity_derived(cavity).amplitude_decay
    if drive.omega <= 0:
        return LasingSolution(0.0, 0.0, gain_at_solution=0.0, branch="none")
    small_signal = linear_gain_closed(rates, drive).value
    if small_signal <= decay:
        return LasingSolution(0.0, 0.0, gain_at_solution=small_signal, branch="none")

    if mode == "strong-pump-approx":
        x = _intensity_root_approx(rates, drive, decay)
        if x <= 0.0:
            return LasingSolution(0.0, 0.0, gain_at_solution=small_signal, branch="none")
        amplitude = math.sqrt(x) / drive.g
        gain = saturated_gain_approx(rates, drive.with_amplitude(amplitude))
        return LasingSolution(intensity=amplitude**2, amplitude=amplitude,
                              gain_at_solution=gain, branch="stable")

    def gain_at(a: float) -> float:
        return saturated_gain_full(rates, drive.with_amplitude(a))

    scanned: list[tuple[float, float]] = []
    x_approx = _intensity_root_approx(rates, drive, decay)
    hi = math.sqrt(x_approx) / drive.g * 2.0 if x_approx > 0 \
        else (drive.omega + 1.0) / drive.g
    lo = 0.0
    g_hi = gain_at(hi)
    scanned.append((hi, g_hi))
    expansions = 0
    while g_hi > decay:
        lo, hi = hi, hi * 2.0
        g_hi = gain_at(hi)
        scanned.append((hi, g_hi))
        expansions += 1
        if expansions > 120:
            raise BracketingError(
                "saturated gain stayed above the cavity decay rate over the "
                "scanned amplitude grid (non-monotone gain?)", scanned)
    g_mid = g_hi
    mid = hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        g_mid = gain_at(mid)
        if abs(g_mid - decay) <= GAIN_CLAMP_TOL:
            break
        if g_mid > decay:
            lo = mid
        else:
            hi = mid
    else:
        raise BracketingError(
            "bisection failed to clamp the gain to the cavity decay rate",
            scanned)
    return LasingSolution(intensity=mid * mid, amplitude=mid,
                          gain_at_solution=g_mid, branch="stable")


def lasing_window_omega(
    rates: RateSet,
    drive: DriveConfig,
    cavity: CavitySpec,
    omega_range: tuple[float, float],
    points: int = 240,
) -> list[tuple[float, float]]:
    """Pump-frequency intervals where small-signal gain exceeds cavity loss.

    Scans a log-spaced grid over ``omega_range`` for sign changes of
    (linear gain - amplitude decay) and refines each crossing by bisection
    to 1e-3 MHz in omega.
    """
    lo, hi = omega_range
    if not (0 < lo < hi) or not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("omega_range must be finite, positive and increasing")
    points = max(points, 200)
    decay = cavity_derived(cavity).amplitude_decay

    def excess(om: float) -> float:
        return linear_gain_closed(rates, drive.with_omega(om)).value - decay

    grid = [lo * (hi / lo) ** (i / (points - 1)) for i in range(points)]
    values = [excess(om) for om in grid]

    def refine(a: float, b: float) -> float:
        fa = excess(a)
        for _ in range(200):
            if b - a <= 1e-3:
                break
            m = 0.5 * (a + b)
            fm = excess(m)
            if (fa > 0) == (fm > 0):
                a, fa = m, fm
            else:
                b = m
        return 0.5 * (a + b)

    intervals: list[tuple[float, float]] = []
    start: float | None = grid[0] if values[0] > 0 else None
    for i in range(1, points):
        prev_pos = values[i - 1] > 0
        cur_pos = values[i] > 0
        if cur_pos and not prev_pos:
            start = refine(grid[i - 1], grid[i])
        elif prev_pos and not cur_pos:
            intervals.append((start, refine(grid[i - 1], grid[i])))
            start = None
    if start is not None:
        intervals.append((start, hi))
    return intervals


def threshold_density(
    template: Callable[[float], tuple[RateSet, float]],
    omega: float,
    cavity: CavitySpec,
    density_range: tuple[float, float],
    points: int = 200,
) -> ThresholdResult:
    """Smallest density in range where small-signal gain reaches cavity loss.

    Scan plus bisection to 0.1% relative in N.  A range that is already
    lasing at its lower edge reports ``always-lasing``; one that never
    lases reports ``no-threshold-in-range``.
    """
    lo, hi = density_range
    if not 0 < lo < hi:
        raise ValueError("density_range must be positive and increasing")
    decay = cavity_derived(cavity).amplitude_decay

    def excess(n: float) -> float:
        rates_n, collective_n = template(n)
        drive = DriveConfig.from_collective(omega, 0.0, collective_n, n)
        return linear_gain_closed(rates_n, drive).value - decay

    grid = [lo * (hi / lo) ** (i / (points - 1)) for i in range(points)]
    if excess(grid[0]) >= 0:
        return ThresholdResult(status="always-lasing", density=grid[0])
    bracket = None
    for i in range(1, points):
        if excess(grid[i]) >= 0:
            bracket = (grid[i - 1], grid[i])
            break
    if bracket is None:
        return ThresholdResult(status="no-threshold-in-range", density=None)
    a, b = bracket
    while (b - a) / b > 1e-3:
        m = 0.5 * (a + b)
        if excess(m) >= 0:
            b = m
        else:
            a = m
    return ThresholdResult(status="found", density=0.5 * (a + b))


def _grid(lo: float, hi: float, points: int, spacing: str) -> list[float]:
    if points < 2:
        raise ValueError("a sweep needs at least 2 points")
    if lo >= hi:
        raise ValueError("sweep range must be increasing")
    if spacing == "log":
        if lo <= 0:
            raise ValueError("log spacing needs a positive lower bound")
        return [lo * (hi / lo) ** (i / (points - 1)) for i in range(points)]
    if spacing != "linear":
        raise ValueError(f"unknown spacing {spacing!r}")
    step = (hi - lo) / (points - 1)
    return [lo + step * i for i in range(points)]


def sweep_pump(
    rates: RateSet,
    drive: DriveConfig,
    cavity: CavitySpec,
    power_range: tuple[float, float],
    points: int = 101,
    calibration: float = DEFAULT_PUMP_CALIBRATION,
    spacing: str = "linear",
    mode: Literal["strong-pump-approx", "full-model"] = "full-model",
) -> SweepResult:
    """Threshold curve versus pump power (the x axis of the pump figure).

    Grid points are independent; the table is assembled in grid order so
    identical configuration yields a bit-identical result.
    """
    powers = _grid(power_range[0], power_range[1], points, spacing)
    leg = classify_legs(rates).value
    omegas, gains, intensities, inversions = [], [], [], []
    for p in powers:
        om = power_to_rabi(p, calibration)
        d = drive.with_omega(om)
        omegas.append(om)
        gains.append(linear_gain_closed(rates, d).value)
        inversions.append(inversion_closed(rates, om))
        intensities.append(steady_intensity(rates, d, cavity, mode).intensity)
    return SweepResult(
        param_name="pump_power_mw",
        swept=tuple(powers), omega=tuple(omegas), linear_gain=tuple(gains),
        intensity=tuple(intensities), inversion=tuple(inversions),
        leg_class=(leg,) * len(powers),
    )


def sweep_density(
    template: Callable[[float], tuple[RateSet, float]],
    omega: float,
    cavity: CavitySpec,
    density_range: tuple[float, float],
    points: int = 120,
    spacing: str = "linear",
    mode: Literal["strong-pump-approx", "full-model"] = "full-model",
    od_fn: Callable[[float], float] | None = None,
) -> SweepResult:
    """Threshold-then-saturation curve versus atomic density.

    ``od_fn`` maps density to optical depth; when provided, the table
    gains a trailing ``od`` column after the six contracted ones.
    """
    densities = _grid(density_range[0], density_range[1], points, spacing)
    omegas, gains, intensities, inversions, legs = [], [], [], [], []
    for n in densities:
        rates_n, collective_n = template(n)
        d = DriveConfig.from_collective(omega, 0.0, collective_n, n)
        omegas.append(omega)
        gains.append(linear_gain_closed(rates_n, d).value)
        inversions.append(inversion_closed(rates_n, omega))
        legs.append(classify_legs(rates_n).value)
        intensities.append(steady_intensity(rates_n, d, cavity, mode).intensity)
    extra: tuple = ()
    if od_fn is not None:
        extra = (("od", tuple(od_fn(n) for n in densities)),)
    return SweepResult(
        param_name="n_density_m3",
        swept=tuple(densities), omega=tuple(omegas), linear_gain=tuple(gains),
        intensity=tuple(intensities), inversion=tuple(inversions),
        leg_class=tuple(legs), extra=extra,
    )
