"""Closed-form gain and inversion of the collision-coupled lambda medium,
plus numerical gain extraction from steady states.

Sign and normalization convention: the gain seen by the cavity field is
``G = -(g sqrt(N))^2 * u_ss / (g a)`` with ``u = i rho_ab``.  This is the
coefficient of ``a`` in the medium polarization source term and is pinned
by its zero-pump collapse, where it must equal the plain two-level
absorption of the rho_bb population,

    G(omega=0) = -g^2 N * gamma_c / (gamma_ba * (gamma_b + gamma_c)).

The closed forms and the steady-state extraction are implemented as two
independent routes and the test suite holds them to 1e-6 relative
agreement; neither is ever adjusted to match the other.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .bloch import DriveConfig, RateSet
from .steady import assemble_affine, solve_linear_steady

__all__ = [
    "GainBreakdown",
    "LegClassification",
    "LegExclusivityError",
    "ProbeConvergenceError",
    "linear_gain_closed",
    "linear_gain_numeric",
    "rough_gain",
    "inversion_closed",
    "saturated_gain_full",
    "saturated_gain_approx",
    "classify_legs",
]


class ProbeConvergenceError(RuntimeError):
    """Probe-amplitude extrapolation failed to become amplitude-independent."""


class LegExclusivityError(AssertionError):
    """Both leg-gain conditions held at once, which the coherence floor forbids."""


@dataclass(frozen=True)
class GainBreakdown:
    """Linear gain with its numerator and denominator exposed separately.

    Threshold searches reason about sign changes through ``numerator``
    and ``omega2_coefficient`` directly, without cancellation noise from
    the assembled quotient.
    """

    value: float               # MHz
    numerator: float
    denominator: float
    omega2_coefficient: float  # coefficient of omega^2 inside the numerator


class LegClassification(enum.Enum):
    """Which leg of the lambda system can show large-pump gain, if any."""

    GAIN_ON_THIS_LEG = "gain-on-this-leg"
    GAIN_ON_SWAPPED_LEG = "gain-on-swapped-leg"
    NO_GAIN_EITHER_LEG = "no-gain-either-leg"


def linear_gain_closed(rates: RateSet, drive: DriveConfig) -> GainBreakdown:
    """Closed-form small-signal gain at cavity amplitude a -> 0, in MHz."""
    om2 = drive.omega**2
    g2n = drive.collective_coupling**2
    coeff = (rates.gamma_a * (rates.gamma_b - 2.0 * rates.f * rates.gamma_bc)
             + 2.0 * rates.gamma_bc * (rates.gamma_b - rates.gamma_c))
    numerator = om2 * coeff - 4.0 * rates.gamma_a * rates.gamma_ac * rates.gamma_bc * rates.gamma_c
    denominator = (
        (om2 + 4.0 * rates.gamma_ba * rates.gamma_bc)
        * (om2 * (rates.f * rates.gamma_a + 2.0 * rates.gamma_b + rates.gamma_c)
           + 2.0 * rates.gamma_a * rates.gamma_ac * (rates.gamma_b + rates.gamma_c))
    )
    return GainBreakdown(
        value=2.0 * g2n * numerator / denominator,
        numerator=numerator,
        denominator=denominator,
        omega2_coefficient=coeff,
    )


def _gain_at_amplitude(rates: RateSet, drive: DriveConfig, a: float) -> float:
    state = solve_linear_steady(assemble_affine(rates, drive.with_amplitude(a)))
    g2n = drive.collective_coupling**2
    return -g2n * state.u / (drive.g * a)


def linear_gain_numeric(
    rates: RateSet,
    drive: DriveConfig,
    probe_amplitude: float | None = None,
    agreement_tol: float = 1e-4,
) -> float:
    """Small-signal gain extracted from steady states at a weak probe.

    Evaluates the steady-state gain at probe amplitudes ``eps`` and
    ``eps/2`` and halves ``eps`` until the pair agrees to
    ``agreement_tol`` relative; the returned value is the stride-halved
    extrapolant of that pair (the gain is even in the probe, so this
    removes the leading quadratic saturation bias).  Entirely independent
    of :func:`linear_gain_closed`, which it cross-checks.
    """
    if probe_amplitude is None:
        eps = 1e-6 / drive.g   # g * eps = 1e-6 MHz, far below every rate scale
    else:
        eps = probe_amplitude
    g_hi = _gain_at_amplitude(rates, drive, eps)
    for _ in range(60):
        g_lo = _gain_at_amplitude(rates, drive, 0.5 * eps)
        scale = max(abs(g_lo), 1e-300)
        if abs(g_hi - g_lo) <= agreement_tol * scale:
            return (4.0 * g_lo - g_hi) / 3.0
        eps *= 0.5
        g_hi = g_lo
        if drive.g * eps < 1e-280:
            break
    raise ProbeConvergenceError(
        "linear gain never became probe-independent before amplitude "
        f"underflow (rates={rates}, omega={drive.omega})"
    )


def rough_gain(rates: RateSet, drive: DriveConfig) -> float:
    """Order-of-magnitude gain 2 g^2 N gamma_b / omega^2 for dominant pump."""
    if drive.omega <= 0:
        raise ValueError("rough gain estimate needs omega > 0")
    return 2.0 * drive.collective_coupling**2 * rates.gamma_b / drive.omega**2


def inversion_closed(rates: RateSet, omega: float) -> float:
    """Steady-state population inversion rho_aa - rho_bb at a -> 0."""
    om2 = omega**2
    num = (2.0 * rates.gamma_a * rates.gamma_c * rates.gamma_ac
           + om2 * (rates.f * rates.gamma_a + rates.gamma_c - rates.gamma_b))
    den = (2.0 * rates.gamma_a * rates.gamma_ac * (rates.gamma_b + rates.gamma_c)
           + om2 * (rates.f * rates.gamma_a + 2.0 * rates.gamma_b + rates.gamma_c))
    return -num / den


def saturated_gain_full(rates: RateSet, drive: DriveConfig) -> float:
    """Gain at finite cavity amplitude from the full steady state, in MHz."""
    if drive.a <= 0:
        raise ValueError("saturated_gain_full needs a > 0; "
                         "use linear_gain_closed for the a -> 0 limit")
    return _gain_at_amplitude(rates, drive, drive.a)


def saturated_gain_approx(rates: RateSet, drive: DriveConfig) -> float:
    """Large-pump approximation to the saturated gain, in MHz.

    Valid when the pump dominates every decay rate and the pump cycle
    f*gamma_a dominates the collision rates; see the regression bounds in
    the test suite for the measured accuracy envelope.
    """
    if drive.omega <= 0:
        raise ValueError("saturated gain approximation needs omega > 0")
    om2 = drive.omega**2
    x = (drive.g * drive.a) ** 2
    g2n = drive.collective_coupling**2
    num = om2 * (rates.gamma_b - 2.0 * rates.f * rates.gamma_bc) - 4.0 * x * rates.gamma_c
    den = rates.f * om2**2 + 4.0 * x * om2 + 16.0 * x**2 * (1.0 - rates.f)
    return 2.0 * g2n * num / den


def classify_legs(rates: RateSet) -> LegClassification:
    """Decide which lasing leg, if either, admits gain at large pump.

    Gain on the driven configuration needs gamma_b > 2 f gamma_bc; with the
    roles of the ground states swapped the condition becomes
    gamma_c > 2 (1 - f) gamma_bc.  The coherence-floor inequality makes the
    two mutually exclusive, and this classifier asserts that exclusivity.
    """
    this_leg = rates.gamma_b > 2.0 * rates.f * rates.gamma_bc
    swapped = rates.gamma_c > 2.0 * (1.0 - rates.f) * rates.gamma_bc
    if this_leg and swapped:
        raise LegExclusivityError(
            "both leg-gain conditions hold; the coherence floor "
            "gamma_bc >= (gamma_b + gamma_c)/2 must have been violated "
            f"({rates})"
        )
    if this_leg:
        return LegClassification.GAIN_ON_THIS_LEG
    if swapped:
        return LegClassification.GAIN_ON_SWAPPED_LEG
    return LegClassification.NO_GAIN_EITHER_LEG
