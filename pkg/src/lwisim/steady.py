"""Steady states and transients of the lambda-system equations of motion.

The fixed point is computed two independent ways so each can serve as an
oracle for the other:

* :func:`solve_linear_steady` solves the affine system ``M x + k = 0``
  directly (partial-pivot elimination written here, which also lets the
  singular case name the offending pivot), and
* :func:`integrate_to_steady` follows the flow of the equations of motion
  in time until the residual of the hand-written right-hand side is below
  tolerance.

Because the model is linear with constant coefficients, the long-time
integrator advances with the exact propagator of the augmented system
(matrix exponential over doubling time intervals).  An explicit adaptive
Runge-Kutta pair (:func:`integrate_transient`) provides genuine
error-controlled trajectories for the transient scenario; it is far too
slow for the decade-spanning rate ratios the steady-state sweep work
needs, which is why the fixed-point path uses the propagator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np
from scipy.linalg import expm

from .bloch import CoherenceVector, DriveConfig, RateSet, _rhs, rho_cc

__all__ = [
    "AffineSystem",
    "IntegrationReport",
    "StepControl",
    "SingularSystemError",
    "StepSizeUnderflowError",
    "Trajectory",
    "assemble_affine",
    "solve_linear_steady",
    "unpumped_equilibrium",
    "integrate_transient",
    "integrate_to_steady",
    "write_trajectory_csv",
    "TRAJECTORY_CSV_HEADER",
]

STATE_NAMES = ("rho_aa", "rho_bb", "u", "v", "w")

TRAJECTORY_CSV_HEADER = "t_us,rho_aa,rho_bb,rho_cc,i_rho_ab,rho_cb,i_rho_ca"


class SingularSystemError(ValueError):
    """Raised when the steady-state system is singular (degenerate rates)."""

    def __init__(self, variable: str, pivot: float, message: str | None = None):
        self.variable = variable
        self.pivot = pivot
        super().__init__(
            message
            or f"steady-state system is singular: near-zero pivot {pivot:.3e} "
            f"in the '{variable}' column (degenerate rates, e.g. "
            "gamma_b = gamma_c = 0 with omega = a = 0)"
        )


class StepSizeUnderflowError(RuntimeError):
    """Raised when the adaptive step controller cannot make progress."""

    def __init__(self, t: float, h: float):
        self.t = t
        self.h = h
        super().__init__(f"step size underflow at t={t:.6g} (h={h:.3e}); "
                         "stiffness beyond the explicit controller's limits")


@dataclass(frozen=True)
class AffineSystem:
    """Matrix form d(state)/dt = matrix @ state + constant, MHz units."""

    matrix: np.ndarray   # 5x5
    constant: np.ndarray  # 5


@dataclass(frozen=True)
class IntegrationReport:
    """Outcome of a relax-to-steady-state integration."""

    final_state: CoherenceVector
    elapsed_model_time: float   # 1/MHz units (microsecond-equivalent)
    converged: bool
    residual_norm: float        # MHz, 2-norm of the equations of motion


@dataclass(frozen=True)
class StepControl:
    """Tolerances for the explicit adaptive integrator."""

    rtol: float = 1e-9
    atol: float = 1e-12
    h_initial: float | None = None
    max_steps: int = 2_000_000


class Trajectory(list):
    """Time-ordered (t, CoherenceVector) pairs of the accepted steps.

    ``final_residual`` is the 2-norm of the equations of motion at the
    last point, in MHz.
    """

    final_residual: float = math.inf


def assemble_affine(rates: RateSet, drive: DriveConfig) -> AffineSystem:
    """Restate the equations of motion as matrix * state + constant.

    State ordering is (rho_aa, rho_bb, u, v, w).  The only constant terms
    are the gamma_c repopulation of rho_bb and the -omega/2 drive of w.
    """
    ga = drive.g * drive.a
    om = drive.omega
    gaa, gb, gc = rates.gamma_a, rates.gamma_b, rates.gamma_c
    m = np.array([
        [-gaa,               0.0,        2.0 * ga,  0.0,             -om],
        [rates.f * gaa - gc, -(gb + gc), -2.0 * ga, 0.0,             0.0],
        [-ga,                ga,         -rates.gamma_ba, 0.5 * om,  0.0],
        [0.0,                0.0,        -0.5 * om, -rates.gamma_bc, ga],
        [om,                 0.5 * om,   0.0,       -ga,             -rates.gamma_ac],
    ])
    k = np.array([0.0, gc, 0.0, 0.0, -0.5 * om])
    return AffineSystem(matrix=m, constant=k)


def solve_linear_steady(system: AffineSystem) -> CoherenceVector:
    """Fixed point of the affine system, from matrix @ x = -constant.

    Partial-pivot Gaussian elimination; a vanishing pivot raises
    :class:`SingularSystemError` naming the state variable whose row went
    degenerate (report, never regularize).
    """
    n = 5
    aug = [list(map(float, row)) + [-float(c)]
           for row, c in zip(system.matrix, system.constant)]
    scale = max(max(abs(v) for v in row[:n]) for row in aug) or 1.0
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(aug[r][col]))
        if abs(aug[piv][col]) <= 1e-14 * scale:
            raise SingularSystemError(STATE_NAMES[col], aug[piv][col])
        if piv != col:
            aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1.0 / aug[col][col]
        for r in range(col + 1, n):
            factor = aug[r][col] * inv
            if factor != 0.0:
                for c in range(col, n + 1):
                    aug[r][c] -= factor * aug[col][c]
    x = [0.0] * n
    for r in range(n - 1, -1, -1):
        acc = aug[r][n]
        for c in range(r + 1, n):
            acc -= aug[r][c] * x[c]
        x[r] = acc / aug[r][r]

    residual = system.matrix @ np.asarray(x) + system.constant
    res_norm = float(np.linalg.norm(residual))
    if res_norm > 1e-10:
        raise SingularSystemError(
            "residual", res_norm,
            f"steady-state solve left residual {res_norm:.3e} MHz "
            "(> 1e-10): system is numerically near-singular",
        )
    return CoherenceVector.from_tuple(x)


def unpumped_equilibrium(rates: RateSet) -> CoherenceVector:
    """Collisional equilibrium with all fields off.

    rho_bb = gamma_c / (gamma_b + gamma_c) and everything else zero; with
    no population exchange at all the split is taken as one half.
    """
    total = rates.gamma_b + rates.gamma_c
    rbb = rates.gamma_c / total if total > 0 else 0.5
    return CoherenceVector(rho_aa=0.0, rho_bb=rbb, u=0.0, v=0.0, w=0.0)


def _residual_norm(y, rates: RateSet, ga: float, omega: float) -> float:
    d = _rhs(y, rates, ga, omega)
    return math.sqrt(sum(v * v for v in d))


# Dormand-Prince 5(4) tableau.  Fifth-order solution is propagated; the
# embedded fourth-order difference drives the step controller.  FSAL: the
# seventh stage of an accepted step is the first stage of the next.
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_ERR = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def integrate_transient(
    rates: RateSet,
    drive: DriveConfig,
    initial: CoherenceVector,
    t_final: float,
    control: StepControl = StepControl(),
) -> Trajectory:
    """Error-controlled trajectory of the equations of motion.

    Returns every accepted step as (t, state), starting with the initial
    condition at t = 0 and ending exactly at ``t_final``; the residual at
    the final point is reported on the result.  Local error per step is
    bounded by ``control.rtol`` / ``control.atol``.
    """
    if t_final <= 0:
        raise ValueError("t_final must be > 0")
    ga = drive.g * drive.a
    om = drive.omega
    y = initial.as_tuple()
    t = 0.0
    out = Trajectory([(0.0, initial)])

    k = [None] * 7
    k[0] = _rhs(y, rates, ga, om)
    if control.h_initial is not None:
        h = control.h_initial
    else:
        # conservative start: a fraction of the fastest apparent timescale
        speed = max(max(abs(v) for v in k[0]), 1e-12)
        h = min(t_final, 0.01 * (1.0 + max(abs(v) for v in y)) / speed, 1.0)

    steps = 0
    while t < t_final:
        if steps >= control.max_steps:
            raise StepSizeUnderflowError(t, h)
        steps += 1
        final_step = h >= t_final - t
        if final_step:
            h = t_final - t
        elif h < 1e-14 * max(1.0, abs(t)):
            raise StepSizeUnderflowError(t, h)

        for i in range(1, 7):
            coeffs = _DP_A[i]
            yi = tuple(
                y[j] + h * sum(coeffs[m] * k[m][j] for m in range(i))
                for j in range(5)
            )
            k[i] = _rhs(yi, rates, ga, om)
        y_new = yi  # seventh stage is evaluated at the fifth-order solution

        err = 0.0
        for j in range(5):
            e = h * sum(_DP_ERR[m] * k[m][j] for m in range(7))
            sc = control.atol + control.rtol * max(abs(y[j]), abs(y_new[j]))
            err += (e / sc) ** 2
        err = math.sqrt(err / 5.0)

        if err <= 1.0:
            t = t_final if final_step else t + h
            y = y_new
            k[0] = k[6]  # FSAL
            out.append((t, CoherenceVector.from_tuple(y)))
        factor = 0.9 * (err ** -0.2) if err > 0 else 5.0
        h *= min(5.0, max(0.2, factor))
    out.final_residual = _residual_norm(y, rates, ga, om)
    return out


def integrate_to_steady(
    rates: RateSet,
    drive: DriveConfig,
    tolerance: float = 1e-10,
    t_max: float = 1e9,
) -> IntegrationReport:
    """Relax from the unpumped equilibrium until the motion stops.

    Advances the state with the exact propagator of the augmented linear
    system over doubling time intervals and checks the 2-norm of the
    hand-written right-hand side after each hop.  Non-convergence within
    ``t_max`` is a reported state (``converged=False``), not a failure.
    """
    system = assemble_affine(rates, drive)
    ga = drive.g * drive.a
    om = drive.omega

    y = np.array(unpumped_equilibrium(rates).as_tuple())
    t = 0.0
    res = _residual_norm(tuple(y), rates, ga, om)

    # augmented generator: d/dt (x, 1) = [[M, k], [0, 0]] (x, 1)
    gen = np.zeros((6, 6))
    gen[:5, :5] = system.matrix
    gen[:5, 5] = system.constant

    norm = float(np.max(np.abs(system.matrix))) + float(np.max(np.abs(system.constant)))
    h = 0.1 / max(norm, 1e-12)
    while res > tolerance and t < t_max:
        h = min(h, t_max - t)
        prop = expm(gen * h)
        y = prop[:5, :5] @ y + prop[:5, 5]
        t += h
        res = _residual_norm(tuple(y), rates, ga, om)
        h *= 2.0
    return IntegrationReport(
        final_state=CoherenceVector.from_tuple(tuple(float(v) for v in y)),
        elapsed_model_time=t,
        converged=res <= tolerance,
        residual_norm=res,
    )


def write_trajectory_csv(trajectory: Sequence[tuple[float, CoherenceVector]],
                         stream: IO[str]) -> None:
    """Write a trajectory in the exchange format (time in 1/MHz units)."""
    stream.write(TRAJECTORY_CSV_HEADER + "\n")
    for t, s in trajectory:
        stream.write(
            f"{t!r},{s.rho_aa!r},{s.rho_bb!r},{rho_cc(s)!r},{s.u!r},{s.v!r},{s.w!r}\n"
        )
