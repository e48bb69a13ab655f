"""Parameter and state types of the three-level lambda model, and the
right-hand side of its equations of motion.

Level scheme: one excited state ``a`` decays (total rate ``gamma_a``,
fraction ``f`` into the lasing ground state ``b``, the rest into ``c``).
A resonant coupling field of Rabi frequency ``omega`` drives ``c <-> a``;
the cavity field of amplitude ``a`` and single-atom coupling ``g`` drives
``b <-> a``.  Depolarizing collisions exchange ground-state population at
rates ``gamma_b`` (b to c) and ``gamma_c`` (c to b).

On two-photon resonance the dynamics close on five real variables:
the populations ``rho_aa`` and ``rho_bb`` (``rho_cc`` follows from closure)
plus the three resonant coherence components ``u = i rho_ab``,
``v = rho_cb`` and ``w = i rho_ca``.

Units: every rate, Rabi frequency and gain in this package is stored in MHz
and treated as one mutually consistent frequency-like unit; only ratios and
products of these quantities enter the gain and threshold formulas, so no
2*pi convention is imposed (see README, "Units").
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = [
    "RateSet",
    "DriveConfig",
    "CoherenceVector",
    "validate_rates",
    "bloch_rhs",
    "rho_cc",
]


@dataclass(frozen=True)
class RateSet:
    """Atomic decay and exchange rates, all in MHz.

    ``gamma_ba`` and ``gamma_ac`` (optical coherence decays) are independent
    inputs; presets default them to ``gamma_a / 2``, the pure radiative
    value, but collisional broadening may add to them in a real vapor.
    """

    gamma_a: float    # total spontaneous decay of the upper level
    gamma_b: float    # collisional population flow b -> c
    gamma_c: float    # collisional population flow c -> b
    gamma_bc: float   # ground-state coherence decay (rho_cb)
    gamma_ba: float   # optical coherence decay (rho_ab)
    gamma_ac: float   # optical coherence decay (rho_ca)
    f: float          # branching fraction of the a decay into b

    def replace(self, **kw) -> "RateSet":
        from dataclasses import replace

        return replace(self, **kw)


@dataclass(frozen=True)
class DriveConfig:
    """Coupling-beam and cavity-field drive parameters.

    ``g`` and ``n_density`` only ever enter the physics through ``g * a``
    and the collective coupling ``g * sqrt(n_density)``; configuration
    normally supplies the collective coupling directly (in MHz) and derives
    ``g`` from it.
    """

    omega: float       # coupling Rabi frequency, MHz
    a: float           # cavity field amplitude, dimensionless
    g: float           # single-atom coupling, MHz per unit amplitude
    n_density: float   # atomic density, m^-3

    def __post_init__(self):
        if self.omega < 0:
            raise ValueError("omega must be >= 0")
        if self.a < 0:
            raise ValueError("a must be >= 0")
        if self.g <= 0:
            raise ValueError("g must be > 0")
        if self.n_density <= 0:
            raise ValueError("n_density must be > 0")

    @property
    def collective_coupling(self) -> float:
        """g * sqrt(N) in MHz, the only combination entering the gain."""
        return self.g * self.n_density**0.5

    @classmethod
    def from_collective(cls, omega: float, a: float, collective_coupling: float,
                        n_density: float) -> "DriveConfig":
        """Build a drive from the collective coupling g*sqrt(N) (MHz)."""
        return cls(omega=omega, a=a, g=collective_coupling / n_density**0.5,
                   n_density=n_density)

    def with_amplitude(self, a: float) -> "DriveConfig":
        return DriveConfig(omega=self.omega, a=a, g=self.g, n_density=self.n_density)

    def with_omega(self, omega: float) -> "DriveConfig":
        return DriveConfig(omega=omega, a=self.a, g=self.g, n_density=self.n_density)


@dataclass(frozen=True)
class CoherenceVector:
    """The five real dynamical variables of the resonant lambda system."""

    rho_aa: float
    rho_bb: float
    u: float   # i rho_ab, real on resonance
    v: float   # rho_cb, real on resonance
    w: float   # i rho_ca, real on resonance

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.rho_aa, self.rho_bb, self.u, self.v, self.w)

    @classmethod
    def from_tuple(cls, y) -> "CoherenceVector":
        return cls(rho_aa=y[0], rho_bb=y[1], u=y[2], v=y[3], w=y[4])


def validate_rates(rates: RateSet) -> list[str]:
    """Return the list of violated RateSet invariants (empty when usable).

    Diagnostic rather than a constructor failure, so sweep drivers can
    report which grid points are unphysical instead of dying on the first.
    Each entry starts with a stable identifier:

    * ``negative-rate:<name>`` for any rate below zero,
    * ``nonpositive-rate:gamma_a`` when the upper level does not decay,
    * ``branching-fraction`` when f is outside [0, 1],
    * ``coherence-floor`` when gamma_bc < (gamma_b + gamma_c) / 2.
    """
    violations: list[str] = []
    for name in ("gamma_a", "gamma_b", "gamma_c", "gamma_bc", "gamma_ba", "gamma_ac"):
        if getattr(rates, name) < 0:
            violations.append(f"negative-rate:{name}")
    if rates.gamma_a <= 0:
        violations.append("nonpositive-rate:gamma_a")
    if not 0.0 <= rates.f <= 1.0:
        violations.append(f"branching-fraction: f={rates.f} outside [0, 1]")
    floor = 0.5 * (rates.gamma_b + rates.gamma_c)
    if rates.gamma_bc < floor:
        violations.append(
            f"coherence-floor: gamma_bc={rates.gamma_bc} < (gamma_b + gamma_c)/2 = {floor}"
        )
    return violations


def _rhs(y, rates: RateSet, ga: float, omega: float):
    """Derivative of (rho_aa, rho_bb, u, v, w); ``ga`` is the product g*a."""
    raa, rbb, u, v, w = y
    half = 0.5 * omega
    return (
        -omega * w + 2.0 * ga * u - rates.gamma_a * raa,
        -2.0 * ga * u + rates.f * rates.gamma_a * raa
        - rates.gamma_b * rbb + rates.gamma_c * (1.0 - raa - rbb),
        -ga * (raa - rbb) + half * v - rates.gamma_ba * u,
        ga * w - half * u - rates.gamma_bc * v,
        -half * (1.0 - rbb - 2.0 * raa) - ga * v - rates.gamma_ac * w,
    )


def bloch_rhs(state: CoherenceVector, rates: RateSet, drive: DriveConfig) -> CoherenceVector:
    """Time derivative of the state under the resonant equations of motion.

    Linear-affine in the state for fixed rates and drive; the constant
    terms come from the gamma_c repopulation and the -omega/2 drive of w.
    """
    d = _rhs(state.as_tuple(), rates, drive.g * drive.a, drive.omega)
    return CoherenceVector.from_tuple(d)


def rho_cc(state: CoherenceVector) -> float:
    """Population of the third level via closure, 1 - rho_aa - rho_bb."""
    return 1.0 - state.rho_aa - state.rho_bb
