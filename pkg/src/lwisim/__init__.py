"""lwisim: steady-state gain, inversion and cavity-threshold calculations
for a three-level lambda medium whose ground states are coupled by
depolarizing collisions, driven by a single resonant coupling beam inside
an optical ring cavity.

See README.md for the physics conventions (every rate and Rabi frequency
in MHz) and the command-line interface.
"""

from .bloch import (
    CoherenceVector,
    DriveConfig,
    RateSet,
    bloch_rhs,
    rho_cc,
    validate_rates,
)
from .cavity import (
    BracketingError,
    CavityDerived,
    CavitySpec,
    DEFAULT_PUMP_CALIBRATION,
    LasingSolution,
    SweepResult,
    ThresholdResult,
    cavity_derived,
    lasing_window_omega,
    power_to_rabi,
    steady_intensity,
    sweep_density,
    sweep_pump,
    threshold_density,
)
from .config import ConfigError, RunConfig, parse_config
from .constants import ConstantsTable, default_constants, load_constants
from .gain import (
    GainBreakdown,
    LegClassification,
    LegExclusivityError,
    ProbeConvergenceError,
    classify_legs,
    inversion_closed,
    linear_gain_closed,
    linear_gain_numeric,
    rough_gain,
    saturated_gain_approx,
    saturated_gain_full,
)
from .steady import (
    AffineSystem,
    IntegrationReport,
    SingularSystemError,
    StepControl,
    StepSizeUnderflowError,
    Trajectory,
    assemble_affine,
    integrate_to_steady,
    integrate_transient,
    solve_linear_steady,
    unpumped_equilibrium,
)
from .vapor import (
    CollisionModel,
    VaporConditions,
    VelocityConvention,
    collision_rate,
    density_template,
    doppler_fwhm,
    optical_depth,
    temperature_for_density,
    thermal_velocity,
    vapor_density,
)

__version__ = "0.1.0"
