"""Gain clamping, lasing windows, thresholds and the sweep engine."""

from __future__ import annotations

import numpy as np
import pytest

from lwisim import (
    CavitySpec,
    DEFAULT_PUMP_CALIBRATION,
    DriveConfig,
    cavity_derived,
    density_template,
    lasing_window_omega,
    linear_gain_closed,
    power_to_rabi,
    saturated_gain_approx,
    steady_intensity,
    sweep_density,
    sweep_pump,
    threshold_density,
)
from lwisim.cavity import SWEEP_CSV_HEADER

from conftest import PRESET_COLLECTIVE, PRESET_DENSITY, PRESET_RATES

# Frozen regression: lasing window of the preset over (0.05, 2000) MHz,
# computed by this implementation (bisection tolerance 1e-3 MHz).
WINDOW_LO = 0.6111
WINDOW_HI = 189.455


def _drive(omega=160.0):
    return DriveConfig.from_collective(omega, 0.0, PRESET_COLLECTIVE, PRESET_DENSITY)


class TestCavityDerived:
    def test_fsr(self, preset_cavity):
        got = cavity_derived(preset_cavity)
        assert got.fsr == pytest.approx(299792458.0 / 0.37 / 1e6, rel=1e-12)

    def test_finesse_near_48(self, preset_cavity):
        got = cavity_derived(preset_cavity)
        assert got.finesse == pytest.approx(48.0, rel=0.05)

    def test_amplitude_decay_is_half_linewidth(self, preset_cavity):
        assert cavity_derived(preset_cavity).amplitude_decay == 8.5

    def test_explicit_decay_override(self):
        spec = CavitySpec(0.37, 0.03, 0.014, 17.0, amplitude_decay=4.0)
        assert cavity_derived(spec).amplitude_decay == 4.0


class TestPowerToRabi:
    def test_calibration_point(self):
        assert power_to_rabi(21.8) == pytest.approx(148.0, abs=1e-9)

    def test_25_mw_near_quoted_156(self):
        assert power_to_rabi(25.0) == pytest.approx(156.0, rel=0.02)

    def test_zero_power(self):
        assert power_to_rabi(0.0) == 0.0

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            power_to_rabi(-1.0)


class TestSteadyIntensity:
    def test_below_threshold_branch_none(self, preset_cavity):
        # at 200 MHz the preset linear gain (7.63) is under the 8.5 loss
        sol = steady_intensity(PRESET_RATES, _drive(200.0), preset_cavity)
        assert sol.branch == "none" and sol.intensity == 0.0
        assert sol.gain_at_solution < 8.5

    def test_approx_root_satisfies_defining_equation(self, preset_cavity):
        sol = steady_intensity(PRESET_RATES, _drive(160.0), preset_cavity,
                               mode="strong-pump-approx")
        assert sol.branch == "stable"
        r = PRESET_RATES
        om2 = 160.0**2
        g2n = PRESET_COLLECTIVE**2
        x = (sol.amplitude * _drive().g) ** 2
        lhs = 2 * g2n * (om2 * (r.gamma_b - 2 * r.f * r.gamma_bc) - 4 * x * r.gamma_c)
        rhs = 8.5 * (r.f * om2**2 + 4 * x * om2 + 16 * x**2 * (1 - r.f))
        assert abs(lhs - rhs) <= 1e-9 * max(abs(lhs), abs(rhs))

    def test_gain_clamped_at_solution(self, preset_cavity):
        for mode in ("full-model", "strong-pump-approx"):
            sol = steady_intensity(PRESET_RATES, _drive(160.0), preset_cavity, mode)
            assert sol.branch == "stable"
            assert abs(sol.gain_at_solution - 8.5) <= 1e-6

    def test_modes_agree_within_frozen_bound(self, preset_cavity):
        """Frozen: intensities from the approximation and the full model
        agree within 50% at strong pump (measured: about 5% mid-branch)."""
        for omega in (145.0, 156.0, 160.0, 175.0):
            full = steady_intensity(PRESET_RATES, _drive(omega), preset_cavity,
                                    "full-model")
            approx = steady_intensity(PRESET_RATES, _drive(omega), preset_cavity,
                                   "strong-pump-approx")
            assert full.branch == approx.branch == "stable"
            assert abs(approx.intensity - full.intensity) / full.intensity <= 0.50

    def test_approx_gain_at_clamp(self, preset_cavity):
        sol = steady_intensity(PRESET_RATES, _drive(160.0), preset_cavity,
                               mode="strong-pump-approx")
        drive = _drive(160.0).with_amplitude(sol.amplitude)
        assert saturated_gain_approx(PRESET_RATES, drive) == pytest.approx(8.5, abs=1e-6)

    def test_zero_pump_never_lases(self, preset_cavity):
        sol = steady_intensity(PRESET_RATES, _drive(0.0), preset_cavity)
        assert sol.branch == "none" and sol.intensity == 0.0


class TestLasingWindow:
    def test_preset_window_regression(self, preset_cavity):
        windows = lasing_window_omega(PRESET_RATES, _drive(), preset_cavity,
                                      (0.05, 2000.0))
        assert len(windows) == 1
        lo, hi = windows[0]
        assert lo == pytest.approx(WINDOW_LO, abs=5e-3)
        assert hi == pytest.approx(WINDOW_HI, abs=5e-2)

    def test_wrong_branching_never_lases(self, preset_cavity):
        rates = PRESET_RATES.replace(f=0.6)   # gamma_b < 2 f gamma_bc
        assert lasing_window_omega(rates, _drive(), preset_cavity,
                                   (0.05, 2000.0)) == []

    def test_lower_edge_decreases_with_loss(self):
        """Weaker loss means an earlier threshold.  At the preset coupling
        the gain rises through threshold so steeply that the shift hides
        below the 1e-3 MHz refinement, so the strict check runs at a small
        collective coupling where the edge sits on the shallow part."""
        weak = DriveConfig.from_collective(160.0, 0.0, 30.0, PRESET_DENSITY)
        edges = []
        for decay in (2.0, 1.0, 0.5, 0.25):
            spec = CavitySpec(0.37, 0.03, 0.014, 17.0, amplitude_decay=decay)
            windows = lasing_window_omega(PRESET_RATES, weak, spec, (0.05, 2000.0))
            edges.append(windows[0][0])
        assert all(b < a for a, b in zip(edges, edges[1:]))
        # preset coupling: non-increasing within the refinement tolerance
        preset_edges = []
        for decay in (8.5, 4.0, 2.0):
            spec = CavitySpec(0.37, 0.03, 0.014, 17.0, amplitude_decay=decay)
            windows = lasing_window_omega(PRESET_RATES, _drive(), spec, (0.05, 2000.0))
            preset_edges.append(windows[0][0])
        assert all(b <= a + 2e-3 for a, b in zip(preset_edges, preset_edges[1:]))

    def test_threshold_consistency_with_intensity_solver(self, preset_cavity):
        """branch == none exactly when omega lies outside the window,
        probed on a grid kept 1e-3 MHz away from the refined edges."""
        (lo, hi), = lasing_window_omega(PRESET_RATES, _drive(), preset_cavity,
                                        (0.05, 2000.0))
        probes = list(np.linspace(0.06, lo - 1e-3, 7)) + \
            list(np.linspace(lo + 1e-3, hi - 1e-3, 25)) + \
            list(np.linspace(hi + 1e-3, 1000.0, 7))
        for omega in probes:
            sol = steady_intensity(PRESET_RATES, _drive(float(omega)), preset_cavity)
            inside = lo + 1e-3 <= omega <= hi - 1e-3
            assert (sol.branch == "stable") == inside

    def test_monotone_onset_above_lower_edge(self, preset_cavity):
        (lo, _), = lasing_window_omega(PRESET_RATES, _drive(), preset_cavity,
                                       (0.05, 2000.0))
        intensities = [
            steady_intensity(PRESET_RATES, _drive(float(om)), preset_cavity).intensity
            for om in np.linspace(lo + 1e-3, 1.5 * lo, 20)
        ]
        assert all(b >= a for a, b in zip(intensities, intensities[1:]))

    def test_range_validation(self, preset_cavity):
        with pytest.raises(ValueError):
            lasing_window_omega(PRESET_RATES, _drive(), preset_cavity, (-1.0, 10.0))


class TestThresholdDensity:
    def test_preset_threshold_below_od326_density(self, preset_cavity):
        template = density_template(PRESET_DENSITY, PRESET_RATES, PRESET_COLLECTIVE)
        got = threshold_density(template, 156.0, preset_cavity, (2e17, 6e18))
        assert got.status == "found"
        assert got.density < 5.85e18   # the density reached at 103 C

    def test_halved_loss_scales_threshold_by_inverse_sqrt2(self, preset_cavity):
        """Gain scales as N^2 at fixed pump (both the squared collective
        coupling and the exchange rate are linear in N), so halving the
        loss moves the threshold down by 1/sqrt(2)."""
        template = density_template(PRESET_DENSITY, PRESET_RATES, PRESET_COLLECTIVE)
        full = threshold_density(template, 156.0, preset_cavity, (2e17, 6e18))
        halved_cavity = CavitySpec(0.37, 0.03, 0.014, 17.0, amplitude_decay=4.25)
        halved = threshold_density(template, 156.0, halved_cavity, (2e17, 6e18))
        assert halved.density / full.density == pytest.approx(2**-0.5, rel=0.03)

    def test_no_repopulation_no_threshold(self, preset_cavity):
        rates = PRESET_RATES.replace(gamma_b=0.0, gamma_bc=0.0065)
        template = density_template(PRESET_DENSITY, rates, PRESET_COLLECTIVE)
        got = threshold_density(template, 156.0, preset_cavity, (2e17, 6e18))
        assert got.status == "no-threshold-in-range" and got.density is None

    def test_always_lasing_status(self, preset_cavity):
        template = density_template(PRESET_DENSITY, PRESET_RATES, PRESET_COLLECTIVE)
        got = threshold_density(template, 156.0, preset_cavity, (4e18, 6e18))
        assert got.status == "always-lasing"


class TestSweeps:
    def test_pump_sweep_shape(self, preset_cavity):
        result = sweep_pump(PRESET_RATES, _drive(), preset_cavity, (0.0, 50.0),
                            points=51)
        intens = result.intensity
        assert intens[0] == 0.0
        peak = max(range(len(intens)), key=lambda i: intens[i])
        assert 0 < peak < len(intens) - 1
        after = intens[peak:]
        assert all(b <= a for a, b in zip(after, after[1:]))

    def test_pump_sweep_subthreshold_is_all_zero(self, preset_cavity):
        # the whole range sits below the omega window's lower edge
        result = sweep_pump(PRESET_RATES, _drive(), preset_cavity, (0.0, 2e-4),
                            points=5)
        assert all(v == 0.0 for v in result.intensity)

    def test_calibration_doubling_compresses_power_axis(self, preset_cavity):
        cal = DEFAULT_PUMP_CALIBRATION
        compressed = sweep_pump(PRESET_RATES, _drive(), preset_cavity,
                                (0.0, 12.5), points=26, calibration=2 * cal)
        reference = sweep_pump(PRESET_RATES, _drive(), preset_cavity,
                               (0.0, 50.0), points=26, calibration=cal)
        for a, b in zip(compressed.omega, reference.omega):
            assert a == pytest.approx(b, rel=1e-12)
        for a, b in zip(compressed.intensity, reference.intensity):
            assert a == pytest.approx(b, rel=1e-9, abs=1e-12)

    def test_density_sweep_shape_and_od_column(self, preset_cavity):
        template = density_template(PRESET_DENSITY, PRESET_RATES, PRESET_COLLECTIVE)
        result = sweep_density(template, 156.0, preset_cavity,
                               (5e17, 5.84343818411911e18), points=40,
                               od_fn=lambda n: n / 1e16)
        assert result.header == SWEEP_CSV_HEADER + ",od"
        intens = result.intensity
        assert intens[0] == 0.0 and intens[-1] > 0.0
        positive = [v for v in intens if v > 0]
        assert all(b >= a for a, b in zip(positive, positive[1:]))

    def test_density_sweep_modes_consistent(self, preset_cavity):
        template = density_template(PRESET_DENSITY, PRESET_RATES, PRESET_COLLECTIVE)
        kw = dict(omega=156.0, cavity=preset_cavity,
                  density_range=(2.4e18, 5.8e18), points=8)
        full = sweep_density(template, mode="full-model", **kw)
        approx = sweep_density(template, mode="strong-pump-approx", **kw)
        for a, b in zip(full.intensity, approx.intensity):
            assert b == pytest.approx(a, rel=0.50)

    def test_sweep_is_deterministic(self, preset_cavity):
        a = sweep_pump(PRESET_RATES, _drive(), preset_cavity, (0.0, 50.0), points=21)
        b = sweep_pump(PRESET_RATES, _drive(), preset_cavity, (0.0, 50.0), points=21)
        assert a == b

    def test_csv_header_contract(self, preset_cavity):
        import io

        result = sweep_pump(PRESET_RATES, _drive(), preset_cavity, (0.0, 50.0),
                            points=11)
        buf = io.StringIO()
        result.write_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "sweep_param,omega_mhz,linear_gain_mhz,intensity,inversion,leg_class"
        assert len(lines) == 12

    def test_gain_column_matches_closed_form(self, preset_cavity):
        result = sweep_pump(PRESET_RATES, _drive(), preset_cavity, (0.0, 50.0),
                            points=11)
        for power, omega, gain in zip(result.swept, result.omega, result.linear_gain):
            assert omega == pytest.approx(power_to_rabi(power), rel=1e-12)
            assert gain == linear_gain_closed(PRESET_RATES, _drive(omega)).value
