//! Pump envelope, phase mismatches and the phase-modulator model.
//!
//! Geometry convention for both two-section devices: two poled PDC sections
//! of length `L` separated by a gap of length `l`. The phase modulator
//! occupies half of the gap, so the total gap propagation phase is
//! Δβ·l/2 + Δβ′·l/2 with Δβ′l/2 = Δβl/2 + φ·(δk ratio).

use crate::constants::TWO_PI;
use crate::dispersion::{DispersionModel, Polarization};
use crate::error::{Result, SimError};
use serde::{Deserialize, Serialize};

/// Device layout variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignVariant {
    /// Two identical poled sections, no polarization converter.
    NonCompensated,
    /// Polarization converter between the sections cancels the group-velocity
    /// walk-off at first order.
    Compensated,
    /// One poled section; the shot-noise reference device.
    SingleSection,
}

/// Pump regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PumpRegime {
    /// Gaussian pulse of duration τ (seconds).
    Pulsed { duration: f64 },
    /// Continuous wave; handled by the reduced one-dimensional builder.
    Cw,
}

/// Pump laser description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpSpec {
    pub omega_p: f64,
    pub regime: PumpRegime,
}

impl PumpSpec {
    /// `omega_p` and `omega_p/2` must sit inside the dispersion window; a
    /// pulsed pump needs τ > 0.
    pub fn new(omega_p: f64, regime: PumpRegime, model: &DispersionModel) -> Result<Self> {
        for omega in [omega_p, omega_p / 2.0] {
            if !model.contains(omega) {
                let (min, max) = model.window();
                return Err(SimError::OutOfWindow { omega, min, max });
            }
        }
        if let PumpRegime::Pulsed { duration } = regime {
            if !(duration > 0.0) {
                return Err(SimError::Config("pulse duration must be positive".into()));
            }
        }
        Ok(Self { omega_p, regime })
    }

    pub fn half(&self) -> f64 {
        self.omega_p / 2.0
    }
}

/// Phase modulator: applied phase φ plus an optional linear chirp of the
/// wavevector-shift ratio around the degenerate frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulatorSpec {
    /// Canonicalized to [0, 2π).
    pub phi: f64,
    /// d[δk_e(ω)/δk_e(ω_p/2)]/dω in s/rad; the default 0 keeps the ratio at 1.
    pub chirp_slope: f64,
}

impl ModulatorSpec {
    pub fn new(phi: f64, chirp_slope: f64) -> Result<Self> {
        if !chirp_slope.is_finite() || !phi.is_finite() {
            return Err(SimError::Config("modulator parameters must be finite".into()));
        }
        Ok(Self {
            phi: phi.rem_euclid(TWO_PI),
            chirp_slope,
        })
    }

    /// Phase imparted to an idler photon at `omega_i`:
    /// φ·(1 + chirp·(ω_i − ω_p/2)).
    pub fn phase_at(&self, omega_i: f64, half_pump: f64) -> f64 {
        self.phi * (1.0 + self.chirp_slope * (omega_i - half_pump))
    }
}

/// PDC section length, gap length and poling period (metres).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceGeometry {
    pub pdc_length: f64,
    pub gap_length: f64,
    pub poling_period: f64,
    pub variant: DesignVariant,
}

impl DeviceGeometry {
    pub fn new(
        pdc_length: f64,
        gap_length: f64,
        poling_period: f64,
        variant: DesignVariant,
    ) -> Result<Self> {
        if !(pdc_length > 0.0) {
            return Err(SimError::Config("PDC section length must be > 0".into()));
        }
        if !(gap_length >= 0.0) {
            return Err(SimError::Config("gap length must be >= 0".into()));
        }
        if !(poling_period > 0.0) {
            return Err(SimError::Config("poling period must be > 0".into()));
        }
        Ok(Self {
            pdc_length,
            gap_length,
            poling_period,
            variant,
        })
    }
}

/// Gaussian pump envelope α = exp(−(ω_s+ω_i−ω_p)²τ²/2); real-valued in (0, 1].
pub fn pump_envelope(pump: &PumpSpec, omega_s: f64, omega_i: f64) -> Result<f64> {
    match pump.regime {
        PumpRegime::Pulsed { duration } => {
            let detuning = (omega_s + omega_i - pump.omega_p) * duration;
            Ok((-0.5 * detuning * detuning).exp())
        }
        PumpRegime::Cw => Err(SimError::CwRegime),
    }
}

/// Type-II mismatch Δβ = k_o(ω_s+ω_i) − k_o(ω_s) − k_e(ω_i) + 2π/Λ.
///
/// The pump wavevector is evaluated at ω_s+ω_i (energy conservation inside
/// the envelope); for a CW pump the two conventions coincide.
pub fn delta_beta(
    model: &DispersionModel,
    poling_period: f64,
    omega_s: f64,
    omega_i: f64,
) -> Result<f64> {
    Ok(model.wavevector(Polarization::Ordinary, omega_s + omega_i)?
        - model.wavevector(Polarization::Ordinary, omega_s)?
        - model.wavevector(Polarization::Extraordinary, omega_i)?
        + TWO_PI / poling_period)
}

/// Mismatch after the polarization switch:
/// Δβ̄ = k_o(ω_s+ω_i) − k_e(ω_s) − k_o(ω_i) + 2π/Λ.
pub fn delta_beta_bar(
    model: &DispersionModel,
    poling_period: f64,
    omega_s: f64,
    omega_i: f64,
) -> Result<f64> {
    Ok(model.wavevector(Polarization::Ordinary, omega_s + omega_i)?
        - model.wavevector(Polarization::Extraordinary, omega_s)?
        - model.wavevector(Polarization::Ordinary, omega_i)?
        + TWO_PI / poling_period)
}

/// Modulator phase for an idler at `omega_i` (see [`ModulatorSpec::phase_at`]).
pub fn modulator_phase(modulator: &ModulatorSpec, omega_i: f64, half_pump: f64) -> f64 {
    modulator.phase_at(omega_i, half_pump)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::wavelength_to_omega;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn model() -> DispersionModel {
        DispersionModel::ktp_waveguide()
    }

    fn pulsed_pump(tau: f64) -> PumpSpec {
        PumpSpec::new(
            wavelength_to_omega(766e-9),
            PumpRegime::Pulsed { duration: tau },
            &model(),
        )
        .unwrap()
    }

    #[test]
    fn envelope_peaks_on_energy_conservation() {
        let pump = pulsed_pump(0.35e-12);
        let half = pump.half();
        let a = pump_envelope(&pump, half + 3e11, half - 3e11).unwrap();
        assert_relative_eq!(a, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn envelope_unit_detuning() {
        let pump = pulsed_pump(0.35e-12);
        let detuning = 1.0 / 0.35e-12;
        let a = pump_envelope(&pump, pump.half() + detuning, pump.half()).unwrap();
        assert_relative_eq!(a, (-0.5f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn envelope_golden_value() {
        // tau = 0.35 ps, detuning 2π·0.5 THz; frozen from a hand evaluation
        let pump = pulsed_pump(0.35e-12);
        let a = pump_envelope(&pump, pump.half() + TWO_PI * 5e11, pump.half()).unwrap();
        assert_relative_eq!(a, 0.5463402823767797, max_relative = 1e-10);
    }

    #[test]
    fn envelope_rejects_cw() {
        let pump = PumpSpec::new(wavelength_to_omega(766e-9), PumpRegime::Cw, &model()).unwrap();
        assert!(matches!(
            pump_envelope(&pump, 1e15, 1e15),
            Err(SimError::CwRegime)
        ));
    }

    #[test]
    fn delta_beta_vanishes_at_degenerate_point() {
        let m = model();
        let period = m.poling_period(766e-9).unwrap();
        let half = wavelength_to_omega(766e-9) / 2.0;
        let db = delta_beta(&m, period, half, half).unwrap();
        assert!(db.abs() < 1e-10, "delta_beta = {db}");
        let dbb = delta_beta_bar(&m, period, half, half).unwrap();
        assert!(dbb.abs() < 1e-10, "delta_beta_bar = {dbb}");
    }

    #[test]
    fn delta_beta_first_order_matches_group_velocities() {
        let m = model();
        let period = m.poling_period(766e-9).unwrap();
        let half = wavelength_to_omega(766e-9) / 2.0;
        let v_o = m.group_velocity(Polarization::Ordinary, half).unwrap();
        let v_e = m.group_velocity(Polarization::Extraordinary, half).unwrap();
        for frac in [-1e-3, -3e-4, 3e-4, 1e-3] {
            let detuning = frac * half;
            let db = delta_beta(&m, period, half + detuning, half - detuning).unwrap();
            let first_order = detuning * (1.0 / v_e - 1.0 / v_o);
            assert!(
                (db / first_order - 1.0).abs() < 0.01,
                "rel err {} at detuning {detuning}",
                (db / first_order - 1.0).abs()
            );
        }
    }

    #[test]
    fn delta_beta_bar_swap_symmetry() {
        let m = model();
        let period = m.poling_period(766e-9).unwrap();
        let half = wavelength_to_omega(766e-9) / 2.0;
        let (ws, wi) = (half + 7e11, half - 4e11);
        let a = delta_beta_bar(&m, period, ws, wi).unwrap();
        let b = delta_beta(&m, period, wi, ws).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-14);
    }

    #[test]
    fn mismatch_sum_is_second_order() {
        // |Δβ + Δβ̄| must grow quadratically: the fitted linear coefficient
        // stays below 1e-3 of Δβ's slope
        let m = model();
        let period = m.poling_period(766e-9).unwrap();
        let half = wavelength_to_omega(766e-9) / 2.0;
        let detuning = 1e11;
        let sum = |d: f64| {
            delta_beta(&m, period, half + d, half - d).unwrap()
                + delta_beta_bar(&m, period, half + d, half - d).unwrap()
        };
        let linear_coeff = (sum(detuning) - sum(-detuning)) / (2.0 * detuning);
        let db_slope = delta_beta(&m, period, half + detuning, half - detuning).unwrap() / detuning;
        assert!(
            (linear_coeff / db_slope).abs() < 1e-3,
            "linear residue {linear_coeff} vs slope {db_slope}"
        );
    }

    #[test]
    fn modulator_phase_examples() {
        let half = 1.23e15;
        let m = ModulatorSpec::new(PI, 0.0).unwrap();
        assert_eq!(m.phase_at(half + 5e12, half), PI);
        assert_eq!(m.phase_at(half - 2e12, half), PI);
        let zero = ModulatorSpec::new(0.0, 0.0).unwrap();
        assert_eq!(zero.phase_at(half + 1e12, half), 0.0);
        let chirped = ModulatorSpec::new(PI / 2.0, 2e-15).unwrap();
        let delta = 3e12;
        assert_relative_eq!(
            chirped.phase_at(half + delta, half),
            (PI / 2.0) * (1.0 + 2e-15 * delta),
            max_relative = 1e-14
        );
    }

    #[test]
    fn modulator_canonicalizes_phi() {
        let m = ModulatorSpec::new(-PI, 0.0).unwrap();
        assert_relative_eq!(m.phi, PI, max_relative = 1e-14);
        let m = ModulatorSpec::new(5.0 * PI, 0.0).unwrap();
        assert_relative_eq!(m.phi, PI, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn envelope_bounded_by_one(ds in -5e12f64..5e12, di in -5e12f64..5e12) {
            let pump = pulsed_pump(0.35e-12);
            let a = pump_envelope(&pump, pump.half() + ds, pump.half() + di).unwrap();
            prop_assert!(a > 0.0 && a <= 1.0);
            if (ds + di).abs() > 1e3 {
                prop_assert!(a < 1.0);
            }
        }

        #[test]
        fn canonical_phi_in_range(phi in -50.0f64..50.0) {
            let m = ModulatorSpec::new(phi, 0.0).unwrap();
            prop_assert!(m.phi >= 0.0 && m.phi < TWO_PI);
        }
    }
}
