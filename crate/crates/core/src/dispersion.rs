//! Refractive index, wavevector and group velocity for the KTP-like platform.
//!
//! The built-in default is a KTP Sellmeier set (Kato & Takaoka, Appl. Opt. 41,
//! 5040 (2002)) with an effective waveguide correction `-d·λ²` applied equally
//! to both polarizations. The correction is calibrated so that the degenerate
//! type-II poling period at a 766 nm pump comes out at 126 μm; because it is
//! common to both polarizations it leaves the ordinary/extraordinary group
//! velocity mismatch of the bulk set untouched. The uncorrected bulk set is
//! available as [`DispersionModel::ktp_bulk`], and user-supplied coefficient
//! sets or tabulated (ω, n) data can be loaded from JSON.

use crate::constants::{omega_to_wavelength, wavelength_to_omega, C_LIGHT, TWO_PI};
use crate::error::{Result, SimError};
use serde::Deserialize;
use std::path::Path;

/// Waveguide confinement correction (μm⁻²) added to both polarizations of the
/// default model. Calibrated against the 126 μm poling period at λ_p = 766 nm.
pub const WAVEGUIDE_CORRECTION: f64 = 6.183_806_558_788e-3;

/// Relative step of the group-velocity finite-difference stencil.
const GV_RELATIVE_STEP: f64 = 1e-6;

/// Poling periods are only accepted inside this range (m).
const POLING_RANGE: (f64, f64) = (1e-6, 1e-3);

/// Photon polarization label for the birefringent platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    Ordinary,
    Extraordinary,
}

/// Sellmeier-style coefficient set, n²(λ) = a + Σᵢ bᵢ/(λ² − cᵢ) − d·λ²
/// with λ in micrometres.
#[derive(Debug, Clone)]
pub struct SellmeierCoeffs {
    pub a: f64,
    pub resonances: Vec<(f64, f64)>,
    pub d: f64,
}

impl SellmeierCoeffs {
    fn eval(&self, lambda_um: f64) -> f64 {
        let l2 = lambda_um * lambda_um;
        let mut n2 = self.a - self.d * l2;
        for &(b, c) in &self.resonances {
            n2 += b / (l2 - c);
        }
        n2.sqrt()
    }

    /// Flat layout used by the JSON interface: `[a, b1, c1, ..., bk, ck, d]`.
    fn from_flat(coeffs: &[f64]) -> Result<Self> {
        if coeffs.len() < 2 || coeffs.len() % 2 != 0 {
            return Err(SimError::Config(format!(
                "sellmeier coefficient list must have even length >= 2 ([a, b1, c1, ..., d]), got {}",
                coeffs.len()
            )));
        }
        let a = coeffs[0];
        let d = *coeffs.last().unwrap();
        let resonances = coeffs[1..coeffs.len() - 1]
            .chunks(2)
            .map(|p| (p[0], p[1]))
            .collect();
        Ok(Self { a, resonances, d })
    }
}

/// Natural cubic spline through tabulated (ω, n) samples.
#[derive(Debug, Clone)]
struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(SimError::Config(
                "tabulated dispersion needs at least two points".into(),
            ));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(SimError::TableNotIncreasing);
        }
        let x: Vec<f64> = points.iter().map(|p| p.0).collect();
        let y: Vec<f64> = points.iter().map(|p| p.1).collect();
        let n = x.len();
        let mut second = vec![0.0; n];
        if n > 2 {
            // tridiagonal solve for natural boundary conditions
            let mut u = vec![0.0; n - 1];
            for i in 1..n - 1 {
                let sig = (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
                let p = sig * second[i - 1] + 2.0;
                second[i] = (sig - 1.0) / p;
                let slope_r = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
                let slope_l = (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
                u[i] = (6.0 * (slope_r - slope_l) / (x[i + 1] - x[i - 1]) - sig * u[i - 1]) / p;
            }
            for i in (1..n - 1).rev() {
                second[i] = second[i] * second[i + 1] + u[i];
            }
            second[0] = 0.0;
            second[n - 1] = 0.0;
        }
        Ok(Self { x, y, second })
    }

    /// Evaluate inside the table; extrapolation is a hard error upstream.
    fn eval(&self, x: f64) -> f64 {
        let n = self.x.len();
        let mut lo = 0usize;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.x[mid] > x {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let h = self.x[hi] - self.x[lo];
        let a = (self.x[hi] - x) / h;
        let b = (x - self.x[lo]) / h;
        a * self.y[lo]
            + b * self.y[hi]
            + ((a * a * a - a) * self.second[lo] + (b * b * b - b) * self.second[hi]) * h * h / 6.0
    }

    fn range(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }
}

#[derive(Debug, Clone)]
enum IndexModel {
    Sellmeier(SellmeierCoeffs),
    Table(CubicSpline),
}

impl IndexModel {
    fn eval(&self, omega: f64) -> f64 {
        match self {
            IndexModel::Sellmeier(c) => c.eval(omega_to_wavelength(omega) * 1e6),
            IndexModel::Table(t) => t.eval(omega),
        }
    }
}

/// Immutable dispersion model: one index curve per polarization plus a shared
/// validity window in angular frequency. All queries are pure functions.
#[derive(Debug, Clone)]
pub struct DispersionModel {
    name: String,
    ordinary: IndexModel,
    extraordinary: IndexModel,
    window: (f64, f64),
}

fn kato_takaoka_ny(extra_d: f64) -> SellmeierCoeffs {
    SellmeierCoeffs {
        a: 3.45018,
        resonances: vec![(0.04341, 0.04597), (16.98825, 39.43799)],
        d: extra_d,
    }
}

fn kato_takaoka_nz(extra_d: f64) -> SellmeierCoeffs {
    SellmeierCoeffs {
        a: 4.59423,
        resonances: vec![(0.06206, 0.04763), (110.80672, 86.12171)],
        d: extra_d,
    }
}

/// Validity window of the KTP sets: 0.43 μm – 3.54 μm.
fn ktp_window() -> (f64, f64) {
    (wavelength_to_omega(3.54e-6), wavelength_to_omega(0.43e-6))
}

impl DispersionModel {
    /// Bulk KTP (Kato & Takaoka 2002): n_y as ordinary, n_z as extraordinary.
    pub fn ktp_bulk() -> Self {
        Self {
            name: "ktp_bulk".into(),
            ordinary: IndexModel::Sellmeier(kato_takaoka_ny(0.0)),
            extraordinary: IndexModel::Sellmeier(kato_takaoka_nz(0.0)),
            window: ktp_window(),
        }
    }

    /// Default: bulk KTP with the common effective waveguide correction.
    pub fn ktp_waveguide() -> Self {
        Self {
            name: "ktp_waveguide".into(),
            ordinary: IndexModel::Sellmeier(kato_takaoka_ny(WAVEGUIDE_CORRECTION)),
            extraordinary: IndexModel::Sellmeier(kato_takaoka_nz(WAVEGUIDE_CORRECTION)),
            window: ktp_window(),
        }
    }

    /// Dispersionless birefringent toy model with constant indices.
    pub fn constant(n_ordinary: f64, n_extraordinary: f64, window: (f64, f64)) -> Result<Self> {
        let table = |n: f64| -> Result<IndexModel> {
            Ok(IndexModel::Table(CubicSpline::new(&[
                (window.0, n),
                (0.5 * (window.0 + window.1), n),
                (window.1, n),
            ])?))
        };
        let model = Self {
            name: format!("constant(o={n_ordinary}, e={n_extraordinary})"),
            ordinary: table(n_ordinary)?,
            extraordinary: table(n_extraordinary)?,
            window,
        };
        model.validate()?;
        Ok(model)
    }

    /// Looks a model up by name ("ktp_waveguide" | "ktp_bulk").
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "ktp_waveguide" => Ok(Self::ktp_waveguide()),
            "ktp_bulk" => Ok(Self::ktp_bulk()),
            other => Err(SimError::Config(format!(
                "unknown dispersion model '{other}' (expected ktp_waveguide or ktp_bulk)"
            ))),
        }
    }

    /// Loads a two-entry JSON description (one entry per polarization).
    ///
    /// ```json
    /// [
    ///   {"pol": "o", "type": "sellmeier", "coeffs": [a, b1, c1, b2, c2, d],
    ///    "window": [omega_min, omega_max]},
    ///   {"pol": "e", "type": "table", "points": [[omega, n], ...],
    ///    "window": [omega_min, omega_max]}
    /// ]
    /// ```
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text, path.display().to_string())
    }

    pub fn from_json_str(text: &str, name: String) -> Result<Self> {
        #[derive(Deserialize)]
        struct Entry {
            pol: String,
            #[serde(rename = "type")]
            kind: String,
            #[serde(default)]
            coeffs: Vec<f64>,
            #[serde(default)]
            points: Vec<(f64, f64)>,
            window: (f64, f64),
        }
        let entries: Vec<Entry> = serde_json::from_str(text)?;
        let mut ordinary = None;
        let mut extraordinary = None;
        let mut window = (f64::NEG_INFINITY, f64::INFINITY);
        for e in &entries {
            let model = match e.kind.as_str() {
                "sellmeier" => IndexModel::Sellmeier(SellmeierCoeffs::from_flat(&e.coeffs)?),
                "table" => {
                    let spline = CubicSpline::new(&e.points)?;
                    let (lo, hi) = spline.range();
                    window.0 = window.0.max(lo);
                    window.1 = window.1.min(hi);
                    IndexModel::Table(spline)
                }
                other => {
                    return Err(SimError::Config(format!(
                        "unknown dispersion entry type '{other}'"
                    )))
                }
            };
            window.0 = window.0.max(e.window.0);
            window.1 = window.1.min(e.window.1);
            match e.pol.as_str() {
                "o" => ordinary = Some(model),
                "e" => extraordinary = Some(model),
                other => {
                    return Err(SimError::Config(format!(
                        "unknown polarization tag '{other}' (expected 'o' or 'e')"
                    )))
                }
            }
        }
        let model = Self {
            name,
            ordinary: ordinary
                .ok_or_else(|| SimError::Config("missing 'o' dispersion entry".into()))?,
            extraordinary: extraordinary
                .ok_or_else(|| SimError::Config("missing 'e' dispersion entry".into()))?,
            window,
        };
        if !(model.window.0 < model.window.1) {
            return Err(SimError::Config("empty dispersion validity window".into()));
        }
        model.validate()?;
        Ok(model)
    }

    /// Samples both curves across the window and rejects n <= 1.
    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.window;
        for i in 0..=64 {
            let omega = lo + (hi - lo) * i as f64 / 64.0;
            for pol in [Polarization::Ordinary, Polarization::Extraordinary] {
                let n = self.index_model(pol).eval(omega);
                if !(n > 1.0) || !n.is_finite() {
                    return Err(SimError::UnphysicalIndex { n, omega });
                }
            }
        }
        Ok(())
    }

    fn index_model(&self, pol: Polarization) -> &IndexModel {
        match pol {
            Polarization::Ordinary => &self.ordinary,
            Polarization::Extraordinary => &self.extraordinary,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Validity window in rad/s.
    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn contains(&self, omega: f64) -> bool {
        omega >= self.window.0 && omega <= self.window.1
    }

    fn check_window(&self, omega: f64) -> Result<()> {
        if self.contains(omega) {
            Ok(())
        } else {
            Err(SimError::OutOfWindow {
                omega,
                min: self.window.0,
                max: self.window.1,
            })
        }
    }

    /// Refractive index n(pol, ω).
    pub fn refractive_index(&self, pol: Polarization, omega: f64) -> Result<f64> {
        self.check_window(omega)?;
        Ok(self.index_model(pol).eval(omega))
    }

    /// Wavevector k = n·ω/c in rad/m.
    pub fn wavevector(&self, pol: Polarization, omega: f64) -> Result<f64> {
        Ok(self.refractive_index(pol, omega)? * omega / C_LIGHT)
    }

    /// Group velocity v = (∂k/∂ω)⁻¹ by central difference with a relative
    /// step of 1e-6·ω, in m/s.
    pub fn group_velocity(&self, pol: Polarization, omega: f64) -> Result<f64> {
        self.group_velocity_with_step(pol, omega, GV_RELATIVE_STEP * omega)
    }

    /// Same with an explicit stencil step (used by convergence tests).
    pub fn group_velocity_with_step(&self, pol: Polarization, omega: f64, h: f64) -> Result<f64> {
        self.check_window(omega)?;
        if !self.contains(omega - h) || !self.contains(omega + h) {
            return Err(SimError::StencilOutOfWindow { omega });
        }
        let k_plus = self.wavevector(pol, omega + h)?;
        let k_minus = self.wavevector(pol, omega - h)?;
        Ok(2.0 * h / (k_plus - k_minus))
    }

    /// Poling period Λ > 0 that cancels the degenerate type-II mismatch
    /// k_o(ω_p) − k_o(ω_p/2) − k_e(ω_p/2) + 2π/Λ = 0 for a pump wavelength
    /// λ_p. The equation is linear in 1/Λ, so the closed form is exact; a
    /// bisection refinement on [1 μm, 1 mm] only runs if the round trip of a
    /// noisy tabulated model misses.
    pub fn poling_period(&self, lambda_pump: f64) -> Result<f64> {
        let omega_p = wavelength_to_omega(lambda_pump);
        let bare = self.bare_degenerate_mismatch(omega_p)?;
        if !(bare < 0.0) {
            return Err(SimError::NoSolution { mismatch: bare });
        }
        let period = -TWO_PI / bare;
        if period < POLING_RANGE.0 || period > POLING_RANGE.1 {
            return Err(SimError::NoSolution { mismatch: bare });
        }
        let residual = bare + TWO_PI / period;
        if residual.abs() <= 1e-12 * bare.abs() {
            return Ok(period);
        }
        // fallback: f(Λ) = bare + 2π/Λ is monotone in Λ
        let (mut lo, mut hi) = POLING_RANGE;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if bare + TWO_PI / mid > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// k_o(ω_p) − k_o(ω_p/2) − k_e(ω_p/2), the mismatch before poling.
    pub fn bare_degenerate_mismatch(&self, omega_p: f64) -> Result<f64> {
        Ok(self.wavevector(Polarization::Ordinary, omega_p)?
            - self.wavevector(Polarization::Ordinary, omega_p / 2.0)?
            - self.wavevector(Polarization::Extraordinary, omega_p / 2.0)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn omega_1532() -> f64 {
        wavelength_to_omega(1.532e-6)
    }

    #[test]
    fn bulk_index_matches_published_values() {
        let m = DispersionModel::ktp_bulk();
        // frozen from an independent evaluation of the published set
        let n_o = m
            .refractive_index(Polarization::Ordinary, omega_1532())
            .unwrap();
        assert_relative_eq!(n_o, 1.735231807699416, max_relative = 1e-9);
        assert!(n_o > 1.7 && n_o < 1.9);
        // literature checks at 1064 nm
        let w1064 = wavelength_to_omega(1.064e-6);
        let n_y = m.refractive_index(Polarization::Ordinary, w1064).unwrap();
        let n_z = m
            .refractive_index(Polarization::Extraordinary, w1064)
            .unwrap();
        assert_relative_eq!(n_y, 1.7454, max_relative = 2e-4);
        assert_relative_eq!(n_z, 1.8297, max_relative = 2e-4);
    }

    #[test]
    fn default_model_is_birefringent_at_1532() {
        let m = DispersionModel::ktp_waveguide();
        let n_o = m
            .refractive_index(Polarization::Ordinary, omega_1532())
            .unwrap();
        let n_e = m
            .refractive_index(Polarization::Extraordinary, omega_1532())
            .unwrap();
        assert!(n_o > 1.7 && n_o < 1.9);
        assert!((n_o - n_e).abs() > 1e-3);
    }

    #[test]
    fn constant_table_reproduces_inputs() {
        let win = (1e15, 3e15);
        let m = DispersionModel::constant(1.8, 2.0, win).unwrap();
        let n = m.refractive_index(Polarization::Ordinary, 2e15).unwrap();
        assert_relative_eq!(n, 1.8, max_relative = 1e-12);
        let omega = omega_1532();
        let k = m.wavevector(Polarization::Ordinary, omega).unwrap();
        assert_relative_eq!(k, 1.8 * omega / C_LIGHT, max_relative = 1e-12);
        // dispersionless medium: group velocity equals phase velocity c/n
        let v = m.group_velocity(Polarization::Ordinary, 2e15).unwrap();
        assert_relative_eq!(v, C_LIGHT / 1.8, max_relative = 1e-9);
    }

    #[test]
    fn wavevector_definition_and_monotonicity() {
        let m = DispersionModel::ktp_waveguide();
        let omega = omega_1532();
        let k = m.wavevector(Polarization::Extraordinary, omega).unwrap();
        let n = m
            .refractive_index(Polarization::Extraordinary, omega)
            .unwrap();
        assert_relative_eq!(k * C_LIGHT / omega, n, max_relative = 1e-12);

        let (lo, hi) = m.window();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..100 {
            let w = lo + (hi - lo) * (i as f64 + 0.5) / 100.0;
            let k = m.wavevector(Polarization::Ordinary, w).unwrap();
            assert!(k > prev, "k not monotone at sample {i}");
            prev = k;
        }
    }

    #[test]
    fn group_velocity_mismatch_is_nonzero() {
        let m = DispersionModel::ktp_waveguide();
        let omega = omega_1532();
        let v_o = m.group_velocity(Polarization::Ordinary, omega).unwrap();
        let v_e = m
            .group_velocity(Polarization::Extraordinary, omega)
            .unwrap();
        assert!(v_o > 0.0 && v_o < C_LIGHT);
        assert!(v_e > 0.0 && v_e < C_LIGHT);
        assert!((1.0 / v_e - 1.0 / v_o).abs() > 1e-12);
    }

    #[test]
    fn group_velocity_stencil_converges() {
        let m = DispersionModel::ktp_waveguide();
        let omega = omega_1532();
        let h = 1e-6 * omega;
        let v1 = m
            .group_velocity_with_step(Polarization::Ordinary, omega, h)
            .unwrap();
        let v2 = m
            .group_velocity_with_step(Polarization::Ordinary, omega, h / 2.0)
            .unwrap();
        assert!((v2 / v1 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn index_curves_are_smooth() {
        // bounded central second difference across the window interior
        let m = DispersionModel::ktp_waveguide();
        let (lo, hi) = m.window();
        let h = (hi - lo) * 1e-4;
        for i in 1..200 {
            let w = lo + (hi - lo) * i as f64 / 200.0;
            if w - h <= lo || w + h >= hi {
                continue;
            }
            let f = |x: f64| m.refractive_index(Polarization::Ordinary, x).unwrap();
            let d2 = (f(w + h) - 2.0 * f(w) + f(w - h)) / (h * h);
            assert!(d2.abs() < 1e-27, "second difference blew up: {d2}");
        }
    }

    #[test]
    fn poling_period_matches_target_device() {
        let m = DispersionModel::ktp_waveguide();
        let period = m.poling_period(766e-9).unwrap();
        // the default model is calibrated against this device value
        assert!((period - 126e-6).abs() / 126e-6 < 0.15, "period = {period}");
        assert!((period - 126e-6).abs() / 126e-6 < 1e-6);

        // bulk model lands far shorter; frozen from an independent evaluation
        let bulk = DispersionModel::ktp_bulk().poling_period(766e-9).unwrap();
        assert_relative_eq!(bulk, 45.153e-6, max_relative = 1e-3);
    }

    #[test]
    fn poling_round_trip_cancels_mismatch() {
        let m = DispersionModel::ktp_waveguide();
        let omega_p = wavelength_to_omega(766e-9);
        let period = m.poling_period(766e-9).unwrap();
        let residual = m.bare_degenerate_mismatch(omega_p).unwrap() + TWO_PI / period;
        assert!(residual.abs() < 1e-10, "residual = {residual}");
    }

    #[test]
    fn dispersionless_equal_indices_have_no_poling_solution() {
        let win = (5e14, 4e15);
        let m = DispersionModel::constant(1.8, 1.8, win).unwrap();
        match m.poling_period(766e-9) {
            Err(SimError::NoSolution { mismatch }) => assert!(mismatch.abs() < 1e-6),
            other => panic!("expected NoSolution, got {other:?}"),
        }
    }

    #[test]
    fn out_of_window_is_rejected() {
        let m = DispersionModel::ktp_waveguide();
        let (lo, hi) = m.window();
        assert!(matches!(
            m.refractive_index(Polarization::Ordinary, lo * 0.5),
            Err(SimError::OutOfWindow { .. })
        ));
        assert!(matches!(
            m.refractive_index(Polarization::Ordinary, hi * 1.5),
            Err(SimError::OutOfWindow { .. })
        ));
        // stencil at the very edge fails even though the point is inside
        assert!(matches!(
            m.group_velocity(Polarization::Ordinary, hi),
            Err(SimError::StencilOutOfWindow { .. })
        ));
    }

    #[test]
    fn tabulated_override_loads_and_interpolates() {
        let json = r#"[
            {"pol": "o", "type": "table",
             "points": [[1.0e15, 1.70], [1.5e15, 1.75], [2.0e15, 1.82], [2.5e15, 1.90]],
             "window": [1.0e15, 2.5e15]},
            {"pol": "e", "type": "sellmeier",
             "coeffs": [4.59423, 0.06206, 0.04763, 110.80672, 86.12171, 0.0],
             "window": [0.6e15, 4.0e15]}
        ]"#;
        let m = DispersionModel::from_json_str(json, "test".into()).unwrap();
        let n = m.refractive_index(Polarization::Ordinary, 1.5e15).unwrap();
        assert_relative_eq!(n, 1.75, max_relative = 1e-12);
        // interpolated value stays between neighbours
        let n_mid = m.refractive_index(Polarization::Ordinary, 1.75e15).unwrap();
        assert!(n_mid > 1.75 && n_mid < 1.82);
        // no extrapolation: window clamped to the table
        assert!(m.refractive_index(Polarization::Ordinary, 2.8e15).is_err());
    }

    #[test]
    fn unsorted_table_is_rejected() {
        let json = r#"[
            {"pol": "o", "type": "table",
             "points": [[2.0e15, 1.8], [1.0e15, 1.7]], "window": [1.0e15, 2.0e15]},
            {"pol": "e", "type": "table",
             "points": [[1.0e15, 1.8], [2.0e15, 1.9]], "window": [1.0e15, 2.0e15]}
        ]"#;
        assert!(matches!(
            DispersionModel::from_json_str(json, "bad".into()),
            Err(SimError::TableNotIncreasing)
        ));
    }
}
