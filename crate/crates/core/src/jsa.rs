//! Joint spectral amplitude builders for the integrated designs.
//!
//! Two-dimensional amplitudes are built on a [`FrequencyGrid`] for a pulsed
//! pump; the CW regime uses an exact one-dimensional reduction along the
//! antidiagonal ω_i = ω_p − ω_s (the τ→∞ limit), which keeps the residual
//! non-cancellation of the compensated design at large detuning.
//!
//! Only the first Fourier order of the poling square wave is kept; the
//! constant 2/π is absorbed into the coupling. The PDC generated inside the
//! gap is dropped by default (its integrand oscillates fast); a build option
//! re-enables it to quantify the approximation.

pub use crate::phasematch::DesignVariant;

use crate::error::{Result, SimError};
use crate::grid::FrequencyGrid;
use crate::phasematch::{self, DeviceGeometry, ModulatorSpec, PumpRegime, PumpSpec};
use crate::DispersionModel;
use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

/// sin(x)/x with the removable singularity patched by its Taylor value.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Optional builder knobs.
#[derive(Debug, Clone, Copy)]
pub struct JsaBuildOptions {
    /// Relative phase of the second grating against the first (rad). The
    /// default 0 keeps the gratings in phase.
    pub grating_rel_phase: f64,
    /// Include the PDC generated between the poled sections (non-compensated
    /// builder only). Debug knob for quantifying the dropped term.
    pub include_gap_pdc: bool,
}

impl Default for JsaBuildOptions {
    fn default() -> Self {
        Self {
            grating_rel_phase: 0.0,
            include_gap_pdc: false,
        }
    }
}

/// Storage for the complex amplitude.
#[derive(Debug, Clone)]
pub enum JsaData {
    /// Dense matrix F[j, m] over (signal, idler) grid points.
    Full(Array2<C64>),
    /// CW reduction: f̃[j] over the signal axis with ω_i pinned to
    /// 2·center − ω_s[j].
    Diagonal(Vec<C64>),
}

/// Joint spectral amplitude on a grid, normalized to unit L² norm under the
/// grid quadrature, with the pre-normalization norm kept in `raw_norm`.
#[derive(Debug, Clone)]
pub struct JointSpectralAmplitude {
    pub(crate) data: JsaData,
    pub grid: Arc<FrequencyGrid>,
    pub phi: f64,
    pub raw_norm: f64,
    pub variant: DesignVariant,
    pub normalized: bool,
}

impl JointSpectralAmplitude {
    pub fn data(&self) -> &JsaData {
        &self.data
    }

    pub fn is_cw(&self) -> bool {
        matches!(self.data, JsaData::Diagonal(_))
    }

    /// L² norm under the grid quadrature (1 after normalization).
    pub fn quadrature_norm(&self) -> f64 {
        match &self.data {
            JsaData::Full(f) => {
                let ws = self.grid.w_signal();
                let wi = self.grid.w_idler();
                let mut acc = 0.0;
                for j in 0..f.nrows() {
                    for m in 0..f.ncols() {
                        acc += f[(j, m)].norm_sqr() * ws[j] * wi[m];
                    }
                }
                acc.sqrt()
            }
            JsaData::Diagonal(f) => {
                let ws = self.grid.w_signal();
                f.iter()
                    .zip(ws)
                    .map(|(v, w)| v.norm_sqr() * w)
                    .sum::<f64>()
                    .sqrt()
            }
        }
    }

    /// Joint spectral intensity |F|² (dense amplitudes).
    pub fn jsi_matrix(&self) -> Option<Array2<f64>> {
        match &self.data {
            JsaData::Full(f) => Some(f.map(|v| v.norm_sqr())),
            JsaData::Diagonal(_) => None,
        }
    }

    /// |f̃(Ω)|² along the antidiagonal (CW amplitudes).
    pub fn jsi_diagonal(&self) -> Option<Vec<f64>> {
        match &self.data {
            JsaData::Diagonal(f) => Some(f.iter().map(|v| v.norm_sqr()).collect()),
            JsaData::Full(_) => None,
        }
    }

    /// Long-format CSV dump: omega_s, omega_i, re, im.
    pub fn dump_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(["omega_s", "omega_i", "re", "im"])
            .map_err(csv_err)?;
        match &self.data {
            JsaData::Full(f) => {
                for (j, &ws) in self.grid.signal().iter().enumerate() {
                    for (m, &wi) in self.grid.idler().iter().enumerate() {
                        let v = f[(j, m)];
                        w.write_record([
                            ws.to_string(),
                            wi.to_string(),
                            v.re.to_string(),
                            v.im.to_string(),
                        ])
                        .map_err(csv_err)?;
                    }
                }
            }
            JsaData::Diagonal(f) => {
                let c2 = 2.0 * self.grid.center();
                for (j, &ws) in self.grid.signal().iter().enumerate() {
                    let v = f[j];
                    w.write_record([
                        ws.to_string(),
                        (c2 - ws).to_string(),
                        v.re.to_string(),
                        v.im.to_string(),
                    ])
                    .map_err(csv_err)?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// JSON sidecar describing the dump.
    pub fn sidecar_json(&self) -> serde_json::Value {
        serde_json::json!({
            "variant": variant_name(self.variant),
            "phi": self.phi,
            "raw_norm": self.raw_norm,
            "normalized": self.normalized,
            "representation": if self.is_cw() { "diagonal_cw" } else { "full" },
            "grid": {
                "center_rad_s": self.grid.center(),
                "half_width_rad_s": self.grid.half_width(),
                "n_signal": self.grid.n_signal(),
                "n_idler": self.grid.n_idler(),
            },
        })
    }

    pub fn write_sidecar(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        writeln!(f, "{}", serde_json::to_string_pretty(&self.sidecar_json())?)?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> SimError {
    SimError::Io(std::io::Error::other(e))
}

pub(crate) fn variant_name(v: DesignVariant) -> &'static str {
    match v {
        DesignVariant::NonCompensated => "non_compensated",
        DesignVariant::Compensated => "compensated",
        DesignVariant::SingleSection => "single_section",
    }
}

fn require_variant(geometry: &DeviceGeometry, expected: DesignVariant) -> Result<()> {
    if geometry.variant == expected {
        Ok(())
    } else {
        Err(SimError::Config(format!(
            "builder expects the {} variant, geometry says {}",
            variant_name(expected),
            variant_name(geometry.variant)
        )))
    }
}

fn require_pulsed(pump: &PumpSpec) -> Result<f64> {
    match pump.regime {
        PumpRegime::Pulsed { duration } => Ok(duration),
        PumpRegime::Cw => Err(SimError::CwRegime),
    }
}

fn normalize(data: &mut JsaData, grid: &FrequencyGrid) -> f64 {
    let raw = match data {
        JsaData::Full(f) => {
            let ws = grid.w_signal();
            let wi = grid.w_idler();
            let mut acc = 0.0;
            for j in 0..f.nrows() {
                for m in 0..f.ncols() {
                    acc += f[(j, m)].norm_sqr() * ws[j] * wi[m];
                }
            }
            acc.sqrt()
        }
        JsaData::Diagonal(f) => f
            .iter()
            .zip(grid.w_signal())
            .map(|(v, w)| v.norm_sqr() * w)
            .sum::<f64>()
            .sqrt(),
    };
    if raw > 0.0 {
        let inv = 1.0 / raw;
        match data {
            JsaData::Full(f) => f.map_inplace(|v| *v *= inv),
            JsaData::Diagonal(f) => f.iter_mut().for_each(|v| *v *= inv),
        }
    }
    raw
}

/// Fills a dense matrix row-parallel; the cell function is pure.
fn fill_full<F>(grid: &FrequencyGrid, cell: F) -> Result<Array2<C64>>
where
    F: Fn(f64, f64) -> Result<C64> + Sync,
{
    let rows: Vec<Vec<C64>> = grid
        .signal()
        .par_iter()
        .map(|&ws| {
            grid.idler()
                .iter()
                .map(|&wi| cell(ws, wi))
                .collect::<Result<Vec<C64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let n_i = grid.n_idler();
    let mut out = Array2::zeros((grid.n_signal(), n_i));
    for (j, row) in rows.into_iter().enumerate() {
        for (m, v) in row.into_iter().enumerate() {
            out[(j, m)] = v;
        }
    }
    Ok(out)
}

/// Two poled sections without a polarization converter (pulsed pump):
/// F = α · sinc(ΔβL/2) · cos(ΔβL/2 + Δβl/2 + φ_m/2 + θ_g/2)
///       · exp[i(ΔβL + Δβl/2 + φ_m/2 + θ_g/2)].
pub fn build_jsa_noncompensated(
    model: &DispersionModel,
    geometry: &DeviceGeometry,
    pump: &PumpSpec,
    modulator: &ModulatorSpec,
    grid: &Arc<FrequencyGrid>,
    options: &JsaBuildOptions,
) -> Result<JointSpectralAmplitude> {
    require_variant(geometry, DesignVariant::NonCompensated)?;
    require_pulsed(pump)?;
    let (big_l, gap, period) = (
        geometry.pdc_length,
        geometry.gap_length,
        geometry.poling_period,
    );
    let half_pump = pump.half();
    let theta_g = options.grating_rel_phase;
    let include_gap = options.include_gap_pdc && gap > 0.0;
    let two_pi_over_period = crate::constants::TWO_PI / period;

    let mut data = JsaData::Full(fill_full(grid, |ws, wi| {
        let alpha = phasematch::pump_envelope(pump, ws, wi)?;
        let db = phasematch::delta_beta(model, period, ws, wi)?;
        let pm = modulator.phase_at(wi, half_pump);
        let arg = db * big_l / 2.0 + db * gap / 2.0 + pm / 2.0 + theta_g / 2.0;
        let phase = db * big_l + db * gap / 2.0 + pm / 2.0 + theta_g / 2.0;
        let mut f = C64::from_polar(alpha * sinc(db * big_l / 2.0) * arg.cos(), phase);
        if include_gap {
            // generation inside the unpoled gap: plain half + modulated half
            let d = db - two_pi_over_period;
            let d_mod = d + 2.0 * pm / gap;
            let first = C64::from_polar(sinc(d * gap / 4.0), d * big_l + d * gap / 4.0);
            let second = C64::from_polar(
                sinc(d_mod * gap / 4.0),
                d * big_l + d * gap / 2.0 + d_mod * gap / 4.0,
            );
            f += (alpha * gap / (4.0 * big_l)) * (first + second);
        }
        Ok(f)
    })?);

    let raw_norm = normalize(&mut data, grid);
    Ok(JointSpectralAmplitude {
        data,
        grid: Arc::clone(grid),
        phi: modulator.phi,
        raw_norm,
        variant: DesignVariant::NonCompensated,
        normalized: raw_norm > 0.0,
    })
}

/// Compensated design (polarization converter mid-device, pulsed pump):
/// F = (α/2)[sinc(ΔβL/2)e^{iΔβL/2}
///      + sinc(Δβ̄L/2)e^{i(Δβ̄L/2 + ΔβL + Δβl/2 + φ_m + Δβ̄l/2 + θ_g)}].
pub fn build_jsa_compensated(
    model: &DispersionModel,
    geometry: &DeviceGeometry,
    pump: &PumpSpec,
    modulator: &ModulatorSpec,
    grid: &Arc<FrequencyGrid>,
    options: &JsaBuildOptions,
) -> Result<JointSpectralAmplitude> {
    require_variant(geometry, DesignVariant::Compensated)?;
    require_pulsed(pump)?;
    let (big_l, gap, period) = (
        geometry.pdc_length,
        geometry.gap_length,
        geometry.poling_period,
    );
    let half_pump = pump.half();
    let theta_g = options.grating_rel_phase;

    let mut data = JsaData::Full(fill_full(grid, |ws, wi| {
        let alpha = phasematch::pump_envelope(pump, ws, wi)?;
        let db = phasematch::delta_beta(model, period, ws, wi)?;
        let dbb = phasematch::delta_beta_bar(model, period, ws, wi)?;
        let pm = modulator.phase_at(wi, half_pump);
        Ok(0.5 * alpha * compensated_terms(db, dbb, pm, big_l, gap, theta_g))
    })?);

    let raw_norm = normalize(&mut data, grid);
    Ok(JointSpectralAmplitude {
        data,
        grid: Arc::clone(grid),
        phi: modulator.phi,
        raw_norm,
        variant: DesignVariant::Compensated,
        normalized: raw_norm > 0.0,
    })
}

fn compensated_terms(db: f64, dbb: f64, pm: f64, big_l: f64, gap: f64, theta_g: f64) -> C64 {
    let t1 = C64::from_polar(sinc(db * big_l / 2.0), db * big_l / 2.0);
    let t2 = C64::from_polar(
        sinc(dbb * big_l / 2.0),
        dbb * big_l / 2.0 + db * big_l + db * gap / 2.0 + pm + dbb * gap / 2.0 + theta_g,
    );
    t1 + t2
}

/// Single poled section of length L (pulsed pump): F = α·sinc(ΔβL/2)e^{iΔβL/2}.
pub fn build_jsa_single_section(
    model: &DispersionModel,
    geometry: &DeviceGeometry,
    pump: &PumpSpec,
    grid: &Arc<FrequencyGrid>,
) -> Result<JointSpectralAmplitude> {
    require_variant(geometry, DesignVariant::SingleSection)?;
    require_pulsed(pump)?;
    let big_l = geometry.pdc_length;
    let period = geometry.poling_period;

    let mut data = JsaData::Full(fill_full(grid, |ws, wi| {
        let alpha = phasematch::pump_envelope(pump, ws, wi)?;
        let db = phasematch::delta_beta(model, period, ws, wi)?;
        Ok(C64::from_polar(
            alpha * sinc(db * big_l / 2.0),
            db * big_l / 2.0,
        ))
    })?);

    let raw_norm = normalize(&mut data, grid);
    Ok(JointSpectralAmplitude {
        data,
        grid: Arc::clone(grid),
        phi: 0.0,
        raw_norm,
        variant: DesignVariant::SingleSection,
        normalized: raw_norm > 0.0,
    })
}

/// CW reduction: the exact two-term sum of the compensated amplitude (or the
/// single-section amplitude) restricted to the antidiagonal ω_i = ω_p − ω_s.
/// The grid's signal axis doubles as the detuning lattice; it must match the
/// idler axis so the mirrored idler frequencies stay on-grid.
pub fn build_jsa_cw(
    model: &DispersionModel,
    geometry: &DeviceGeometry,
    modulator: &ModulatorSpec,
    grid: &Arc<FrequencyGrid>,
    options: &JsaBuildOptions,
) -> Result<JointSpectralAmplitude> {
    if geometry.variant == DesignVariant::NonCompensated {
        return Err(SimError::Config(
            "the CW reduction supports the compensated and single-section variants only".into(),
        ));
    }
    if grid.n_signal() != grid.n_idler() {
        return Err(SimError::Config(
            "the CW reduction needs matching signal and idler axes".into(),
        ));
    }
    let (big_l, gap, period) = (
        geometry.pdc_length,
        geometry.gap_length,
        geometry.poling_period,
    );
    let center = grid.center();
    let omega_p = 2.0 * center;
    let theta_g = options.grating_rel_phase;
    let single = geometry.variant == DesignVariant::SingleSection;

    let values: Vec<C64> = grid
        .signal()
        .par_iter()
        .map(|&ws| {
            let wi = omega_p - ws;
            let db = phasematch::delta_beta(model, period, ws, wi)?;
            if single {
                return Ok(C64::from_polar(sinc(db * big_l / 2.0), db * big_l / 2.0));
            }
            let dbb = phasematch::delta_beta_bar(model, period, ws, wi)?;
            let pm = modulator.phase_at(wi, center);
            Ok(0.5 * compensated_terms(db, dbb, pm, big_l, gap, theta_g))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut data = JsaData::Diagonal(values);
    let raw_norm = normalize(&mut data, grid);
    Ok(JointSpectralAmplitude {
        data,
        grid: Arc::clone(grid),
        phi: if single { 0.0 } else { modulator.phi },
        raw_norm,
        variant: geometry.variant,
        normalized: raw_norm > 0.0,
    })
}
