//! Quadrature-weighted Schmidt decomposition of joint spectral amplitudes.
//!
//! Dense amplitudes are decomposed by an SVD of W_s^{1/2}·F·W_i^{1/2}, so the
//! recovered mode functions are orthonormal under the continuous inner
//! product rather than the raw dot product. CW amplitudes are diagonal in the
//! detuning lattice and decompose directly: every lattice point is a Schmidt
//! mode pair, which keeps the full spectrum available at any resolution.
//!
//! The SVD phase freedom is fixed by making each signal mode real and
//! positive at its point of maximum modulus (the compensating phase moves to
//! the idler mode), which makes decompositions reproducible bit for bit.

use crate::error::{Result, SimError};
use crate::grid::FrequencyGrid;
use crate::jsa::{JsaData, JointSpectralAmplitude};
use faer::Mat;
use num_complex::Complex64 as C64;
use std::sync::Arc;
use std::sync::Once;

/// Default number of retained mode functions for dense decompositions.
pub const DEFAULT_K_MAX: usize = 64;

/// Retained-mass threshold below which a truncation warning is raised.
const TRUNCATION_WARN_TAIL: f64 = 1e-3;

static FAER_SEQ: Once = Once::new();

fn faer_sequential() {
    // deterministic results independent of the worker pool; parallelism
    // lives one level up, across sweep points
    FAER_SEQ.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

#[derive(Debug, Clone)]
enum ModeBasis {
    /// Mode functions on the grid, `k_retained` rows of length n.
    Dense { u: Vec<Vec<C64>>, v: Vec<Vec<C64>> },
    /// CW lattice modes: mode k is a point mass at signal index `order[k]`
    /// (idler index mirrored), with the gauge phase on the idler side.
    GridDelta { order: Vec<usize>, v_phase: Vec<C64> },
}

/// Result of the Schmidt decomposition at one phase setting.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    eigenvalues: Vec<f64>,
    basis: ModeBasis,
    grid: Arc<FrequencyGrid>,
    pub phi: f64,
    pub raw_norm: f64,
    /// |Σλ − 1| before renormalization; completeness defect of the input.
    pub completeness_defect: f64,
    /// 1 − Σ of retained eigenvalues.
    pub tail_mass: f64,
    /// Set when the retained modes miss more than 1e-3 of the spectrum.
    pub truncation_warning: bool,
}

impl SchmidtDecomposition {
    /// All Schmidt eigenvalues, descending, Σ = 1.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn lambda_1(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    /// Number of modes with stored mode functions.
    pub fn retained(&self) -> usize {
        match &self.basis {
            ModeBasis::Dense { u, .. } => u.len(),
            ModeBasis::GridDelta { order, .. } => order.len(),
        }
    }

    /// Signal mode function value u_k(ω_s[j]).
    pub fn signal_mode_value(&self, k: usize, j: usize) -> C64 {
        match &self.basis {
            ModeBasis::Dense { u, .. } => u[k][j],
            ModeBasis::GridDelta { order, .. } => {
                if order[k] == j {
                    C64::new(1.0 / self.grid.w_signal()[j].sqrt(), 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }
        }
    }

    /// Idler mode function value v_k(ω_i[m]).
    pub fn idler_mode_value(&self, k: usize, m: usize) -> C64 {
        match &self.basis {
            ModeBasis::Dense { v, .. } => v[k][m],
            ModeBasis::GridDelta { order, v_phase } => {
                let n = self.grid.n_idler();
                if n - 1 - order[k] == m {
                    v_phase[k] / self.grid.w_idler()[m].sqrt()
                } else {
                    C64::new(0.0, 0.0)
                }
            }
        }
    }

    /// ∫_band |u_k|² dω for per-point band weights (see
    /// [`FrequencyGrid::band_weights`]).
    pub fn band_mass(&self, k: usize, band_weights: &[f64]) -> f64 {
        match &self.basis {
            ModeBasis::Dense { u, .. } => u[k]
                .iter()
                .zip(band_weights)
                .map(|(val, bw)| val.norm_sqr() * bw)
                .sum(),
            ModeBasis::GridDelta { order, .. } => {
                let j = order[k];
                band_weights[j] / self.grid.w_signal()[j]
            }
        }
    }

    /// Squared per-grid-cell amplitude of mode k at the centre frequency,
    /// |u_k(ω_p/2)|²·w. Dimensionless; sums to at most 1 over modes.
    pub fn center_occupancy(&self, k: usize) -> f64 {
        let c = self.grid.center_index();
        match &self.basis {
            ModeBasis::Dense { u, .. } => u[k][c].norm_sqr() * self.grid.w_signal()[c],
            ModeBasis::GridDelta { order, .. } => {
                if order[k] == c {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// |⟨u_k | other.u_j⟩| under the grid quadrature.
    pub fn signal_overlap(&self, k: usize, other: &SchmidtDecomposition, j: usize) -> f64 {
        match (&self.basis, &other.basis) {
            (ModeBasis::GridDelta { order: oa, .. }, ModeBasis::GridDelta { order: ob, .. }) => {
                if oa[k] == ob[j] {
                    1.0
                } else {
                    0.0
                }
            }
            _ => {
                let w = self.grid.w_signal();
                let mut acc = C64::new(0.0, 0.0);
                for idx in 0..self.grid.n_signal() {
                    acc += self.signal_mode_value(k, idx).conj()
                        * other.signal_mode_value(j, idx)
                        * w[idx];
                }
                acc.norm()
            }
        }
    }

    /// Largest deviation of ⟨u_k|u_j⟩ from δ_kj over retained modes (same for
    /// idler modes); numerical-hygiene check.
    pub fn orthonormality_error(&self) -> f64 {
        let kr = self.retained().min(32);
        let ws = self.grid.w_signal();
        let wi = self.grid.w_idler();
        let mut worst: f64 = 0.0;
        for k in 0..kr {
            for j in k..kr {
                let mut acc_u = C64::new(0.0, 0.0);
                let mut acc_v = C64::new(0.0, 0.0);
                for idx in 0..self.grid.n_signal() {
                    acc_u += self.signal_mode_value(k, idx).conj()
                        * self.signal_mode_value(j, idx)
                        * ws[idx];
                }
                for idx in 0..self.grid.n_idler() {
                    acc_v += self.idler_mode_value(k, idx).conj()
                        * self.idler_mode_value(j, idx)
                        * wi[idx];
                }
                let target = if k == j { 1.0 } else { 0.0 };
                worst = worst
                    .max((acc_u - target).norm())
                    .max((acc_v - target).norm());
            }
        }
        worst
    }

    /// Relative L² error of Σ_k √λ_k u_k v_k against the stored amplitude.
    pub fn verify_reconstruction(&self, jsa: &JointSpectralAmplitude) -> f64 {
        let ws = self.grid.w_signal();
        let wi = self.grid.w_idler();
        match jsa.data() {
            JsaData::Full(f) => {
                let kr = self.retained();
                let mut err = 0.0;
                let mut norm = 0.0;
                for j in 0..f.nrows() {
                    for m in 0..f.ncols() {
                        let mut acc = C64::new(0.0, 0.0);
                        for k in 0..kr {
                            acc += C64::from(self.eigenvalues[k].sqrt())
                                * self.signal_mode_value(k, j)
                                * self.idler_mode_value(k, m);
                        }
                        err += (acc - f[(j, m)]).norm_sqr() * ws[j] * wi[m];
                        norm += f[(j, m)].norm_sqr() * ws[j] * wi[m];
                    }
                }
                (err / norm).sqrt()
            }
            JsaData::Diagonal(f) => {
                // lattice modes reproduce the reduced amplitude exactly;
                // check |√λ_k| against |f̃| point by point
                let mut err = 0.0;
                let mut norm = 0.0;
                if let ModeBasis::GridDelta { order, v_phase } = &self.basis {
                    for (k, &j) in order.iter().enumerate() {
                        let amp = self.eigenvalues[k].sqrt() / ws[j].sqrt() * v_phase[k];
                        err += (amp / ws[j].sqrt() - f[j] / ws[j].sqrt()).norm_sqr() * ws[j];
                        norm += f[j].norm_sqr() * ws[j];
                    }
                }
                (err / norm).sqrt()
            }
        }
    }
}

/// Decomposes a normalized JSA. `k_max` bounds the stored mode functions of
/// dense amplitudes; CW lattice decompositions keep every lattice mode (they
/// cost nothing and the near-flat spectra near φ = π need the depth).
pub fn schmidt_decompose(
    jsa: &JointSpectralAmplitude,
    k_max: usize,
) -> Result<SchmidtDecomposition> {
    if !(jsa.raw_norm > 0.0) {
        return Err(SimError::DegenerateJsa);
    }
    match jsa.data() {
        JsaData::Full(f) => decompose_dense(jsa, f, k_max),
        JsaData::Diagonal(f) => decompose_diagonal(jsa, f),
    }
}

fn decompose_dense(
    jsa: &JointSpectralAmplitude,
    f: &ndarray::Array2<C64>,
    k_max: usize,
) -> Result<SchmidtDecomposition> {
    faer_sequential();
    let grid = &jsa.grid;
    let ws = grid.w_signal();
    let wi = grid.w_idler();
    let (n_s, n_i) = (f.nrows(), f.ncols());
    let weighted = Mat::from_fn(n_s, n_i, |j, m| f[(j, m)] * (ws[j] * wi[m]).sqrt());
    let svd = weighted.svd().map_err(|_| SimError::ConvergenceFailure)?;
    let rank = n_s.min(n_i);
    let s = svd.S();
    let mut lambdas: Vec<f64> = (0..rank).map(|k| s[k].re * s[k].re).collect();
    // descending order is the backend contract; enforce it anyway
    let mut order: Vec<usize> = (0..rank).collect();
    order.sort_by(|&a, &b| lambdas[b].partial_cmp(&lambdas[a]).unwrap().then(a.cmp(&b)));
    lambdas = order.iter().map(|&k| lambdas[k]).collect();
    let total: f64 = lambdas.iter().sum();
    let completeness_defect = (total - 1.0).abs();
    for l in &mut lambdas {
        *l /= total;
    }

    let k_keep = k_max.min(rank);
    let u_mat = svd.U();
    let v_mat = svd.V();
    let mut u = Vec::with_capacity(k_keep);
    let mut v = Vec::with_capacity(k_keep);
    for &k in order.iter().take(k_keep) {
        let mut uk: Vec<C64> = (0..n_s).map(|j| u_mat[(j, k)] / ws[j].sqrt()).collect();
        let mut vk: Vec<C64> = (0..n_i)
            .map(|m| v_mat[(m, k)].conj() / wi[m].sqrt())
            .collect();
        // gauge: u real-positive at its максимума of modulus
        let mut jmax = 0;
        let mut best = -1.0;
        for (j, val) in uk.iter().enumerate() {
            let a = val.norm();
            if a > best {
                best = a;
                jmax = j;
            }
        }
        let phase = uk[jmax] / C64::from(uk[jmax].norm().max(f64::MIN_POSITIVE));
        let rot = phase.conj();
        for val in &mut uk {
            *val *= rot;
        }
        let rot_v = phase;
        for val in &mut vk {
            *val *= rot_v;
        }
        u.push(uk);
        v.push(vk);
    }

    let tail_mass = 1.0 - lambdas.iter().take(k_keep).sum::<f64>();
    Ok(SchmidtDecomposition {
        eigenvalues: lambdas,
        basis: ModeBasis::Dense { u, v },
        grid: Arc::clone(grid),
        phi: jsa.phi,
        raw_norm: jsa.raw_norm,
        completeness_defect,
        tail_mass,
        truncation_warning: tail_mass > TRUNCATION_WARN_TAIL,
    })
}

fn decompose_diagonal(jsa: &JointSpectralAmplitude, f: &[C64]) -> Result<SchmidtDecomposition> {
    let grid = &jsa.grid;
    let ws = grid.w_signal();
    let mut lambdas: Vec<f64> = f
        .iter()
        .zip(ws)
        .map(|(val, w)| val.norm_sqr() * w)
        .collect();
    let mut order: Vec<usize> = (0..lambdas.len()).collect();
    order.sort_by(|&a, &b| lambdas[b].partial_cmp(&lambdas[a]).unwrap().then(a.cmp(&b)));
    lambdas = order.iter().map(|&j| lambdas[j]).collect();
    let total: f64 = lambdas.iter().sum();
    let completeness_defect = (total - 1.0).abs();
    for l in &mut lambdas {
        *l /= total;
    }
    let v_phase: Vec<C64> = order
        .iter()
        .map(|&j| {
            let a = f[j].norm();
            if a > 0.0 {
                f[j] / C64::from(a)
            } else {
                C64::new(1.0, 0.0)
            }
        })
        .collect();
    Ok(SchmidtDecomposition {
        eigenvalues: lambdas,
        basis: ModeBasis::GridDelta { order, v_phase },
        grid: Arc::clone(grid),
        phi: jsa.phi,
        raw_norm: jsa.raw_norm,
        completeness_defect,
        tail_mass: 0.0,
        truncation_warning: false,
    })
}

/// Coupling-scale calibration: fixing the gain parameter γ = G(0)·√λ₁(0)
/// pins the internal scale g0, and thereafter G(φ) = g0 · raw_norm(φ).
#[derive(Debug, Clone, Copy)]
pub struct GainCalibration {
    pub gamma: f64,
    g0: f64,
}

pub fn calibrate_gain(dec0: &SchmidtDecomposition, gamma_target: f64) -> Result<GainCalibration> {
    if !(dec0.raw_norm > 0.0) || !(dec0.lambda_1() > 0.0) {
        return Err(SimError::DegenerateJsa);
    }
    Ok(GainCalibration {
        gamma: gamma_target,
        g0: gamma_target / (dec0.lambda_1().sqrt() * dec0.raw_norm),
    })
}

impl GainCalibration {
    /// G(φ) for the raw norm of the amplitude built at φ.
    pub fn gain_for(&self, raw_norm: f64) -> f64 {
        self.g0 * raw_norm
    }
}

/// Effective mode number with gain-redistributed weights:
/// K = 1/ΣΛ_k², Λ_k = sinh²(G√λ_k)/Σ sinh²(G√λ_k). At G → 0 the weights
/// reduce to the eigenvalues and K becomes the standard Schmidt number.
pub fn schmidt_number(eigenvalues: &[f64], gain: f64) -> f64 {
    let weights: Vec<f64> = if gain == 0.0 {
        eigenvalues.to_vec()
    } else {
        eigenvalues
            .iter()
            .map(|&l| {
                let s = (gain * l.sqrt()).sinh();
                s * s
            })
            .collect()
    };
    let total: f64 = weights.iter().sum();
    let sum_sq: f64 = weights.iter().map(|w| (w / total) * (w / total)).sum();
    1.0 / sum_sq
}

/// Follows the first Schmidt mode through a φ-sweep by maximal mode overlap
/// between consecutive points; returns the mode index per sweep position.
pub fn track_first_mode(decs: &[SchmidtDecomposition]) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(decs.len());
    let mut current = 0usize;
    for (i, dec) in decs.iter().enumerate() {
        if i == 0 {
            out.push(0);
            continue;
        }
        let prev = &decs[i - 1];
        let mut best = (0usize, -1.0);
        for j in 0..dec.retained() {
            let ov = prev.signal_overlap(current, dec, j);
            if ov > best.1 {
                best = (j, ov);
            }
        }
        if best.1 < 0.25 {
            return Err(SimError::ModeTrackingLost { index: i });
        }
        current = best.0;
        out.push(current);
    }
    Ok(out)
}
