//! Numerical model of a spectrally multimode integrated SU(1,1) interferometer.
//!
//! The crate builds phase-dependent joint spectral amplitudes for two
//! integrated type-II PDC designs (with and without a mid-device polarization
//! converter), performs quadrature-weighted Schmidt decompositions, and
//! evaluates phase sensitivity, shot-noise limits, filtered observables and
//! seeded/homodyne detection variants over phase and gain sweeps.
//!
//! The main entry points are [`config::RunConfig`] and
//! [`sweep::run_phase_sweep`] / [`sweep::run_gain_sweep`]; lower-level pieces
//! (dispersion, phase matching, JSA builders, Schmidt decomposition,
//! observables) are usable on their own.

pub mod config;
pub mod constants;
pub mod dispersion;
pub mod error;
pub mod filtering;
pub mod grid;
pub mod jsa;
pub mod observables;
pub mod oracle;
pub mod phasematch;
pub mod schmidt;
pub mod seeding;
pub mod svgplot;
pub mod sweep;
pub mod validation;

pub use config::RunConfig;
pub use dispersion::{DispersionModel, Polarization};
pub use error::{Result, SimError};
pub use grid::FrequencyGrid;
pub use jsa::{DesignVariant, JointSpectralAmplitude};
pub use phasematch::{DeviceGeometry, ModulatorSpec, PumpRegime, PumpSpec};
pub use schmidt::{GainCalibration, SchmidtDecomposition};
