//! Crate-wide error type.

use thiserror::Error;

/// Errors produced anywhere in the simulation pipeline.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("frequency {omega:.6e} rad/s outside validity window [{min:.6e}, {max:.6e}] rad/s")]
    OutOfWindow { omega: f64, min: f64, max: f64 },

    #[error("finite-difference stencil around {omega:.6e} rad/s leaves the validity window")]
    StencilOutOfWindow { omega: f64 },

    #[error("no positive poling period solves degenerate phase matching (bare mismatch {mismatch:.6e} rad/m)")]
    NoSolution { mismatch: f64 },

    #[error("pump envelope is undefined for a CW pump; use the reduced CW builder")]
    CwRegime,

    #[error("grid too coarse: {n} points (minimum {min})")]
    TooCoarse { n: usize, min: usize },

    #[error("tabulated dispersion data must be strictly increasing in omega")]
    TableNotIncreasing,

    #[error("refractive index {n} at {omega:.6e} rad/s is unphysical (need n > 1)")]
    UnphysicalIndex { n: f64, omega: f64 },

    #[error("singular value decomposition failed to converge")]
    ConvergenceFailure,

    #[error("degenerate joint spectral amplitude (zero norm); gain calibration impossible")]
    DegenerateJsa,

    #[error("phase derivative undefined at sweep boundary index {index}")]
    BoundaryPoint { index: usize },

    #[error("filter band [{lo:.6e}, {hi:.6e}] rad/s extends outside the frequency grid")]
    BandOutsideGrid { lo: f64, hi: f64 },

    #[error("no photons in the shot-noise reference (zero gain or empty band)")]
    ZeroPhotons,

    #[error("mode tracking lost at sweep index {index}")]
    ModeTrackingLost { index: usize },

    #[error("grid convergence gate failed: {summary}")]
    ConvergenceGateFailed { summary: String },

    #[error("phase sensitivity is stationary at every sweep point")]
    AllInfinite,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;
