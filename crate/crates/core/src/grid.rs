//! Frequency grids with trapezoid quadrature weights.

use crate::dispersion::DispersionModel;
use crate::error::{Result, SimError};

/// Minimum axis size accepted by [`FrequencyGrid::new`].
pub const MIN_GRID_POINTS: usize = 16;

/// Uniform signal/idler frequency grid, symmetric about `center` (= ω_p/2),
/// with trapezoid weights. Axes are strictly increasing; Σw equals the span.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    signal: Vec<f64>,
    idler: Vec<f64>,
    w_signal: Vec<f64>,
    w_idler: Vec<f64>,
    center: f64,
    half_width: f64,
}

fn axis(center: f64, half_width: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mid = (n - 1) as f64 / 2.0;
    let step = 2.0 * half_width / (n - 1) as f64;
    let points: Vec<f64> = (0..n).map(|j| center + (j as f64 - mid) * step).collect();
    let mut weights = vec![step; n];
    weights[0] = 0.5 * step;
    weights[n - 1] = 0.5 * step;
    (points, weights)
}

impl FrequencyGrid {
    pub fn new(center: f64, half_width: f64, n_signal: usize, n_idler: usize) -> Result<Self> {
        for n in [n_signal, n_idler] {
            if n < MIN_GRID_POINTS {
                return Err(SimError::TooCoarse {
                    n,
                    min: MIN_GRID_POINTS,
                });
            }
        }
        if !(half_width > 0.0) {
            return Err(SimError::Config("grid half-width must be > 0".into()));
        }
        let (signal, w_signal) = axis(center, half_width, n_signal);
        let (idler, w_idler) = axis(center, half_width, n_idler);
        Ok(Self {
            signal,
            idler,
            w_signal,
            w_idler,
            center,
            half_width,
        })
    }

    /// As [`new`](Self::new) but also requires the signal/idler band and the
    /// pump band (2·center ± 2·half_width) to sit inside the model's window.
    pub fn new_in_window(
        model: &DispersionModel,
        center: f64,
        half_width: f64,
        n_signal: usize,
        n_idler: usize,
    ) -> Result<Self> {
        let (min, max) = model.window();
        for omega in [
            center - half_width,
            center + half_width,
            2.0 * (center - half_width),
            2.0 * (center + half_width),
        ] {
            if !model.contains(omega) {
                return Err(SimError::OutOfWindow { omega, min, max });
            }
        }
        Self::new(center, half_width, n_signal, n_idler)
    }

    pub fn n_signal(&self) -> usize {
        self.signal.len()
    }

    pub fn n_idler(&self) -> usize {
        self.idler.len()
    }

    pub fn signal(&self) -> &[f64] {
        &self.signal
    }

    pub fn idler(&self) -> &[f64] {
        &self.idler
    }

    pub fn w_signal(&self) -> &[f64] {
        &self.w_signal
    }

    pub fn w_idler(&self) -> &[f64] {
        &self.w_idler
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Index of the signal grid point closest to the center frequency.
    pub fn center_index(&self) -> usize {
        let mut best = 0;
        let mut dist = f64::INFINITY;
        for (j, &w) in self.signal.iter().enumerate() {
            let d = (w - self.center).abs();
            if d < dist {
                dist = d;
                best = j;
            }
        }
        best
    }

    /// Signal-axis step (uniform grid).
    pub fn signal_step(&self) -> f64 {
        2.0 * self.half_width / (self.signal.len() - 1) as f64
    }

    /// Quadrature weights restricted to the band [lo, hi]: each grid point
    /// contributes the overlap of its trapezoid cell with the band, so band
    /// edges falling between points get fractional end-weights.
    pub fn band_weights(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let first = self.signal[0];
        let last = *self.signal.last().unwrap();
        if lo < first - 1e-9 * self.half_width || hi > last + 1e-9 * self.half_width || lo >= hi {
            return Err(SimError::BandOutsideGrid { lo, hi });
        }
        let n = self.signal.len();
        let mut out = vec![0.0; n];
        for j in 0..n {
            // trapezoid cell of point j
            let cell_lo = if j == 0 {
                first
            } else {
                0.5 * (self.signal[j - 1] + self.signal[j])
            };
            let cell_hi = if j == n - 1 {
                last
            } else {
                0.5 * (self.signal[j] + self.signal[j + 1])
            };
            let overlap = (hi.min(cell_hi) - lo.max(cell_lo)).max(0.0);
            out[j] = overlap;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn three_point_pattern_scaled_up() {
        // trapezoid weights on a 3-point axis are {h/2, h, h/2}; the minimum
        // grid size enforces the same pattern at n = 17
        let g = FrequencyGrid::new(10.0, 4.0, 17, 17).unwrap();
        let h = 8.0 / 16.0;
        assert_relative_eq!(g.w_signal()[0], h / 2.0);
        assert_relative_eq!(g.w_signal()[8], h);
        assert_relative_eq!(g.w_signal()[16], h / 2.0);
        assert_relative_eq!(g.signal()[0], 6.0);
        assert_relative_eq!(g.signal()[8], 10.0);
        assert_relative_eq!(g.signal()[16], 14.0);
    }

    #[test]
    fn rejects_too_coarse() {
        assert!(matches!(
            FrequencyGrid::new(1.0, 1.0, 8, 32),
            Err(SimError::TooCoarse { .. })
        ));
    }

    #[test]
    fn window_check() {
        let m = DispersionModel::ktp_waveguide();
        let center = crate::constants::wavelength_to_omega(766e-9) / 2.0;
        assert!(FrequencyGrid::new_in_window(&m, center, 8e12, 64, 64).is_ok());
        // pump band 2(center+hw) leaves the window for huge half-widths
        assert!(matches!(
            FrequencyGrid::new_in_window(&m, center, 0.9 * center, 64, 64),
            Err(SimError::OutOfWindow { .. })
        ));
    }

    #[test]
    fn band_weights_full_band_match_quadrature() {
        let g = FrequencyGrid::new(0.0, 5.0, 33, 33).unwrap();
        let bw = g.band_weights(-5.0, 5.0).unwrap();
        for (a, b) in bw.iter().zip(g.w_signal()) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn band_weights_fractional_edges() {
        let g = FrequencyGrid::new(0.0, 5.0, 21, 21).unwrap();
        let bw = g.band_weights(-1.3, 2.2).unwrap();
        let total: f64 = bw.iter().sum();
        assert_relative_eq!(total, 3.5, max_relative = 1e-12);
        assert!(matches!(
            g.band_weights(-7.0, 1.0),
            Err(SimError::BandOutsideGrid { .. })
        ));
    }

    proptest! {
        #[test]
        fn weights_sum_to_span(hw in 0.1f64..1e13, n in 16usize..300) {
            let g = FrequencyGrid::new(1e15, hw, n, n).unwrap();
            let total: f64 = g.w_signal().iter().sum();
            prop_assert!((total / (2.0 * hw) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn axes_symmetric_about_center(n in 16usize..300) {
            let g = FrequencyGrid::new(2e15, 7e12, n, n).unwrap();
            let s = g.signal();
            for j in 0..n {
                let sum = s[j] + s[n - 1 - j];
                prop_assert!((sum / (2.0 * g.center()) - 1.0).abs() < 1e-12);
            }
            // strictly increasing
            for w in s.windows(2) {
                prop_assert!(w[1] > w[0]);
            }
        }

        #[test]
        fn band_monotone_in_width(delta in 0.05f64..4.9) {
            let g = FrequencyGrid::new(0.0, 5.0, 41, 41).unwrap();
            let narrow: f64 = g.band_weights(-delta, delta).unwrap().iter().sum();
            let wide: f64 = g.band_weights(-(delta + 0.1), delta + 0.1).unwrap().iter().sum();
            prop_assert!(wide >= narrow);
        }
    }
}
