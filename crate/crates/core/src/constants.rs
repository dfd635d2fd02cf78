//! Physical constants (SI units).

/// Speed of light in vacuum, m/s.
pub const C_LIGHT: f64 = 299_792_458.0;

/// Full turn in radians.
pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Converts a vacuum wavelength in metres to an angular frequency in rad/s.
pub fn wavelength_to_omega(lambda: f64) -> f64 {
    TWO_PI * C_LIGHT / lambda
}

/// Converts an angular frequency in rad/s to a vacuum wavelength in metres.
pub fn omega_to_wavelength(omega: f64) -> f64 {
    TWO_PI * C_LIGHT / omega
}
