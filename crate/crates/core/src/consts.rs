//! Physical constants (SI).

/// Speed of light in vacuum, m/s (exact).
pub const C0: f64 = 299_792_458.0;
/// Vacuum permeability, H/m.
pub const MU0: f64 = 1.256_637_062_12e-6;
/// Vacuum permittivity, F/m.
pub const EPS0: f64 = 1.0 / (MU0 * C0 * C0);
/// Free-space wave impedance, ohms.
pub const ETA0: f64 = MU0 * C0;

pub const MM: f64 = 1e-3;
pub const GHZ: f64 = 1e9;
