//! CODATA 2018 physical constants (SI).

/// Speed of light in vacuum, m/s (exact).
pub const C: f64 = 299_792_458.0;
/// Elementary charge, C (exact).
pub const E_CHARGE: f64 = 1.602_176_634e-19;
/// Electron rest mass, kg.
pub const M_E: f64 = 9.109_383_701_5e-31;
/// Reduced Planck constant, J·s (exact).
pub const HBAR: f64 = 1.054_571_817_646_156_4e-34;
/// Standard gravity, m/s².
pub const G_STANDARD: f64 = 9.806_65;

/// Metres per micrometre.
pub const MICROMETRE: f64 = 1e-6;
/// Seconds per femtosecond.
pub const FEMTOSECOND: f64 = 1e-15;
