//! Physical constants (SI 2019 exact values).

use core::f64::consts::PI;

/// Elementary charge [C].
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Planck constant [J·s].
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Reduced Planck constant ħ = h/2π [J·s].
pub const HBAR: f64 = PLANCK / (2.0 * PI);

/// Magnetic flux quantum Φ₀ = h/2e [Wb].
pub const FLUX_QUANTUM: f64 = PLANCK / (2.0 * ELEMENTARY_CHARGE);

/// The constant set as a value, for code that prefers to pass it around.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub e: f64,
    pub h: f64,
    pub hbar: f64,
    pub phi0: f64,
}

impl PhysicalConstants {
    pub const CODATA: Self = Self {
        e: ELEMENTARY_CHARGE,
        h: PLANCK,
        hbar: HBAR,
        phi0: FLUX_QUANTUM,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA
    }
}

/// Converts an energy in joules to the equivalent frequency `E/h`.
#[inline]
pub fn joules_to_hz(energy: f64) -> f64 {
    energy / PLANCK
}

/// Converts a frequency `E/h` back to joules.
#[inline]
pub fn hz_to_joules(freq: f64) -> f64 {
    freq * PLANCK
}
