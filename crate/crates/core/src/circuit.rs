//! Capacitance network and the closed-form transmon/cavity relations.
//!
//! Every function here is a pure map between scalar quantities. Frequencies
//! are `/2π` values in Hz unless a name says otherwise (`_rad` suffix).

use core::f64::consts::PI;

use crate::constants::{ELEMENTARY_CHARGE, FLUX_QUANTUM, HBAR, PLANCK};
use crate::error::{finite, non_negative, positive, Error, Result};

/// Geometric and electrical constants of the qubit-cavity network.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CircuitParams {
    /// Island-to-ground shunt capacitance [F].
    pub c_q: f64,
    /// Island-to-cavity coupling capacitance [F].
    pub c_g: f64,
    /// Effective cavity capacitance [F].
    pub c_r: f64,
    /// Effective cavity inductance [H]; derivable from `c_r` and `f_bare`.
    pub l_r: Option<f64>,
    /// Line impedance [Ω].
    pub z0: f64,
    /// Effective relative permittivity.
    pub eps_r: f64,
    /// Bare cavity frequency [Hz].
    pub f_bare: f64,
}

impl CircuitParams {
    /// Builds the network, deriving `c_r` from the line geometry.
    pub fn new(c_q: f64, c_g: f64, f_bare: f64, z0: f64, eps_r: f64) -> Result<Self> {
        let c_r = cavity_capacitance(f_bare, z0, eps_r)?;
        Self::with_cavity_capacitance(c_q, c_g, c_r, f_bare, z0, eps_r)
    }

    /// Builds the network with an explicitly given cavity capacitance.
    pub fn with_cavity_capacitance(
        c_q: f64,
        c_g: f64,
        c_r: f64,
        f_bare: f64,
        z0: f64,
        eps_r: f64,
    ) -> Result<Self> {
        positive("c_q", c_q)?;
        positive("c_g", c_g)?;
        positive("c_r", c_r)?;
        positive("f_bare", f_bare)?;
        positive("z0", z0)?;
        positive("eps_r", eps_r)?;
        Ok(Self {
            c_q,
            c_g,
            c_r,
            l_r: None,
            z0,
            eps_r,
            f_bare,
        })
    }

    /// Total island capacitance `C_Σ = C_q + C_g`.
    pub fn c_sigma(&self) -> f64 {
        self.c_q + self.c_g
    }

    /// Capacitive division ratio `β = C_g / C_Σ`.
    pub fn beta(&self) -> f64 {
        self.c_g / self.c_sigma()
    }

    /// Cavity angular frequency `ω_r = 2π f_bare`.
    pub fn omega_r(&self) -> f64 {
        2.0 * PI * self.f_bare
    }

    /// Cavity inductance, either stored or `1/(ω_r² C_r)`.
    pub fn inductance(&self) -> f64 {
        self.l_r
            .unwrap_or_else(|| 1.0 / (self.omega_r() * self.omega_r() * self.c_r))
    }

    /// Charging energy of the island, `E_C/h`.
    pub fn charging_energy(&self) -> f64 {
        // c_sigma > 0 is guaranteed by construction
        ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (2.0 * self.c_sigma() * PLANCK)
    }
}

/// Derived transmon quantities, all energies as frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TransmonParams {
    pub e_c_over_h: f64,
    pub e_j_over_h: f64,
    pub f_t: f64,
    pub i_c: f64,
    pub g_over_2pi: f64,
}

impl TransmonParams {
    /// Runs the low-power inference chain: a signed cavity pull `chi`
    /// observed at dressed frequency `f_r` gives `f_t`, then `E_J` through
    /// the charging energy of `c_sigma`, then the critical current.
    pub fn from_dispersive_shift(chi: f64, g: f64, f_r: f64, c_sigma: f64) -> Result<Self> {
        let f_t = infer_ft_from_shift(chi, g, f_r)?;
        let e_c = charging_energy(c_sigma)?;
        let e_j = invert_josephson_energy(f_t, e_c)?;
        Ok(Self {
            e_c_over_h: e_c,
            e_j_over_h: e_j,
            f_t,
            i_c: critical_current(e_j),
            g_over_2pi: g,
        })
    }
}

/// Effective capacitance of a transmission-line cavity,
/// `C_r = ε_r π / (2 ω_r Z₀)`.
pub fn cavity_capacitance(f_bare: f64, z0: f64, eps_r: f64) -> Result<f64> {
    positive("f_bare", f_bare)?;
    positive("z0", z0)?;
    positive("eps_r", eps_r)?;
    Ok(eps_r * PI / (2.0 * (2.0 * PI * f_bare) * z0))
}

/// Qubit-cavity coupling `g = β √(2e²ω_r / ħC_r)` in rad/s.
pub fn coupling_strength(params: &CircuitParams) -> f64 {
    let e2 = ELEMENTARY_CHARGE * ELEMENTARY_CHARGE;
    params.beta() * libm::sqrt(2.0 * e2 * params.omega_r() / (HBAR * params.c_r))
}

/// [`coupling_strength`] expressed as `g/2π` in Hz.
pub fn coupling_strength_hz(params: &CircuitParams) -> f64 {
    coupling_strength(params) / (2.0 * PI)
}

/// Charging energy `E_C/h = e²/(2 C_Σ h)`.
pub fn charging_energy(c_sigma: f64) -> Result<f64> {
    positive("c_sigma", c_sigma)?;
    Ok(ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (2.0 * c_sigma * PLANCK))
}

/// Transmon 0→1 frequency `√(8 E_J E_C)`.
pub fn transmon_frequency(e_j_over_h: f64, e_c_over_h: f64) -> Result<f64> {
    non_negative("e_j_over_h", e_j_over_h)?;
    non_negative("e_c_over_h", e_c_over_h)?;
    Ok(libm::sqrt(8.0 * e_j_over_h * e_c_over_h))
}

/// Inverse of [`transmon_frequency`]: `E_J = f_t² / (8 E_C)`.
pub fn invert_josephson_energy(f_t: f64, e_c_over_h: f64) -> Result<f64> {
    non_negative("f_t", f_t)?;
    positive("e_c_over_h", e_c_over_h)?;
    Ok(f_t * f_t / (8.0 * e_c_over_h))
}

/// Critical current from the Josephson energy, `I_c = 2π h (E_J/h) / Φ₀`.
pub fn critical_current(e_j_over_h: f64) -> f64 {
    2.0 * PI * PLANCK * e_j_over_h / FLUX_QUANTUM
}

/// Josephson energy `E_J/h = Φ₀ I_c / (2π h)`.
pub fn josephson_energy(i_c: f64) -> f64 {
    FLUX_QUANTUM * i_c / (2.0 * PI * PLANCK)
}

/// Signed dispersive shift `χ = g² / (f_ref − f_t)`; negative when the
/// transmon sits above the reference frequency.
pub fn dispersive_shift(g: f64, f_ref: f64, f_t: f64) -> Result<f64> {
    finite("g", g)?;
    finite("f_ref", f_ref)?;
    finite("f_t", f_t)?;
    let delta = f_ref - f_t;
    if delta == 0.0 {
        return Err(Error::Degenerate { freq: f_ref });
    }
    Ok(g * g / delta)
}

/// Inverse of [`dispersive_shift`]: `f_t = f_ref − g²/χ`, with `chi` the
/// signed pull (dressed minus bare).
pub fn infer_ft_from_shift(chi: f64, g: f64, f_ref: f64) -> Result<f64> {
    finite("chi", chi)?;
    finite("g", g)?;
    finite("f_ref", f_ref)?;
    if chi == 0.0 {
        return Err(Error::ZeroShift);
    }
    Ok(f_ref - g * g / chi)
}

/// Purcell-limited lifetime `T₁ = Δ²/(κ g²)` [s], evaluated with angular
/// frequencies; all arguments are `/2π` values in Hz.
pub fn purcell_t1(delta: f64, kappa: f64, g: f64) -> Result<f64> {
    positive("delta", delta)?;
    positive("kappa", kappa)?;
    positive("g", g)?;
    Ok(delta * delta / (kappa * g * g) / (2.0 * PI))
}
