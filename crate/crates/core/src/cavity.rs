//! Cavity lineshape, the amplitude-dependent semiclassical pull and the
//! driven steady state.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{finite, non_negative, positive, Error, Result};

/// One-port cavity with external and internal loss rates (`/2π`, Hz).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CavityModel {
    pub f_bare: f64,
    pub kappa_ext: f64,
    pub kappa_int: f64,
}

impl CavityModel {
    pub fn new(f_bare: f64, kappa_ext: f64, kappa_int: f64) -> Result<Self> {
        positive("f_bare", f_bare)?;
        positive("kappa_ext", kappa_ext)?;
        non_negative("kappa_int", kappa_int)?;
        Ok(Self {
            f_bare,
            kappa_ext,
            kappa_int,
        })
    }

    /// Total linewidth `κ_ext + κ_int`.
    pub fn kappa(&self) -> f64 {
        self.kappa_ext + self.kappa_int
    }

    /// Loaded quality factor `f_bare / κ`.
    pub fn q_loaded(&self) -> f64 {
        self.f_bare / self.kappa()
    }
}

/// Qubit state entering the semiclassical pull.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum SigmaZ {
    Up,
    Down,
}

impl SigmaZ {
    pub fn value(self) -> f64 {
        match self {
            SigmaZ::Up => 1.0,
            SigmaZ::Down => -1.0,
        }
    }
}

/// Snapshot of a driven cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DriveState {
    pub amplitude: f64,
    pub sigma_z: SigmaZ,
    pub drive_freq: f64,
    pub drive_power_db: f64,
}

/// Reflection coefficient
/// `Γ = [(κ_ext − κ_int)/2 − iΔ] / [(κ_ext + κ_int)/2 − iΔ]`, `Δ = f − f_r`.
pub fn reflection_response(f: f64, f_r: f64, cavity: &CavityModel) -> Complex64 {
    if !f_r.is_finite() {
        return Complex64::new(1.0, 0.0);
    }
    let d = f - f_r;
    let num = Complex64::new(0.5 * (cavity.kappa_ext - cavity.kappa_int), -d);
    let den = Complex64::new(0.5 * (cavity.kappa_ext + cavity.kappa_int), -d);
    num / den
}

/// How a complex response is turned into a positive peak.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum PeakConvention {
    /// `1 − |Γ|`
    #[default]
    OneMinusAbs,
    /// `|1 − Γ|`
    Field,
}

impl PeakConvention {
    pub fn apply(self, gamma: Complex64) -> f64 {
        match self {
            PeakConvention::OneMinusAbs => 1.0 - gamma.norm(),
            PeakConvention::Field => (Complex64::new(1.0, 0.0) - gamma).norm(),
        }
    }
}

/// Amplitude-dependent pull `σ_z g² / √(2g²(A² + σ_z) + δ²)`.
pub fn bishop_chi(amplitude: f64, g: f64, delta: f64, sigma_z: SigmaZ) -> Result<f64> {
    bishop_chi_sq(amplitude * amplitude, g, delta, sigma_z)
}

fn bishop_chi_sq(a2: f64, g: f64, delta: f64, sigma_z: SigmaZ) -> Result<f64> {
    let s = sigma_z.value();
    let radicand = 2.0 * g * g * (a2 + s) + delta * delta;
    if !(radicand > 0.0) {
        return Err(Error::NonPositiveRadicand { radicand });
    }
    Ok(s * g * g / libm::sqrt(radicand))
}

/// Parameters of the self-consistent drive problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearDrive {
    pub cavity: CavityModel,
    pub g: f64,
    pub delta: f64,
    pub sigma_z: SigmaZ,
}

/// Points in the logarithmic scan of `A²`.
pub const STEADY_STATE_SCAN: usize = 10_000;

impl NonlinearDrive {
    fn residual(&self, x: f64, xi: f64, f_d: f64) -> Result<f64> {
        let chi = bishop_chi_sq(x, self.g, self.delta, self.sigma_z)?;
        let k = self.cavity.kappa();
        let det = f_d - self.cavity.f_bare - chi;
        Ok(x * (det * det + 0.25 * k * k) - xi * xi)
    }

    /// Every non-negative `A` solving `A² = ξ² / [(f_d − f_bare − χ(A))² + (κ/2)²]`,
    /// ascending.
    pub fn steady_state_amplitudes(&self, xi: f64, f_d: f64) -> Result<Vec<f64>> {
        non_negative("xi", xi)?;
        finite("f_d", f_d)?;
        if xi == 0.0 {
            return Ok(alloc::vec![0.0]);
        }
        let k = self.cavity.kappa();
        let s = xi * xi / (k * k);
        let lo = libm::log(s * 1e-6);
        let mut hi = libm::log(s * 1e6);
        // The residual is −ξ² at the origin and grows like x·(κ/2)², so a
        // root always exists; widen the scan until it is bracketed.
        loop {
            if self.residual(libm::exp(hi), xi, f_d)? > 0.0 {
                break;
            }
            hi += libm::log(1e6);
        }

        let mut roots = Vec::new();
        let mut x_prev = 0.0;
        let mut r_prev = -xi * xi;
        for i in 0..STEADY_STATE_SCAN {
            let t = i as f64 / (STEADY_STATE_SCAN - 1) as f64;
            let x = libm::exp(lo + (hi - lo) * t);
            let r = match self.residual(x, xi, f_d) {
                Ok(r) => r,
                // below the radicand's zero the model is undefined; skip
                Err(_) if i + 1 < STEADY_STATE_SCAN => {
                    x_prev = x;
                    r_prev = f64::NAN;
                    continue;
                }
                Err(e) => return Err(e),
            };
            if r == 0.0 {
                roots.push(x);
            } else if r_prev.is_finite() && r_prev != 0.0 && (r > 0.0) != (r_prev > 0.0) {
                roots.push(self.bisect(x_prev, x, r_prev, xi, f_d)?);
            }
            x_prev = x;
            r_prev = r;
        }
        Ok(roots.into_iter().map(libm::sqrt).collect())
    }

    fn bisect(&self, mut a: f64, mut b: f64, mut ra: f64, xi: f64, f_d: f64) -> Result<f64> {
        while (b - a) > 1e-12 * b {
            let m = 0.5 * (a + b);
            let rm = self.residual(m, xi, f_d)?;
            if rm == 0.0 {
                return Ok(m);
            }
            if (rm > 0.0) == (ra > 0.0) {
                a = m;
                ra = rm;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    }
}

/// Free-function form of [`NonlinearDrive::steady_state_amplitudes`].
pub fn steady_state_amplitudes(
    xi: f64,
    f_d: f64,
    cavity: &CavityModel,
    g: f64,
    delta: f64,
    sigma_z: SigmaZ,
) -> Result<Vec<f64>> {
    NonlinearDrive {
        cavity: *cavity,
        g,
        delta,
        sigma_z,
    }
    .steady_state_amplitudes(xi, f_d)
}

/// How coexisting steady states are combined into one response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum BranchWeighting {
    /// Complex mean over every branch.
    #[default]
    ComplexMean,
    /// Drop the middle (unstable) branch of three.
    StableOnly,
}

/// Converts relative drive power to drive strength, `ξ₀ 10^(P/20)`.
pub fn drive_strength(xi0: f64, power_db: f64) -> f64 {
    xi0 * libm::pow(10.0, power_db / 20.0)
}

/// Power sweep of the nonlinear cavity.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSweep {
    pub cavity: CavityModel,
    pub g: f64,
    /// Transmon frequency [Hz]; the qubit-cavity detuning follows from it.
    pub f_t: f64,
    pub xi0: f64,
    pub weighting: BranchWeighting,
    pub powers_db: Vec<f64>,
    pub freqs: Vec<f64>,
}

impl PowerSweep {
    /// Detuning magnitude and qubit state for the pull formula. A transmon
    /// above the cavity pulls it down, which the formula expresses as
    /// `σ_z = −1` with `|δ|`.
    pub fn drive(&self) -> NonlinearDrive {
        let delta = self.f_t - self.cavity.f_bare;
        NonlinearDrive {
            cavity: self.cavity,
            g: self.g,
            delta: libm::fabs(delta),
            sigma_z: if delta > 0.0 {
                SigmaZ::Down
            } else {
                SigmaZ::Up
            },
        }
    }

    /// Low-power pull `χ(0)`.
    pub fn chi0(&self) -> Result<f64> {
        let d = self.drive();
        bishop_chi(0.0, d.g, d.delta, d.sigma_z)
    }

    /// Response at every frequency for the `index`-th power.
    pub fn column(&self, index: usize) -> Result<Vec<Complex64>> {
        let drive = self.drive();
        let xi = drive_strength(self.xi0, self.powers_db[index]);
        self.freqs
            .iter()
            .map(|&f| {
                let amps = drive.steady_state_amplitudes(xi, f)?;
                let branch = |a: f64| -> Result<Complex64> {
                    let chi = bishop_chi(a, drive.g, drive.delta, drive.sigma_z)?;
                    Ok(reflection_response(
                        f,
                        self.cavity.f_bare + chi,
                        &self.cavity,
                    ))
                };
                let picked: Vec<f64> = match (self.weighting, amps.len()) {
                    (BranchWeighting::StableOnly, 3) => alloc::vec![amps[0], amps[2]],
                    _ => amps,
                };
                let mut sum = Complex64::new(0.0, 0.0);
                for &a in &picked {
                    sum += branch(a)?;
                }
                Ok(sum / picked.len() as f64)
            })
            .collect()
    }
}
