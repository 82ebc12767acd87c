//! Mixed 4π/2π current-phase relations and the two-junction SQUID built
//! from them.

use core::f64::consts::PI;

use crate::constants::{FLUX_QUANTUM, PLANCK};
use crate::error::{non_negative, positive, Error, Result};

const TWO_PI: f64 = 2.0 * PI;
const FOUR_PI: f64 = 4.0 * PI;

/// Coarse phase grid used before local refinement.
pub const DEFAULT_PHASE_GRID: usize = 4096;

/// Number of coarse local maxima that are refined.
const REFINED_CANDIDATES: usize = 4;

/// Current-phase relation `I(φ) = w_4π sin(φ/2) + w_2π sin φ` of one junction.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JunctionCpr {
    /// Weight of the 4π-periodic term [A].
    pub w_4pi: f64,
    /// Weight of the 2π-periodic term [A].
    pub w_2pi: f64,
}

impl JunctionCpr {
    pub fn new(w_4pi: f64, w_2pi: f64) -> Result<Self> {
        non_negative("w_4pi", w_4pi)?;
        non_negative("w_2pi", w_2pi)?;
        if w_4pi == 0.0 && w_2pi == 0.0 {
            return Err(Error::ZeroJunction);
        }
        Ok(Self { w_4pi, w_2pi })
    }

    /// Conventional sinusoidal junction.
    pub fn pure_2pi(i0: f64) -> Result<Self> {
        Self::new(0.0, i0)
    }

    /// Purely 4π-periodic junction.
    pub fn pure_4pi(i0: f64) -> Result<Self> {
        Self::new(i0, 0.0)
    }

    /// Supercurrent at phase `phi` [rad].
    pub fn current(&self, phi: f64) -> f64 {
        junction_current(self, phi)
    }
}

/// `w_4π sin(φ/2) + w_2π sin φ`.
pub fn junction_current(cpr: &JunctionCpr, phi: f64) -> f64 {
    cpr.w_4pi * libm::sin(0.5 * phi) + cpr.w_2pi * libm::sin(phi)
}

/// Built-in weight presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum SquidPreset {
    Pure2Pi,
    Pure4Pi,
    /// Every junction carries equal 4π and 2π weights.
    EqualMix,
}

/// An external flux expressed both in Wb and in flux quanta.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FluxPoint {
    pub phi_ext: f64,
    pub phi_ratio: f64,
}

impl FluxPoint {
    pub fn from_flux(phi_ext: f64) -> Self {
        Self {
            phi_ext,
            phi_ratio: phi_ext / FLUX_QUANTUM,
        }
    }

    pub fn from_ratio(phi_ratio: f64) -> Self {
        Self {
            phi_ext: phi_ratio * FLUX_QUANTUM,
            phi_ratio,
        }
    }
}

/// Two junctions in a loop, tuned by a bias line through a series resistor.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SquidModel {
    pub j1: JunctionCpr,
    pub j2: JunctionCpr,
    /// Bias-line to loop mutual inductance [H].
    pub mutual_inductance: f64,
    /// Series resistor of the bias line [Ω].
    pub bias_resistor: f64,
}

impl SquidModel {
    pub fn new(
        j1: JunctionCpr,
        j2: JunctionCpr,
        mutual_inductance: f64,
        bias_resistor: f64,
    ) -> Result<Self> {
        positive("mutual_inductance", mutual_inductance)?;
        positive("bias_resistor", bias_resistor)?;
        // re-validate in case the junctions were built by struct literal
        JunctionCpr::new(j1.w_4pi, j1.w_2pi)?;
        JunctionCpr::new(j2.w_4pi, j2.w_2pi)?;
        Ok(Self {
            j1,
            j2,
            mutual_inductance,
            bias_resistor,
        })
    }

    /// Symmetric SQUID with per-junction scale `i0` [A].
    pub fn preset(
        preset: SquidPreset,
        i0: f64,
        mutual_inductance: f64,
        bias_resistor: f64,
    ) -> Result<Self> {
        let j = match preset {
            SquidPreset::Pure2Pi => JunctionCpr::pure_2pi(i0)?,
            SquidPreset::Pure4Pi => JunctionCpr::pure_4pi(i0)?,
            SquidPreset::EqualMix => JunctionCpr::new(i0, i0)?,
        };
        Self::new(j, j, mutual_inductance, bias_resistor)
    }

    /// `true` when any junction has a 4π-periodic component.
    pub fn has_4pi(&self) -> bool {
        self.j1.w_4pi > 0.0 || self.j2.w_4pi > 0.0
    }

    /// Sum of all four weights, an upper bound on the critical current.
    pub fn weight_sum(&self) -> f64 {
        self.j1.w_4pi + self.j1.w_2pi + self.j2.w_4pi + self.j2.w_2pi
    }

    /// Returns the same model with every weight multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let s = |j: JunctionCpr| JunctionCpr {
            w_4pi: j.w_4pi * lambda,
            w_2pi: j.w_2pi * lambda,
        };
        Self {
            j1: s(self.j1),
            j2: s(self.j2),
            ..*self
        }
    }
}

/// Total supercurrent with `φ₂ = φ₁ + 2πΦ/Φ₀`.
pub fn squid_current(model: &SquidModel, phi1: f64, flux: FluxPoint) -> f64 {
    junction_current(&model.j1, phi1) + junction_current(&model.j2, phi1 + TWO_PI * flux.phi_ratio)
}

/// The same current written out term by term.
pub fn squid_current_expanded(model: &SquidModel, phi1: f64, flux: FluxPoint) -> f64 {
    let a = PI * flux.phi_ratio;
    model.j1.w_4pi * libm::sin(0.5 * phi1)
        + model.j1.w_2pi * libm::sin(phi1)
        + model.j2.w_4pi * libm::sin(0.5 * phi1 + a)
        + model.j2.w_2pi * libm::sin(phi1 + 2.0 * a)
}

/// Critical current and the phase `φ₁ ∈ [0, 4π)` where it is reached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub i_c: f64,
    pub phi1: f64,
}

/// Maximum supercurrent magnitude over `φ₁ ∈ [0, 4π)`.
///
/// The magnitude is maximized, so a current flowing either way counts; this
/// keeps `I_c(Φ) = I_c(−Φ)` for asymmetric weights, where the signed maximum
/// at `−Φ` equals minus the signed minimum at `Φ`.
pub fn squid_critical_current(model: &SquidModel, flux: FluxPoint) -> f64 {
    critical_point(model, flux, DEFAULT_PHASE_GRID).i_c
}

/// [`squid_critical_current`] with an explicit coarse-grid size, also
/// returning the maximizing phase.
pub fn critical_point(model: &SquidModel, flux: FluxPoint, grid: usize) -> CriticalPoint {
    let n = grid.max(8);
    let step = FOUR_PI / n as f64;
    let f = |phi: f64| libm::fabs(squid_current(model, phi, flux));

    // The coarse samples are kept in a small ring of the best local maxima.
    let mut best: [(f64, usize); REFINED_CANDIDATES] = [(f64::NEG_INFINITY, 0); REFINED_CANDIDATES];
    let first = f(0.0);
    let mut prev = f(-step);
    let mut cur = first;
    for k in 0..n {
        let next = if k + 1 == n {
            first
        } else {
            f((k + 1) as f64 * step)
        };
        if cur >= prev && cur >= next {
            insert_candidate(&mut best, (cur, k));
        }
        prev = cur;
        cur = next;
    }

    let mut out = CriticalPoint {
        i_c: 0.0,
        phi1: 0.0,
    };
    for &(v, k) in best.iter() {
        if !v.is_finite() {
            continue;
        }
        let centre = k as f64 * step;
        let (phi, val) = golden_max(&f, centre - step, centre + step);
        let (phi, val) = if val >= v { (phi, val) } else { (centre, v) };
        if val > out.i_c {
            out = CriticalPoint {
                i_c: val,
                phi1: libm::fmod(phi + FOUR_PI, FOUR_PI),
            };
        }
    }
    out
}

fn insert_candidate(best: &mut [(f64, usize); REFINED_CANDIDATES], c: (f64, usize)) {
    let mut pos = best.len();
    while pos > 0 && best[pos - 1].0 < c.0 {
        pos -= 1;
    }
    if pos < best.len() {
        for i in (pos + 1..best.len()).rev() {
            best[i] = best[i - 1];
        }
        best[pos] = c;
    }
}

fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > 1e-10 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let m = 0.5 * (a + b);
    (m, f(m))
}

/// Flux produced by a bias voltage, `Φ = M V / R`.
pub fn flux_from_bias(model: &SquidModel, v_bias: f64) -> FluxPoint {
    FluxPoint::from_flux(model.mutual_inductance * v_bias / model.bias_resistor)
}

/// Bias-line current `V / R`.
pub fn bias_current(model: &SquidModel, v_bias: f64) -> f64 {
    v_bias / model.bias_resistor
}

/// Bias voltage that threads one flux quantum.
pub fn bias_period(model: &SquidModel) -> f64 {
    FLUX_QUANTUM * model.bias_resistor / model.mutual_inductance
}

/// Symmetric-SQUID approximation `f_t,max √|cos(πΦ/Φ₀)|`.
pub fn ft_vs_flux(f_t_max: f64, flux: FluxPoint) -> f64 {
    f_t_max * libm::sqrt(libm::fabs(libm::cos(PI * flux.phi_ratio)))
}

/// Josephson energy `Φ₀ I_c(Φ) / (2π h)` as a frequency.
pub fn ej_vs_flux(model: &SquidModel, flux: FluxPoint) -> f64 {
    FLUX_QUANTUM * squid_critical_current(model, flux) / (TWO_PI * PLANCK)
}

/// Transmon frequency through the full current-phase relation, calibrated
/// so that `Φ = 0` gives `f_t_max`: `f_t,max √(I_c(Φ)/I_c(0))`.
pub fn ft_vs_flux_cpr(model: &SquidModel, f_t_max: f64, flux: FluxPoint) -> f64 {
    let i0 = squid_critical_current(model, FluxPoint::from_ratio(0.0));
    ft_vs_flux_cpr_with_reference(model, f_t_max, i0, flux)
}

/// [`ft_vs_flux_cpr`] with a precomputed `I_c(0)`.
pub fn ft_vs_flux_cpr_with_reference(
    model: &SquidModel,
    f_t_max: f64,
    i_c0: f64,
    flux: FluxPoint,
) -> f64 {
    f_t_max * libm::sqrt(squid_critical_current(model, flux) / i_c0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::critical_current;

    const NA: f64 = 1e-9;

    fn model(a1: f64, b1: f64, a2: f64, b2: f64) -> SquidModel {
        SquidModel::new(
            JunctionCpr::new(a1, b1).unwrap(),
            JunctionCpr::new(a2, b2).unwrap(),
            1.551e-12,
            1500.0,
        )
        .unwrap()
    }

    #[test]
    fn junction_current_values() {
        let j = JunctionCpr::pure_2pi(3.0 * NA).unwrap();
        assert!((j.current(PI / 2.0) - 3.0 * NA).abs() < 1e-24);
        assert_eq!(JunctionCpr::new(1.0, 2.0).unwrap().current(0.0), 0.0);
        let m = JunctionCpr::new(NA, NA).unwrap();
        assert!((m.current(PI) - NA).abs() < 1e-24);
    }

    #[test]
    fn junction_validation() {
        assert_eq!(JunctionCpr::new(0.0, 0.0), Err(Error::ZeroJunction));
        assert!(JunctionCpr::new(-1e-9, 1e-9).is_err());
        assert!(SquidModel::preset(SquidPreset::Pure2Pi, NA, 0.0, 1500.0).is_err());
        assert!(SquidModel::preset(SquidPreset::Pure2Pi, NA, 1e-12, -1.0).is_err());
    }

    #[test]
    fn four_term_hand_value() {
        let m = model(NA, NA, NA, NA);
        let i = squid_current_expanded(&m, PI, FluxPoint::from_ratio(0.5));
        assert!((i - NA).abs() < 1e-22);
        assert!((squid_current(&m, PI, FluxPoint::from_ratio(0.5)) - NA).abs() < 1e-22);
    }

    #[test]
    fn symmetric_cases() {
        let m = model(0.0, NA, 0.0, NA);
        assert!(squid_critical_current(&m, FluxPoint::from_ratio(0.5)) < 1e-22);
        let j = m.j1;
        for k in 0..20 {
            let phi = 0.3 * k as f64;
            let two = squid_current(&m, phi, FluxPoint::from_ratio(0.0));
            assert!((two - 2.0 * j.current(phi)).abs() < 1e-22);
        }
    }

    #[test]
    fn pure_2pi_matches_cosine() {
        let i0 = 22.0 * NA;
        let m = model(0.0, i0, 0.0, i0);
        for k in 0..=40 {
            let r = k as f64 * 0.05;
            let ic = squid_critical_current(&m, FluxPoint::from_ratio(r));
            let exact = 2.0 * i0 * libm::fabs(libm::cos(PI * r));
            assert!(
                (ic - exact).abs() <= 1e-9 * exact.max(1e-3 * i0),
                "{r}: {ic} vs {exact}"
            );
        }
    }

    #[test]
    fn mixed_half_flux_stays_positive() {
        let m = model(NA, NA, NA, NA);
        assert!(ej_vs_flux(&m, FluxPoint::from_ratio(0.5)) > 0.0);
    }

    #[test]
    fn critical_phase_is_a_maximizer() {
        let m = model(0.7 * NA, 0.2 * NA, 0.1 * NA, 1.3 * NA);
        let flux = FluxPoint::from_ratio(0.37);
        let cp = critical_point(&m, flux, DEFAULT_PHASE_GRID);
        assert!((libm::fabs(squid_current(&m, cp.phi1, flux)) - cp.i_c).abs() < 1e-22);
        assert!((0.0..FOUR_PI).contains(&cp.phi1));
    }

    #[test]
    fn ej_path_round_trips_to_critical_current() {
        let i0 = 11.0 * NA;
        let m = model(0.0, i0, 0.0, i0);
        let ej = ej_vs_flux(&m, FluxPoint::from_ratio(0.0));
        assert!((critical_current(ej) - 2.0 * i0).abs() < 1e-9 * i0);
    }

    #[test]
    fn ft_vs_flux_values() {
        assert_eq!(ft_vs_flux(6.53e9, FluxPoint::from_ratio(0.0)), 6.53e9);
        assert!(ft_vs_flux(6.53e9, FluxPoint::from_ratio(0.5)) < 1e2);
        let third = ft_vs_flux(6.53e9, FluxPoint::from_ratio(1.0 / 3.0));
        assert!((third - 4.617e9).abs() < 0.001e9, "{third}");
    }

    #[test]
    fn cpr_path_agrees_with_cosine_for_pure_2pi() {
        let m = model(0.0, 20.0 * NA, 0.0, 20.0 * NA);
        for k in 0..=60 {
            let flux = FluxPoint::from_ratio(-1.5 + 0.05 * k as f64);
            let a = ft_vs_flux(6.53e9, flux);
            let b = ft_vs_flux_cpr(&m, 6.53e9, flux);
            if a > 1e-4 * 6.53e9 {
                assert!((a - b).abs() <= 1e-6 * a, "{flux:?}: {a} vs {b}");
            } else {
                assert!(b < 1e-3 * 6.53e9);
            }
        }
    }

    #[test]
    fn bias_mapping() {
        let m = model(0.0, NA, 0.0, NA);
        assert!((bias_current(&m, 7.0) - 4.667e-3).abs() < 1e-6);
        assert_eq!(flux_from_bias(&m, 0.0).phi_ext, 0.0);
        let p = flux_from_bias(&m, 2.0);
        assert!((p.phi_ratio - 1.0).abs() < 1e-3, "{}", p.phi_ratio);
        assert!((bias_period(&m) - 2.0).abs() < 1e-3);
    }
}
