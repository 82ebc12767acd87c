//! From a tracked cavity frequency to shifts, transmon frequencies and
//! critical currents.

use alloc::vec::Vec;

use super::track::ResonanceTrack;
use crate::circuit::{critical_current, infer_ft_from_shift, invert_josephson_energy};
use crate::error::{finite, positive, Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShiftSummary {
    /// Signed `f_r − f_bare` per point; `None` where masked.
    pub chi: Vec<Option<f64>>,
    pub chi_min: f64,
    pub chi_max: f64,
    pub delta_chi: f64,
}

/// Signed shift of every valid point relative to `f_bare`.
pub fn extract_shift(track: &ResonanceTrack, f_bare: f64) -> Result<ShiftSummary> {
    finite("f_bare", f_bare)?;
    let chi: Vec<Option<f64>> = (0..track.len())
        .map(|i| (!track.invalid_mask[i]).then(|| track.f_r[i] - f_bare))
        .collect();
    let (lo, hi) = chi
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| {
            (lo.min(c), hi.max(c))
        });
    if lo > hi {
        return Err(Error::AllMasked);
    }
    Ok(ShiftSummary {
        chi,
        chi_min: lo,
        chi_max: hi,
        delta_chi: hi - lo,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InvertedPoint {
    pub control: f64,
    pub chi: f64,
    pub f_t: f64,
    pub e_j_over_h: f64,
    pub i_c: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FluxInversion {
    /// One entry per track point; `None` where masked or not invertible.
    pub points: Vec<Option<InvertedPoint>>,
    pub f_t_max: f64,
    pub e_c_over_h: f64,
}

/// Applies `f_t = f_bare − g²/χ`, then `E_J = f_t²/8E_C`, then `I_c` to every
/// valid point. Points with zero shift or a non-physical `f_t` are masked.
pub fn invert_flux_map(
    track: &ResonanceTrack,
    g: f64,
    f_bare: f64,
    e_c_over_h: f64,
) -> Result<FluxInversion> {
    positive("g", g)?;
    positive("e_c_over_h", e_c_over_h)?;
    let shifts = extract_shift(track, f_bare)?;
    let points: Vec<Option<InvertedPoint>> = shifts
        .chi
        .iter()
        .enumerate()
        .map(|(i, chi)| {
            let chi = (*chi)?;
            let f_t = infer_ft_from_shift(chi, g, f_bare).ok()?;
            let e_j = invert_josephson_energy(f_t, e_c_over_h).ok()?;
            Some(InvertedPoint {
                control: track.control_values[i],
                chi,
                f_t,
                e_j_over_h: e_j,
                i_c: critical_current(e_j),
            })
        })
        .collect();
    let f_t_max = points
        .iter()
        .flatten()
        .map(|p| p.f_t)
        .fold(f64::NEG_INFINITY, f64::max);
    if !f_t_max.is_finite() {
        return Err(Error::AllMasked);
    }
    Ok(FluxInversion {
        points,
        f_t_max,
        e_c_over_h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::ControlKind;

    fn track(f: &[f64]) -> ResonanceTrack {
        ResonanceTrack {
            control_kind: ControlKind::BiasVoltage,
            control_values: (0..f.len()).map(|i| i as f64).collect(),
            f_r: f.to_vec(),
            fwhm: alloc::vec![1.0; f.len()],
            fit_quality: alloc::vec![0.0; f.len()],
            invalid_mask: alloc::vec![false; f.len()],
        }
    }

    #[test]
    fn shift_identities() {
        let t = track(&[4.955e9; 4]);
        let s = extract_shift(&t, 4.955e9).unwrap();
        assert!(s.chi.iter().all(|c| *c == Some(0.0)));
        let t = track(&[4.945e9, 4.9465e9]);
        let a = extract_shift(&t, 4.955e9).unwrap();
        let b = extract_shift(&t, 4.955e9 + 1e6).unwrap();
        for (x, y) in a.chi.iter().zip(&b.chi) {
            assert_eq!(x.unwrap() - 1e6, y.unwrap());
        }
        assert!((a.delta_chi - 1.5e6).abs() < 1e-3);
    }

    #[test]
    fn single_point_inversion() {
        let t = track(&[4.945e9]);
        let inv = invert_flux_map(&t, 116e6, 4.955e9, 222e6).unwrap();
        // referenced to f_bare: 4.955 GHz + 116²/10 MHz
        assert!((inv.f_t_max - 6.3006e9).abs() < 1e3);
        assert!((inv.f_t_max - 6.29e9).abs() < 0.015e9);
    }

    #[test]
    fn zero_shift_masked() {
        let t = track(&[4.955e9, 4.945e9]);
        let inv = invert_flux_map(&t, 116e6, 4.955e9, 222e6).unwrap();
        assert!(inv.points[0].is_none() && inv.points[1].is_some());
        let t = track(&[4.955e9]);
        assert_eq!(
            invert_flux_map(&t, 116e6, 4.955e9, 222e6),
            Err(Error::AllMasked)
        );
    }
}
