//! Per-column resonance tracking across a sweep.

use alloc::vec::Vec;

use super::lorentz::{fit_lorentzian_from, PeakFit, PeakGuess};
use crate::error::{Error, Result};
use crate::sweep::{ControlKind, Sweep2D};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResonanceTrack {
    pub control_kind: ControlKind,
    pub control_values: Vec<f64>,
    /// Fitted resonance per column [Hz]; `NaN` where masked.
    pub f_r: Vec<f64>,
    pub fwhm: Vec<f64>,
    /// Residual RMS of each fit.
    pub fit_quality: Vec<f64>,
    pub invalid_mask: Vec<bool>,
}

impl ResonanceTrack {
    pub fn len(&self) -> usize {
        self.control_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.control_values.is_empty()
    }

    pub fn valid_count(&self) -> usize {
        self.invalid_mask.iter().filter(|m| !**m).count()
    }

    /// `(control, f_r)` for every unmasked point.
    pub fn valid_points(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        (0..self.len())
            .filter(|&i| !self.invalid_mask[i])
            .map(|i| (i, self.control_values[i], self.f_r[i]))
    }

    /// Track with masked points filled by linear interpolation between the
    /// nearest valid neighbours (held constant beyond the ends).
    pub fn filled(&self) -> Result<Vec<f64>> {
        let valid: Vec<usize> = (0..self.len()).filter(|&i| !self.invalid_mask[i]).collect();
        if valid.is_empty() {
            return Err(Error::AllMasked);
        }
        let mut out = self.f_r.clone();
        for i in 0..self.len() {
            if !self.invalid_mask[i] {
                continue;
            }
            let right = valid.partition_point(|&v| v < i);
            out[i] = match (right.checked_sub(1).map(|l| valid[l]), valid.get(right)) {
                (Some(l), Some(&r)) => {
                    let t = (i - l) as f64 / (r - l) as f64;
                    self.f_r[l] * (1.0 - t) + self.f_r[r] * t
                }
                (Some(l), None) => self.f_r[l],
                (None, Some(&r)) => self.f_r[r],
                (None, None) => unreachable!(),
            };
        }
        Ok(out)
    }
}

/// Absorption-like trace used for fitting: `−|value|²`. For a one-port
/// reflection this is an exact Lorentzian peak on a constant offset.
pub fn column_trace(sweep: &Sweep2D, c: usize) -> Vec<f64> {
    sweep.column(c).iter().map(|v| -v.norm_sqr()).collect()
}

/// Fits every column; see [`track_column`].
pub fn track_resonance(sweep: &Sweep2D) -> Result<ResonanceTrack> {
    let flagged = sweep.invalid_columns();
    let n = sweep.n_controls();
    let mut track = ResonanceTrack {
        control_kind: sweep.control_kind,
        control_values: sweep.controls.clone(),
        f_r: Vec::with_capacity(n),
        fwhm: Vec::with_capacity(n),
        fit_quality: Vec::with_capacity(n),
        invalid_mask: Vec::with_capacity(n),
    };
    let mut prev: Option<PeakFit> = None;
    for c in 0..n {
        let fit = track_column(sweep, c, prev.as_ref())?;
        let ok = accept(sweep, &fit) && !flagged.contains(&c);
        track.f_r.push(if ok { fit.f0 } else { f64::NAN });
        track.fwhm.push(if ok { fit.fwhm } else { f64::NAN });
        track.fit_quality.push(fit.residual_rms);
        track.invalid_mask.push(!ok);
        if ok {
            prev = Some(fit);
        }
    }
    Ok(track)
}

/// Fits one column from its own maximum and, when given, also from the
/// previous column's result; the fit with the smaller residual wins.
pub fn track_column(sweep: &Sweep2D, c: usize, prev: Option<&PeakFit>) -> Result<PeakFit> {
    let y = column_trace(sweep, c);
    let own = fit_lorentzian_from(&sweep.freqs, &y, None)?;
    let Some(p) = prev else {
        return Ok(own);
    };
    let guess = PeakGuess {
        f0: p.f0,
        fwhm: p.fwhm,
        amplitude: p.amplitude,
        offset: p.offset,
    };
    let cont = fit_lorentzian_from(&sweep.freqs, &y, Some(guess))?;
    let better = match (own.converged, cont.converged) {
        (false, true) => true,
        (true, true) => cont.residual_rms < own.residual_rms,
        _ => false,
    };
    Ok(if better { cont } else { own })
}

fn accept(sweep: &Sweep2D, fit: &PeakFit) -> bool {
    let lo = sweep.freqs[0];
    let hi = sweep.freqs[sweep.n_freqs() - 1];
    fit.converged && fit.amplitude > 0.0 && fit.f0 >= lo && fit.f0 <= hi
}

#[cfg(test)]
mod tests {
    use super::*;

    fn track(mask: &[bool], f: &[f64]) -> ResonanceTrack {
        ResonanceTrack {
            control_kind: ControlKind::BiasVoltage,
            control_values: (0..f.len()).map(|i| i as f64).collect(),
            f_r: f.to_vec(),
            fwhm: alloc::vec![1.0; f.len()],
            fit_quality: alloc::vec![0.0; f.len()],
            invalid_mask: mask.to_vec(),
        }
    }

    #[test]
    fn fill_interpolates() {
        let t = track(
            &[true, false, true, true, false, true],
            &[0.0, 1.0, 0.0, 0.0, 4.0, 0.0],
        );
        assert_eq!(
            t.filled().unwrap(),
            alloc::vec![1.0, 1.0, 2.0, 3.0, 4.0, 4.0]
        );
        assert_eq!(t.valid_count(), 2);
        let all = track(&[true, true], &[0.0, 0.0]);
        assert_eq!(all.filled(), Err(Error::AllMasked));
    }
}
