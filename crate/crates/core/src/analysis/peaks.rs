//! Simple peak finding on sampled curves.

use alloc::vec::Vec;

use crate::cavity::PeakConvention;
use crate::sweep::Sweep2D;

/// Vertex of the parabola through three equally spaced samples, as an offset
/// in samples from the middle one.
fn parabolic_offset(l: f64, c: f64, r: f64) -> f64 {
    let den = l - 2.0 * c + r;
    if den < 0.0 {
        (0.5 * (l - r) / den).clamp(-0.5, 0.5)
    } else {
        0.0
    }
}

/// Interior local maxima of `y(x)`, refined parabolically. `x` must be
/// uniform for the refinement to be exact on quadratics.
pub fn local_maxima(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..y.len().saturating_sub(1) {
        if y[i] > y[i - 1] && y[i] >= y[i + 1] {
            let o = parabolic_offset(y[i - 1], y[i], y[i + 1]);
            let dx = if o >= 0.0 {
                x[i + 1] - x[i]
            } else {
                x[i] - x[i - 1]
            };
            out.push(x[i] + o * dx);
        }
    }
    out
}

/// Highest point of one trace together with its prominence above the
/// higher of the two flanking minima.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TracePeak {
    pub freq: f64,
    pub height: f64,
    pub prominence: f64,
}

pub fn dominant_peak(x: &[f64], y: &[f64]) -> Option<TracePeak> {
    if x.is_empty() || x.len() != y.len() {
        return None;
    }
    let (i, &h) =
        y.iter().enumerate().fold(
            (0, &f64::NEG_INFINITY),
            |b, (i, v)| if *v > *b.1 { (i, v) } else { b },
        );
    let left = y[..=i].iter().cloned().fold(f64::INFINITY, f64::min);
    let right = y[i..].iter().cloned().fold(f64::INFINITY, f64::min);
    let freq = if i > 0 && i + 1 < y.len() {
        x[i] + parabolic_offset(y[i - 1], y[i], y[i + 1]) * (x[i + 1] - x[i])
    } else {
        x[i]
    };
    Some(TracePeak {
        freq,
        height: h,
        prominence: h - left.max(right),
    })
}

/// [`dominant_peak`] of every column under a peak convention.
pub fn column_peaks(sweep: &Sweep2D, convention: PeakConvention) -> Vec<TracePeak> {
    (0..sweep.n_controls())
        .filter_map(|c| {
            let y: Vec<f64> = sweep
                .column(c)
                .iter()
                .map(|v| convention.apply(*v))
                .collect();
            dominant_peak(&sweep.freqs, &y)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola_vertex() {
        let x: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|v| -(v - 0.437) * (v - 0.437)).collect();
        let m = local_maxima(&x, &y);
        assert_eq!(m.len(), 1);
        assert!((m[0] - 0.437).abs() < 1e-12);
        let p = dominant_peak(&x, &y).unwrap();
        assert!((p.freq - 0.437).abs() < 1e-12);
        assert!((p.prominence - (p.height + 0.437 * 0.437)).abs() < 1e-12);
    }

    #[test]
    fn flat_has_no_prominence() {
        let p = dominant_peak(&[0.0, 1.0, 2.0], &[1.0; 3]).unwrap();
        assert_eq!(p.prominence, 0.0);
        assert!(dominant_peak(&[], &[]).is_none());
    }
}
