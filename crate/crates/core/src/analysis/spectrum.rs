//! Magnitude spectrum of a real, zero-padded record.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Taper applied before the transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Window {
    #[default]
    Rectangular,
    Hann,
}

impl Window {
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann if n < 2 => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * libm::cos(2.0 * PI * i as f64 / (n - 1) as f64))
                .collect(),
        }
    }
}

/// One-sided amplitude spectrum of `x` zero-padded to `len` samples.
///
/// Bin `k` sits at `k / (len · dx)`. Magnitudes are scaled by `2 / Σw` so a
/// windowed cosine of amplitude `A` on an exact bin reads `A`.
pub fn amplitude_spectrum(x: &[f64], window: &[f64], len: usize) -> Vec<f64> {
    debug_assert!(len >= x.len());
    let wsum: f64 = window.iter().sum();
    let scale = if wsum > 0.0 { 2.0 / wsum } else { 0.0 };
    let (cos_t, sin_t) = twiddles(len);
    let xw: Vec<f64> = x.iter().zip(window).map(|(a, w)| a * w).collect();
    (0..=len / 2)
        .map(|k| {
            let mut re = 0.0;
            let mut im = 0.0;
            let mut idx = 0usize;
            for &v in &xw {
                re += v * cos_t[idx];
                im -= v * sin_t[idx];
                idx += k;
                if idx >= len {
                    idx -= len;
                }
            }
            scale * libm::sqrt(re * re + im * im)
        })
        .collect()
}

fn twiddles(len: usize) -> (Vec<f64>, Vec<f64>) {
    (0..len)
        .map(|j| {
            let a = 2.0 * PI * j as f64 / len as f64;
            (libm::cos(a), libm::sin(a))
        })
        .unzip()
}

/// Frequencies of the bins returned by [`amplitude_spectrum`].
pub fn bin_frequencies(len: usize, dx: f64) -> Vec<f64> {
    (0..=len / 2)
        .map(|k| k as f64 / (len as f64 * dx))
        .collect()
}
