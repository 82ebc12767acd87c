//! Fourier periodicity report and the 2π/4π verdict.

use alloc::string::String;
use alloc::vec::Vec;

use super::spectrum::{amplitude_spectrum, bin_frequencies, Window};
use crate::error::{positive, Error, Result};

/// Shortest record accepted.
pub const MIN_POINTS: usize = 16;
/// Relative spacing deviation tolerated on the control grid.
pub const UNIFORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Detrend {
    #[default]
    Mean,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Verdict {
    TwoPiDominated,
    MixedEvidence,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PeriodicityOptions {
    pub detrend: Detrend,
    pub window: Window,
    pub pad_factor: usize,
    pub threshold: f64,
    /// Half-width, in padded bins, excluded around the dominant and
    /// half-dominant components when estimating the noise floor.
    pub exclusion_bins: usize,
}

impl Default for PeriodicityOptions {
    fn default() -> Self {
        Self {
            detrend: Detrend::Mean,
            window: Window::Rectangular,
            pad_factor: 4,
            threshold: 3.0,
            exclusion_bins: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PeriodicityReport {
    /// Spectral frequencies in inverse control units.
    pub ft_freqs: Vec<f64>,
    pub ft_magnitudes: Vec<f64>,
    pub dominant_freq: f64,
    pub dominant_mag: f64,
    pub half_freq_mag: f64,
    pub noise_floor: f64,
    pub verdict: Verdict,
    pub threshold: f64,
    pub window: Window,
    /// Unit of the control axis, e.g. `V`; the spectrum is in its inverse.
    pub control_unit: String,
}

impl PeriodicityReport {
    /// Spacing of the padded spectral grid.
    pub fn bin_width(&self) -> f64 {
        self.ft_freqs.get(1).copied().unwrap_or(0.0)
    }
}

/// Returns the grid step, or an error when the grid is too short or not
/// uniform.
pub fn uniform_step(controls: &[f64]) -> Result<f64> {
    if controls.len() < MIN_POINTS {
        return Err(Error::TooShort {
            required: MIN_POINTS,
            got: controls.len(),
        });
    }
    let n = controls.len();
    let dx = (controls[n - 1] - controls[0]) / (n - 1) as f64;
    positive("control step", dx)?;
    for (i, w) in controls.windows(2).enumerate() {
        if libm::fabs((w[1] - w[0]) - dx) > UNIFORM_TOLERANCE * dx {
            return Err(Error::NonUniformGrid { index: i + 1 });
        }
    }
    Ok(dx)
}

fn detrended(controls: &[f64], signal: &[f64], mode: Detrend) -> Vec<f64> {
    let n = signal.len() as f64;
    let mean = signal.iter().sum::<f64>() / n;
    let mut out: Vec<f64> = match mode {
        Detrend::Mean => signal.iter().map(|v| v - mean).collect(),
        Detrend::Linear => {
            let xm = controls.iter().sum::<f64>() / n;
            let (mut sxy, mut sxx) = (0.0, 0.0);
            for (x, y) in controls.iter().zip(signal) {
                sxy += (x - xm) * (y - mean);
                sxx += (x - xm) * (x - xm);
            }
            let slope = sxy / sxx;
            controls
                .iter()
                .zip(signal)
                .map(|(x, y)| y - mean - slope * (x - xm))
                .collect()
        }
    };
    // A signal that is constant up to rounding carries no spectrum.
    let scale = signal.iter().fold(0.0_f64, |m, v| m.max(libm::fabs(*v)));
    if out.iter().all(|v| libm::fabs(*v) <= 1e-12 * scale) {
        out.iter_mut().for_each(|v| *v = 0.0);
    }
    out
}

/// Periodicity report of one trace sampled on a uniform control grid.
pub fn ft_periodicity(
    controls: &[f64],
    signal: &[f64],
    opts: &PeriodicityOptions,
    control_unit: &str,
) -> Result<PeriodicityReport> {
    ft_periodicity_rows(controls, &[signal], opts, control_unit)
}

/// Report over several traces sharing one control grid; the row spectra are
/// averaged before the components are located.
pub fn ft_periodicity_rows(
    controls: &[f64],
    rows: &[&[f64]],
    opts: &PeriodicityOptions,
    control_unit: &str,
) -> Result<PeriodicityReport> {
    let dx = uniform_step(controls)?;
    if rows.is_empty() {
        return Err(Error::EmptyGrid { name: "rows" });
    }
    let n = controls.len();
    for r in rows {
        if r.len() != n {
            return Err(Error::Shape(alloc::format!(
                "row of {} samples on a grid of {}",
                r.len(),
                n
            )));
        }
        if let Some(v) = r.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                name: "signal",
                value: *v,
            });
        }
    }
    let len = n * opts.pad_factor.max(1);
    let w = opts.window.coefficients(n);
    let mut mags = alloc::vec![0.0; len / 2 + 1];
    for r in rows {
        let s = amplitude_spectrum(&detrended(controls, r, opts.detrend), &w, len);
        for (m, v) in mags.iter_mut().zip(s) {
            *m += v;
        }
    }
    mags.iter_mut().for_each(|m| *m /= rows.len() as f64);
    let freqs = bin_frequencies(len, dx);
    Ok(summarize(freqs, mags, n as f64 * dx, opts, control_unit))
}

fn summarize(
    freqs: Vec<f64>,
    mags: Vec<f64>,
    range: f64,
    opts: &PeriodicityOptions,
    control_unit: &str,
) -> PeriodicityReport {
    let lo = 1.0 / range;
    let band_start = freqs
        .iter()
        .position(|&f| f >= lo * (1.0 - 1e-12))
        .unwrap_or(1);
    let mut dom = band_start;
    for k in band_start..mags.len() {
        if mags[k] > mags[dom] {
            dom = k;
        }
    }
    let dominant_freq = freqs[dom];
    let half = 0.5 * dominant_freq;
    let bw = freqs[1];
    let pos = half / bw;
    let i0 = (libm::floor(pos) as usize).min(mags.len() - 1);
    let i1 = (i0 + 1).min(mags.len() - 1);
    let t = pos - i0 as f64;
    let half_freq_mag = mags[i0] * (1.0 - t) + mags[i1] * t;
    let ih = libm::round(pos) as usize;

    let ex = opts.exclusion_bins;
    let near = |k: usize, c: usize| k + ex >= c && k <= c + ex;
    let mut rest: Vec<f64> = mags
        .iter()
        .enumerate()
        .filter(|(k, _)| !near(*k, dom) && !near(*k, ih))
        .map(|(_, m)| *m)
        .collect();
    let noise_floor = median(&mut rest).max(f64::MIN_POSITIVE);

    let mut report = PeriodicityReport {
        ft_freqs: freqs,
        dominant_mag: mags[dom],
        ft_magnitudes: mags,
        dominant_freq,
        half_freq_mag,
        noise_floor,
        verdict: Verdict::Inconclusive,
        threshold: opts.threshold,
        window: opts.window,
        control_unit: control_unit.into(),
    };
    report.verdict = classify_periodicity(&report, opts.threshold);
    report
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Verdict from the dominant and half-dominant magnitudes relative to the
/// noise floor. Components above the dominant frequency play no role.
pub fn classify_periodicity(report: &PeriodicityReport, threshold: f64) -> Verdict {
    let level = threshold * report.noise_floor;
    if !(report.dominant_mag >= level) {
        Verdict::Inconclusive
    } else if report.half_freq_mag >= level {
        Verdict::MixedEvidence
    } else {
        Verdict::TwoPiDominated
    }
}
