//! Levenberg-Marquardt fit of `o + a h² / ((f − f0)² + h²)`, `h = fwhm/2`.

use crate::error::{Error, Result};
use crate::sweep::check_grid;

/// Result of a Lorentzian fit. Parameters are meaningful only when
/// `converged` is set.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PeakFit {
    pub f0: f64,
    pub fwhm: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub residual_rms: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Starting point for the optimizer, in data units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakGuess {
    pub f0: f64,
    pub fwhm: f64,
    pub amplitude: f64,
    pub offset: f64,
}

pub const MAX_ITERATIONS: usize = 200;
pub const STEP_TOLERANCE: f64 = 1e-10;

/// Fits a single Lorentzian peak, initialized from the maximum and its
/// half-maximum crossings.
pub fn fit_lorentzian(freqs: &[f64], y: &[f64]) -> Result<PeakFit> {
    fit_lorentzian_from(freqs, y, None)
}

/// Like [`fit_lorentzian`], optionally starting from `guess`.
pub fn fit_lorentzian_from(freqs: &[f64], y: &[f64], guess: Option<PeakGuess>) -> Result<PeakFit> {
    if freqs.len() != y.len() {
        return Err(Error::Shape(alloc::format!(
            "{} frequencies but {} samples",
            freqs.len(),
            y.len()
        )));
    }
    if freqs.len() < 5 {
        return Err(Error::TooShort {
            required: 5,
            got: freqs.len(),
        });
    }
    check_grid("freqs", freqs)?;

    let failed = PeakFit {
        f0: f64::NAN,
        fwhm: f64::NAN,
        amplitude: f64::NAN,
        offset: f64::NAN,
        residual_rms: f64::NAN,
        converged: false,
        iterations: 0,
    };
    let (ymin, ymax) = y
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if !(ymin.is_finite() && ymax.is_finite()) || ymax <= ymin {
        return Ok(failed);
    }

    // Work in a frame where both axes are O(1).
    let n = freqs.len();
    let fc = 0.5 * (freqs[0] + freqs[n - 1]);
    let fs = 0.5 * (freqs[n - 1] - freqs[0]);
    let ys = ymax - ymin;
    let xs: alloc::vec::Vec<f64> = freqs.iter().map(|f| (f - fc) / fs).collect();
    let yn: alloc::vec::Vec<f64> = y.iter().map(|v| (v - ymin) / ys).collect();

    let mut p = match guess {
        Some(g) => [
            (g.f0 - fc) / fs,
            0.5 * g.fwhm / fs,
            g.amplitude / ys,
            (g.offset - ymin) / ys,
        ],
        None => initial_guess(&xs, &yn),
    };
    if !p.iter().all(|v| v.is_finite()) || p[1] == 0.0 {
        p = initial_guess(&xs, &yn);
    }

    let mut cost = sum_sq(&xs, &yn, &p);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (jtj, jtr) = normal_equations(&xs, &yn, &p);
        let mut a = jtj;
        for i in 0..4 {
            a[i][i] += lambda * jtj[i][i].max(1e-300);
        }
        let Some(step) = solve4(a, jtr) else {
            lambda *= 10.0;
            if lambda > 1e30 {
                break;
            }
            continue;
        };
        let trial = [
            p[0] + step[0],
            p[1] + step[1],
            p[2] + step[2],
            p[3] + step[3],
        ];
        let rel = norm(&step) / (norm(&p) + 1e-300);
        let trial_cost = sum_sq(&xs, &yn, &trial);
        if trial_cost.is_finite() && trial_cost <= cost {
            p = trial;
            cost = trial_cost;
            lambda = (lambda * 0.1).max(1e-12);
        } else {
            lambda *= 10.0;
        }
        if rel < STEP_TOLERANCE {
            converged = true;
            break;
        }
        if lambda > 1e30 {
            break;
        }
    }

    let h = libm::fabs(p[1]);
    if !(h > 0.0) || !p.iter().all(|v| v.is_finite()) {
        return Ok(PeakFit {
            iterations,
            ..failed
        });
    }
    let rms = libm::sqrt(cost / n as f64) * ys;
    Ok(PeakFit {
        f0: fc + p[0] * fs,
        fwhm: 2.0 * h * fs,
        amplitude: p[2] * ys,
        offset: ymin + p[3] * ys,
        residual_rms: rms,
        converged,
        iterations,
    })
}

/// Evaluates the fitted model at `f`.
pub fn lorentzian(f: f64, fit: &PeakFit) -> f64 {
    let h = 0.5 * fit.fwhm;
    let d = f - fit.f0;
    fit.offset + fit.amplitude * h * h / (d * d + h * h)
}

fn initial_guess(xs: &[f64], y: &[f64]) -> [f64; 4] {
    let n = xs.len();
    let (imax, &top) = y
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |best, (i, v)| {
            if *v > *best.1 {
                (i, v)
            } else {
                best
            }
        });
    let mut sorted = y.to_vec();
    sorted.sort_by(f64::total_cmp);
    let base = sorted[n / 4];
    let half = base + 0.5 * (top - base);
    let crossing = |range: &mut dyn Iterator<Item = usize>| -> Option<f64> {
        let mut prev = imax;
        for i in range {
            if y[i] < half {
                let t = (y[prev] - half) / (y[prev] - y[i]);
                return Some(xs[prev] + t * (xs[i] - xs[prev]));
            }
            prev = i;
        }
        None
    };
    let left = crossing(&mut (0..imax).rev());
    let right = crossing(&mut (imax + 1..n));
    let span = xs[n - 1] - xs[0];
    let fwhm = match (left, right) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => 2.0 * (xs[imax] - l),
        (None, Some(r)) => 2.0 * (r - xs[imax]),
        (None, None) => 0.5 * span,
    }
    .max(2.0 * span / n as f64);
    [xs[imax], 0.5 * fwhm, top - base, base]
}

fn model(x: f64, p: &[f64; 4]) -> f64 {
    let d = x - p[0];
    let h2 = p[1] * p[1];
    p[3] + p[2] * h2 / (d * d + h2)
}

fn sum_sq(xs: &[f64], y: &[f64], p: &[f64; 4]) -> f64 {
    xs.iter()
        .zip(y)
        .map(|(&x, &v)| {
            let r = v - model(x, p);
            r * r
        })
        .sum()
}

fn normal_equations(xs: &[f64], y: &[f64], p: &[f64; 4]) -> ([[f64; 4]; 4], [f64; 4]) {
    let mut jtj = [[0.0; 4]; 4];
    let mut jtr = [0.0; 4];
    for (&x, &v) in xs.iter().zip(y) {
        let d = x - p[0];
        let h = p[1];
        let den = d * d + h * h;
        let l = h * h / den;
        let j = [
            p[2] * h * h * 2.0 * d / (den * den),
            p[2] * 2.0 * h * d * d / (den * den),
            l,
            1.0,
        ];
        let r = v - (p[3] + p[2] * l);
        for a in 0..4 {
            jtr[a] += j[a] * r;
            for b in 0..4 {
                jtj[a][b] += j[a] * j[b];
            }
        }
    }
    (jtj, jtr)
}

fn norm(v: &[f64; 4]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

/// Gaussian elimination with partial pivoting.
pub(crate) fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let piv =
            (col..4).max_by(|&i, &j| libm::fabs(a[i][col]).total_cmp(&libm::fabs(a[j][col])))?;
        if !(libm::fabs(a[piv][col]) > 0.0) {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let mut s = b[row];
        for k in row + 1..4 {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}
