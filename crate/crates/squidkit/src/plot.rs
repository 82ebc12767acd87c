//! Self-contained SVG figures. Heatmaps are rasterized at grid resolution
//! into an embedded PNG; everything else is vector.

use std::fmt::Write as _;

use base64::Engine as _;
use squidkit_core::analysis::{FluxInversion, PeriodicityReport, ResonanceTrack};
use squidkit_core::sweep::{Sweep2D, META_FT_TRACK};

use crate::record::{Payload, ResultRecord};

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 110.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const VIRIDIS: [[f64; 3]; 6] = [
    [68.0, 1.0, 84.0],
    [65.0, 68.0, 135.0],
    [42.0, 120.0, 142.0],
    [34.0, 168.0, 132.0],
    [122.0, 209.0, 81.0],
    [253.0, 231.0, 37.0],
];

fn colormap(t: f64) -> [u8; 3] {
    let t = if t.is_finite() {
        t.clamp(0.0, 1.0)
    } else {
        0.0
    };
    let x = t * (VIRIDIS.len() - 1) as f64;
    let i = (x.floor() as usize).min(VIRIDIS.len() - 2);
    let u = x - i as f64;
    let mut out = [0u8; 3];
    for (k, o) in out.iter_mut().enumerate() {
        *o = (VIRIDIS[i][k] * (1.0 - u) + VIRIDIS[i + 1][k] * u).round() as u8;
    }
    out
}

fn png_data_uri(width: usize, height: usize, rgb: &[u8]) -> String {
    let mut buf = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut buf, width as u32, height as u32);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc.write_header().expect("in-memory PNG header");
        w.write_image_data(rgb).expect("in-memory PNG data");
    }
    format!(
        "data:image/png;base64,{}",
        base64::engine::general_purpose::STANDARD.encode(buf)
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn finite_range(v: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = v
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
            (a.min(x), b.max(x))
        });
    if lo > hi {
        None
    } else if lo == hi {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.05 };
        Some((lo - pad, hi + pad))
    } else {
        Some((lo, hi))
    }
}

/// Round tick positions covering `[lo, hi]`, with a label formatter.
fn ticks(lo: f64, hi: f64) -> (Vec<f64>, usize) {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let decimals = (0..12)
        .find(|d| {
            let scaled = step * 10f64.powi(*d);
            (scaled - scaled.round()).abs() < 1e-6 * scaled
        })
        .unwrap_or(12) as usize;
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    ((first..=last).map(|k| k as f64 * step).collect(), decimals)
}

fn tick_label(t: f64, decimals: usize, step: f64) -> String {
    if step >= 1e4 || (step > 0.0 && step < 1e-3) {
        if t == 0.0 {
            return "0".into();
        }
        let exp = step.log10().floor();
        let extra = usize::from((step / 10f64.powf(exp) - 2.5).abs() < 1e-9);
        let p = (t.abs().log10().floor() - exp).max(0.0) as usize + extra;
        format!("{t:.p$e}")
    } else {
        format!("{t:.decimals$}")
    }
}

struct Axis {
    lo: f64,
    hi: f64,
    label: String,
}

struct Figure {
    svg: String,
    x: Axis,
    y: Axis,
}

impl Figure {
    fn new(title: &str, x: Axis, y: Axis) -> Self {
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="13">"#
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(title)
        );
        Self { svg, x, y }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.lo) / (self.x.hi - self.x.lo) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.lo) / (self.y.hi - self.y.lo) * (HEIGHT - TOP - BOTTOM)
    }

    fn frame(&mut self) {
        let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
        let _ = writeln!(
            self.svg,
            r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            x1 - x0,
            y1 - y0
        );
        let (xt, xd) = ticks(self.x.lo, self.x.hi);
        let xs = xt.get(1).zip(xt.first()).map_or(1.0, |(b, a)| b - a);
        for t in xt {
            let p = self.px(t);
            let _ = writeln!(
                self.svg,
                r#"<line x1="{p:.2}" y1="{y1}" x2="{p:.2}" y2="{}" stroke="black"/>"#,
                y1 + 5.0
            );
            let _ = writeln!(
                self.svg,
                r#"<text x="{p:.2}" y="{}" text-anchor="middle">{}</text>"#,
                y1 + 20.0,
                tick_label(t, xd, xs)
            );
        }
        let (yt, yd) = ticks(self.y.lo, self.y.hi);
        let ys = yt.get(1).zip(yt.first()).map_or(1.0, |(b, a)| b - a);
        for t in yt {
            let p = self.py(t);
            let _ = writeln!(
                self.svg,
                r#"<line x1="{}" y1="{p:.2}" x2="{x0}" y2="{p:.2}" stroke="black"/>"#,
                x0 - 5.0
            );
            let _ = writeln!(
                self.svg,
                r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
                x0 - 8.0,
                p + 4.0,
                tick_label(t, yd, ys)
            );
        }
        let _ = writeln!(
            self.svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 15.0,
            escape(&self.x.label)
        );
        let _ = writeln!(
            self.svg,
            r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
            (y0 + y1) / 2.0,
            escape(&self.y.label)
        );
    }

    /// Polyline in data coordinates, broken at non-finite points. `map_y`
    /// converts from the series' own axis to plot pixels.
    fn series(&mut self, xs: &[f64], ys: &[f64], color: &str, map_y: impl Fn(&Self, f64) -> f64) {
        let mut runs: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
        for (x, y) in xs.iter().zip(ys) {
            if x.is_finite() && y.is_finite() {
                runs.last_mut()
                    .unwrap()
                    .push((self.px(*x), map_y(self, *y)));
            } else if !runs.last().unwrap().is_empty() {
                runs.push(Vec::new());
            }
        }
        for run in runs.iter().filter(|r| !r.is_empty()) {
            let pts: Vec<String> = run.iter().map(|(a, b)| format!("{a:.2},{b:.2}")).collect();
            let _ = writeln!(
                self.svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                pts.join(" ")
            );
            if run.len() == 1 {
                let _ = writeln!(
                    self.svg,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#,
                    run[0].0, run[0].1
                );
            }
        }
    }

    fn marker(&mut self, x: f64, color: &str, text: &str, row: usize) {
        let p = self.px(x);
        let _ = writeln!(
            self.svg,
            r#"<line x1="{p:.2}" y1="{TOP}" x2="{p:.2}" y2="{}" stroke="{color}" stroke-dasharray="6 4"/>"#,
            HEIGHT - BOTTOM
        );
        let _ = writeln!(
            self.svg,
            r#"<text x="{}" y="{}" fill="{color}" text-anchor="end">{}</text>"#,
            WIDTH - RIGHT - 6.0,
            TOP + 16.0 + 16.0 * row as f64,
            escape(text)
        );
    }

    fn finish(mut self) -> String {
        self.svg.push_str("</svg>\n");
        self.svg
    }
}

fn control_label(sweep_unit: &str, name: &str) -> String {
    format!("{name} [{sweep_unit}]")
}

fn parse_list(s: &str) -> Vec<f64> {
    s.split(',')
        .map(|t| t.trim().parse().unwrap_or(f64::NAN))
        .collect()
}

/// Heatmap of `|value|`, or a linecut when one axis has a single point.
pub fn sweep_svg(sweep: &Sweep2D) -> String {
    let kind = sweep.control_kind;
    let ctrl = control_label(kind.unit(), kind.label());
    let freqs_ghz: Vec<f64> = sweep.freqs.iter().map(|f| f * 1e-9).collect();
    let mags: Vec<f64> = sweep.values.iter().map(|v| v.norm()).collect();
    let (m_lo, m_hi) = finite_range(mags.iter().copied()).unwrap_or((0.0, 1.0));

    if sweep.n_controls() == 1 || sweep.n_freqs() == 1 {
        let (xs, label, title) = if sweep.n_controls() == 1 {
            (
                freqs_ghz.clone(),
                "frequency [GHz]".to_string(),
                format!(
                    "linecut at {} = {} {}",
                    kind.label(),
                    sweep.controls[0],
                    kind.unit()
                ),
            )
        } else {
            (
                sweep.controls.clone(),
                ctrl,
                format!("linecut at {} GHz", freqs_ghz[0]),
            )
        };
        let (x_lo, x_hi) = finite_range(xs.iter().copied()).unwrap_or((0.0, 1.0));
        let mut fig = Figure::new(
            &title,
            Axis {
                lo: x_lo,
                hi: x_hi,
                label,
            },
            Axis {
                lo: m_lo,
                hi: m_hi,
                label: "|Γ|".into(),
            },
        );
        fig.frame();
        fig.series(&xs, &mags, "#1f4e9c", Figure::py);
        return fig.finish();
    }

    let (nc, nf) = (sweep.n_controls(), sweep.n_freqs());
    let mut rgb = Vec::with_capacity(nc * nf * 3);
    for f in (0..nf).rev() {
        for c in 0..nc {
            rgb.extend(colormap((mags[c * nf + f] - m_lo) / (m_hi - m_lo)));
        }
    }
    let half_c = |i: usize| 0.5 * (sweep.controls[i + 1] - sweep.controls[i]);
    let half_f = |i: usize| 0.5 * (freqs_ghz[i + 1] - freqs_ghz[i]);
    let x = Axis {
        lo: sweep.controls[0] - half_c(0),
        hi: sweep.controls[nc - 1] + half_c(nc - 2),
        label: ctrl,
    };
    let y = Axis {
        lo: freqs_ghz[0] - half_f(0),
        hi: freqs_ghz[nf - 1] + half_f(nf - 2),
        label: "frequency [GHz]".into(),
    };
    let title = format!("{} sweep, |Γ|", kind.label());
    let mut fig = Figure::new(&title, x, y);
    let _ = writeln!(
        fig.svg,
        r#"<image x="{LEFT}" y="{TOP}" width="{}" height="{}" preserveAspectRatio="none" style="image-rendering:pixelated" href="{}"/>"#,
        WIDTH - LEFT - RIGHT,
        HEIGHT - TOP - BOTTOM,
        png_data_uri(nc, nf, &rgb)
    );
    fig.frame();

    // colour bar
    let bar: Vec<u8> = (0..128)
        .rev()
        .flat_map(|i| colormap(i as f64 / 127.0))
        .collect();
    let bx = WIDTH - 28.0;
    let _ = writeln!(
        fig.svg,
        r#"<image x="{bx}" y="{TOP}" width="12" height="{}" preserveAspectRatio="none" href="{}"/>"#,
        HEIGHT - TOP - BOTTOM,
        png_data_uri(1, 128, &bar)
    );
    let _ = writeln!(
        fig.svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="11">{m_hi:.3}</text>"#,
        bx + 6.0,
        TOP - 4.0
    );
    let _ = writeln!(
        fig.svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="11">{m_lo:.3}</text>"#,
        bx + 6.0,
        HEIGHT - BOTTOM + 14.0
    );

    if let Some(ft) = sweep.meta.get(META_FT_TRACK).map(|s| parse_list(s)) {
        if ft.len() == nc {
            let ft_ghz: Vec<f64> = ft.iter().map(|f| f * 1e-9).collect();
            if let Some((lo, hi)) = finite_range(ft_ghz.iter().copied()) {
                let map = move |_: &Figure, v: f64| {
                    HEIGHT - BOTTOM - (v - lo) / (hi - lo) * (HEIGHT - TOP - BOTTOM)
                };
                fig.series(&sweep.controls, &ft_ghz, "#2ca02c", map);
                let ax = WIDTH - RIGHT;
                let (tks, d) = ticks(lo, hi);
                for t in tks {
                    let p = map(&fig, t);
                    let _ = writeln!(
                        fig.svg,
                        r##"<line x1="{ax}" y1="{p:.2}" x2="{}" y2="{p:.2}" stroke="#2ca02c"/>"##,
                        ax + 5.0
                    );
                    let _ = writeln!(
                        fig.svg,
                        r##"<text x="{}" y="{:.2}" fill="#2ca02c" font-size="11">{t:.d$}</text>"##,
                        ax + 7.0,
                        p + 4.0
                    );
                }
                let cy = (TOP + HEIGHT - BOTTOM) / 2.0;
                let lx = ax + 62.0;
                let _ = writeln!(
                    fig.svg,
                    r##"<text x="{lx}" y="{cy}" fill="#2ca02c" text-anchor="middle" transform="rotate(90 {lx} {cy})">f_t [GHz]</text>"##
                );
            }
        }
    }
    fig.finish()
}

fn xy_svg(title: &str, xs: &[f64], ys: &[f64], x_label: String, y_label: &str) -> String {
    let (x_lo, x_hi) = finite_range(xs.iter().copied()).unwrap_or((0.0, 1.0));
    let (y_lo, y_hi) = finite_range(ys.iter().copied()).unwrap_or((0.0, 1.0));
    let mut fig = Figure::new(
        title,
        Axis {
            lo: x_lo,
            hi: x_hi,
            label: x_label,
        },
        Axis {
            lo: y_lo,
            hi: y_hi,
            label: y_label.into(),
        },
    );
    fig.frame();
    fig.series(xs, ys, "#1f4e9c", Figure::py);
    fig.finish()
}

pub fn track_svg(t: &ResonanceTrack) -> String {
    let ys: Vec<f64> = (0..t.len())
        .map(|i| {
            if t.invalid_mask[i] {
                f64::NAN
            } else {
                t.f_r[i] * 1e-9
            }
        })
        .collect();
    let k = t.control_kind;
    xy_svg(
        "tracked cavity frequency",
        &t.control_values,
        &ys,
        control_label(k.unit(), k.label()),
        "f_r [GHz]",
    )
}

pub fn inversion_svg(inv: &FluxInversion, control_unit: &str) -> String {
    let (xs, ys): (Vec<f64>, Vec<f64>) = inv
        .points
        .iter()
        .flatten()
        .map(|p| (p.control, p.f_t * 1e-9))
        .unzip();
    let title = format!(
        "inferred transmon frequency, f_t,max = {:.4} GHz",
        inv.f_t_max * 1e-9
    );
    xy_svg(
        &title,
        &xs,
        &ys,
        control_label(control_unit, "bias"),
        "f_t [GHz]",
    )
}

pub fn periodicity_svg(p: &PeriodicityReport) -> String {
    let unit = &p.control_unit;
    let (x_lo, x_hi) = finite_range(p.ft_freqs.iter().copied()).unwrap_or((0.0, 1.0));
    let (_, y_hi) = finite_range(p.ft_magnitudes.iter().copied()).unwrap_or((0.0, 1.0));
    let mut fig = Figure::new(
        &format!("Fourier spectrum, verdict: {:?}", p.verdict),
        Axis {
            lo: x_lo,
            hi: x_hi,
            label: format!("frequency [1/{unit}]"),
        },
        Axis {
            lo: 0.0,
            hi: y_hi * 1.1,
            label: "amplitude".into(),
        },
    );
    fig.frame();
    fig.series(&p.ft_freqs, &p.ft_magnitudes, "#1f4e9c", Figure::py);
    fig.marker(
        p.dominant_freq,
        "#d62728",
        &format!("dominant {:.4} /{unit}", p.dominant_freq),
        0,
    );
    fig.marker(
        p.dominant_freq / 2.0,
        "#ff7f0e",
        &format!("half-dominant {:.4} /{unit}", p.dominant_freq / 2.0),
        1,
    );
    let nf = p.threshold * p.noise_floor;
    if nf.is_finite() && nf < fig.y.hi {
        let y = fig.py(nf);
        let _ = writeln!(
            fig.svg,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#7f7f7f" stroke-dasharray="2 3"/>"##,
            WIDTH - RIGHT
        );
        let _ = writeln!(
            fig.svg,
            r##"<text x="{}" y="{:.2}" fill="#7f7f7f" font-size="11">threshold x floor</text>"##,
            WIDTH - RIGHT + 4.0,
            y + 4.0
        );
    }
    fig.finish()
}

/// SVG for any record.
pub fn record_svg(rec: &ResultRecord) -> String {
    match &rec.payload {
        Payload::Sweep(s) => sweep_svg(s),
        Payload::Track(t) => track_svg(t),
        Payload::Inversion(i) => inversion_svg(i, "V"),
        Payload::Periodicity(p) => periodicity_svg(p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tick_positions() {
        let (t, d) = ticks(4.925, 4.985);
        assert!((3..=7).contains(&t.len()));
        assert!(t.iter().all(|x| (4.925..=4.985).contains(x)));
        assert_eq!(d, 2);
        let (t, _) = ticks(-8.025, 7.975);
        assert!(t.contains(&0.0));
        assert_eq!(tick_label(2.5e6, 0, 2.5e6), "2.5e6");
        assert_eq!(tick_label(1e7, 0, 2.5e6), "1.00e7");
        assert_eq!(tick_label(4.96, 2, 0.02), "4.96");
    }

    #[test]
    fn colormap_endpoints() {
        assert_eq!(colormap(0.0), [68, 1, 84]);
        assert_eq!(colormap(1.0), [253, 231, 37]);
        assert_eq!(colormap(f64::NAN), [68, 1, 84]);
    }
}
