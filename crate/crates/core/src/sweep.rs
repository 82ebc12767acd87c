//! Two-dimensional response maps and the flux-sweep generator.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::cavity::{reflection_response, CavityModel, PowerSweep};
use crate::error::{non_negative, Error, Result};
use crate::squid::{
    flux_from_bias, ft_vs_flux, ft_vs_flux_cpr_with_reference, squid_critical_current, FluxPoint,
    SquidModel,
};

/// What the control axis of a sweep represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ControlKind {
    BiasVoltage,
    Power,
}

impl ControlKind {
    pub fn unit(self) -> &'static str {
        match self {
            ControlKind::BiasVoltage => "V",
            ControlKind::Power => "dB",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ControlKind::BiasVoltage => "bias",
            ControlKind::Power => "power",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "bias" => Some(ControlKind::BiasVoltage),
            "power" => Some(ControlKind::Power),
            _ => None,
        }
    }
}

/// Complex response sampled on (control, frequency).
///
/// `values` is stored control-major: the trace for control `c` occupies
/// `values[c * freqs.len()..(c + 1) * freqs.len()]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Sweep2D {
    pub freqs: Vec<f64>,
    pub controls: Vec<f64>,
    pub control_kind: ControlKind,
    pub values: Vec<Complex64>,
    pub seed: u64,
    pub meta: BTreeMap<String, String>,
}

impl Sweep2D {
    pub fn new(
        freqs: Vec<f64>,
        controls: Vec<f64>,
        control_kind: ControlKind,
        values: Vec<Complex64>,
        seed: u64,
    ) -> Result<Self> {
        if freqs.is_empty() {
            return Err(Error::EmptyGrid { name: "freqs" });
        }
        if controls.is_empty() {
            return Err(Error::EmptyGrid { name: "controls" });
        }
        if values.len() != freqs.len() * controls.len() {
            return Err(Error::Shape(format!(
                "{} values for {} controls x {} frequencies",
                values.len(),
                controls.len(),
                freqs.len()
            )));
        }
        if let Some(v) = values
            .iter()
            .find(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::NonFinite {
                name: "values",
                value: if v.re.is_finite() { v.im } else { v.re },
            });
        }
        Ok(Self {
            freqs,
            controls,
            control_kind,
            values,
            seed,
            meta: BTreeMap::new(),
        })
    }

    pub fn n_freqs(&self) -> usize {
        self.freqs.len()
    }

    pub fn n_controls(&self) -> usize {
        self.controls.len()
    }

    /// Trace for one control value.
    pub fn column(&self, c: usize) -> &[Complex64] {
        let n = self.freqs.len();
        &self.values[c * n..(c + 1) * n]
    }

    pub fn get(&self, c: usize, f: usize) -> Complex64 {
        self.values[c * self.freqs.len() + f]
    }

    /// Control indices listed under the `invalid_columns` meta key.
    pub fn invalid_columns(&self) -> Vec<usize> {
        self.meta
            .get(META_INVALID)
            .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect())
            .unwrap_or_default()
    }
}

/// Meta key listing columns outside the dispersive regime.
pub const META_INVALID: &str = "invalid_columns";
/// Meta key carrying the generating transmon frequency per column.
pub const META_FT_TRACK: &str = "ft_track_hz";
/// Meta key carrying the generating cavity frequency per column.
pub const META_FR_TRACK: &str = "fr_track_hz";

/// Checks that a grid is non-empty and strictly increasing.
pub fn check_grid(name: &'static str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid { name });
    }
    for (i, w) in grid.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::NotIncreasing { name, index: i + 1 });
        }
    }
    Ok(())
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![start],
        _ => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n).map(|i| start + step * i as f64).collect()
        }
    }
}

/// Which relation maps flux to transmon frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum FtPath {
    /// `f_t,max √|cos(πΦ/Φ₀)|`
    #[default]
    Cosine,
    /// `f_t,max √(I_c(Φ)/I_c(0))` from the full current-phase relation.
    Josephson,
}

impl FtPath {
    pub fn label(self) -> &'static str {
        match self {
            FtPath::Cosine => "cosine",
            FtPath::Josephson => "josephson",
        }
    }
}

/// Flux-independent attenuation of the columns near one bias value.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Glitch {
    pub bias: f64,
    pub width: f64,
    pub depth: f64,
}

/// Plan for a bias-voltage sweep in the dispersive regime.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxSweep {
    pub cavity: CavityModel,
    pub squid: SquidModel,
    pub g: f64,
    pub f_t_max: f64,
    pub ft_path: FtPath,
    pub biases: Vec<f64>,
    pub freqs: Vec<f64>,
    pub noise_sigma: f64,
    pub seed: u64,
    pub glitch: Option<Glitch>,
    /// Largest `|g / (f_bare − f_t)|` still treated as dispersive.
    pub dispersive_limit: f64,
}

/// One generated bias column.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxColumn {
    pub values: Vec<Complex64>,
    pub f_t: f64,
    pub f_r: f64,
    pub dispersive: bool,
}

impl FluxSweep {
    pub fn validate(&self) -> Result<()> {
        check_grid("biases", &self.biases)?;
        check_grid("freqs", &self.freqs)?;
        non_negative("noise_sigma", self.noise_sigma)?;
        non_negative("g", self.g)?;
        crate::error::positive("f_t_max", self.f_t_max)?;
        crate::error::positive("dispersive_limit", self.dispersive_limit)?;
        Ok(())
    }

    /// `I_c(0)`, needed by the Josephson path.
    pub fn reference_current(&self) -> f64 {
        squid_critical_current(&self.squid, FluxPoint::from_ratio(0.0))
    }

    /// Generates column `index`. `i_c0` is [`Self::reference_current`].
    pub fn column(&self, index: usize, i_c0: f64) -> FluxColumn {
        let v = self.biases[index];
        let flux = flux_from_bias(&self.squid, v);
        let f_t = match self.ft_path {
            FtPath::Cosine => ft_vs_flux(self.f_t_max, flux),
            FtPath::Josephson => {
                ft_vs_flux_cpr_with_reference(&self.squid, self.f_t_max, i_c0, flux)
            }
        };
        let f_bare = self.cavity.f_bare;
        let detuning = f_bare - f_t;
        let f_r = f_bare + self.g * self.g / detuning;
        let dispersive = libm::fabs(self.g / detuning) <= self.dispersive_limit;

        let scale = match self.glitch {
            Some(gl) if libm::fabs(v - gl.bias) <= gl.width => 1.0 - gl.depth,
            _ => 1.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        let s = self.noise_sigma * core::f64::consts::FRAC_1_SQRT_2;
        let values = self
            .freqs
            .iter()
            .map(|&f| {
                let clean = reflection_response(f, f_r, &self.cavity) * scale;
                if s > 0.0 {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    clean + Complex64::new(s * re, s * im)
                } else {
                    clean
                }
            })
            .collect();
        FluxColumn {
            values,
            f_t,
            f_r,
            dispersive,
        }
    }

    /// Assembles generated columns, in bias order, into a sweep.
    pub fn assemble(&self, columns: Vec<FluxColumn>) -> Result<Sweep2D> {
        let mut values = Vec::with_capacity(self.freqs.len() * columns.len());
        let mut invalid = Vec::new();
        let mut ft = Vec::with_capacity(columns.len());
        let mut fr = Vec::with_capacity(columns.len());
        for (i, c) in columns.into_iter().enumerate() {
            if !c.dispersive {
                invalid.push(i.to_string());
            }
            ft.push(format!("{}", c.f_t));
            fr.push(format!("{}", c.f_r));
            values.extend(c.values);
        }
        let mut sweep = Sweep2D::new(
            self.freqs.clone(),
            self.biases.clone(),
            ControlKind::BiasVoltage,
            values,
            self.seed,
        )?;
        let m = &mut sweep.meta;
        m.insert(META_INVALID.into(), invalid.join(","));
        m.insert(META_FT_TRACK.into(), ft.join(","));
        m.insert(META_FR_TRACK.into(), fr.join(","));
        m.insert("ft_path".into(), self.ft_path.label().into());
        m.insert("kappa_hz".into(), format!("{}", self.cavity.kappa()));
        m.insert("q_loaded".into(), format!("{}", self.cavity.q_loaded()));
        m.insert("f_bare_hz".into(), format!("{}", self.cavity.f_bare));
        m.insert("g_hz".into(), format!("{}", self.g));
        Ok(sweep)
    }

    /// Serial generation.
    pub fn run(&self) -> Result<Sweep2D> {
        self.validate()?;
        let i_c0 = self.reference_current();
        let cols = (0..self.biases.len())
            .map(|i| self.column(i, i_c0))
            .collect();
        self.assemble(cols)
    }
}

impl PowerSweep {
    pub fn validate(&self) -> Result<()> {
        check_grid("powers", &self.powers_db)?;
        check_grid("freqs", &self.freqs)?;
        non_negative("g", self.g)?;
        non_negative("xi0", self.xi0)?;
        Ok(())
    }

    /// Assembles generated columns, in power order, into a sweep.
    pub fn assemble(&self, columns: Vec<Vec<Complex64>>) -> Result<Sweep2D> {
        let values = columns.into_iter().flatten().collect();
        let mut sweep = Sweep2D::new(
            self.freqs.clone(),
            self.powers_db.clone(),
            ControlKind::Power,
            values,
            0,
        )?;
        let m = &mut sweep.meta;
        m.insert("kappa_hz".into(), format!("{}", self.cavity.kappa()));
        m.insert("q_loaded".into(), format!("{}", self.cavity.q_loaded()));
        m.insert("f_bare_hz".into(), format!("{}", self.cavity.f_bare));
        m.insert("g_hz".into(), format!("{}", self.g));
        if let Ok(chi) = self.chi0() {
            m.insert("chi0_hz".into(), format!("{chi}"));
        }
        Ok(sweep)
    }

    /// Serial generation.
    pub fn run(&self) -> Result<Sweep2D> {
        self.validate()?;
        let cols = (0..self.powers_db.len())
            .map(|i| self.column(i))
            .collect::<Result<Vec<_>>>()?;
        self.assemble(cols)
    }
}
