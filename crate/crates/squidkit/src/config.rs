//! TOML configuration with unit-suffixed keys.
//!
//! Every physical quantity carries its unit in the key (`f_bare_hz`,
//! `c_q_f`, `bias_resistor_ohm`). Missing keys take the defaults below;
//! unknown keys, wrong unit suffixes and out-of-range values are all
//! reported together, each with its key path and line.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use squidkit_core::analysis::{Detrend, PeriodicityOptions, Window};
use squidkit_core::cavity::{BranchWeighting, CavityModel, PeakConvention, PowerSweep};
use squidkit_core::circuit::{charging_energy, CircuitParams};
use squidkit_core::squid::{JunctionCpr, SquidModel, SquidPreset};
use squidkit_core::sweep::{linspace, FluxSweep, FtPath, Glitch};
use toml::de::{DeTable, DeValue};

use crate::error::Error;

/// Prefix of configuration entries echoed into output metadata.
pub const META_PREFIX: &str = "config.";

/// One problem found while loading a configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub path: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "{} (line {l}): {}", self.path, self.message),
            None => write!(f, "{}: {}", self.path, self.message),
        }
    }
}

/// A value that can be read from and written back to TOML.
trait ConfigValue: Sized {
    fn from_toml(v: &DeValue<'_>) -> Result<Self, String>;
    fn literal(&self) -> String;
}

impl ConfigValue for f64 {
    fn from_toml(v: &DeValue<'_>) -> Result<Self, String> {
        match v {
            DeValue::Float(x) => x
                .as_str()
                .parse()
                .map_err(|_| format!("bad float `{}`", x.as_str())),
            DeValue::Integer(i) => i64::from_str_radix(i.as_str(), i.radix())
                .map(|n| n as f64)
                .map_err(|_| format!("bad integer `{}`", i.as_str())),
            _ => Err("expected a number".into()),
        }
    }
    fn literal(&self) -> String {
        format!("{self:?}")
    }
}

impl ConfigValue for u64 {
    fn from_toml(v: &DeValue<'_>) -> Result<Self, String> {
        match v {
            DeValue::Integer(i) => u64::from_str_radix(i.as_str(), i.radix())
                .map_err(|_| format!("expected a non-negative integer, got `{}`", i.as_str())),
            _ => Err("expected an integer".into()),
        }
    }
    fn literal(&self) -> String {
        self.to_string()
    }
}

impl ConfigValue for usize {
    fn from_toml(v: &DeValue<'_>) -> Result<Self, String> {
        u64::from_toml(v).map(|n| n as usize)
    }
    fn literal(&self) -> String {
        self.to_string()
    }
}

macro_rules! string_enum {
    ($ty:ty { $($name:literal => $var:expr),+ $(,)? }) => {
        impl ConfigValue for $ty {
            fn from_toml(v: &DeValue<'_>) -> Result<Self, String> {
                let DeValue::String(s) = v else {
                    return Err("expected a string".into());
                };
                match s.as_ref() {
                    $($name => Ok($var),)+
                    other => Err(format!(
                        "unknown option `{other}`, expected one of: {}",
                        [$($name),+].join(", ")
                    )),
                }
            }
            fn literal(&self) -> String {
                $(if *self == $var { return format!("\"{}\"", $name); })+
                unreachable!()
            }
        }
    };
}

/// Junction weights: one of the symmetric presets scaled by `i0_a`, or the
/// four explicit weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetChoice {
    Custom,
    Preset(SquidPreset),
}

string_enum!(PresetChoice {
    "custom" => PresetChoice::Custom,
    "pure-2pi" => PresetChoice::Preset(SquidPreset::Pure2Pi),
    "pure-4pi" => PresetChoice::Preset(SquidPreset::Pure4Pi),
    "equal-mix" => PresetChoice::Preset(SquidPreset::EqualMix),
});
string_enum!(PeakConvention {
    "one-minus-abs" => PeakConvention::OneMinusAbs,
    "field" => PeakConvention::Field,
});
string_enum!(BranchWeighting {
    "complex-mean" => BranchWeighting::ComplexMean,
    "stable-only" => BranchWeighting::StableOnly,
});
string_enum!(FtPath {
    "cosine" => FtPath::Cosine,
    "josephson" => FtPath::Josephson,
});
string_enum!(Window {
    "rectangular" => Window::Rectangular,
    "hann" => Window::Hann,
});
string_enum!(Detrend {
    "mean" => Detrend::Mean,
    "linear" => Detrend::Linear,
});

type Check<T> = fn(&T) -> Result<(), String>;

fn any<T>(_: &T) -> Result<(), String> {
    Ok(())
}
fn positive(v: &f64) -> Result<(), String> {
    (v.is_finite() && *v > 0.0)
        .then_some(())
        .ok_or_else(|| format!("must be positive, got {v}"))
}
fn non_negative(v: &f64) -> Result<(), String> {
    (v.is_finite() && *v >= 0.0)
        .then_some(())
        .ok_or_else(|| format!("must be non-negative, got {v}"))
}
fn finite(v: &f64) -> Result<(), String> {
    v.is_finite()
        .then_some(())
        .ok_or_else(|| format!("must be finite, got {v}"))
}
fn fraction(v: &f64) -> Result<(), String> {
    (0.0..=1.0)
        .contains(v)
        .then_some(())
        .ok_or_else(|| format!("must lie in [0, 1], got {v}"))
}
fn nonzero(v: &f64) -> Result<(), String> {
    (v.is_finite() && *v != 0.0)
        .then_some(())
        .ok_or_else(|| format!("must be finite and non-zero, got {v}"))
}
fn count(v: &usize) -> Result<(), String> {
    (*v >= 1)
        .then_some(())
        .ok_or_else(|| "must be at least 1".into())
}
fn pad(v: &usize) -> Result<(), String> {
    (1..=64)
        .contains(v)
        .then_some(())
        .ok_or_else(|| format!("must lie in 1..=64, got {v}"))
}

/// Generates the config structs, their defaults, and the key table.
macro_rules! sections {
    (
        top { $($tkey:ident : $tty:ty = $tdef:expr, $tcheck:expr;)* }
        $( $sec:ident : $sty:ident { $($key:ident : $ty:ty = $def:expr, $check:expr;)* } )*
    ) => {
        $(
            #[derive(Debug, Clone, PartialEq)]
            pub struct $sty { $(pub $key: $ty,)* }

            impl Default for $sty {
                fn default() -> Self {
                    Self { $($key: $def,)* }
                }
            }
        )*

        /// Fully resolved toolkit configuration.
        #[derive(Debug, Clone, PartialEq)]
        pub struct ToolkitConfig {
            $(pub $tkey: $tty,)*
            $(pub $sec: $sty,)*
        }

        impl Default for ToolkitConfig {
            fn default() -> Self {
                Self { $($tkey: $tdef,)* $($sec: $sty::default(),)* }
            }
        }

        impl ToolkitConfig {
            /// Every `(section, key)` pair; top-level keys have an empty section.
            pub const KEYS: &'static [(&'static str, &'static str)] = &[
                $(("", stringify!($tkey)),)*
                $($((stringify!($sec), stringify!($key)),)*)*
            ];

            fn assign(&mut self, section: &str, key: &str, v: &DeValue<'_>) -> Option<Result<(), String>> {
                match (section, key) {
                    $(("", stringify!($tkey)) => Some(
                        <$tty>::from_toml(v).and_then(|x| {
                            ($tcheck as Check<$tty>)(&x)?;
                            self.$tkey = x;
                            Ok(())
                        })
                    ),)*
                    $($((stringify!($sec), stringify!($key)) => Some(
                        <$ty>::from_toml(v).and_then(|x| {
                            ($check as Check<$ty>)(&x)?;
                            self.$sec.$key = x;
                            Ok(())
                        })
                    ),)*)*
                    _ => None,
                }
            }

            /// Flattened `section.key` to TOML literal.
            pub fn entries(&self) -> BTreeMap<String, String> {
                let mut m = BTreeMap::new();
                $(m.insert(stringify!($tkey).to_string(), self.$tkey.literal());)*
                $($(m.insert(
                    concat!(stringify!($sec), ".", stringify!($key)).to_string(),
                    self.$sec.$key.literal(),
                );)*)*
                m
            }
        }
    };
}

sections! {
    top {
        seed: u64 = 1, any;
    }
    circuit: CircuitSection {
        c_q_f: f64 = 82e-15, positive;
        c_g_f: f64 = 5e-15, positive;
        z0_ohm: f64 = 50.0, positive;
        eps_r: f64 = 1.0, positive;
        g_hz: f64 = 116e6, positive;
    }
    observed: ObservedSection {
        chi_hz: f64 = -10e6, nonzero;
        f_r_hz: f64 = 4.945e9, positive;
        chi_sweet_spot_hz: f64 = -8.5e6, nonzero;
        f_r_sweet_spot_hz: f64 = 4.9465e9, positive;
    }
    cavity: CavitySection {
        f_bare_hz: f64 = 4.955e9, positive;
        kappa_ext_hz: f64 = 10e6, positive;
        kappa_int_hz: f64 = 10e6, non_negative;
        peak_convention: PeakConvention = PeakConvention::OneMinusAbs, any;
    }
    squid: SquidSection {
        preset: PresetChoice = PresetChoice::Preset(SquidPreset::Pure2Pi), any;
        i0_a: f64 = 22.4e-9, positive;
        w1_4pi_a: f64 = 0.0, non_negative;
        w1_2pi_a: f64 = 22.4e-9, non_negative;
        w2_4pi_a: f64 = 0.0, non_negative;
        w2_2pi_a: f64 = 22.4e-9, non_negative;
        mutual_inductance_h: f64 = 1.551e-12, positive;
        bias_resistor_ohm: f64 = 1500.0, positive;
        f_t_max_hz: f64 = 6.53e9, positive;
        ft_path: FtPath = FtPath::Cosine, any;
    }
    power_sweep: PowerSweepSection {
        f_t_hz: f64 = 6.29e9, positive;
        xi0_hz: f64 = 6e8, non_negative;
        power_start_db: f64 = -50.0, finite;
        power_stop_db: f64 = 20.0, finite;
        power_points: usize = 71, count;
        freq_start_hz: f64 = 4.925e9, positive;
        freq_stop_hz: f64 = 4.985e9, positive;
        freq_points: usize = 241, count;
        weighting: BranchWeighting = BranchWeighting::ComplexMean, any;
    }
    flux_sweep: FluxSweepSection {
        bias_start_v: f64 = -8.0, finite;
        bias_stop_v: f64 = 7.95, finite;
        bias_points: usize = 320, count;
        freq_start_hz: f64 = 4.925e9, positive;
        freq_stop_hz: f64 = 4.985e9, positive;
        freq_points: usize = 241, count;
        noise_sigma: f64 = 0.01, non_negative;
        dispersive_limit: f64 = 0.1, positive;
        glitch_bias_v: f64 = -1.8, finite;
        glitch_width_v: f64 = 0.03, non_negative;
        glitch_depth: f64 = 0.0, fraction;
    }
    analysis: AnalysisSection {
        threshold: f64 = 3.0, positive;
        window: Window = Window::Rectangular, any;
        detrend: Detrend = Detrend::Mean, any;
        pad_factor: usize = 4, pad;
        exclusion_bins: usize = 2, any;
    }
}

/// Unit suffixes recognized when diagnosing a misspelt key.
const UNIT_SUFFIXES: &[&str] = &[
    "hz", "khz", "mhz", "ghz", "f", "ff", "pf", "nf", "uf", "ohm", "kohm", "h", "ph", "nh", "uh",
    "v", "mv", "db", "dbm", "a", "na", "ua", "ma", "wb", "s", "ms", "us", "ns", "rad",
];

fn stem(key: &str) -> &str {
    match key.rsplit_once('_') {
        Some((s, suffix)) if UNIT_SUFFIXES.contains(&suffix) => s,
        _ => key,
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())]
        .bytes()
        .filter(|b| *b == b'\n')
        .count()
        + 1
}

impl ToolkitConfig {
    /// Parses TOML text, collecting every error.
    pub fn from_toml_str(text: &str) -> Result<Self, Vec<ConfigError>> {
        let doc = DeTable::parse(text).map_err(|e| {
            vec![ConfigError {
                path: "<document>".into(),
                line: e.span().map(|s| line_of(text, s.start)),
                message: e.message().to_string(),
            }]
        })?;
        let mut cfg = Self::default();
        let mut errors = Vec::new();
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();

        for (k, v) in doc.get_ref().iter() {
            let name = k.get_ref().as_ref();
            match v.get_ref() {
                DeValue::Table(t) => {
                    if !Self::KEYS.iter().any(|(s, _)| *s == name) {
                        errors.push(ConfigError {
                            path: name.into(),
                            line: Some(line_of(text, k.span().start)),
                            message: "unknown section".into(),
                        });
                        continue;
                    }
                    for (kk, vv) in t.iter() {
                        let key = kk.get_ref().as_ref();
                        let line = line_of(text, kk.span().start);
                        seen.insert(format!("{name}.{key}"), line);
                        cfg.apply(name, key, vv.get_ref(), line, &mut errors);
                    }
                }
                other => {
                    let line = line_of(text, k.span().start);
                    seen.insert(name.into(), line);
                    cfg.apply("", name, other, line, &mut errors);
                }
            }
        }
        cfg.cross_check(&seen, &mut errors);
        if errors.is_empty() {
            Ok(cfg)
        } else {
            Err(errors)
        }
    }

    fn apply(
        &mut self,
        section: &str,
        key: &str,
        v: &DeValue<'_>,
        line: usize,
        errors: &mut Vec<ConfigError>,
    ) {
        let path = if section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        match self.assign(section, key, v) {
            Some(Ok(())) => {}
            Some(Err(message)) => errors.push(ConfigError {
                path,
                line: Some(line),
                message,
            }),
            None => {
                let s = stem(key);
                let expected = Self::KEYS
                    .iter()
                    .find(|(sec, k)| *sec == section && stem(k) == s && *k != key);
                let message = match expected {
                    Some((_, k)) => format!("unit suffix mismatch, expected `{k}`"),
                    None => "unknown key".into(),
                };
                errors.push(ConfigError {
                    path,
                    line: Some(line),
                    message,
                });
            }
        }
    }

    fn cross_check(&self, seen: &BTreeMap<String, usize>, errors: &mut Vec<ConfigError>) {
        let mut ordered = |lo_key: &str, hi_key: &str, lo: f64, hi: f64, points: usize| {
            if points > 1 && !(hi > lo) {
                errors.push(ConfigError {
                    path: hi_key.into(),
                    line: seen.get(hi_key).or_else(|| seen.get(lo_key)).copied(),
                    message: format!(
                        "must exceed {lo_key} ({lo}) when more than one point is requested"
                    ),
                });
            }
        };
        let p = &self.power_sweep;
        ordered(
            "power_sweep.power_start_db",
            "power_sweep.power_stop_db",
            p.power_start_db,
            p.power_stop_db,
            p.power_points,
        );
        ordered(
            "power_sweep.freq_start_hz",
            "power_sweep.freq_stop_hz",
            p.freq_start_hz,
            p.freq_stop_hz,
            p.freq_points,
        );
        let f = &self.flux_sweep;
        ordered(
            "flux_sweep.bias_start_v",
            "flux_sweep.bias_stop_v",
            f.bias_start_v,
            f.bias_stop_v,
            f.bias_points,
        );
        ordered(
            "flux_sweep.freq_start_hz",
            "flux_sweep.freq_stop_hz",
            f.freq_start_hz,
            f.freq_stop_hz,
            f.freq_points,
        );
        let s = &self.squid;
        if s.preset == PresetChoice::Custom {
            for (j, a, b) in [(1, s.w1_4pi_a, s.w1_2pi_a), (2, s.w2_4pi_a, s.w2_2pi_a)] {
                if a == 0.0 && b == 0.0 {
                    let key = format!("squid.w{j}_2pi_a");
                    errors.push(ConfigError {
                        line: seen.get(&key).copied(),
                        path: key,
                        message: format!("junction {j} has both weights zero"),
                    });
                }
            }
        }
    }

    /// Renders the configuration as TOML that parses back to `self`.
    pub fn to_toml_string(&self) -> String {
        let entries = self.entries();
        let mut out = String::new();
        let mut current = "";
        for (path, lit) in entries.iter().filter(|(p, _)| !p.contains('.')) {
            out.push_str(&format!("{path} = {lit}\n"));
        }
        for (path, lit) in entries.iter().filter(|(p, _)| p.contains('.')) {
            let (sec, key) = path.split_once('.').unwrap();
            if sec != current {
                out.push_str(&format!("\n[{sec}]\n"));
                current = sec;
            }
            out.push_str(&format!("{key} = {lit}\n"));
        }
        out
    }

    /// Configuration entries for output metadata, prefixed with `config.`.
    pub fn to_meta(&self) -> BTreeMap<String, String> {
        self.entries()
            .into_iter()
            .map(|(k, v)| (format!("{META_PREFIX}{k}"), v))
            .collect()
    }

    /// Rebuilds a configuration from the `config.` entries of output
    /// metadata. Returns `None` when no such entries exist.
    pub fn from_meta(meta: &BTreeMap<String, String>) -> Option<Result<Self, Vec<ConfigError>>> {
        let mut top = String::new();
        let mut sections: BTreeMap<&str, String> = BTreeMap::new();
        for (k, v) in meta {
            let Some(path) = k.strip_prefix(META_PREFIX) else {
                continue;
            };
            match path.split_once('.') {
                Some((sec, key)) => sections
                    .entry(sec)
                    .or_default()
                    .push_str(&format!("{key} = {v}\n")),
                None => top.push_str(&format!("{path} = {v}\n")),
            }
        }
        if top.is_empty() && sections.is_empty() {
            return None;
        }
        for (sec, body) in sections {
            top.push_str(&format!("[{sec}]\n{body}"));
        }
        Some(Self::from_toml_str(&top))
    }

    /// Loads a TOML file, or the configuration echoed in a previous output
    /// (`.csv` or `.json`).
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        let meta = match ext {
            "csv" => Some(crate::io::csv_meta(&text)),
            "json" => Some(crate::io::json_meta(&text).map_err(|m| Error::format(path, m))?),
            _ => None,
        };
        let parsed = match meta {
            Some(m) => Self::from_meta(&m)
                .ok_or_else(|| Error::format(path, "no configuration entries found"))?,
            None => Self::from_toml_str(&text),
        };
        parsed.map_err(|errors| Error::Config {
            path: path.display().to_string(),
            errors,
        })
    }

    pub fn c_sigma(&self) -> f64 {
        self.circuit.c_q_f + self.circuit.c_g_f
    }

    pub fn e_c_over_h(&self) -> Result<f64, Error> {
        Ok(charging_energy(self.c_sigma())?)
    }

    pub fn circuit_params(&self) -> Result<CircuitParams, Error> {
        let c = &self.circuit;
        Ok(CircuitParams::new(
            c.c_q_f,
            c.c_g_f,
            self.cavity.f_bare_hz,
            c.z0_ohm,
            c.eps_r,
        )?)
    }

    pub fn cavity_model(&self) -> Result<CavityModel, Error> {
        let c = &self.cavity;
        Ok(CavityModel::new(
            c.f_bare_hz,
            c.kappa_ext_hz,
            c.kappa_int_hz,
        )?)
    }

    pub fn squid_model(&self) -> Result<SquidModel, Error> {
        let s = &self.squid;
        Ok(match s.preset {
            PresetChoice::Preset(p) => {
                SquidModel::preset(p, s.i0_a, s.mutual_inductance_h, s.bias_resistor_ohm)?
            }
            PresetChoice::Custom => SquidModel::new(
                JunctionCpr::new(s.w1_4pi_a, s.w1_2pi_a)?,
                JunctionCpr::new(s.w2_4pi_a, s.w2_2pi_a)?,
                s.mutual_inductance_h,
                s.bias_resistor_ohm,
            )?,
        })
    }

    pub fn flux_sweep_plan(&self) -> Result<FluxSweep, Error> {
        let f = &self.flux_sweep;
        let glitch = (f.glitch_depth > 0.0).then_some(Glitch {
            bias: f.glitch_bias_v,
            width: f.glitch_width_v,
            depth: f.glitch_depth,
        });
        let plan = FluxSweep {
            cavity: self.cavity_model()?,
            squid: self.squid_model()?,
            g: self.circuit.g_hz,
            f_t_max: self.squid.f_t_max_hz,
            ft_path: self.squid.ft_path,
            biases: linspace(f.bias_start_v, f.bias_stop_v, f.bias_points),
            freqs: linspace(f.freq_start_hz, f.freq_stop_hz, f.freq_points),
            noise_sigma: f.noise_sigma,
            seed: self.seed,
            glitch,
            dispersive_limit: f.dispersive_limit,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn power_sweep_plan(&self) -> Result<PowerSweep, Error> {
        let p = &self.power_sweep;
        let plan = PowerSweep {
            cavity: self.cavity_model()?,
            g: self.circuit.g_hz,
            f_t: p.f_t_hz,
            xi0: p.xi0_hz,
            weighting: p.weighting,
            powers_db: linspace(p.power_start_db, p.power_stop_db, p.power_points),
            freqs: linspace(p.freq_start_hz, p.freq_stop_hz, p.freq_points),
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn periodicity_options(&self) -> PeriodicityOptions {
        let a = &self.analysis;
        PeriodicityOptions {
            detrend: a.detrend,
            window: a.window,
            pad_factor: a.pad_factor,
            threshold: a.threshold,
            exclusion_bins: a.exclusion_bins,
        }
    }
}
