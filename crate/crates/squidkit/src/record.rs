//! Self-describing result files.
//!
//! Sweeps are stored in the sweep CSV/JSON schema of [`crate::io`] with the
//! configuration and toolkit version in their metadata. Analysis results
//! are stored either as a JSON object
//! `{kind, toolkit_version, seed, config_snapshot, payload}` or as a CSV
//! table whose metadata carries `record_kind` and the same fields.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use squidkit_core::analysis::{FluxInversion, InvertedPoint, PeriodicityReport, ResonanceTrack};
use squidkit_core::sweep::{ControlKind, Sweep2D};

use crate::config::{ToolkitConfig, META_PREFIX};
use crate::error::{Error, Result};
use crate::io::{self, num, parse_num, CsvTable, Format};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const META_VERSION: &str = "toolkit_version";
pub const META_RECORD_KIND: &str = "record_kind";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecordKind {
    PowerSweep,
    FluxSweep,
    Track,
    Inversion,
    Periodicity,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Sweep(Sweep2D),
    Track(ResonanceTrack),
    Inversion(FluxInversion),
    Periodicity(PeriodicityReport),
}

impl Payload {
    pub fn kind(&self) -> RecordKind {
        match self {
            Payload::Sweep(s) => match s.control_kind {
                ControlKind::BiasVoltage => RecordKind::FluxSweep,
                ControlKind::Power => RecordKind::PowerSweep,
            },
            Payload::Track(_) => RecordKind::Track,
            Payload::Inversion(_) => RecordKind::Inversion,
            Payload::Periodicity(_) => RecordKind::Periodicity,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub kind: RecordKind,
    pub payload: Payload,
    /// Resolved configuration as `section.key` → TOML literal.
    pub config_snapshot: BTreeMap<String, String>,
    pub toolkit_version: String,
    pub seed: u64,
}

fn label<T: Serialize>(x: &T) -> String {
    serde_json::to_value(x)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .expect("unit enum serializes to a string")
}

fn from_label<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.trim().to_string()))
        .map_err(|_| format!("unknown value `{s}`"))
}

impl ResultRecord {
    /// Record of `payload` produced under `config`. Sweep payloads get the
    /// configuration and version echoed into their metadata.
    pub fn new(payload: Payload, config: &ToolkitConfig) -> Self {
        let mut payload = payload;
        if let Payload::Sweep(s) = &mut payload {
            s.meta.extend(config.to_meta());
            s.meta.insert(META_VERSION.into(), TOOLKIT_VERSION.into());
        }
        Self {
            kind: payload.kind(),
            payload,
            config_snapshot: config.entries(),
            toolkit_version: TOOLKIT_VERSION.into(),
            seed: config.seed,
        }
    }

    /// Wraps a sweep read from disk, recovering the echoed configuration.
    pub fn from_sweep(sweep: Sweep2D) -> Self {
        let config_snapshot = sweep
            .meta
            .iter()
            .filter_map(|(k, v)| {
                k.strip_prefix(META_PREFIX)
                    .map(|k| (k.to_string(), v.clone()))
            })
            .collect();
        let toolkit_version = sweep.meta.get(META_VERSION).cloned().unwrap_or_default();
        let seed = sweep.seed;
        let payload = Payload::Sweep(sweep);
        Self {
            kind: payload.kind(),
            payload,
            config_snapshot,
            toolkit_version,
            seed,
        }
    }

    /// Configuration stored in the record, if any.
    pub fn config(&self) -> Option<Result<ToolkitConfig>> {
        let meta = self
            .config_snapshot
            .iter()
            .map(|(k, v)| (format!("{META_PREFIX}{k}"), v.clone()))
            .collect();
        ToolkitConfig::from_meta(&meta).map(|r| {
            r.map_err(|errors| Error::Config {
                path: "<embedded configuration>".into(),
                errors,
            })
        })
    }

    pub fn sweep(&self) -> Option<&Sweep2D> {
        match &self.payload {
            Payload::Sweep(s) => Some(s),
            _ => None,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match (&self.payload, format) {
            (Payload::Sweep(s), f) => io::render_sweep(s, f),
            (_, Format::Json) => self.to_json(),
            (_, Format::Csv) => self.to_csv().render(),
        }
    }

    pub fn save(&self, path: &Path, format: Format) -> Result<()> {
        io::write_text(path, &self.render(format))
    }

    pub fn parse(text: &str, format: Format) -> std::result::Result<Self, String> {
        match format {
            Format::Json => {
                let v: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
                if v.get("kind").is_some() {
                    Self::from_json(v)
                } else {
                    io::sweep_from_json(text).map(Self::from_sweep)
                }
            }
            Format::Csv => {
                if io::csv_meta(text).contains_key(META_RECORD_KIND) {
                    Self::from_csv(CsvTable::parse(text)?)
                } else {
                    io::sweep_from_csv(text).map(Self::from_sweep)
                }
            }
        }
    }

    /// Reads any file written by the toolkit.
    pub fn load(path: &Path) -> Result<Self> {
        let text = io::read_text(path)?;
        let format = Format::from_path(path).unwrap_or(if text.trim_start().starts_with('{') {
            Format::Json
        } else {
            Format::Csv
        });
        Self::parse(&text, format).map_err(|m| Error::format(path, m))
    }

    fn to_json(&self) -> String {
        let payload = match &self.payload {
            Payload::Sweep(_) => unreachable!("sweeps use the sweep schema"),
            Payload::Track(t) => serde_json::to_value(TrackJson::from(t)),
            Payload::Inversion(i) => serde_json::to_value(i),
            Payload::Periodicity(p) => serde_json::to_value(p),
        }
        .expect("record payload is serializable");
        let doc = RecordJson {
            kind: self.kind,
            toolkit_version: self.toolkit_version.clone(),
            seed: self.seed,
            config_snapshot: self.config_snapshot.clone(),
            payload,
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("record is serializable");
        s.push('\n');
        s
    }

    fn from_json(v: serde_json::Value) -> std::result::Result<Self, String> {
        let doc: RecordJson = serde_json::from_value(v).map_err(|e| e.to_string())?;
        let err = |e: serde_json::Error| e.to_string();
        let payload = match doc.kind {
            RecordKind::Track => Payload::Track(
                serde_json::from_value::<TrackJson>(doc.payload)
                    .map_err(err)?
                    .into_track()?,
            ),
            RecordKind::Inversion => {
                Payload::Inversion(serde_json::from_value(doc.payload).map_err(err)?)
            }
            RecordKind::Periodicity => {
                Payload::Periodicity(serde_json::from_value(doc.payload).map_err(err)?)
            }
            k => return Err(format!("`{}` records use the sweep schema", label(&k))),
        };
        Ok(Self {
            kind: doc.kind,
            payload,
            config_snapshot: doc.config_snapshot,
            toolkit_version: doc.toolkit_version,
            seed: doc.seed,
        })
    }

    fn to_csv(&self) -> CsvTable {
        let mut meta: BTreeMap<String, String> = self
            .config_snapshot
            .iter()
            .map(|(k, v)| (format!("{META_PREFIX}{k}"), v.clone()))
            .collect();
        meta.insert(META_RECORD_KIND.into(), label(&self.kind));
        meta.insert(META_VERSION.into(), self.toolkit_version.clone());
        meta.insert(io::META_SEED.into(), self.seed.to_string());
        let (header, rows): (&[&str], Vec<Vec<String>>) = match &self.payload {
            Payload::Sweep(_) => unreachable!("sweeps use the sweep schema"),
            Payload::Track(t) => {
                meta.insert(io::META_CONTROL_KIND.into(), t.control_kind.label().into());
                let rows = (0..t.len())
                    .map(|i| {
                        vec![
                            num(t.control_values[i]),
                            num(t.f_r[i]),
                            num(t.fwhm[i]),
                            num(t.fit_quality[i]),
                            u8::from(t.invalid_mask[i]).to_string(),
                        ]
                    })
                    .collect();
                (&TRACK_HEADER, rows)
            }
            Payload::Inversion(inv) => {
                meta.insert("f_t_max_hz".into(), num(inv.f_t_max));
                meta.insert("e_c_over_h_hz".into(), num(inv.e_c_over_h));
                let rows = inv
                    .points
                    .iter()
                    .map(|p| match p {
                        Some(p) => vec![
                            num(p.control),
                            num(p.chi),
                            num(p.f_t),
                            num(p.e_j_over_h),
                            num(p.i_c),
                        ],
                        None => vec![String::new(); 5],
                    })
                    .collect();
                (&INVERSION_HEADER, rows)
            }
            Payload::Periodicity(p) => {
                meta.insert("dominant_freq".into(), num(p.dominant_freq));
                meta.insert("dominant_mag".into(), num(p.dominant_mag));
                meta.insert("half_freq_mag".into(), num(p.half_freq_mag));
                meta.insert("noise_floor".into(), num(p.noise_floor));
                meta.insert("verdict".into(), label(&p.verdict));
                meta.insert("threshold".into(), num(p.threshold));
                meta.insert("window".into(), label(&p.window));
                meta.insert("control_unit".into(), p.control_unit.clone());
                let rows = p
                    .ft_freqs
                    .iter()
                    .zip(&p.ft_magnitudes)
                    .map(|(f, m)| vec![num(*f), num(*m)])
                    .collect();
                (&PERIODICITY_HEADER, rows)
            }
        };
        CsvTable {
            meta,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows,
        }
    }

    fn from_csv(mut table: CsvTable) -> std::result::Result<Self, String> {
        let mut take = |k: &str| {
            table
                .meta
                .remove(k)
                .ok_or_else(|| format!("missing `{k}` metadata"))
        };
        let kind: RecordKind = from_label(&take(META_RECORD_KIND)?)?;
        let toolkit_version = take(META_VERSION)?;
        let seed = take(io::META_SEED)?
            .trim()
            .parse()
            .map_err(|_| "invalid `seed` metadata")?;
        let expect = |h: &[&str]| {
            if table.header == h {
                Ok(())
            } else {
                Err(format!("expected header `{}`", h.join(",")))
            }
        };
        let payload = match kind {
            RecordKind::Track => {
                expect(&TRACK_HEADER)?;
                let control_kind = table
                    .meta
                    .remove(io::META_CONTROL_KIND)
                    .ok_or("missing `control_kind` metadata")?;
                let control_kind = ControlKind::from_label(control_kind.trim())
                    .ok_or_else(|| format!("unknown control_kind `{control_kind}`"))?;
                let mut t = ResonanceTrack {
                    control_kind,
                    control_values: Vec::new(),
                    f_r: Vec::new(),
                    fwhm: Vec::new(),
                    fit_quality: Vec::new(),
                    invalid_mask: Vec::new(),
                };
                for r in &table.rows {
                    t.control_values.push(parse_num(&r[0])?);
                    t.f_r.push(parse_num(&r[1])?);
                    t.fwhm.push(parse_num(&r[2])?);
                    t.fit_quality.push(parse_num(&r[3])?);
                    t.invalid_mask.push(match r[4].as_str() {
                        "0" => false,
                        "1" => true,
                        m => return Err(format!("invalid mask flag `{m}`")),
                    });
                }
                Payload::Track(t)
            }
            RecordKind::Inversion => {
                expect(&INVERSION_HEADER)?;
                let mut scalar = |k: &str| {
                    table
                        .meta
                        .remove(k)
                        .ok_or_else(|| format!("missing `{k}` metadata"))
                        .and_then(|v| parse_num(&v))
                };
                let f_t_max = scalar("f_t_max_hz")?;
                let e_c_over_h = scalar("e_c_over_h_hz")?;
                let points = table
                    .rows
                    .iter()
                    .map(|r| {
                        if r.iter().all(|s| s.is_empty()) {
                            return Ok(None);
                        }
                        Ok(Some(InvertedPoint {
                            control: parse_num(&r[0])?,
                            chi: parse_num(&r[1])?,
                            f_t: parse_num(&r[2])?,
                            e_j_over_h: parse_num(&r[3])?,
                            i_c: parse_num(&r[4])?,
                        }))
                    })
                    .collect::<std::result::Result<_, String>>()?;
                Payload::Inversion(FluxInversion {
                    points,
                    f_t_max,
                    e_c_over_h,
                })
            }
            RecordKind::Periodicity => {
                expect(&PERIODICITY_HEADER)?;
                let mut text = |k: &str| {
                    table
                        .meta
                        .remove(k)
                        .ok_or_else(|| format!("missing `{k}` metadata"))
                };
                let dominant_freq = parse_num(&text("dominant_freq")?)?;
                let dominant_mag = parse_num(&text("dominant_mag")?)?;
                let half_freq_mag = parse_num(&text("half_freq_mag")?)?;
                let noise_floor = parse_num(&text("noise_floor")?)?;
                let verdict = from_label(&text("verdict")?)?;
                let threshold = parse_num(&text("threshold")?)?;
                let window = from_label(&text("window")?)?;
                let control_unit = text("control_unit")?;
                let mut ft_freqs = Vec::with_capacity(table.rows.len());
                let mut ft_magnitudes = Vec::with_capacity(table.rows.len());
                for r in &table.rows {
                    ft_freqs.push(parse_num(&r[0])?);
                    ft_magnitudes.push(parse_num(&r[1])?);
                }
                Payload::Periodicity(PeriodicityReport {
                    ft_freqs,
                    ft_magnitudes,
                    dominant_freq,
                    dominant_mag,
                    half_freq_mag,
                    noise_floor,
                    verdict,
                    threshold,
                    window,
                    control_unit,
                })
            }
            k => return Err(format!("`{}` records use the sweep schema", label(&k))),
        };
        let config_snapshot = table
            .meta
            .iter()
            .filter_map(|(k, v)| {
                k.strip_prefix(META_PREFIX)
                    .map(|k| (k.to_string(), v.clone()))
            })
            .collect();
        Ok(Self {
            kind,
            payload,
            config_snapshot,
            toolkit_version,
            seed,
        })
    }
}

const TRACK_HEADER: [&str; 5] = ["control", "f_r_hz", "fwhm_hz", "fit_quality", "masked"];
const INVERSION_HEADER: [&str; 5] = ["control", "chi_hz", "f_t_hz", "e_j_over_h_hz", "i_c_a"];
const PERIODICITY_HEADER: [&str; 2] = ["frequency", "magnitude"];

#[derive(Serialize, Deserialize)]
struct RecordJson {
    kind: RecordKind,
    toolkit_version: String,
    seed: u64,
    config_snapshot: BTreeMap<String, String>,
    payload: serde_json::Value,
}

/// JSON has no NaN, so masked track entries are written as `null`.
#[derive(Serialize, Deserialize)]
struct TrackJson {
    control_kind: ControlKind,
    control_values: Vec<f64>,
    f_r: Vec<Option<f64>>,
    fwhm: Vec<Option<f64>>,
    fit_quality: Vec<Option<f64>>,
    invalid_mask: Vec<bool>,
}

fn nan_to_none(v: &[f64]) -> Vec<Option<f64>> {
    v.iter().map(|x| x.is_finite().then_some(*x)).collect()
}

fn none_to_nan(v: Vec<Option<f64>>) -> Vec<f64> {
    v.into_iter().map(|x| x.unwrap_or(f64::NAN)).collect()
}

impl From<&ResonanceTrack> for TrackJson {
    fn from(t: &ResonanceTrack) -> Self {
        Self {
            control_kind: t.control_kind,
            control_values: t.control_values.clone(),
            f_r: nan_to_none(&t.f_r),
            fwhm: nan_to_none(&t.fwhm),
            fit_quality: nan_to_none(&t.fit_quality),
            invalid_mask: t.invalid_mask.clone(),
        }
    }
}

impl TrackJson {
    fn into_track(self) -> std::result::Result<ResonanceTrack, String> {
        let n = self.control_values.len();
        if [
            self.f_r.len(),
            self.fwhm.len(),
            self.fit_quality.len(),
            self.invalid_mask.len(),
        ]
        .iter()
        .any(|l| *l != n)
        {
            return Err("track arrays differ in length".into());
        }
        Ok(ResonanceTrack {
            control_kind: self.control_kind,
            control_values: self.control_values,
            f_r: none_to_nan(self.f_r),
            fwhm: none_to_nan(self.fwhm),
            fit_quality: none_to_nan(self.fit_quality),
            invalid_mask: self.invalid_mask,
        })
    }
}
