//! CSV and JSON forms of [`Sweep2D`].
//!
//! CSV: `# key=value` metadata lines, then the header
//! `control,frequency_hz,re,im,mag` and one row per sample, control-major
//! with frequency ascending. JSON: `{meta, axis1, axis2, re, im}` where
//! `axis1` holds the control values, `axis2` the frequencies in Hz, and
//! `re[c][f]`, `im[c][f]` the response. Floats are written as shortest
//! round-trip decimals, so reading either form back is bit-exact.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use squidkit_core::sweep::{ControlKind, Sweep2D};

use crate::error::{Error, Result};

/// Metadata key holding the sweep seed.
pub const META_SEED: &str = "seed";
/// Metadata key holding the control axis label (`bias` or `power`).
pub const META_CONTROL_KIND: &str = "control_kind";

pub const SWEEP_HEADER: [&str; 5] = ["control", "frequency_hz", "re", "im", "mag"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// Format implied by a file extension, if any.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

/// Shortest round-trip decimal.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn parse_num(s: &str) -> std::result::Result<f64, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("invalid number `{s}`"))
}

/// Metadata lines followed by a comma-separated table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    pub meta: BTreeMap<String, String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut table = CsvTable::default();
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        for (i, line) in lines.by_ref() {
            if let Some(m) = line.strip_prefix('#') {
                let (k, v) = m
                    .trim_start()
                    .split_once('=')
                    .ok_or_else(|| format!("line {}: metadata without `=`", i + 1))?;
                table.meta.insert(k.trim().to_string(), v.to_string());
            } else {
                table.header = line.split(',').map(|s| s.trim().to_string()).collect();
                break;
            }
        }
        if table.header.is_empty() {
            return Err("missing header row".into());
        }
        for (i, line) in lines {
            let row: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
            if row.len() != table.header.len() {
                return Err(format!(
                    "line {}: {} fields, header has {}",
                    i + 1,
                    row.len(),
                    table.header.len()
                ));
            }
            table.rows.push(row);
        }
        Ok(table)
    }

    pub fn column_index(&self, name: &str) -> std::result::Result<usize, String> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| format!("missing column `{name}`"))
    }
}

/// Metadata of a CSV file; an unparsable file yields what was read so far.
pub fn csv_meta(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .map_while(|l| l.strip_prefix('#'))
        .filter_map(|m| m.trim_start().split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.to_string()))
        .collect()
}

/// Metadata of a JSON sweep (`meta`) or record (`config_snapshot`, with the
/// `config.` prefix restored).
pub fn json_meta(text: &str) -> std::result::Result<BTreeMap<String, String>, String> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let strings = |o: &serde_json::Map<String, serde_json::Value>, prefix: &str| {
        o.iter()
            .filter_map(|(k, v)| v.as_str().map(|s| (format!("{prefix}{k}"), s.to_string())))
            .collect()
    };
    if let Some(m) = v.get("meta").and_then(|m| m.as_object()) {
        Ok(strings(m, ""))
    } else if let Some(m) = v.get("config_snapshot").and_then(|m| m.as_object()) {
        Ok(strings(m, crate::config::META_PREFIX))
    } else {
        Err("no `meta` or `config_snapshot` object".into())
    }
}

fn full_meta(sweep: &Sweep2D) -> BTreeMap<String, String> {
    let mut meta = sweep.meta.clone();
    meta.insert(META_SEED.into(), sweep.seed.to_string());
    meta.insert(META_CONTROL_KIND.into(), sweep.control_kind.label().into());
    meta
}

fn split_meta(
    mut meta: BTreeMap<String, String>,
) -> std::result::Result<(u64, ControlKind, BTreeMap<String, String>), String> {
    let seed = meta
        .remove(META_SEED)
        .ok_or("missing `seed` metadata")?
        .trim()
        .parse()
        .map_err(|_| "invalid `seed` metadata".to_string())?;
    let kind = meta
        .remove(META_CONTROL_KIND)
        .ok_or("missing `control_kind` metadata")?;
    let kind = ControlKind::from_label(kind.trim())
        .ok_or_else(|| format!("unknown control_kind `{kind}`"))?;
    Ok((seed, kind, meta))
}

pub fn sweep_to_csv(sweep: &Sweep2D) -> String {
    let mut table = CsvTable {
        meta: full_meta(sweep),
        header: SWEEP_HEADER.iter().map(|s| s.to_string()).collect(),
        rows: Vec::with_capacity(sweep.values.len()),
    };
    for (c, control) in sweep.controls.iter().enumerate() {
        for (f, v) in sweep.freqs.iter().zip(sweep.column(c)) {
            table.rows.push(vec![
                num(*control),
                num(*f),
                num(v.re),
                num(v.im),
                num(v.norm()),
            ]);
        }
    }
    table.render()
}

pub fn sweep_from_csv(text: &str) -> std::result::Result<Sweep2D, String> {
    let table = CsvTable::parse(text)?;
    if table.header != SWEEP_HEADER {
        return Err(format!("expected header `{}`", SWEEP_HEADER.join(",")));
    }
    let parsed = table
        .rows
        .iter()
        .map(|r| {
            Ok((
                parse_num(&r[0])?,
                parse_num(&r[1])?,
                Complex64::new(parse_num(&r[2])?, parse_num(&r[3])?),
            ))
        })
        .collect::<std::result::Result<Vec<_>, String>>()?;
    if parsed.is_empty() {
        return Err("no data rows".into());
    }
    let n_freqs = 1 + parsed.windows(2).take_while(|w| w[1].1 > w[0].1).count();
    if parsed.len() % n_freqs != 0 {
        return Err(format!(
            "{} rows do not form blocks of {n_freqs} frequencies",
            parsed.len()
        ));
    }
    let freqs: Vec<f64> = parsed[..n_freqs].iter().map(|r| r.1).collect();
    let mut controls = Vec::with_capacity(parsed.len() / n_freqs);
    for (b, block) in parsed.chunks(n_freqs).enumerate() {
        let control = block[0].0;
        for (row, f) in block.iter().zip(&freqs) {
            if row.0.to_bits() != control.to_bits() || row.1.to_bits() != f.to_bits() {
                return Err(format!(
                    "block {b} is not a complete frequency trace at one control value"
                ));
            }
        }
        controls.push(control);
    }
    let (seed, kind, meta) = split_meta(table.meta)?;
    let mut sweep = Sweep2D::new(
        freqs,
        controls,
        kind,
        parsed.into_iter().map(|r| r.2).collect(),
        seed,
    )
    .map_err(|e| e.to_string())?;
    sweep.meta = meta;
    Ok(sweep)
}

#[derive(Serialize, Deserialize)]
struct SweepJson {
    meta: BTreeMap<String, String>,
    axis1: Vec<f64>,
    axis2: Vec<f64>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

pub fn sweep_to_json(sweep: &Sweep2D) -> String {
    let n = sweep.n_controls();
    let doc = SweepJson {
        meta: full_meta(sweep),
        axis1: sweep.controls.clone(),
        axis2: sweep.freqs.clone(),
        re: (0..n)
            .map(|c| sweep.column(c).iter().map(|v| v.re).collect())
            .collect(),
        im: (0..n)
            .map(|c| sweep.column(c).iter().map(|v| v.im).collect())
            .collect(),
    };
    let mut s = serde_json::to_string(&doc).expect("sweep values are finite");
    s.push('\n');
    s
}

pub fn sweep_from_json(text: &str) -> std::result::Result<Sweep2D, String> {
    let doc: SweepJson = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let nf = doc.axis2.len();
    if doc.re.len() != doc.axis1.len() || doc.im.len() != doc.axis1.len() {
        return Err("`re`/`im` must have one row per axis1 value".into());
    }
    let mut values = Vec::with_capacity(doc.axis1.len() * nf);
    for (r, i) in doc.re.iter().zip(&doc.im) {
        if r.len() != nf || i.len() != nf {
            return Err("`re`/`im` rows must match axis2".into());
        }
        values.extend(r.iter().zip(i).map(|(a, b)| Complex64::new(*a, *b)));
    }
    let (seed, kind, meta) = split_meta(doc.meta)?;
    let mut sweep =
        Sweep2D::new(doc.axis2, doc.axis1, kind, values, seed).map_err(|e| e.to_string())?;
    sweep.meta = meta;
    Ok(sweep)
}

pub fn render_sweep(sweep: &Sweep2D, format: Format) -> String {
    match format {
        Format::Csv => sweep_to_csv(sweep),
        Format::Json => sweep_to_json(sweep),
    }
}

pub fn export_sweep(sweep: &Sweep2D, path: &Path, format: Format) -> Result<()> {
    write_text(path, &render_sweep(sweep, format))
}

/// Reads a sweep; the format follows the extension, falling back to
/// content sniffing.
pub fn import_sweep(path: &Path) -> Result<Sweep2D> {
    let text = read_text(path)?;
    let format = Format::from_path(path).unwrap_or(if text.trim_start().starts_with('{') {
        Format::Json
    } else {
        Format::Csv
    });
    match format {
        Format::Csv => sweep_from_csv(&text),
        Format::Json => sweep_from_json(&text),
    }
    .map_err(|m| Error::format(path, m))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
