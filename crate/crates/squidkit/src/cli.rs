//! Command-line surface.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use squidkit_core::analysis::{
    ft_periodicity, ft_periodicity_rows, invert_flux_map, track_resonance, ResonanceTrack,
};
use squidkit_core::circuit::{
    coupling_strength_hz, critical_current, infer_ft_from_shift, invert_josephson_energy,
    purcell_t1, TransmonParams,
};
use squidkit_core::squid::bias_period;
use squidkit_core::sweep::Sweep2D;

use crate::config::ToolkitConfig;
use crate::error::{Error, Result};
use crate::io::Format;
use crate::record::{Payload, ResultRecord};
use crate::{parallel, plot};

#[derive(Debug, Parser)]
#[command(
    name = "squidkit",
    version,
    about = "Flux-tunable SQUID transmon and readout cavity simulator"
)]
pub struct Cli {
    /// TOML configuration, or a previous output whose echoed configuration is reused.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides the configured noise seed.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Data format; defaults to the extension of --out, then csv.
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
    /// Suppresses progress and summary messages.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic sweeps.
    #[command(subcommand)]
    Simulate(Simulate),
    /// Derived circuit quantities.
    #[command(subcommand)]
    Derive(Derive),
    /// Analyze a sweep or an earlier analysis result.
    #[command(subcommand)]
    Analyze(Analyze),
    /// Render any toolkit output as SVG.
    Plot { input: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum Simulate {
    /// Cavity response versus drive power.
    PowerSweep,
    /// Cavity response versus flux bias voltage.
    FluxSweep,
}

#[derive(Debug, Subcommand)]
pub enum Derive {
    /// Parameter chain from the circuit and the observed shifts.
    Params,
}

#[derive(Debug, Subcommand)]
pub enum Analyze {
    /// Fit the cavity resonance in every column of a sweep.
    Track { input: PathBuf },
    /// Transmon frequency and critical current from a tracked flux sweep.
    Invert { input: PathBuf },
    /// Fourier periodicity of a tracked resonance or of the raw map.
    Periodicity {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Source::Track)]
        source: Source,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Source {
    Track,
    Map,
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    1
                }
            };
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn info(&mut self, msg: impl AsRef<str>) {
        if !self.cli.quiet {
            let _ = writeln!(self.stderr, "{}", msg.as_ref());
        }
    }

    fn format(&self) -> Format {
        match self.cli.format {
            Some(FormatArg::Csv) => Format::Csv,
            Some(FormatArg::Json) => Format::Json,
            None => self
                .cli
                .out
                .as_deref()
                .and_then(Format::from_path)
                .unwrap_or(Format::Csv),
        }
    }

    fn emit(&mut self, text: &str) -> Result<()> {
        match &self.cli.out {
            Some(p) => crate::io::write_text(p, text),
            None => self
                .stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::io(Path::new("<stdout>"), e)),
        }
    }

    /// `--config` if given, else the configuration embedded in `input`,
    /// else the defaults; `--seed` applies last.
    fn config(&self, input: Option<&ResultRecord>) -> Result<ToolkitConfig> {
        let mut cfg = match (&self.cli.config, input.and_then(|r| r.config())) {
            (Some(p), _) => ToolkitConfig::load(p)?,
            (None, Some(embedded)) => embedded?,
            (None, None) => ToolkitConfig::default(),
        };
        if let Some(s) = self.cli.seed {
            cfg.seed = s;
        }
        Ok(cfg)
    }

    fn emit_record(&mut self, rec: &ResultRecord) -> Result<()> {
        let text = rec.render(self.format());
        self.emit(&text)
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let mut ctx = Ctx {
        cli,
        stdout,
        stderr,
    };
    match &cli.command {
        Command::Simulate(Simulate::FluxSweep) => {
            let cfg = ctx.config(None)?;
            let sweep = parallel::flux_sweep(&cfg.flux_sweep_plan()?)?;
            ctx.info(format!(
                "flux sweep: {} biases x {} frequencies, {} columns outside the dispersive regime",
                sweep.n_controls(),
                sweep.n_freqs(),
                sweep.invalid_columns().len()
            ));
            ctx.emit_record(&ResultRecord::new(Payload::Sweep(sweep), &cfg))
        }
        Command::Simulate(Simulate::PowerSweep) => {
            let cfg = ctx.config(None)?;
            let mut sweep = parallel::power_sweep(&cfg.power_sweep_plan()?)?;
            sweep.seed = cfg.seed;
            ctx.info(format!(
                "power sweep: {} powers x {} frequencies",
                sweep.n_controls(),
                sweep.n_freqs()
            ));
            ctx.emit_record(&ResultRecord::new(Payload::Sweep(sweep), &cfg))
        }
        Command::Derive(Derive::Params) => {
            let cfg = ctx.config(None)?;
            let mut text = String::new();
            for (k, v) in derive_params(&cfg)? {
                text.push_str(&format!("{k}={v:?}\n"));
            }
            ctx.emit(&text)
        }
        Command::Analyze(Analyze::Track { input }) => {
            let rec = ResultRecord::load(input)?;
            let cfg = ctx.config(Some(&rec))?;
            let sweep = expect_sweep(&rec, input)?;
            let track = track_resonance(sweep)?;
            ctx.info(format!(
                "track: {} of {} columns fitted",
                track.valid_count(),
                track.len()
            ));
            ctx.emit_record(&ResultRecord::new(Payload::Track(track), &cfg))
        }
        Command::Analyze(Analyze::Invert { input }) => {
            let rec = ResultRecord::load(input)?;
            let cfg = ctx.config(Some(&rec))?;
            let track = track_of(&rec, input)?;
            let inv = invert_flux_map(
                &track,
                cfg.circuit.g_hz,
                cfg.cavity.f_bare_hz,
                cfg.e_c_over_h()?,
            )?;
            ctx.info(format!(
                "inversion: f_t,max = {:.6} GHz",
                inv.f_t_max * 1e-9
            ));
            ctx.emit_record(&ResultRecord::new(Payload::Inversion(inv), &cfg))
        }
        Command::Analyze(Analyze::Periodicity { input, source }) => {
            let rec = ResultRecord::load(input)?;
            let cfg = ctx.config(Some(&rec))?;
            let opts = cfg.periodicity_options();
            let report = match source {
                Source::Track => {
                    let track = track_of(&rec, input)?;
                    ft_periodicity(
                        &track.control_values,
                        &track.filled()?,
                        &opts,
                        track.control_kind.unit(),
                    )?
                }
                Source::Map => {
                    let sweep = expect_sweep(&rec, input)?;
                    let rows = map_rows(sweep);
                    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
                    ft_periodicity_rows(&sweep.controls, &refs, &opts, sweep.control_kind.unit())?
                }
            };
            ctx.info(format!(
                "periodicity: dominant {:.4} /{u}, half-dominant/floor {:.2}, verdict {:?}",
                report.dominant_freq,
                report.half_freq_mag / report.noise_floor,
                report.verdict,
                u = report.control_unit
            ));
            ctx.emit_record(&ResultRecord::new(Payload::Periodicity(report), &cfg))
        }
        Command::Plot { input } => {
            let rec = ResultRecord::load(input)?;
            let svg = plot::record_svg(&rec);
            ctx.emit(&svg)
        }
    }
}

fn expect_sweep<'a>(rec: &'a ResultRecord, path: &Path) -> Result<&'a Sweep2D> {
    rec.sweep()
        .ok_or_else(|| Error::format(path, "expected a power or flux sweep"))
}

fn track_of(rec: &ResultRecord, path: &Path) -> Result<ResonanceTrack> {
    match &rec.payload {
        Payload::Sweep(s) => Ok(track_resonance(s)?),
        Payload::Track(t) => Ok(t.clone()),
        _ => Err(Error::format(path, "expected a sweep or a track")),
    }
}

/// Magnitude versus control at each frequency of the map.
pub fn map_rows(sweep: &Sweep2D) -> Vec<Vec<f64>> {
    (0..sweep.n_freqs())
        .map(|f| {
            (0..sweep.n_controls())
                .map(|c| sweep.get(c, f).norm())
                .collect()
        })
        .collect()
}

/// The circuit parameter chain as ordered key/value pairs.
pub fn derive_params(cfg: &ToolkitConfig) -> Result<Vec<(&'static str, f64)>> {
    let circuit = cfg.circuit_params()?;
    let cavity = cfg.cavity_model()?;
    let squid = cfg.squid_model()?;
    let g = cfg.circuit.g_hz;
    let o = &cfg.observed;
    let low = TransmonParams::from_dispersive_shift(o.chi_hz, g, o.f_r_hz, circuit.c_sigma())?;
    let f_t_max = infer_ft_from_shift(o.chi_sweet_spot_hz, g, o.f_r_sweet_spot_hz)?;
    let e_j_max = invert_josephson_energy(f_t_max, low.e_c_over_h)?;
    let delta = low.f_t - o.f_r_hz;
    Ok(vec![
        ("c_sigma_f", circuit.c_sigma()),
        ("c_r_f", circuit.c_r),
        ("beta", circuit.beta()),
        ("g_formula_hz", coupling_strength_hz(&circuit)),
        ("g_hz", g),
        ("e_c_over_h_hz", low.e_c_over_h),
        ("chi_hz", o.chi_hz),
        ("f_r_hz", o.f_r_hz),
        ("f_t_hz", low.f_t),
        ("e_j_over_h_hz", low.e_j_over_h),
        ("i_c_a", low.i_c),
        ("purcell_delta_hz", delta),
        ("purcell_t1_s", purcell_t1(delta, cavity.kappa(), g)?),
        ("chi_sweet_spot_hz", o.chi_sweet_spot_hz),
        ("f_r_sweet_spot_hz", o.f_r_sweet_spot_hz),
        ("f_t_max_hz", f_t_max),
        ("e_j_max_over_h_hz", e_j_max),
        ("i_c_max_a", critical_current(e_j_max)),
        ("f_bare_hz", cavity.f_bare),
        ("kappa_hz", cavity.kappa()),
        ("q_loaded", cavity.q_loaded()),
        ("bias_period_v", bias_period(&squid)),
    ])
}
