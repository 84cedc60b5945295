//! Command-line front end: `moqa <gen|transform|build|spectrum|verify|sweep|bin> [flags]`.
//!
//! Outputs go to `--out` (plus `<out>.manifest.json`) or to stdout.

mod config;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use moqa::ensemble::{
    bin_by_ratio, sample_raw_instance, sweep, write_bins_csv, write_sweep_csv, EnsembleConfig,
};
use moqa::poly::AlgebraOptions;
use moqa::spectra::{verify_theorem, Spectrum, Tolerance};
use moqa::{
    build_hp_with, ErrorClass, HpOptions, Instance, MultiObjective, SymbolicMode,
    DEFAULT_ENUMERATION_CAP,
};
use serde::Serialize;

pub use config::{Basis, Config, Flags, Format, DEFAULT_BINS};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Lib(#[from] moqa::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Lib(e) => match e.class() {
                ErrorClass::Config => 1,
                ErrorClass::Capacity => 2,
                ErrorClass::Degenerate => 3,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "moqa",
    version,
    about = "Min-max binary optimization via power-sum approximations"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Sample a random constrained QUBO instance.
    Gen(Flags),
    /// Split the constraint into objectives and apply the joint shift.
    Transform(Flags),
    /// Expand h_(p) as a polynomial.
    Build(Flags),
    /// Landscape of every objective, h_max and h_(p) over all assignments.
    Spectrum(Flags),
    /// Compare ground spaces of h_max and h_(p).
    Verify(Flags),
    /// Ensemble ε/δ/violation statistics per p.
    Sweep(Flags),
    /// Ensemble ε binned by gap ratio.
    Bin(Flags),
}

/// Recorded next to every output file.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub cmd: &'a str,
    pub config: &'a Config,
    pub version: &'a str,
    pub seed: u64,
    pub timestamp: String,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Parses `argv` (including the program name), runs it and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let (name, flags) = match &cli.cmd {
        Cmd::Gen(f) => ("gen", f),
        Cmd::Transform(f) => ("transform", f),
        Cmd::Build(f) => ("build", f),
        Cmd::Spectrum(f) => ("spectrum", f),
        Cmd::Verify(f) => ("verify", f),
        Cmd::Sweep(f) => ("sweep", f),
        Cmd::Bin(f) => ("bin", f),
    };
    match execute(name, flags, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(name: &str, flags: &Flags, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = Config::resolve(name, flags)?;
    let body = match name {
        "gen" => cmd_gen(&cfg)?,
        "transform" => cmd_transform(&cfg)?,
        "build" => cmd_build(&cfg)?,
        "spectrum" => cmd_spectrum(&cfg)?,
        "verify" => cmd_verify(&cfg)?,
        "sweep" => cmd_sweep(&cfg)?,
        "bin" => cmd_bin(&cfg)?,
        _ => unreachable!("clap restricts subcommands"),
    };
    match &cfg.out {
        Some(path) => {
            fs::write(path, &body)?;
            let manifest = RunManifest {
                cmd: name,
                config: &cfg,
                version: moqa::VERSION,
                seed: cfg.seed,
                timestamp: chrono::Utc::now().to_rfc3339(),
            };
            let mut text = serde_json::to_string_pretty(&manifest).map_err(json_err)?;
            text.push('\n');
            fs::write(manifest_path(path), text)?;
        }
        None => out.write_all(&body)?,
    }
    Ok(())
}

fn json_err(e: serde_json::Error) -> CliError {
    CliError::Config(format!("json: {e}"))
}

fn to_json<T: Serialize>(v: &T) -> Result<Vec<u8>, CliError> {
    let mut s = serde_json::to_vec_pretty(v).map_err(json_err)?;
    s.push(b'\n');
    Ok(s)
}

fn format_or(cfg: &Config, default: Format, allowed: &[Format]) -> Result<Format, CliError> {
    let f = cfg.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(CliError::Config(
            format!("--format {f:?} is not supported here").to_lowercase(),
        ))
    }
}

fn sampled_instance(cfg: &Config) -> Result<Instance, CliError> {
    Ok(sample_raw_instance(
        cfg.n,
        cfg.gamma,
        cfg.seed,
        cfg.eta_or_default(),
    )?)
}

/// Multi-objective from `--input` (instance or already transformed), or sampled.
fn load_problem(cfg: &Config) -> Result<MultiObjective, CliError> {
    let instance = match &cfg.input {
        None => sampled_instance(cfg)?,
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
            let value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("parsing {}: {e}", path.display())))?;
            if value.get("objectives").is_some() {
                return serde_json::from_value(value).map_err(|e| {
                    CliError::Config(format!("multi-objective {}: {e}", path.display()))
                });
            }
            let mut inst: Instance = serde_json::from_value(value)
                .map_err(|e| CliError::Config(format!("instance {}: {e}", path.display())))?;
            if let Some(eta) = cfg.eta {
                inst.shift_eta = eta;
            }
            inst
        }
    };
    Ok(instance.to_multi_objective(cfg.shift)?)
}

fn cmd_gen(cfg: &Config) -> Result<Vec<u8>, CliError> {
    format_or(cfg, Format::Json, &[Format::Json])?;
    to_json(&sampled_instance(cfg)?)
}

fn cmd_transform(cfg: &Config) -> Result<Vec<u8>, CliError> {
    format_or(cfg, Format::Json, &[Format::Json])?;
    to_json(&load_problem(cfg)?)
}

fn cmd_build(cfg: &Config) -> Result<Vec<u8>, CliError> {
    format_or(cfg, Format::Json, &[Format::Json])?;
    let p = cfg
        .single_p()?
        .ok_or_else(|| CliError::Config("build needs a single --p".into()))?;
    let mo = load_problem(cfg)?;
    let opts = HpOptions {
        symbolic: SymbolicMode::Always,
        algebra: AlgebraOptions {
            term_budget: cfg.budget,
            ..AlgebraOptions::default()
        },
    };
    let hp = build_hp_with(&mo, p, cfg.norm, &opts)?;
    let poly = hp.symbolic().expect("always mode expands");
    match cfg.basis {
        Basis::Binary => to_json(poly),
        Basis::Ising => to_json(&poly.to_ising()),
    }
}

fn cmd_spectrum(cfg: &Config) -> Result<Vec<u8>, CliError> {
    let fmt = format_or(cfg, Format::Csv, &[Format::Csv, Format::Json])?;
    let mo = load_problem(cfg)?;
    let ps = cfg.p_values()?;
    let land = mo.landscape(DEFAULT_ENUMERATION_CAP)?;
    let hmax = land.h_max_values();
    let hps = ps
        .iter()
        .map(|&p| land.hp_values(p, cfg.norm))
        .collect::<moqa::Result<Vec<_>>>()?;
    if fmt == Format::Json {
        #[derive(Serialize)]
        struct Level {
            p: u32,
            spectrum: Spectrum,
        }
        #[derive(Serialize)]
        struct Summary {
            h_max: Spectrum,
            h_p: Vec<Level>,
        }
        let tol = Tolerance::default();
        let summary = Summary {
            h_max: Spectrum::from_values(mo.n(), hmax, tol)?,
            h_p: ps
                .iter()
                .zip(hps)
                .map(|(&p, v)| {
                    Ok(Level {
                        p,
                        spectrum: Spectrum::from_values(mo.n(), v, tol)?,
                    })
                })
                .collect::<moqa::Result<_>>()?,
        };
        return to_json(&summary);
    }
    let mut w = Vec::new();
    write!(w, "assignment")?;
    for m in 1..=mo.m() {
        write!(w, ",h_{m}")?;
    }
    write!(w, ",h_max")?;
    for p in &ps {
        write!(w, ",h_p{p}")?;
    }
    writeln!(w)?;
    for x in 0..land.len() {
        write!(w, "{x}")?;
        for v in land.objective_values(x) {
            write!(w, ",{}", moqa::fmt_float(v))?;
        }
        write!(w, ",{}", moqa::fmt_float(hmax[x]))?;
        for col in &hps {
            write!(w, ",{}", moqa::fmt_float(col[x]))?;
        }
        writeln!(w)?;
    }
    Ok(w)
}

fn cmd_verify(cfg: &Config) -> Result<Vec<u8>, CliError> {
    format_or(cfg, Format::Json, &[Format::Json])?;
    let mo = load_problem(cfg)?;
    let p = match cfg.single_p()? {
        Some(p) => p,
        None => auto_p(&mo)?,
    };
    to_json(&verify_theorem(&mo, p)?)
}

/// `⌈p₀⌉ + 1`, the smallest degree strictly above the recovery threshold.
pub fn auto_p(mo: &MultiObjective) -> Result<u32, CliError> {
    let p0 = verify_theorem(mo, 1)?.p0;
    if !(p0.is_finite() && p0 < u32::MAX as f64) {
        return Err(moqa::Error::UndefinedRatio(format!("threshold degree {p0}")).into());
    }
    Ok(p0.ceil() as u32 + 1)
}

fn ensemble_config(cfg: &Config, bins: bool) -> Result<EnsembleConfig, CliError> {
    Ok(EnsembleConfig {
        n: cfg.n,
        gamma: cfg.gamma,
        num_instances: cfg.num_instances,
        p_values: cfg.p_values()?,
        master_seed: cfg.seed,
        shift_eta: cfg.eta_or_default(),
        normalization: cfg.norm,
        bins: bins.then(|| cfg.bins.clone()),
    })
}

fn cmd_sweep(cfg: &Config) -> Result<Vec<u8>, CliError> {
    let fmt = format_or(cfg, Format::Csv, &[Format::Csv, Format::Json])?;
    let rows = sweep(&ensemble_config(cfg, false)?, cfg.workers)?;
    match fmt {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut w = Vec::new();
            write_sweep_csv(&rows, &mut w)?;
            Ok(w)
        }
    }
}

fn cmd_bin(cfg: &Config) -> Result<Vec<u8>, CliError> {
    let fmt = format_or(cfg, Format::Csv, &[Format::Csv, Format::Json])?;
    let rows = bin_by_ratio(&ensemble_config(cfg, true)?, cfg.workers)?;
    match fmt {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut w = Vec::new();
            write_bins_csv(&rows, &mut w)?;
            Ok(w)
        }
    }
}
