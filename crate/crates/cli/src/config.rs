use std::path::PathBuf;

use clap::{Args, ValueEnum};
use moqa::{Normalization, ShiftMode};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_BINS: [f64; 11] = [
    0.0,
    0.005,
    0.01,
    0.02,
    0.04,
    0.06,
    0.09,
    0.15,
    0.27,
    0.5,
    f64::INFINITY,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    #[default]
    Binary,
    Ising,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    Sum,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShiftArg {
    Exact,
    Bound,
}

/// Flags shared by every subcommand. Unset flags fall back to `--config`,
/// then to built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated list of degrees.
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<u32>>,
    #[arg(long)]
    pub p_min: Option<u32>,
    #[arg(long)]
    pub p_max: Option<u32>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, value_enum)]
    pub norm: Option<NormArg>,
    #[arg(long, value_enum)]
    pub shift: Option<ShiftArg>,
    /// Comma-separated ascending bin edges; `inf` is accepted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub bins: Option<Vec<f64>>,
    #[arg(long)]
    pub num_instances: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, value_enum)]
    pub basis: Option<Basis>,
    /// Term budget for symbolic expansion.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Instance or multi-objective JSON; when absent an instance is sampled.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config, or a run manifest whose `config` is reused.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Fully resolved settings; this is what a manifest records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub n: usize,
    pub gamma: f64,
    pub seed: u64,
    pub p: Option<Vec<u32>>,
    pub p_min: u32,
    pub p_max: u32,
    pub eta: Option<f64>,
    pub norm: Normalization,
    pub shift: ShiftMode,
    #[serde(with = "edges")]
    pub bins: Vec<f64>,
    pub num_instances: usize,
    pub workers: Option<usize>,
    pub format: Option<Format>,
    pub basis: Basis,
    pub budget: usize,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            n: 6,
            gamma: 120.0,
            seed: 1,
            p: None,
            p_min: 1,
            p_max: 8,
            eta: None,
            norm: Normalization::Sum,
            shift: ShiftMode::Exact,
            bins: DEFAULT_BINS.to_vec(),
            num_instances: 1000,
            workers: None,
            format: None,
            basis: Basis::Binary,
            budget: moqa::poly::DEFAULT_TERM_BUDGET,
            input: None,
            out: None,
        }
    }
}

impl Config {
    /// Loads the config file if any, then applies flags on top.
    pub fn resolve(cmd: &str, flags: &Flags) -> Result<Config, CliError> {
        let mut cfg = match &flags.config {
            Some(path) => load(cmd, path)?,
            None => Config::default(),
        };
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = flags.$f.clone() { cfg.$f = v; } )* };
        }
        take!(
            n,
            gamma,
            seed,
            p_min,
            p_max,
            bins,
            num_instances,
            basis,
            budget
        );
        if flags.p.is_some() {
            cfg.p = flags.p.clone();
        }
        if flags.eta.is_some() {
            cfg.eta = flags.eta;
        }
        if flags.workers.is_some() {
            cfg.workers = flags.workers;
        }
        if flags.format.is_some() {
            cfg.format = flags.format;
        }
        if flags.input.is_some() {
            cfg.input = flags.input.clone();
        }
        if flags.out.is_some() {
            cfg.out = flags.out.clone();
        }
        if let Some(norm) = flags.norm {
            cfg.norm = match norm {
                NormArg::Sum => Normalization::Sum,
                NormArg::Mean => Normalization::Mean,
            };
        }
        if let Some(shift) = flags.shift {
            cfg.shift = match shift {
                ShiftArg::Exact => ShiftMode::Exact,
                ShiftArg::Bound => ShiftMode::Bound,
            };
        }
        Ok(cfg)
    }

    /// Degrees from `p`, or the inclusive range `p_min..=p_max`.
    pub fn p_values(&self) -> Result<Vec<u32>, CliError> {
        let ps = match &self.p {
            Some(ps) => ps.clone(),
            None => (self.p_min..=self.p_max).collect(),
        };
        if ps.is_empty() || ps.contains(&0) {
            return Err(CliError::Config(
                "p values must be nonempty and >= 1".into(),
            ));
        }
        Ok(ps)
    }

    /// The single explicit degree, if `p` was given.
    pub fn single_p(&self) -> Result<Option<u32>, CliError> {
        match self.p.as_deref() {
            None => Ok(None),
            Some([p]) if *p >= 1 => Ok(Some(*p)),
            Some(other) => Err(CliError::Config(format!(
                "expected exactly one p >= 1, got {other:?}"
            ))),
        }
    }

    pub fn eta_or_default(&self) -> f64 {
        self.eta.unwrap_or(1.0)
    }
}

fn load(cmd: &str, path: &PathBuf) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
    let mut value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("parsing {}: {e}", path.display())))?;
    if let Some(obj) = value.as_object_mut() {
        if obj.contains_key("cmd") && obj.contains_key("config") {
            let recorded = obj.get("cmd").and_then(|c| c.as_str()).unwrap_or_default();
            if recorded != cmd {
                return Err(CliError::Config(format!(
                    "manifest {} was written by `{recorded}`, not `{cmd}`",
                    path.display()
                )));
            }
            value = obj.remove("config").unwrap_or_default();
        }
    }
    serde_json::from_value(value)
        .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
}

/// JSON has no infinity, so non-finite edges travel as strings.
mod edges {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Edge {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|&x| {
                if x.is_finite() {
                    Edge::Num(x)
                } else {
                    Edge::Text(x.to_string())
                }
            })
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Edge>::deserialize(d)?
            .into_iter()
            .map(|e| match e {
                Edge::Num(x) => Ok(x),
                Edge::Text(t) => t.parse().map_err(serde::de::Error::custom),
            })
            .collect()
    }
}
