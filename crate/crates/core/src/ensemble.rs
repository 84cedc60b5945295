//! Random constrained-QUBO ensembles and their error statistics.
//!
//! Instance `i` of an ensemble is drawn from a ChaCha8 stream seeded with
//! [`instance_seed`]`(master_seed, i)`, so instances are independent of how
//! the work is split across threads. Per-instance results are reduced in
//! index order.

use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt_float;
use crate::poly::Polynomial;
use crate::problem::{qubo_objective, Instance, MultiObjective, Normalization, ShiftMode};
use crate::spectra::{gap_ratio, threshold_ratio, Spectrum, Tolerance};
use crate::DEFAULT_ENUMERATION_CAP;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of instance `index`: SplitMix64 applied to
/// `master + (index + 1)·0x9E3779B97F4A7C15`.
pub fn instance_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Raw Gaussian draws behind one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianQubo {
    /// Upper triangular, diagonal included.
    pub q: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    /// Constraint `aᵀb ≥ 0`.
    pub a: Vec<f64>,
}

/// Draws `Q` (row-major over `i ≤ j`), then `c`, then `a`, all i.i.d. N(0,1).
pub fn sample_qubo(n: usize, seed: u64) -> GaussianQubo {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut q = vec![vec![0.0; n]; n];
    for (i, row) in q.iter_mut().enumerate() {
        for v in row.iter_mut().skip(i) {
            *v = draw();
        }
    }
    let c = (0..n).map(|_| draw()).collect();
    let a = (0..n).map(|_| draw()).collect();
    GaussianQubo { q, c, a }
}

/// The unshifted instance description for `sample_qubo(n, seed)`.
pub fn sample_raw_instance(n: usize, gamma: f64, seed: u64, shift_eta: f64) -> Result<Instance> {
    if n > DEFAULT_ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            n,
            cap: DEFAULT_ENUMERATION_CAP,
        });
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "gamma must be > 0, got {gamma}"
        )));
    }
    let draw = sample_qubo(n, seed);
    let objective = qubo_objective(&draw.q, &draw.c, 0.0)?;
    let constraint =
        Polynomial::from_terms(n, draw.a.iter().enumerate().map(|(i, &v)| (vec![i], v)))?;
    Ok(Instance {
        n,
        gamma,
        objective,
        constraint: Some(constraint),
        equality: None,
        shift_eta,
    })
}

/// `[h, h − γg]` for a Gaussian QUBO `h` and linear constraint `g = aᵀb`,
/// jointly shifted so the smallest objective value is `shift_eta`.
pub fn sample_instance(n: usize, gamma: f64, seed: u64, shift_eta: f64) -> Result<MultiObjective> {
    sample_raw_instance(n, gamma, seed, shift_eta)?.to_multi_objective(ShiftMode::Exact)
}

/// Per-instance comparison of the `h_(p)` and `h_max` minimizers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InstanceError {
    /// `h_max` differs at the two minimizers.
    pub eps: bool,
    /// Relative excess of `h_max` at the `h_(p)` minimizer.
    pub delta: f64,
    /// The `h_(p)` minimizer violates the inequality constraint.
    pub violated: bool,
}

fn compare_minima(
    mo: &MultiObjective,
    hmax: &Spectrum,
    hp_values: Vec<f64>,
    tol: Tolerance,
) -> Result<InstanceError> {
    let best = hmax.lambda1;
    if best <= tol.rel {
        return Err(Error::UndefinedRatio(format!(
            "minimum of h_max is {best}; relative error needs a positive shift margin"
        )));
    }
    let hp = Spectrum::from_values(hmax.n, hp_values, tol)?;
    let bp = hp.argmin();
    let at_bp = hmax.values[bp as usize];
    let eps = !tol.same_level(at_bp, hmax.values[hmax.argmin() as usize]);
    let delta = if eps { (at_bp - best) / best } else { 0.0 };
    Ok(InstanceError {
        eps,
        delta,
        violated: mo.constraint_violated_index(bp)?,
    })
}

/// ε, δ and constraint violation of the degree-`p` approximation on one
/// shifted instance.
pub fn epsilon_delta(mo: &MultiObjective, p: u32, norm: Normalization) -> Result<InstanceError> {
    let land = mo.landscape(DEFAULT_ENUMERATION_CAP)?;
    let tol = Tolerance::default();
    let hmax = Spectrum::from_values(land.n(), land.h_max_values(), tol)?;
    compare_minima(mo, &hmax, land.hp_values(p, norm)?, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n: usize,
    pub gamma: f64,
    pub num_instances: usize,
    pub p_values: Vec<u32>,
    pub master_seed: u64,
    pub shift_eta: f64,
    #[serde(default)]
    pub normalization: Normalization,
    /// Ascending edges; bin `k` holds `edges[k] ≤ r < edges[k+1]`.
    #[serde(default)]
    pub bins: Option<Vec<f64>>,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_instances == 0 {
            return Err(Error::InvalidArgument("num_instances must be >= 1".into()));
        }
        if self.p_values.is_empty() || self.p_values.contains(&0) {
            return Err(Error::InvalidArgument(
                "p_values must be nonempty with every p >= 1".into(),
            ));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gamma must be > 0, got {}",
                self.gamma
            )));
        }
        if !(self.shift_eta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "shift_eta must be > 0, got {}",
                self.shift_eta
            )));
        }
        if self.n > DEFAULT_ENUMERATION_CAP {
            return Err(Error::EnumerationCap {
                n: self.n,
                cap: DEFAULT_ENUMERATION_CAP,
            });
        }
        if let Some(edges) = &self.bins {
            if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::InvalidArgument(
                    "bins need at least two strictly increasing edges".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Everything the aggregations need from one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceOutcome {
    pub r_max: f64,
    /// Aligned with `EnsembleConfig::p_values`.
    pub errors: Vec<InstanceError>,
}

fn evaluate_instance(config: &EnsembleConfig, index: usize) -> Result<InstanceOutcome> {
    let seed = instance_seed(config.master_seed, index as u64);
    let mo = sample_instance(config.n, config.gamma, seed, config.shift_eta)?;
    let land = mo.landscape(DEFAULT_ENUMERATION_CAP)?;
    let tol = Tolerance::default();
    let hmax = Spectrum::from_values(land.n(), land.h_max_values(), tol)?;
    let r_max = gap_ratio(&hmax)?;
    let errors = config
        .p_values
        .iter()
        .map(|&p| compare_minima(&mo, &hmax, land.hp_values(p, config.normalization)?, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(InstanceOutcome { r_max, errors })
}

/// Evaluates every instance, in parallel over `workers` threads (default:
/// available parallelism). Results are in instance order.
pub fn run_instances(
    config: &EnsembleConfig,
    workers: Option<usize>,
) -> Result<Vec<InstanceOutcome>> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
    let results: Vec<Result<InstanceOutcome>> = pool.install(|| {
        (0..config.num_instances)
            .into_par_iter()
            .map(|i| evaluate_instance(config, i).map_err(|e| e.at_instance(i)))
            .collect()
    });
    results.into_iter().collect()
}

/// Aggregate statistics for one `(n, p)` pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleRow {
    pub n: usize,
    pub p: u32,
    pub epsilon: f64,
    pub delta: f64,
    pub violation_rate: f64,
    pub mean_r: f64,
    pub count: usize,
}

pub fn aggregate_rows(config: &EnsembleConfig, outcomes: &[InstanceOutcome]) -> Vec<EnsembleRow> {
    let count = outcomes.len();
    let denom = count as f64;
    let mean_r = outcomes.iter().map(|o| o.r_max).sum::<f64>() / denom;
    config
        .p_values
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let (mut eps, mut delta, mut viol) = (0usize, 0.0f64, 0usize);
            for o in outcomes {
                let e = o.errors[k];
                eps += e.eps as usize;
                delta += e.delta;
                viol += e.violated as usize;
            }
            EnsembleRow {
                n: config.n,
                p,
                epsilon: eps as f64 / denom,
                delta: delta / denom,
                violation_rate: viol as f64 / denom,
                mean_r,
                count,
            }
        })
        .collect()
}

/// Mean ε, δ and violation rate per `p`, rows in `p_values` order.
pub fn sweep(config: &EnsembleConfig, workers: Option<usize>) -> Result<Vec<EnsembleRow>> {
    let outcomes = run_instances(config, workers)?;
    Ok(aggregate_rows(config, &outcomes))
}

/// Mean ε of the instances whose `h_max` gap ratio falls in one bin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinRow {
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub p: u32,
    /// `NaN` when the bin is empty.
    pub epsilon: f64,
    pub count: usize,
    /// Gap ratio `M^{1/p} − 1` above which ε must vanish.
    pub r_star: f64,
}

pub fn aggregate_bins(
    edges: &[f64],
    config: &EnsembleConfig,
    outcomes: &[InstanceOutcome],
) -> Vec<BinRow> {
    const M: usize = 2;
    let mut rows = Vec::with_capacity((edges.len() - 1) * config.p_values.len());
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let members: Vec<&InstanceOutcome> = outcomes
            .iter()
            .filter(|o| o.r_max >= lo && o.r_max < hi)
            .collect();
        for (k, &p) in config.p_values.iter().enumerate() {
            let hits = members.iter().filter(|o| o.errors[k].eps).count();
            rows.push(BinRow {
                bin_lo: lo,
                bin_hi: hi,
                p,
                epsilon: if members.is_empty() {
                    f64::NAN
                } else {
                    hits as f64 / members.len() as f64
                },
                count: members.len(),
                r_star: threshold_ratio(M, p),
            });
        }
    }
    rows
}

/// Mean ε per (gap-ratio bin, p); rows are bin-major, `p` in config order.
pub fn bin_by_ratio(config: &EnsembleConfig, workers: Option<usize>) -> Result<Vec<BinRow>> {
    let edges = config
        .bins
        .clone()
        .ok_or_else(|| Error::InvalidArgument("bin_by_ratio requires bin edges".into()))?;
    let outcomes = run_instances(config, workers)?;
    Ok(aggregate_bins(&edges, config, &outcomes))
}

pub const SWEEP_CSV_HEADER: &str = "n,p,epsilon,delta,violation_rate,mean_r,count";
pub const BIN_CSV_HEADER: &str = "bin_lo,bin_hi,p,epsilon,count,r_star";

pub fn write_sweep_csv<W: Write>(rows: &[EnsembleRow], mut w: W) -> io::Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.n,
            r.p,
            fmt_float(r.epsilon),
            fmt_float(r.delta),
            fmt_float(r.violation_rate),
            fmt_float(r.mean_r),
            r.count
        )?;
    }
    Ok(())
}

pub fn write_bins_csv<W: Write>(rows: &[BinRow], mut w: W) -> io::Result<()> {
    writeln!(w, "{BIN_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_float(r.bin_lo),
            fmt_float(r.bin_hi),
            r.p,
            fmt_float(r.epsilon),
            r.count,
            fmt_float(r.r_star)
        )?;
    }
    Ok(())
}
