//! Exhaustive landscapes of diagonal Hamiltonians and ground-space checks.
//!
//! Because every Hamiltonian here is diagonal in the computational basis,
//! its spectrum is simply the list of objective values over all `2ⁿ`
//! assignments. Values `a`, `b` count as one level when
//! `|a − b| ≤ rel · max(1, |a|, |b|)`.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{MultiObjective, Normalization};
use crate::DEFAULT_ENUMERATION_CAP;

pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rel: DEFAULT_DEGENERACY_TOL,
        }
    }
}

impl Tolerance {
    #[inline]
    pub fn same_level(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.rel * 1f64.max(a.abs()).max(b.abs())
    }
}

/// All objective values with the levels the analysis needs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub n: usize,
    #[serde(skip)]
    pub values: Vec<f64>,
    pub lambda1: f64,
    /// First level strictly above `lambda1`; absent for constant landscapes.
    pub lambda2: Option<f64>,
    pub lambda_max: f64,
    /// Minimizing assignments in ascending integer order.
    pub ground_set: Vec<u64>,
}

impl Spectrum {
    pub fn from_values(n: usize, values: Vec<f64>, tol: Tolerance) -> Result<Self> {
        if values.len() != 1usize << n {
            return Err(Error::LengthMismatch {
                expected: 1usize << n,
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "landscape value at assignment {i}"
            )));
        }
        let lambda1 = values.iter().copied().fold(f64::INFINITY, f64::min);
        let lambda_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut ground_set = Vec::new();
        let mut lambda2: Option<f64> = None;
        for (x, &v) in values.iter().enumerate() {
            if tol.same_level(v, lambda1) {
                ground_set.push(x as u64);
            } else if lambda2.is_none_or(|l| v < l) {
                lambda2 = Some(v);
            }
        }
        Ok(Self {
            n,
            values,
            lambda1,
            lambda2,
            lambda_max,
            ground_set,
        })
    }

    /// Deterministic argmin: the smallest minimizing assignment.
    pub fn argmin(&self) -> u64 {
        self.ground_set[0]
    }

    pub fn is_degenerate(&self) -> bool {
        self.ground_set.len() > 1
    }

    /// Writes `assignment,value` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "assignment,value")?;
        for (x, v) in self.values.iter().enumerate() {
            writeln!(w, "{x},{}", crate::fmt_float(*v))?;
        }
        Ok(())
    }
}

/// Evaluates `eval` on every assignment of `n` bits, in parallel.
pub fn enumerate_spectrum<F>(eval: F, n: usize) -> Result<Spectrum>
where
    F: Fn(u64) -> f64 + Sync,
{
    enumerate_spectrum_with(eval, n, DEFAULT_ENUMERATION_CAP, Tolerance::default())
}

pub fn enumerate_spectrum_with<F>(eval: F, n: usize, cap: usize, tol: Tolerance) -> Result<Spectrum>
where
    F: Fn(u64) -> f64 + Sync,
{
    if n > cap {
        return Err(Error::EnumerationCap { n, cap });
    }
    let values: Vec<f64> = (0..1u64 << n).into_par_iter().map(&eval).collect();
    Spectrum::from_values(n, values, tol)
}

/// `(λ₂ − λ₁)/λ₁`.
pub fn gap_ratio(s: &Spectrum) -> Result<f64> {
    let lambda2 = s.lambda2.ok_or(Error::ConstantLandscape)?;
    if s.lambda1 <= DEFAULT_DEGENERACY_TOL {
        return Err(Error::UndefinedRatio(format!(
            "ground energy {} is not positive; shift the objectives first",
            s.lambda1
        )));
    }
    Ok((lambda2 - s.lambda1) / s.lambda1)
}

/// `(λ₂ − λ₁)/(λ_max − λ₁)`, invariant under positive affine maps.
pub fn relative_gap(s: &Spectrum) -> Result<f64> {
    let lambda2 = s.lambda2.ok_or(Error::ConstantLandscape)?;
    Ok((lambda2 - s.lambda1) / (s.lambda_max - s.lambda1))
}

/// Smallest `p₀ = ln M / ln(1 + r)` beyond which recovery is guaranteed.
pub fn threshold_p(m: usize, r: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidArgument("M must be at least 1".into()));
    }
    if !(r > 0.0) {
        return Err(Error::UndefinedRatio(format!(
            "threshold needs a positive gap ratio, got {r}"
        )));
    }
    Ok((m as f64).ln() / r.ln_1p())
}

/// The gap ratio at which `p` becomes sufficient: `M^{1/p} − 1`.
pub fn threshold_ratio(m: usize, p: u32) -> f64 {
    ((m as f64).ln() / p as f64).exp_m1()
}

/// Worst signed deviation from `M^{-1/p}‖u‖_p ≤ max u ≤ ‖u‖_p` over all
/// assignments, where `u_m = h_m(b)`. Non-positive when the bounds hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichCheck {
    pub max_violation: f64,
    /// Each deviation divided by `max(1, h_max(b))`.
    pub max_relative_violation: f64,
}

/// Checks the two-sided bound between `h_max` and `h_(p)^{1/p}`.
///
/// `‖u‖_p` is evaluated as `max·(Σ (u_m/max)^p)^{1/p}`, which is overflow
/// free and exact for `M = 1`.
pub fn check_sandwich(mo: &MultiObjective, p: u32) -> Result<SandwichCheck> {
    check_sandwich_with(mo, p, DEFAULT_ENUMERATION_CAP)
}

pub fn check_sandwich_with(mo: &MultiObjective, p: u32, cap: usize) -> Result<SandwichCheck> {
    if p == 0 {
        return Err(Error::ZeroPower(p));
    }
    let land = mo.landscape(cap)?;
    let lower_factor = (-(mo.m() as f64).ln() / p as f64).exp();
    let mut worst = f64::NEG_INFINITY;
    let mut worst_rel = f64::NEG_INFINITY;
    for x in 0..land.len() {
        let u: Vec<f64> = land.objective_values(x).collect();
        if let Some(v) = u.iter().find(|v| **v < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "objective value {v} at assignment {x} is negative; shift first"
            )));
        }
        let hmax = u.iter().copied().fold(0.0, f64::max);
        let norm = if hmax == 0.0 {
            0.0
        } else {
            let s: f64 = u.iter().map(|v| (v / hmax).powi(p as i32)).sum();
            hmax * s.powf(1.0 / p as f64)
        };
        let dev = (lower_factor * norm - hmax).max(hmax - norm);
        worst = worst.max(dev);
        worst_rel = worst_rel.max(dev / hmax.max(1.0));
    }
    Ok(SandwichCheck {
        max_violation: worst,
        max_relative_violation: worst_rel,
    })
}

/// Outcome of comparing `h_max` with `h_(p)` on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub m: usize,
    pub p_used: u32,
    pub p0: f64,
    pub r_max: f64,
    pub r_p: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub relative_gap_max: f64,
    pub degenerate: bool,
    pub max_ground_set: Vec<u64>,
    pub p_ground_set: Vec<u64>,
    pub same_ground_space: bool,
    /// `h_(p)` minimizers all minimize `h_max`.
    pub ground_subset: bool,
    pub ratio_grew: bool,
    /// `ν₂/ν₁ ≥ λ₂ᵖ/(M·λ₁ᵖ)`, evaluated in log space.
    pub gap_chain_holds: bool,
    /// Worst relative deviation of the per-assignment sandwich, computed from
    /// the `h_(p)` spectrum directly.
    pub sandwich_max_violation: f64,
}

impl VerificationReport {
    /// Whether `p_used` exceeds the recovery threshold.
    pub fn above_threshold(&self) -> bool {
        self.p_used as f64 > self.p0
    }
}

pub fn verify_theorem(mo: &MultiObjective, p: u32) -> Result<VerificationReport> {
    verify_theorem_with(mo, p, DEFAULT_ENUMERATION_CAP, Tolerance::default())
}

pub fn verify_theorem_with(
    mo: &MultiObjective,
    p: u32,
    cap: usize,
    tol: Tolerance,
) -> Result<VerificationReport> {
    if p == 0 {
        return Err(Error::ZeroPower(p));
    }
    let land = mo.landscape(cap)?;
    let hmax_values = land.h_max_values();
    let hp_values = land.hp_values(p, Normalization::Sum)?;

    let m = mo.m();
    let lower_factor = (-(m as f64).ln() / p as f64).exp();
    let sandwich = hmax_values
        .iter()
        .zip(&hp_values)
        .map(|(&h, &v)| {
            let root = v.powf(1.0 / p as f64);
            (lower_factor * root - h).max(h - root) / h.max(1.0)
        })
        .fold(f64::NEG_INFINITY, f64::max);

    let smax = Spectrum::from_values(land.n(), hmax_values, tol)?;
    let sp = Spectrum::from_values(land.n(), hp_values, tol)?;
    let r_max = gap_ratio(&smax)?;
    let r_p = gap_ratio(&sp)?;
    let p0 = threshold_p(m, r_max)?;
    let lambda2 = smax.lambda2.ok_or(Error::ConstantLandscape)?;
    let nu2 = sp.lambda2.ok_or(Error::ConstantLandscape)?;

    let chain_lhs = nu2.ln() - sp.lambda1.ln();
    let chain_rhs = p as f64 * (lambda2.ln() - smax.lambda1.ln()) - (m as f64).ln();

    Ok(VerificationReport {
        m,
        p_used: p,
        p0,
        r_max,
        r_p,
        lambda1: smax.lambda1,
        lambda2,
        nu1: sp.lambda1,
        nu2,
        relative_gap_max: relative_gap(&smax)?,
        degenerate: smax.is_degenerate(),
        same_ground_space: sp.ground_set == smax.ground_set,
        ground_subset: sp.ground_set.iter().all(|x| smax.ground_set.contains(x)),
        ratio_grew: r_p >= r_max - tol.rel * r_max.max(1.0),
        gap_chain_holds: chain_lhs >= chain_rhs - tol.rel * chain_rhs.abs().max(1.0),
        sandwich_max_violation: sandwich,
        max_ground_set: smax.ground_set,
        p_ground_set: sp.ground_set,
    })
}
