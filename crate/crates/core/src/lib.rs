//! Inequality-constrained binary optimization as a min-max over objectives,
//! with degree-`p` power-sum approximations of the maximum.
//!
//! - [`poly`]: sparse multilinear pseudo-Boolean polynomials and the spin basis.
//! - [`problem`]: QUBO objectives, constraint transforms, joint shift, `h_(p)`.
//! - [`spectra`]: exhaustive landscapes, gap ratios, ground-space verification.
//! - [`ensemble`]: seeded random instances and ε/δ statistics.

// `!(x > 0.0)` guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ensemble;
pub mod error;
pub mod poly;
pub mod problem;
pub mod spectra;

pub use error::{Error, ErrorClass, Result};
pub use poly::{AlgebraOptions, IsingPolynomial, Monomial, Polynomial};
pub use problem::{
    build_hp, build_hp_with, inequality_to_objectives, penalize_equality, qubo_objective,
    HpEvaluator, HpOptions, Instance, MultiObjective, Normalization, ShiftMode, SymbolicMode,
};
pub use spectra::{
    check_sandwich, enumerate_spectrum, gap_ratio, relative_gap, threshold_p, threshold_ratio,
    verify_theorem, Spectrum, Tolerance, VerificationReport,
};

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Largest `n` for which `2ⁿ` enumeration is attempted.
pub const DEFAULT_ENUMERATION_CAP: usize = 26;

/// Formats a float with 17 significant digits (scientific notation);
/// non-finite values print as `NaN`, `inf` or `-inf`.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}
