//! Objectives, constraint transforms, and the p-power approximation.
//!
//! An inequality `g(b) ≥ 0` is folded into the objective as the ReLU
//! regularization `h + γ·max{0, −g}`, which equals `max{h, h − γg}`. The
//! resulting min-max problem is stored as a [`MultiObjective`]; after a joint
//! additive shift makes every objective strictly positive, the pointwise
//! maximum is approximated by `h_(p) = Σ_m h_m^p` (or its mean over `M`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{bits_to_index, AlgebraOptions, Polynomial};
use crate::DEFAULT_ENUMERATION_CAP;

/// Builds `Σ_{i≤j} Q_ij b_i b_j + Σ c_i b_i + constant` from an
/// upper-triangular `Q`; diagonal entries become linear terms.
pub fn qubo_objective(q: &[Vec<f64>], c: &[f64], constant: f64) -> Result<Polynomial> {
    let n = c.len();
    if q.len() != n {
        return Err(Error::Dimension(format!(
            "Q has {} rows, linear vector has {} entries",
            q.len(),
            n
        )));
    }
    let mut raw: Vec<(Vec<usize>, f64)> = Vec::with_capacity(n * (n + 3) / 2 + 1);
    for (i, row) in q.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Dimension(format!(
                "row {i} of Q has {} entries, expected {n}",
                row.len()
            )));
        }
        for (j, &v) in row.iter().enumerate() {
            if j < i {
                if v != 0.0 {
                    return Err(Error::Dimension(format!(
                        "Q must be upper triangular; entry ({i},{j}) = {v}"
                    )));
                }
                continue;
            }
            raw.push((vec![i, j], v));
        }
    }
    raw.extend(c.iter().enumerate().map(|(i, &v)| (vec![i], v)));
    raw.push((vec![], constant));
    Polynomial::from_terms(n, raw)
}

/// `h + γ·f²`: the quadratic penalty for an equality constraint `f(b) = 0`.
pub fn penalize_equality(h: &Polynomial, f: &Polynomial, gamma: f64) -> Result<Polynomial> {
    if !(gamma >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "equality penalty weight must be >= 0, got {gamma}"
        )));
    }
    if h.n() != f.n() {
        return Err(Error::VariableMismatch {
            left: h.n(),
            right: f.n(),
        });
    }
    h.add(&f.power(2)?.scale(gamma))
}

/// Recasts `min h s.t. g ≥ 0` as `min max{h, h − γg}` (unshifted, `M = 2`).
pub fn inequality_to_objectives(
    h: &Polynomial,
    g: &Polynomial,
    gamma: f64,
) -> Result<MultiObjective> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "inequality weight must be > 0, got {gamma}"
        )));
    }
    if h.n() != g.n() {
        return Err(Error::VariableMismatch {
            left: h.n(),
            right: g.n(),
        });
    }
    let h2 = h.sub(&g.scale(gamma))?;
    let mut mo = MultiObjective::new(vec![h.clone(), h2])?;
    mo.gamma = gamma;
    mo.constraint = Some(g.clone());
    Ok(mo)
}

/// How [`MultiObjective::shifted`] picks the joint additive constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ShiftMode {
    /// Enumerate all assignments; the shifted minimum equals the margin.
    #[default]
    Exact,
    /// Constant plus negative coefficients per objective; a cheap lower bound.
    Bound,
}

/// Scaling applied to `Σ_m h_m^p`. Both share argmins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    #[default]
    Sum,
    Mean,
}

/// Ordered objectives `h_1..h_M` whose pointwise maximum is minimized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiObjective {
    n: usize,
    gamma: f64,
    shift: f64,
    objectives: Vec<Polynomial>,
    constraint: Option<Polynomial>,
}

impl MultiObjective {
    pub fn new(objectives: Vec<Polynomial>) -> Result<Self> {
        let first = objectives
            .first()
            .ok_or_else(|| Error::InvalidArgument("at least one objective is required".into()))?;
        let n = first.n();
        if let Some(bad) = objectives.iter().find(|h| h.n() != n) {
            return Err(Error::VariableMismatch {
                left: n,
                right: bad.n(),
            });
        }
        Ok(Self {
            n,
            gamma: 0.0,
            shift: 0.0,
            objectives,
            constraint: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of objectives `M`.
    pub fn m(&self) -> usize {
        self.objectives.len()
    }

    pub fn objectives(&self) -> &[Polynomial] {
        &self.objectives
    }

    /// Accumulated joint additive shift.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn constraint(&self) -> Option<&Polynomial> {
        self.constraint.as_ref()
    }

    pub fn with_constraint(mut self, g: Polynomial, gamma: f64) -> Result<Self> {
        if g.n() != self.n {
            return Err(Error::VariableMismatch {
                left: self.n,
                right: g.n(),
            });
        }
        self.constraint = Some(g);
        self.gamma = gamma;
        Ok(self)
    }

    /// Adds one constant `c` to every objective so that the smallest value
    /// over all objectives and assignments is `eta` (exact) or at least
    /// `eta` (bound). The argmin of the maximum is unchanged.
    pub fn shifted(&self, eta: f64, mode: ShiftMode) -> Result<MultiObjective> {
        self.shifted_with_cap(eta, mode, DEFAULT_ENUMERATION_CAP)
    }

    pub fn shifted_with_cap(
        &self,
        eta: f64,
        mode: ShiftMode,
        cap: usize,
    ) -> Result<MultiObjective> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "shift margin must be positive, got {eta}"
            )));
        }
        let lower = match mode {
            ShiftMode::Exact => self
                .objectives
                .iter()
                .map(|h| {
                    h.truth_table(cap)
                        .map(|t| t.into_iter().fold(f64::INFINITY, f64::min))
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(f64::INFINITY, f64::min),
            ShiftMode::Bound => self
                .objectives
                .iter()
                .map(|h| {
                    h.terms()
                        .map(|(m, c)| if m.is_constant() || c < 0.0 { c } else { 0.0 })
                        .sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min),
        };
        let c = eta - lower;
        let mut out = self.clone();
        out.objectives = self.objectives.iter().map(|h| h.add_constant(c)).collect();
        out.shift += c;
        Ok(out)
    }

    /// Pointwise maximum `max_m h_m(b)`.
    pub fn h_max(&self, b: &[bool]) -> Result<f64> {
        Ok(self.h_max_index(bits_to_index(b, self.n)?))
    }

    pub fn h_max_index(&self, assignment: u64) -> f64 {
        self.objectives
            .iter()
            .map(|h| h.evaluate_index(assignment))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `Σ_m h_m(b)^p` (or the mean) computed from objective values without
    /// symbolic expansion.
    pub fn hp_direct(&self, p: u32, b: &[bool], norm: Normalization) -> Result<f64> {
        self.hp_direct_index(p, bits_to_index(b, self.n)?, norm)
    }

    pub fn hp_direct_index(&self, p: u32, assignment: u64, norm: Normalization) -> Result<f64> {
        if p == 0 {
            return Err(Error::ZeroPower(p));
        }
        let values: Vec<f64> = self
            .objectives
            .iter()
            .map(|h| h.evaluate_index(assignment))
            .collect();
        power_sum(&values, p, norm)
    }

    /// Whether `g(b) < 0` for the recorded inequality constraint.
    pub fn constraint_violated(&self, b: &[bool]) -> Result<bool> {
        self.constraint_violated_index(bits_to_index(b, self.n)?)
    }

    pub fn constraint_violated_index(&self, assignment: u64) -> Result<bool> {
        let g = self.constraint.as_ref().ok_or(Error::NoConstraint)?;
        Ok(g.evaluate_index(assignment) < 0.0)
    }

    /// Value tables of every objective over all `2ⁿ` assignments.
    pub fn landscape(&self, cap: usize) -> Result<Landscape> {
        let tables = self
            .objectives
            .iter()
            .map(|h| h.truth_table(cap))
            .collect::<Result<Vec<_>>>()?;
        Ok(Landscape { n: self.n, tables })
    }
}

pub(crate) fn power_sum(values: &[f64], p: u32, norm: Normalization) -> Result<f64> {
    let s: f64 = values.iter().map(|u| u.powi(p as i32)).sum();
    let s = match norm {
        Normalization::Sum => s,
        Normalization::Mean => s / values.len() as f64,
    };
    if s.is_finite() {
        Ok(s)
    } else {
        Err(Error::NonFinite(format!(
            "sum of {p}-th powers overflowed; p is too large for the value scale"
        )))
    }
}

/// Objective values tabulated by assignment integer.
#[derive(Debug, Clone)]
pub struct Landscape {
    n: usize,
    tables: Vec<Vec<f64>>,
}

impl Landscape {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.tables.len()
    }

    pub fn len(&self) -> usize {
        1usize << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn objective_values(&self, assignment: usize) -> impl Iterator<Item = f64> + '_ {
        self.tables.iter().map(move |t| t[assignment])
    }

    pub fn h_max_values(&self) -> Vec<f64> {
        (0..self.len())
            .map(|x| self.objective_values(x).fold(f64::NEG_INFINITY, f64::max))
            .collect()
    }

    pub fn hp_values(&self, p: u32, norm: Normalization) -> Result<Vec<f64>> {
        if p == 0 {
            return Err(Error::ZeroPower(p));
        }
        let mut buf = vec![0.0; self.m()];
        (0..self.len())
            .map(|x| {
                for (slot, v) in buf.iter_mut().zip(self.objective_values(x)) {
                    *slot = v;
                }
                power_sum(&buf, p, norm)
            })
            .collect()
    }
}

/// When [`build_hp`] expands `h_(p)` symbolically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SymbolicMode {
    /// Expand for `p ≤ 6` when the term budget allows.
    #[default]
    Auto,
    /// Always expand; exceeding the budget is an error.
    Always,
    Never,
}

/// Largest `p` expanded symbolically under [`SymbolicMode::Auto`].
pub const AUTO_SYMBOLIC_MAX_P: u32 = 6;

#[derive(Debug, Clone, Copy, Default)]
pub struct HpOptions {
    pub symbolic: SymbolicMode,
    pub algebra: AlgebraOptions,
}

/// Evaluator for `h_(p)`, optionally carrying its expanded polynomial.
#[derive(Debug, Clone)]
pub struct HpEvaluator {
    source: MultiObjective,
    p: u32,
    normalization: Normalization,
    symbolic: Option<Polynomial>,
}

/// Builds the degree-`p` approximation of `max_m h_m`.
pub fn build_hp(mo: &MultiObjective, p: u32, normalization: Normalization) -> Result<HpEvaluator> {
    build_hp_with(mo, p, normalization, &HpOptions::default())
}

pub fn build_hp_with(
    mo: &MultiObjective,
    p: u32,
    normalization: Normalization,
    opts: &HpOptions,
) -> Result<HpEvaluator> {
    if p == 0 {
        return Err(Error::ZeroPower(p));
    }
    let symbolic = match opts.symbolic {
        SymbolicMode::Never => None,
        SymbolicMode::Auto if p > AUTO_SYMBOLIC_MAX_P => None,
        SymbolicMode::Auto => match expand_hp(mo, p, normalization, &opts.algebra) {
            Ok(poly) => Some(poly),
            Err(Error::TermBudgetExceeded { .. }) => None,
            Err(e) => return Err(e),
        },
        SymbolicMode::Always => Some(expand_hp(mo, p, normalization, &opts.algebra)?),
    };
    Ok(HpEvaluator {
        source: mo.clone(),
        p,
        normalization,
        symbolic,
    })
}

fn expand_hp(
    mo: &MultiObjective,
    p: u32,
    normalization: Normalization,
    opts: &AlgebraOptions,
) -> Result<Polynomial> {
    let projected: u128 = mo
        .objectives
        .iter()
        .map(|h| h.projected_power_terms(p))
        .fold(0u128, u128::saturating_add);
    if projected > opts.term_budget as u128 {
        return Err(Error::TermBudgetExceeded {
            projected,
            budget: opts.term_budget,
        });
    }
    let mut acc = Polynomial::zero(mo.n);
    for h in &mo.objectives {
        acc = acc.add_with(&h.power_with(p, opts)?, opts)?;
    }
    Ok(match normalization {
        Normalization::Sum => acc,
        Normalization::Mean => acc.scale(1.0 / mo.m() as f64),
    })
}

impl HpEvaluator {
    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn source(&self) -> &MultiObjective {
        &self.source
    }

    pub fn symbolic(&self) -> Option<&Polynomial> {
        self.symbolic.as_ref()
    }

    /// Numeric evaluation from objective values.
    pub fn evaluate(&self, b: &[bool]) -> Result<f64> {
        self.source.hp_direct(self.p, b, self.normalization)
    }

    pub fn evaluate_index(&self, assignment: u64) -> Result<f64> {
        self.source
            .hp_direct_index(self.p, assignment, self.normalization)
    }

    /// Evaluation through the expanded polynomial, when one was built.
    pub fn evaluate_symbolic(&self, b: &[bool]) -> Option<Result<f64>> {
        self.symbolic.as_ref().map(|s| s.evaluate(b))
    }
}

/// Problem description as read from disk. Fields left `null` are skipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub n: usize,
    pub gamma: f64,
    pub objective: Polynomial,
    pub constraint: Option<Polynomial>,
    pub equality: Option<Polynomial>,
    pub shift_eta: f64,
}

impl Instance {
    /// Applies the equality penalty and inequality split, both weighted by
    /// `gamma`, without shifting.
    pub fn objectives(&self) -> Result<MultiObjective> {
        for p in [
            Some(&self.objective),
            self.constraint.as_ref(),
            self.equality.as_ref(),
        ]
        .into_iter()
        .flatten()
        {
            if p.n() != self.n {
                return Err(Error::VariableMismatch {
                    left: self.n,
                    right: p.n(),
                });
            }
        }
        let h = match &self.equality {
            Some(f) => penalize_equality(&self.objective, f, self.gamma)?,
            None => self.objective.clone(),
        };
        match &self.constraint {
            Some(g) => inequality_to_objectives(&h, g, self.gamma),
            None => {
                let mut mo = MultiObjective::new(vec![h])?;
                mo.gamma = self.gamma;
                Ok(mo)
            }
        }
    }

    /// Transforms and shifts with margin `shift_eta`.
    pub fn to_multi_objective(&self, mode: ShiftMode) -> Result<MultiObjective> {
        self.objectives()?.shifted(self.shift_eta, mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bits(x: u64, n: usize) -> Vec<bool> {
        (0..n).map(|i| x >> i & 1 == 1).collect()
    }

    fn x(n: usize, i: usize) -> Polynomial {
        Polynomial::variable(n, i).unwrap()
    }

    fn random_qubo(rng: &mut ChaCha8Rng, n: usize) -> (Vec<Vec<f64>>, Vec<f64>, f64) {
        let q = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if j >= i {
                            rng.random_range(-1.0..1.0)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        let c = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        (q, c, rng.random_range(-1.0..1.0))
    }

    fn random_mo(rng: &mut ChaCha8Rng, n: usize, gamma: f64) -> MultiObjective {
        let (q, c, k) = random_qubo(rng, n);
        let h = qubo_objective(&q, &c, k).unwrap();
        let a: Vec<(Vec<usize>, f64)> = (0..n)
            .map(|i| (vec![i], rng.random_range(-1.0..1.0)))
            .collect();
        let g = Polynomial::from_terms(n, a).unwrap();
        inequality_to_objectives(&h, &g, gamma).unwrap()
    }

    fn argmin_set(values: &[f64]) -> Vec<usize> {
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        (0..values.len())
            .filter(|&i| (values[i] - min).abs() <= 1e-9 * min.abs().max(1.0))
            .collect()
    }

    #[test]
    fn qubo_examples() {
        let q = vec![vec![0.0; 3]; 3];
        assert_eq!(
            qubo_objective(&q, &[0.0; 3], 5.0).unwrap(),
            Polynomial::constant(3, 5.0)
        );
        assert_eq!(
            qubo_objective(&[vec![1.0]], &[2.0], 0.0).unwrap(),
            x(1, 0).scale(3.0)
        );
        assert!(qubo_objective(&[vec![1.0]], &[2.0, 1.0], 0.0).is_err());
        assert!(qubo_objective(&[vec![0.0, 1.0], vec![1.0, 0.0]], &[0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn qubo_matches_dense_arithmetic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 4;
        let (q, c, k) = random_qubo(&mut rng, n);
        let h = qubo_objective(&q, &c, k).unwrap();
        for a in 0..16u64 {
            let b: Vec<f64> = bits(a, n).iter().map(|&v| v as u8 as f64).collect();
            let mut dense = k;
            for i in 0..n {
                dense += c[i] * b[i];
                for j in 0..n {
                    dense += b[i] * q[i][j] * b[j];
                }
            }
            assert!((h.evaluate_index(a) - dense).abs() < 1e-12);
        }
    }

    #[test]
    fn equality_penalty_examples() {
        let h = Polynomial::from_terms(2, [(vec![0, 1], 1.5), (vec![1], -0.5)]).unwrap();
        assert_eq!(penalize_equality(&h, &Polynomial::zero(2), 3.0).unwrap(), h);
        assert_eq!(penalize_equality(&h, &x(2, 0), 0.0).unwrap(), h);
        let f = x(1, 0).add_constant(-1.0);
        let r = penalize_equality(&x(1, 0), &f, 2.0).unwrap();
        assert_eq!(r.evaluate(&[false]).unwrap(), 2.0);
        assert_eq!(r.evaluate(&[true]).unwrap(), 1.0);
        assert!(penalize_equality(&h, &x(1, 0), 1.0).is_err());
        assert!(penalize_equality(&h, &x(2, 0), -1.0).is_err());
    }

    #[test]
    fn inequality_two_point_example() {
        let mo = inequality_to_objectives(&x(1, 0), &x(1, 0), 2.0).unwrap();
        assert_eq!(mo.m(), 2);
        assert_eq!(mo.h_max(&[false]).unwrap(), 0.0);
        assert_eq!(mo.h_max(&[true]).unwrap(), 1.0);
        for b in [false, true] {
            let h = b as u8 as f64;
            assert_eq!(mo.h_max(&[b]).unwrap(), h + 2.0 * f64::max(0.0, -h));
        }
        assert!(inequality_to_objectives(&x(1, 0), &x(1, 0), 0.0).is_err());
        assert!(inequality_to_objectives(&x(1, 0), &x(2, 0), 1.0).is_err());
    }

    #[test]
    fn feasible_constraint_reduces_to_objective() {
        let h = Polynomial::from_terms(1, [(vec![0], -1.0), (vec![], 0.5)]).unwrap();
        let mo = inequality_to_objectives(&h, &x(1, 0), 1000.0).unwrap();
        for b in [false, true] {
            assert_eq!(mo.h_max(&[b]).unwrap(), h.evaluate(&[b]).unwrap());
        }
    }

    #[test]
    fn relu_identity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = 6;
            let gamma = rng.random_range(0.5..50.0);
            let mo = random_mo(&mut rng, n, gamma);
            let h = &mo.objectives()[0];
            let g = mo.constraint().unwrap();
            for a in 0..64u64 {
                let expect = h.evaluate_index(a) + gamma * f64::max(0.0, -g.evaluate_index(a));
                assert!((mo.h_max_index(a) - expect).abs() <= 1e-9 * expect.abs().max(1.0));
            }
        }
    }

    #[test]
    fn shift_examples() {
        let mo = MultiObjective::new(vec![x(1, 0).add_constant(1.0)]).unwrap();
        let s = mo.shifted(1.0, ShiftMode::Exact).unwrap();
        assert_eq!(s.shift(), 0.0);

        let mo = MultiObjective::new(vec![x(1, 0).add_constant(-3.0)]).unwrap();
        let s = mo.shifted(1.0, ShiftMode::Exact).unwrap();
        assert_eq!(s.shift(), 4.0);
        assert_eq!(s.h_max(&[false]).unwrap(), 1.0);
        assert_eq!(s.h_max(&[true]).unwrap(), 2.0);

        let b = mo.shifted(1.0, ShiftMode::Bound).unwrap();
        assert!(b.shift() >= 4.0);
        for a in 0..2u64 {
            assert!(b.h_max_index(a) >= 1.0);
        }
        assert!(mo.shifted(0.0, ShiftMode::Exact).is_err());
        assert!(mo.shifted(-1.0, ShiftMode::Bound).is_err());
    }

    #[test]
    fn bound_shift_is_valid_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let mo = random_mo(&mut rng, 6, 10.0);
            let b = mo.shifted(0.5, ShiftMode::Bound).unwrap();
            let e = mo.shifted(0.5, ShiftMode::Exact).unwrap();
            assert!(b.shift() >= e.shift() - 1e-12);
            for a in 0..64u64 {
                for h in b.objectives() {
                    assert!(h.evaluate_index(a) >= 0.5 - 1e-12);
                }
            }
        }
    }

    #[test]
    fn shift_and_normalization_preserve_argmin() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let mo = random_mo(&mut rng, 6, 6.0);
            let s = mo.shifted(1.0, ShiftMode::Exact).unwrap();
            let before: Vec<f64> = (0..64).map(|a| mo.h_max_index(a)).collect();
            let after: Vec<f64> = (0..64).map(|a| s.h_max_index(a)).collect();
            assert_eq!(argmin_set(&before), argmin_set(&after));
            let min = after.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min >= 1.0 - 1e-9);
            for p in 1..=6 {
                let sum: Vec<f64> = (0..64)
                    .map(|a| s.hp_direct_index(p, a, Normalization::Sum).unwrap())
                    .collect();
                let mean: Vec<f64> = (0..64)
                    .map(|a| s.hp_direct_index(p, a, Normalization::Mean).unwrap())
                    .collect();
                assert_eq!(argmin_set(&sum), argmin_set(&mean));
            }
        }
    }

    #[test]
    fn powers_preserve_ordering() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let s = random_mo(&mut rng, 6, 6.0)
            .shifted(1.0, ShiftMode::Exact)
            .unwrap();
        for _ in 0..500 {
            let (a, b) = (rng.random_range(0..64u64), rng.random_range(0..64u64));
            let m = rng.random_range(0..2);
            let p = rng.random_range(1..9);
            let (u, v) = (
                s.objectives()[m].evaluate_index(a),
                s.objectives()[m].evaluate_index(b),
            );
            assert_eq!(u <= v, u.powi(p) <= v.powi(p));
        }
    }

    #[test]
    fn h_max_examples() {
        let h = Polynomial::from_terms(2, [(vec![0, 1], 2.0), (vec![], 1.0)]).unwrap();
        let single = MultiObjective::new(vec![h.clone()]).unwrap();
        for a in 0..4u64 {
            assert_eq!(single.h_max_index(a), h.evaluate_index(a));
        }
        let two = MultiObjective::new(vec![
            Polynomial::constant(2, 1.0),
            Polynomial::constant(2, 2.0),
        ])
        .unwrap();
        for a in 0..4u64 {
            assert_eq!(two.h_max(&bits(a, 2)).unwrap(), 2.0);
        }
        assert!(two.h_max(&[true]).is_err());
        assert!(MultiObjective::new(vec![]).is_err());
        assert!(MultiObjective::new(vec![Polynomial::zero(2), Polynomial::zero(3)]).is_err());
    }

    #[test]
    fn h_max_matches_three_way_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 6;
        let objs: Vec<Polynomial> = (0..3)
            .map(|_| {
                let (q, c, k) = random_qubo(&mut rng, n);
                qubo_objective(&q, &c, k).unwrap()
            })
            .collect();
        let mo = MultiObjective::new(objs.clone()).unwrap();
        for a in 0..64u64 {
            let b = bits(a, n);
            let e: Vec<f64> = objs.iter().map(|h| h.evaluate(&b).unwrap()).collect();
            assert_eq!(mo.h_max(&b).unwrap(), e[0].max(e[1]).max(e[2]));
        }
    }

    #[test]
    fn hp_examples() {
        let h = Polynomial::from_terms(2, [(vec![0], 2.0), (vec![1], 0.5), (vec![], 1.0)]).unwrap();
        let single = MultiObjective::new(vec![h.clone()]).unwrap();
        let e = build_hp(&single, 1, Normalization::Sum).unwrap();
        assert_eq!(e.symbolic().unwrap(), &h);
        let twin = MultiObjective::new(vec![h.clone(), h.clone()]).unwrap();
        let e = build_hp(&twin, 3, Normalization::Sum).unwrap();
        for a in 0..4u64 {
            let v = h.evaluate_index(a);
            assert!((e.evaluate_index(a).unwrap() - 2.0 * v.powi(3)).abs() < 1e-12);
        }
        assert!(build_hp(&twin, 0, Normalization::Sum).is_err());
    }

    #[test]
    fn hp_direct_examples() {
        let mo = MultiObjective::new(vec![
            Polynomial::constant(1, 1.0),
            Polynomial::constant(1, 2.0),
        ])
        .unwrap();
        assert_eq!(mo.hp_direct(1, &[true], Normalization::Sum).unwrap(), 3.0);
        assert_eq!(mo.hp_direct(3, &[false], Normalization::Sum).unwrap(), 9.0);
        assert_eq!(mo.hp_direct(3, &[false], Normalization::Mean).unwrap(), 4.5);
        let huge = MultiObjective::new(vec![Polynomial::constant(1, 1e200)]).unwrap();
        assert!(matches!(
            huge.hp_direct(3, &[false], Normalization::Sum),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn symbolic_and_direct_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let n = rng.random_range(3..=7);
            let s = random_mo(&mut rng, n, 6.0)
                .shifted(1.0, ShiftMode::Exact)
                .unwrap();
            let p = rng.random_range(1..=6);
            let norm = if rng.random_bool(0.5) {
                Normalization::Sum
            } else {
                Normalization::Mean
            };
            let e = build_hp(&s, p, norm).unwrap();
            let a = rng.random_range(0..(1u64 << n));
            let b = bits(a, n);
            let direct = e.evaluate(&b).unwrap();
            let sym = e.evaluate_symbolic(&b).unwrap().unwrap();
            assert!((direct - sym).abs() <= 1e-6 * direct.abs());
        }
    }

    #[test]
    fn symbolic_modes() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let s = random_mo(&mut rng, 5, 6.0)
            .shifted(1.0, ShiftMode::Exact)
            .unwrap();
        assert!(build_hp(&s, 7, Normalization::Sum)
            .unwrap()
            .symbolic()
            .is_none());
        let always = HpOptions {
            symbolic: SymbolicMode::Always,
            ..Default::default()
        };
        assert!(build_hp_with(&s, 7, Normalization::Sum, &always)
            .unwrap()
            .symbolic()
            .is_some());
        let tight = HpOptions {
            symbolic: SymbolicMode::Always,
            algebra: AlgebraOptions {
                term_budget: 10,
                ..Default::default()
            },
        };
        assert!(matches!(
            build_hp_with(&s, 3, Normalization::Sum, &tight),
            Err(Error::TermBudgetExceeded { .. })
        ));
        let auto_tight = HpOptions {
            symbolic: SymbolicMode::Auto,
            ..tight
        };
        assert!(build_hp_with(&s, 3, Normalization::Sum, &auto_tight)
            .unwrap()
            .symbolic()
            .is_none());
    }

    #[test]
    fn constraint_violation_examples() {
        let mo = inequality_to_objectives(&x(1, 0), &x(1, 0), 1.0).unwrap();
        assert!(!mo.constraint_violated(&[false]).unwrap());
        let g = x(1, 0).add_constant(-1.0);
        let mo = inequality_to_objectives(&x(1, 0), &g, 1.0).unwrap();
        assert!(mo.constraint_violated(&[false]).unwrap());
        let plain = MultiObjective::new(vec![x(1, 0)]).unwrap();
        assert_eq!(
            plain.constraint_violated(&[false]).unwrap_err(),
            Error::NoConstraint
        );
    }

    #[test]
    fn constraint_violation_matches_dot_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let n = 6;
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g =
            Polynomial::from_terms(n, a.iter().enumerate().map(|(i, &v)| (vec![i], v))).unwrap();
        let mo = inequality_to_objectives(&Polynomial::zero(n), &g, 1.0).unwrap();
        for x in 0..64u64 {
            let b = bits(x, n);
            let dot: f64 = a
                .iter()
                .zip(&b)
                .map(|(ai, &bi)| if bi { *ai } else { 0.0 })
                .sum();
            assert_eq!(mo.constraint_violated(&b).unwrap(), dot < 0.0);
        }
    }

    #[test]
    fn instance_round_trip_and_build() {
        let inst = Instance {
            n: 2,
            gamma: 3.0,
            objective: Polynomial::from_terms(2, [(vec![0, 1], -1.0), (vec![0], 0.5)]).unwrap(),
            constraint: Some(Polynomial::from_terms(2, [(vec![0], 1.0), (vec![1], -1.0)]).unwrap()),
            equality: None,
            shift_eta: 1.0,
        };
        let s = serde_json::to_string(&inst).unwrap();
        assert!(s.contains("\"equality\":null"));
        let back: Instance = serde_json::from_str(&s).unwrap();
        assert_eq!(back, inst);
        let mo = inst.to_multi_objective(ShiftMode::Exact).unwrap();
        assert_eq!(mo.m(), 2);
        let min = (0..4)
            .map(|a| {
                mo.objectives()
                    .iter()
                    .map(|h| h.evaluate_index(a))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min);
        assert!((min - 1.0).abs() < 1e-12);
        let mo_json = serde_json::to_value(&mo).unwrap();
        assert!(mo_json.get("shift").is_some());
        assert!(mo_json.get("objectives").unwrap().as_array().unwrap().len() == 2);
    }
}
