//! Sparse multilinear pseudo-Boolean polynomials.
//!
//! Every real function on `{0,1}ⁿ` has a unique multilinear normal form
//! `Σ_S c_S Π_{i∈S} b_i`. Monomials are stored as 64-bit sets of variable
//! indices, so products reduce idempotently (`b_i² = b_i`) by a bitwise OR.
//!
//! Coefficients whose magnitude falls below [`AlgebraOptions::zero_tol`]
//! after an arithmetic operation are dropped, which keeps the map free of
//! cancellation residue. Assignments are encoded as integers with bit `i`
//! holding `b_i`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest variable count representable by a [`Monomial`].
pub const MAX_VARS: usize = 64;

/// Default absolute threshold below which coefficients are treated as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-12;

/// Default cap on the projected number of terms of a symbolic power.
pub const DEFAULT_TERM_BUDGET: usize = 5_000_000;

/// Knobs shared by the canonicalizing operations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgebraOptions {
    pub zero_tol: f64,
    pub term_budget: usize,
}

impl Default for AlgebraOptions {
    fn default() -> Self {
        Self {
            zero_tol: DEFAULT_ZERO_TOL,
            term_budget: DEFAULT_TERM_BUDGET,
        }
    }
}

/// A product of distinct binary variables, stored as a bit-set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(u64);

impl Monomial {
    /// The empty product (the constant monomial).
    pub const ONE: Monomial = Monomial(0);

    pub fn from_bits(bits: u64) -> Self {
        Monomial(bits)
    }

    /// Builds a monomial from variable indices; repeated indices collapse.
    pub fn from_vars(vars: &[usize], n: usize) -> Result<Self> {
        check_n(n)?;
        let mut bits = 0u64;
        for &v in vars {
            if v >= n {
                return Err(Error::IndexOutOfRange { index: v, n });
            }
            bits |= 1u64 << v;
        }
        Ok(Monomial(bits))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn degree(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_constant(self) -> bool {
        self.0 == 0
    }

    /// Idempotent product: the union of both variable sets.
    pub fn product(self, other: Monomial) -> Monomial {
        Monomial(self.0 | other.0)
    }

    /// Value of the monomial at the assignment encoded by `assignment`.
    #[inline]
    pub fn is_active(self, assignment: u64) -> bool {
        self.0 & assignment == self.0
    }

    /// Variable indices in ascending order.
    pub fn vars(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i)
            }
        })
    }

    /// All sub-monomials, including the empty one and `self`.
    pub(crate) fn subsets(self) -> impl Iterator<Item = Monomial> {
        let full = self.0;
        let mut next = Some(full);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == 0 {
                None
            } else {
                Some((cur - 1) & full)
            };
            Some(Monomial(cur))
        })
    }
}

fn check_n(n: usize) -> Result<()> {
    if n > MAX_VARS {
        Err(Error::TooManyVariables { n, max: MAX_VARS })
    } else {
        Ok(())
    }
}

fn check_same_n(a: usize, b: usize) -> Result<()> {
    if a != b {
        Err(Error::VariableMismatch { left: a, right: b })
    } else {
        Ok(())
    }
}

pub(crate) fn bits_to_index(b: &[bool], n: usize) -> Result<u64> {
    if b.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: b.len(),
        });
    }
    Ok(b.iter().enumerate().fold(
        0u64,
        |acc, (i, &bit)| if bit { acc | (1u64 << i) } else { acc },
    ))
}

fn canonical_map(
    raw: impl IntoIterator<Item = (Monomial, f64)>,
    zero_tol: f64,
) -> BTreeMap<Monomial, f64> {
    let mut acc: HashMap<Monomial, f64> = HashMap::new();
    for (m, c) in raw {
        *acc.entry(m).or_insert(0.0) += c;
    }
    acc.into_iter()
        .filter(|(_, c)| c.abs() >= zero_tol && *c != 0.0)
        .collect()
}

/// Sparse multilinear polynomial over `n` binary variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Monomial, f64>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self::from_monomials(n, [(Monomial::ONE, c)], DEFAULT_ZERO_TOL)
    }

    /// The polynomial `b_i`.
    pub fn variable(n: usize, i: usize) -> Result<Self> {
        Self::from_terms(n, [(vec![i], 1.0)])
    }

    /// Builds a canonical polynomial from `(variable indices, coefficient)` pairs.
    ///
    /// Duplicate monomials are merged by adding coefficients; indices repeated
    /// inside one term collapse (`b_i b_i = b_i`).
    pub fn from_terms<I, V>(n: usize, raw_terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (V, f64)>,
        V: AsRef<[usize]>,
    {
        Self::from_terms_with(n, raw_terms, &AlgebraOptions::default())
    }

    pub fn from_terms_with<I, V>(n: usize, raw_terms: I, opts: &AlgebraOptions) -> Result<Self>
    where
        I: IntoIterator<Item = (V, f64)>,
        V: AsRef<[usize]>,
    {
        check_n(n)?;
        let monomials = raw_terms
            .into_iter()
            .map(|(vars, c)| Monomial::from_vars(vars.as_ref(), n).map(|m| (m, c)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_monomials(n, monomials, opts.zero_tol))
    }

    pub(crate) fn from_monomials(
        n: usize,
        raw: impl IntoIterator<Item = (Monomial, f64)>,
        zero_tol: f64,
    ) -> Self {
        Self {
            n,
            terms: canonical_map(raw, zero_tol),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Terms in ascending bit-set order.
    pub fn terms(&self) -> impl Iterator<Item = (Monomial, f64)> + '_ {
        self.terms.iter().map(|(&m, &c)| (m, c))
    }

    pub fn coefficient(&self, m: Monomial) -> f64 {
        self.terms.get(&m).copied().unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.coefficient(Monomial::ONE)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest monomial cardinality; 0 for constants and the zero polynomial.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Inverse of [`Polynomial::from_terms`]: explicit index lists per term.
    pub fn decompose(&self) -> Vec<(Vec<usize>, f64)> {
        self.terms
            .iter()
            .map(|(m, &c)| (m.vars().collect(), c))
            .collect()
    }

    pub fn evaluate(&self, b: &[bool]) -> Result<f64> {
        let x = bits_to_index(b, self.n)?;
        Ok(self.evaluate_index(x))
    }

    /// Evaluates at the assignment whose bit `i` is `b_i`. Bits at or above
    /// `n` are ignored by construction since no monomial references them.
    #[inline]
    pub fn evaluate_index(&self, assignment: u64) -> f64 {
        self.terms
            .iter()
            .filter(|(m, _)| m.is_active(assignment))
            .map(|(_, c)| c)
            .sum()
    }

    /// Values at all `2ⁿ` assignments, indexed by assignment integer.
    ///
    /// Uses the subset-sum (zeta) transform, `O(n·2ⁿ)` regardless of the
    /// number of terms.
    pub fn truth_table(&self, cap: usize) -> Result<Vec<f64>> {
        if self.n > cap {
            return Err(Error::EnumerationCap { n: self.n, cap });
        }
        let size = 1usize << self.n;
        let mut table = vec![0.0; size];
        for (m, c) in self.terms() {
            table[m.bits() as usize] = c;
        }
        for i in 0..self.n {
            let bit = 1usize << i;
            for x in 0..size {
                if x & bit != 0 {
                    table[x] += table[x ^ bit];
                }
            }
        }
        Ok(table)
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.add_with(other, &AlgebraOptions::default())
    }

    pub fn add_with(&self, other: &Polynomial, opts: &AlgebraOptions) -> Result<Polynomial> {
        check_same_n(self.n, other.n)?;
        Ok(Self::from_monomials(
            self.n,
            self.terms().chain(other.terms()),
            opts.zero_tol,
        ))
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Self::from_monomials(
            self.n,
            self.terms().map(|(m, c)| (m, c * s)),
            DEFAULT_ZERO_TOL,
        )
    }

    /// Adds `c` to the constant term.
    pub fn add_constant(&self, c: f64) -> Polynomial {
        Self::from_monomials(
            self.n,
            self.terms().chain(std::iter::once((Monomial::ONE, c))),
            DEFAULT_ZERO_TOL,
        )
    }

    pub fn multiply(&self, other: &Polynomial) -> Result<Polynomial> {
        self.multiply_with(other, &AlgebraOptions::default())
    }

    pub fn multiply_with(&self, other: &Polynomial, opts: &AlgebraOptions) -> Result<Polynomial> {
        check_same_n(self.n, other.n)?;
        let mut acc: HashMap<Monomial, f64> =
            HashMap::with_capacity(self.terms.len().max(other.terms.len()));
        for (&ma, &ca) in &self.terms {
            for (&mb, &cb) in &other.terms {
                *acc.entry(ma.product(mb)).or_insert(0.0) += ca * cb;
            }
        }
        Ok(Self::from_monomials(self.n, acc, opts.zero_tol))
    }

    /// Upper bound on the term count of `self^p`: the smaller of `T^p` and the
    /// number of monomials of degree at most `min(n, degree·p)`.
    pub fn projected_power_terms(&self, p: u32) -> u128 {
        let t = self.term_count() as u128;
        let by_product = t.checked_pow(p).unwrap_or(u128::MAX);
        let max_deg = (self.degree().saturating_mul(p as usize)).min(self.n);
        let mut by_degree: u128 = 0;
        let mut binom: u128 = 1;
        for d in 0..=max_deg {
            by_degree = by_degree.saturating_add(binom);
            binom = binom.saturating_mul((self.n - d) as u128) / (d as u128 + 1);
        }
        by_product.min(by_degree)
    }

    pub fn power(&self, p: u32) -> Result<Polynomial> {
        self.power_with(p, &AlgebraOptions::default())
    }

    /// `self^p` by square-and-multiply, canonicalizing after each product.
    pub fn power_with(&self, p: u32, opts: &AlgebraOptions) -> Result<Polynomial> {
        if p == 0 {
            return Err(Error::ZeroPower(p));
        }
        let projected = self.projected_power_terms(p);
        if projected > opts.term_budget as u128 {
            return Err(Error::TermBudgetExceeded {
                projected,
                budget: opts.term_budget,
            });
        }
        let mut result: Option<Polynomial> = None;
        let mut base = self.clone();
        let mut e = p;
        loop {
            if e & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.multiply_with(&base, opts)?,
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.multiply_with(&base, opts)?;
        }
        Ok(result.expect("p >= 1 sets at least one bit"))
    }

    /// Rewrites the polynomial in the spin basis via `b_i = (1 − z_i)/2`.
    pub fn to_ising(&self) -> IsingPolynomial {
        let raw = self.terms().flat_map(|(m, c)| {
            let scale = c * 0.5f64.powi(m.degree() as i32);
            m.subsets().map(move |s| {
                let sign = if s.degree() % 2 == 0 { 1.0 } else { -1.0 };
                (s, sign * scale)
            })
        });
        IsingPolynomial {
            n: self.n,
            terms: canonical_map(raw, DEFAULT_ZERO_TOL),
        }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for v in m.vars() {
                write!(f, "·x{v}")?;
            }
        }
        Ok(())
    }
}

/// Polynomial in spin variables `z_i ∈ {−1, +1}`; each term is a product of
/// Pauli-Z factors on its support.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingPolynomial {
    n: usize,
    terms: BTreeMap<Monomial, f64>,
}

impl IsingPolynomial {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (Monomial, f64)> + '_ {
        self.terms.iter().map(|(&m, &c)| (m, c))
    }

    pub fn coefficient(&self, m: Monomial) -> f64 {
        self.terms.get(&m).copied().unwrap_or(0.0)
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Locality: the largest number of Z factors in one term.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// Evaluates at spins `z`, each of which must be `+1` or `−1`.
    pub fn evaluate(&self, z: &[i8]) -> Result<f64> {
        if z.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: z.len(),
            });
        }
        let mut negative = 0u64;
        for (i, &s) in z.iter().enumerate() {
            match s {
                1 => {}
                -1 => negative |= 1u64 << i,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "spin value {other} at index {i}; expected ±1"
                    )))
                }
            }
        }
        Ok(self.evaluate_index(negative))
    }

    /// Evaluates at `z = 1 − 2b` where `b` is encoded by `assignment`.
    pub fn evaluate_index(&self, assignment: u64) -> f64 {
        self.terms
            .iter()
            .map(|(m, &c)| {
                if (m.bits() & assignment).count_ones().is_multiple_of(2) {
                    c
                } else {
                    -c
                }
            })
            .sum()
    }

    /// Back-substitutes `z_i = 1 − 2 b_i` into binary form.
    pub fn to_binary(&self) -> Polynomial {
        let raw = self.terms().flat_map(|(m, c)| {
            m.subsets()
                .map(move |s| (s, c * (-2.0f64).powi(s.degree() as i32)))
        });
        Polynomial::from_monomials(self.n, raw, DEFAULT_ZERO_TOL)
    }
}

/// Wire form shared by [`Polynomial`] and [`IsingPolynomial`]:
/// `{"n": int, "terms": [{"vars": [int,...], "coef": float}, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct PolyRepr {
    n: usize,
    terms: Vec<TermRepr>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TermRepr {
    vars: Vec<usize>,
    coef: f64,
}

fn repr_of(n: usize, terms: &BTreeMap<Monomial, f64>) -> PolyRepr {
    PolyRepr {
        n,
        terms: terms
            .iter()
            .map(|(m, &coef)| TermRepr {
                vars: m.vars().collect(),
                coef,
            })
            .collect(),
    }
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        repr_of(self.n, &self.terms).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PolyRepr::deserialize(d)?;
        Polynomial::from_terms(repr.n, repr.terms.into_iter().map(|t| (t.vars, t.coef)))
            .map_err(serde::de::Error::custom)
    }
}

impl Serialize for IsingPolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        repr_of(self.n, &self.terms).serialize(s)
    }
}
