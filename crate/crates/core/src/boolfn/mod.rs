//! Boolean functions in algebraic normal form.
//!
//! A function over `n` variables is stored as the set of monomials whose ANF
//! coefficient is one. Monomials are bitmasks: bit `i - 1` stands for `x_i`,
//! and the empty mask is the constant-one term. Inputs are encoded the same
//! way, so evaluating a monomial at `x` is a subset test.

mod parse;
mod support;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

pub use parse::parse_expr;
pub use support::NonlocalSupport;

use crate::error::{Error, Result};

/// Largest variable count accepted for functions (truth tables have `2^n` rows).
pub const MAX_VARS: usize = 16;

/// A set of variables `I ⊆ {1..n}`, read as the product `∧_{i∈I} x_i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(u32);

impl Monomial {
    pub const ONE: Monomial = Monomial(0);

    pub fn from_mask(mask: u32) -> Self {
        Monomial(mask)
    }

    /// Builds a monomial from 1-based variable indices.
    pub fn from_vars<I: IntoIterator<Item = usize>>(vars: I) -> Self {
        Monomial(vars.into_iter().fold(0, |m, v| {
            assert!((1..=32).contains(&v), "variable index {v} out of range");
            m | 1 << (v - 1)
        }))
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn degree(self) -> usize {
        self.0.count_ones() as usize
    }

    /// 1-based variable indices in increasing order.
    pub fn vars(self) -> Vec<usize> {
        mask_vars(self.0)
    }

    pub fn contains(self, var: usize) -> bool {
        self.0 >> (var - 1) & 1 == 1
    }

    pub fn intersects(self, other: Monomial) -> bool {
        self.0 & other.0 != 0
    }

    pub fn eval(self, x: u32) -> bool {
        x & self.0 == self.0
    }

    /// Set notation such as `{1,2,3}`.
    pub fn set_string(self) -> String {
        let vars: Vec<String> = self.vars().iter().map(|v| v.to_string()).collect();
        format!("{{{}}}", vars.join(","))
    }
}

/// Lexicographic order on the sorted variable lists, so `{1,2,3} < {1,3} < {2}`.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.vars().cmp(&other.vars())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return f.write_str("1");
        }
        let vars: Vec<String> = self.vars().iter().map(|v| format!("x{v}")).collect();
        f.write_str(&vars.join("*"))
    }
}

pub(crate) fn mask_vars(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect()
}

/// A Boolean function as an XOR of AND-monomials.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct AnfFunction {
    n: usize,
    monomials: BTreeSet<Monomial>,
}

impl AnfFunction {
    /// Builds a function from monomials; repeated monomials cancel in pairs.
    pub fn new<I: IntoIterator<Item = Monomial>>(n: usize, monomials: I) -> Result<Self> {
        check_vars(n)?;
        let mut set = BTreeSet::new();
        for m in monomials {
            if let Some(bad) = mask_vars(m.mask()).into_iter().find(|&v| v > n) {
                return Err(Error::VariableIndex { index: bad, n });
            }
            if !set.remove(&m) {
                set.insert(m);
            }
        }
        Ok(AnfFunction { n, monomials: set })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::new(n, [])
    }

    pub fn one(n: usize) -> Result<Self> {
        Self::new(n, [Monomial::ONE])
    }

    /// `x_1 x_2 ... x_n`, the function of the n-party PR box.
    pub fn product_of_all(n: usize) -> Result<Self> {
        Self::new(n, [Monomial::from_vars(1..=n)])
    }

    /// Parses an expression such as `"x1*x2 + x3"`.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        parse_expr(text, n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn monomials(&self) -> impl Iterator<Item = Monomial> + '_ {
        self.monomials.iter().copied()
    }

    pub fn monomial_count(&self) -> usize {
        self.monomials.len()
    }

    pub fn has_monomial(&self, m: Monomial) -> bool {
        self.monomials.contains(&m)
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.monomials.iter().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// True when every monomial has at most one variable.
    pub fn is_local(&self) -> bool {
        self.degree() <= 1
    }

    /// Evaluates at the input whose bit `i - 1` is `x_i`.
    pub fn evaluate(&self, x: u32) -> bool {
        self.monomials.iter().fold(false, |acc, m| acc ^ m.eval(x))
    }

    /// Evaluates at an explicit bit tuple `(x_1, ..., x_n)`.
    pub fn evaluate_bits(&self, x: &[bool]) -> Result<bool> {
        if x.len() != self.n {
            return Err(Error::Dimension(format!("input has {} bits, function has {} variables", x.len(), self.n)));
        }
        let mask = x.iter().enumerate().fold(0u32, |m, (i, &b)| m | (b as u32) << i);
        Ok(self.evaluate(mask))
    }

    /// Values at inputs `0, 1, ..., 2^n - 1` (bit `i - 1` of the index is `x_i`).
    pub fn truth_table(&self) -> Vec<bool> {
        (0..1u32 << self.n).map(|x| self.evaluate(x)).collect()
    }

    /// Recovers the unique ANF of a truth table by the binary Möbius transform.
    pub fn from_truth_table(tt: &[bool]) -> Result<Self> {
        let len = tt.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::TruthTableLength(len));
        }
        let n = len.trailing_zeros() as usize;
        if n == 0 {
            // a single row: the function of zero variables is promoted to one
            return Self::new(1, tt[0].then_some(Monomial::ONE));
        }
        check_vars(n)?;
        let mut coeffs = tt.to_vec();
        for i in 0..n {
            let bit = 1 << i;
            for x in 0..len {
                if x & bit != 0 {
                    coeffs[x] ^= coeffs[x ^ bit];
                }
            }
        }
        let monomials = coeffs.iter().enumerate().filter(|(_, &c)| c).map(|(mask, _)| Monomial(mask as u32));
        Self::new(n, monomials)
    }

    /// Parses a truth table written as a string of `0`/`1`; the first character
    /// is `f(0,...,0)` and position `k` holds `f` at the input whose binary
    /// index is `k` with `x_1` as least significant bit.
    pub fn from_bitstring(bits: &str) -> Result<Self> {
        let tt = bits
            .chars()
            .enumerate()
            .map(|(pos, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Syntax { pos, msg: format!("unexpected {c:?} in truth table") }),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_truth_table(&tt)
    }

    pub fn xor(&self, other: &AnfFunction) -> Result<AnfFunction> {
        if self.n != other.n {
            return Err(Error::Dimension(format!("cannot XOR functions over {} and {} variables", self.n, other.n)));
        }
        Self::new(self.n, self.monomials().chain(other.monomials()))
    }

    /// Monomials of degree at most one, including the constant term.
    pub fn local_part(&self) -> AnfFunction {
        AnfFunction { n: self.n, monomials: self.monomials().filter(|m| m.degree() <= 1).collect() }
    }

    /// Monomials of degree at least two.
    pub fn nonlocal_part(&self) -> AnfFunction {
        AnfFunction { n: self.n, monomials: self.monomials().filter(|m| m.degree() >= 2).collect() }
    }

    pub fn nonlocal_support(&self) -> NonlocalSupport {
        NonlocalSupport::of(self)
    }

    /// Variables that occur in some monomial.
    pub fn support_mask(&self) -> u32 {
        self.monomials.iter().fold(0, |acc, m| acc | m.mask())
    }

    /// Same monomials over a larger variable count.
    pub fn widen(&self, n: usize) -> Result<AnfFunction> {
        Self::new(n, self.monomials())
    }
}

impl fmt::Display for AnfFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return f.write_str("0");
        }
        // higher degree first reads like the usual written form
        let mut terms: Vec<Monomial> = self.monomials().collect();
        terms.sort_by(|a, b| b.degree().cmp(&a.degree()).then(a.cmp(b)));
        let terms: Vec<String> = terms.iter().map(|m| m.to_string()).collect();
        f.write_str(&terms.join(" + "))
    }
}

fn check_vars(n: usize) -> Result<()> {
    if n == 0 || n > MAX_VARS {
        return Err(Error::PartyCount { n, min: 1, max: MAX_VARS });
    }
    Ok(())
}
