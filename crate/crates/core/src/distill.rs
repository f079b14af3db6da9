//! Scalar dynamics of repeated distillation on correlated boxes.
//!
//! One round of the two-box protocol maps `eps·PR + (1-eps)·C` to the same
//! family with parameter `T(eps) = eps/D·(D + 1 - eps)`, `D = 2^{n-1}`.
//! `T` is increasing on `[0, 1]` with fixed points 0 (repulsive) and 1
//! (attractive).

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::boxes::{make_correlated, MAX_PARTIES};
use crate::error::{Error, Result};
use crate::rational::{
    check_unit, denominator_bits, format_rational, inv_pow2, pow2_big, round_down_dyadic, round_up_dyadic, to_decimal,
    Rational,
};
use crate::wiring::compose_triangle;

/// Largest party count accepted by the scalar map.
pub const MAX_MAP_PARTIES: usize = 64;

/// Parties for which the wiring engine cross-check is run.
pub const MAX_VALIDATE_PARTIES: usize = 5;

/// Exact iteration stops before denominators exceed this many bits.
pub const MAX_EXACT_BITS: u64 = 1 << 18;

/// Round limit for [`steps_to_reach`].
pub const MAX_SEARCH_STEPS: u64 = 10_000_000;

/// Decimal places in CSV output.
pub const CSV_DIGITS: usize = 12;

const SEARCH_EXACT_BITS: u64 = 4096;
const MAX_SEARCH_PRECISION: usize = 1 << 16;

fn check_map_parties(n: usize) -> Result<()> {
    if !(2..=MAX_MAP_PARTIES).contains(&n) {
        return Err(Error::PartyCount { n, min: 2, max: MAX_MAP_PARTIES });
    }
    Ok(())
}

/// For `eps = p/q` in lowest terms, `T(eps) = p((D+1)q - p) / (D q^2)` and any
/// odd prime dividing the denominator divides `q` but not the numerator, so
/// reducing only needs a shift. This avoids gcds on huge operands.
fn t_unchecked(n: usize, eps: &Rational) -> Rational {
    let (p, q) = (eps.numer(), eps.denom());
    let num = p * ((q << (n - 1)) + q - p);
    let den = (q * q) << (n - 1);
    if num.is_zero() {
        return Rational::zero();
    }
    let shift = num.trailing_zeros().unwrap_or(0).min(den.trailing_zeros().unwrap_or(0));
    Rational::new_raw(num >> shift, den >> shift)
}

/// `T_n(eps)`.
pub fn t_map(n: usize, eps: &Rational) -> Result<Rational> {
    check_map_parties(n)?;
    check_unit(eps, "eps")?;
    Ok(t_unchecked(n, eps))
}

/// `T_n'(eps) = (D + 1 - 2 eps) / D`.
pub fn derivative(n: usize, eps: &Rational) -> Result<Rational> {
    check_map_parties(n)?;
    let d = crate::rational::pow2(n - 1);
    Ok((&d + Rational::one() - eps * Rational::from_integer(2.into())) / d)
}

/// `(T'(0), T'(1)) = (1 + 1/D, 1 + 1/D - 2/D)`.
pub fn derivative_at_fixed_points(n: usize) -> Result<(Rational, Rational)> {
    check_map_parties(n)?;
    let at_zero = Rational::one() + inv_pow2(n - 1);
    let at_one = &at_zero - inv_pow2(n - 2);
    Ok((at_zero, at_one))
}

/// `eps_0, ..., eps_m` with `eps_{k+1} = T(eps_k)`; round `k` consumes `2^k`
/// copies of the initial box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory {
    n: usize,
    eps: Vec<Rational>,
}

impl Trajectory {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eps(&self) -> &[Rational] {
        &self.eps
    }

    pub fn steps(&self) -> usize {
        self.eps.len() - 1
    }

    pub fn last(&self) -> &Rational {
        self.eps.last().expect("trajectories are never empty")
    }

    pub fn copies(step: usize) -> BigUint {
        pow2_big(step)
    }

    pub fn copies_used(&self) -> BigUint {
        pow2_big(self.steps())
    }

    /// Per-input total variation distance to the n-party PR box, maximized
    /// over inputs: `1 - eps_k`.
    pub fn distances(&self) -> Vec<Rational> {
        self.eps.iter().map(|e| Rational::one() - e).collect()
    }

    pub fn to_csv(&self, with_distance: bool) -> String {
        let mut out = String::from("step,eps_num,eps_den,eps_decimal,copies");
        if with_distance {
            out.push_str(",tv_distance");
        }
        out.push('\n');
        for (k, e) in self.eps.iter().enumerate() {
            write!(out, "{k},{},{},{},{}", e.numer(), e.denom(), to_decimal(e, CSV_DIGITS), Self::copies(k)).unwrap();
            if with_distance {
                write!(out, ",{}", to_decimal(&(Rational::one() - e), CSV_DIGITS)).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Exact trajectory of `steps` rounds.
///
/// Denominators roughly square every round, so long runs are refused with
/// [`Error::SizeLimit`] instead of exhausting memory.
pub fn iterate(n: usize, eps0: &Rational, steps: usize) -> Result<Trajectory> {
    check_map_parties(n)?;
    check_unit(eps0, "eps0")?;
    let mut eps = Vec::with_capacity(steps + 1);
    eps.push(eps0.clone());
    for _ in 0..steps {
        let last = eps.last().unwrap();
        if denominator_bits(last) > MAX_EXACT_BITS / 2 {
            return Err(Error::SizeLimit(format!(
                "exact iteration past step {} needs denominators above {MAX_EXACT_BITS} bits",
                eps.len() - 1
            )));
        }
        let next = t_unchecked(n, last);
        eps.push(next);
    }
    Ok(Trajectory { n, eps })
}

/// Smallest `m` with `eps_m ≥ target`.
///
/// Iterates exactly while denominators stay small, then tracks a dyadic
/// interval `[lo, hi]` around `eps_k`, which is valid because `T` is
/// increasing. When the interval straddles the target the search restarts
/// with twice the precision, so the answer is always exact.
pub fn steps_to_reach(n: usize, eps0: &Rational, target: &Rational) -> Result<u64> {
    check_map_parties(n)?;
    check_unit(eps0, "eps0")?;
    check_unit(target, "target")?;
    if eps0.is_zero() || eps0.is_one() {
        return Err(Error::Precondition(format!("eps0 = {eps0} is a fixed point; need 0 < eps0 < 1")));
    }
    if target.is_one() {
        return Err(Error::UnreachableExactly(target.clone()));
    }
    if target < eps0 {
        return Err(Error::Precondition(format!("target {target} is below eps0 = {eps0}")));
    }
    if target == eps0 {
        return Ok(0);
    }
    let mut precision = 64;
    loop {
        if let Some(k) = bracket_search(n, eps0, target, precision)? {
            return Ok(k);
        }
        precision *= 2;
        if precision > MAX_SEARCH_PRECISION {
            return Err(Error::SizeLimit(format!("target {target} not resolved at {MAX_SEARCH_PRECISION} bits")));
        }
    }
}

/// `Ok(None)` when `precision` bits cannot decide the comparison.
fn bracket_search(n: usize, eps0: &Rational, target: &Rational, precision: usize) -> Result<Option<u64>> {
    let mut lo = eps0.clone();
    let mut hi = eps0.clone();
    for k in 1..=MAX_SEARCH_STEPS {
        if lo == hi {
            let t = t_unchecked(n, &lo);
            if denominator_bits(&t) <= SEARCH_EXACT_BITS.max(precision as u64) {
                hi = t.clone();
                lo = t;
            } else {
                lo = round_down_dyadic(&t, precision);
                hi = round_up_dyadic(&t, precision);
            }
        } else {
            lo = round_down_dyadic(&t_unchecked(n, &lo), precision);
            hi = round_up_dyadic(&t_unchecked(n, &hi), precision);
        }
        if &lo >= target {
            return Ok(Some(k));
        }
        if &hi >= target {
            return Ok(None);
        }
    }
    Err(Error::SizeLimit(format!("target {target} not reached within {MAX_SEARCH_STEPS} rounds")))
}

/// Runs one round through the wiring engine and compares with `T`.
pub fn validate_against_wiring(n: usize, eps: &Rational) -> Result<bool> {
    if !(2..=MAX_VALIDATE_PARTIES.min(MAX_PARTIES)).contains(&n) {
        return Err(Error::PartyCount { n, min: 2, max: MAX_VALIDATE_PARTIES });
    }
    let p = make_correlated(n, eps)?;
    Ok(compose_triangle(&p, &p)? == make_correlated(n, &t_map(n, eps)?)?)
}

/// `eps` rendered as `p/q` together with a decimal approximation.
pub fn describe_eps(eps: &Rational) -> String {
    format!("{} (~{})", format_rational(eps), to_decimal(eps, CSV_DIGITS))
}
