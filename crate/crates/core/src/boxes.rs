//! Exact conditional distributions `P(a|x)` over n parties with one input bit
//! and one output bit each.
//!
//! Input and output tuples are bitmasks: bit `i - 1` belongs to party `i`.
//! Tables are dense with `4^n` entries, stored at index `(x << n) | a`.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::boolfn::AnfFunction;
use crate::error::{Error, Result};
use crate::rational::{check_unit, inv_pow2, Rational};

pub const MAX_PARTIES: usize = 8;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BoxTable {
    n: usize,
    probs: Vec<Rational>,
}

pub(crate) fn check_parties(n: usize) -> Result<()> {
    if n == 0 || n > MAX_PARTIES {
        return Err(Error::PartyCount { n, min: 1, max: MAX_PARTIES });
    }
    Ok(())
}

/// Renders a tuple as `b_1 b_2 ... b_n` (party 1 first).
pub fn bits_to_string(bits: u32, n: usize) -> String {
    (0..n).map(|i| if bits >> i & 1 == 1 { '1' } else { '0' }).collect()
}

/// Inverse of [`bits_to_string`].
pub fn parse_bits(text: &str, n: usize) -> Result<u32> {
    if text.chars().count() != n {
        return Err(Error::Format(format!("bitstring {text:?} should have {n} characters")));
    }
    text.chars().enumerate().try_fold(0u32, |acc, (i, c)| match c {
        '0' => Ok(acc),
        '1' => Ok(acc | 1 << i),
        _ => Err(Error::Format(format!("bitstring {text:?} contains {c:?}"))),
    })
}

fn parity(bits: u32) -> bool {
    bits.count_ones() % 2 == 1
}

impl BoxTable {
    /// Validates and wraps a dense table.
    pub fn new(n: usize, probs: Vec<Rational>) -> Result<Self> {
        check_parties(n)?;
        if probs.len() != 1 << (2 * n) {
            return Err(Error::Dimension(format!(
                "table for {n} parties needs {} entries, got {}",
                1usize << (2 * n),
                probs.len()
            )));
        }
        let table = BoxTable { n, probs };
        table.validate()?;
        Ok(table)
    }

    pub fn from_fn(n: usize, f: impl Fn(u32, u32) -> Rational) -> Result<Self> {
        check_parties(n)?;
        let size = 1u32 << n;
        let probs = (0..size).flat_map(|x| (0..size).map(move |a| (x, a))).map(|(x, a)| f(x, a)).collect();
        Self::new(n, probs)
    }

    /// Skips validation; callers guarantee normalization.
    pub(crate) fn from_raw(n: usize, probs: Vec<Rational>) -> Self {
        debug_assert_eq!(probs.len(), 1 << (2 * n));
        BoxTable { n, probs }
    }

    fn validate(&self) -> Result<()> {
        for x in self.inputs() {
            let mut sum = Rational::zero();
            for a in self.inputs() {
                let p = self.prob(x, a);
                if p.is_negative() {
                    return Err(Error::NegativeProbability {
                        x: bits_to_string(x, self.n),
                        a: bits_to_string(a, self.n),
                        value: p.clone(),
                    });
                }
                sum += p;
            }
            if !sum.is_one() {
                return Err(Error::NotNormalized { x: bits_to_string(x, self.n), sum });
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// All `2^n` input (or output) tuples.
    pub fn inputs(&self) -> std::ops::Range<u32> {
        0..1u32 << self.n
    }

    pub fn prob(&self, x: u32, a: u32) -> &Rational {
        &self.probs[((x as usize) << self.n) | a as usize]
    }

    /// `P(·|x)` as a slice indexed by the output tuple.
    pub fn conditional(&self, x: u32) -> &[Rational] {
        let size = 1usize << self.n;
        let start = (x as usize) * size;
        &self.probs[start..start + size]
    }

    pub fn entries(&self) -> &[Rational] {
        &self.probs
    }

    /// Sum of `coeffs[i] * entries[i]`, used to evaluate Bell-type functionals.
    pub fn pair_with(&self, coeffs: &[Rational]) -> Rational {
        self.probs.iter().zip(coeffs).filter(|(p, c)| !p.is_zero() && !c.is_zero()).map(|(p, c)| p * c).sum()
    }

    /// CHSH-style correlator: `Σ_x (-1)^{f(x)} E[(-1)^{⊕a} | x]`, i.e. how
    /// strongly the output parity follows `f`.
    pub fn parity_score(&self, f: impl Fn(u32) -> bool) -> Rational {
        let mut score = Rational::zero();
        for x in self.inputs() {
            for a in self.inputs() {
                let p = self.prob(x, a);
                if p.is_zero() {
                    continue;
                }
                if parity(a) == f(x) {
                    score += p;
                } else {
                    score -= p;
                }
            }
        }
        score
    }

    /// Outputs of all other parties are produced by this box on parties
    /// `parties` (1-based, increasing); the remaining parties output 0 and
    /// their inputs are ignored.
    pub fn embed(&self, n: usize, parties: &[usize]) -> Result<BoxTable> {
        check_parties(n)?;
        if parties.len() != self.n || parties.iter().any(|&p| p == 0 || p > n) {
            return Err(Error::Dimension(format!(
                "cannot embed a {}-party box onto parties {parties:?} of {n}",
                self.n
            )));
        }
        let spread = |bits: u32| parties.iter().enumerate().fold(0u32, |acc, (j, &p)| acc | (bits >> j & 1) << (p - 1));
        let gather = |bits: u32| parties.iter().enumerate().fold(0u32, |acc, (j, &p)| acc | (bits >> (p - 1) & 1) << j);
        let mut probs = vec![Rational::zero(); 1 << (2 * n)];
        for x in 0..1u32 << n {
            let local_x = gather(x);
            for a in self.inputs() {
                let p = self.prob(local_x, a);
                if !p.is_zero() {
                    probs[((x as usize) << n) | spread(a) as usize] = p.clone();
                }
            }
        }
        Ok(BoxTable::from_raw(n, probs))
    }
}

impl fmt::Display for BoxTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for x in self.inputs() {
            write!(f, "x={}:", bits_to_string(x, self.n))?;
            for a in self.inputs() {
                let p = self.prob(x, a);
                if !p.is_zero() {
                    write!(f, " {}:{}", bits_to_string(a, self.n), p)?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Full-correlation box for an arbitrary parity rule: `P(a|x) = 1/2^{n-1}`
/// iff `⊕a_i = rule(x)`.
pub(crate) fn full_correlation_with(n: usize, rule: impl Fn(u32) -> bool) -> Result<BoxTable> {
    check_parties(n)?;
    let weight = inv_pow2(n - 1);
    let size = 1u32 << n;
    let mut probs = Vec::with_capacity(1 << (2 * n));
    for x in 0..size {
        let target = rule(x);
        for a in 0..size {
            probs.push(if parity(a) == target { weight.clone() } else { Rational::zero() });
        }
    }
    Ok(BoxTable::from_raw(n, probs))
}

/// The n-party PR box: outputs are uniform subject to `⊕a_i = Πx_i`.
pub fn make_npr(n: usize) -> Result<BoxTable> {
    check_parties(n)?;
    let all = (1u32 << n) - 1;
    full_correlation_with(n, |x| x == all)
}

/// Uniform over even-parity outputs, independent of the input.
pub fn make_even_parity(n: usize) -> Result<BoxTable> {
    full_correlation_with(n, |_| false)
}

/// `eps·P^PR_n + (1-eps)·P^c_n`.
pub fn make_correlated(n: usize, eps: &Rational) -> Result<BoxTable> {
    check_unit(eps, "eps")?;
    mix(&[make_npr(n)?, make_even_parity(n)?], &[eps.clone(), Rational::one() - eps])
}

/// Full-correlation box of `f`: outputs are uniform subject to `⊕a_i = f(x)`.
pub fn make_full_correlation(f: &AnfFunction) -> Result<BoxTable> {
    full_correlation_with(f.n(), |x| f.evaluate(x))
}

/// Convex combination of boxes over the same parties.
pub fn mix(boxes: &[BoxTable], weights: &[Rational]) -> Result<BoxTable> {
    let first = boxes.first().ok_or_else(|| Error::Dimension("mix of zero boxes".into()))?;
    if boxes.len() != weights.len() {
        return Err(Error::Dimension(format!("{} boxes but {} weights", boxes.len(), weights.len())));
    }
    if let Some(b) = boxes.iter().find(|b| b.n != first.n) {
        return Err(Error::Dimension(format!("mixing {}-party and {}-party boxes", first.n, b.n)));
    }
    if let Some(w) = weights.iter().find(|w| w.is_negative()) {
        return Err(Error::BadWeights(format!("negative weight {w}")));
    }
    let total: Rational = weights.iter().sum();
    if !total.is_one() {
        return Err(Error::BadWeights(format!("weights sum to {total}")));
    }
    let mut probs = vec![Rational::zero(); first.probs.len()];
    for (b, w) in boxes.iter().zip(weights) {
        if w.is_zero() {
            continue;
        }
        for (acc, p) in probs.iter_mut().zip(&b.probs) {
            if !p.is_zero() {
                *acc += p * w;
            }
        }
    }
    Ok(BoxTable::from_raw(first.n, probs))
}

/// Both boxes get the same input and are used independently; each party
/// outputs the XOR of its two output bits.
pub fn xor_boxes(p: &BoxTable, q: &BoxTable) -> Result<BoxTable> {
    if p.n != q.n {
        return Err(Error::Dimension(format!("XOR of {}-party and {}-party boxes", p.n, q.n)));
    }
    let n = p.n;
    let mut probs = vec![Rational::zero(); p.probs.len()];
    for x in p.inputs() {
        let pc = p.conditional(x);
        let qc = q.conditional(x);
        let out = &mut probs[(x as usize) << n..((x as usize) + 1) << n];
        for (a, pa) in pc.iter().enumerate() {
            if pa.is_zero() {
                continue;
            }
            for (b, qb) in qc.iter().enumerate() {
                if !qb.is_zero() {
                    out[a ^ b] += pa * qb;
                }
            }
        }
    }
    Ok(BoxTable::from_raw(n, probs))
}

/// Correlated-error XOR: `eps·(P^{f_1} ⊕ ... ⊕ P^{f_m}) + (1-eps)·P^c`.
/// All component boxes succeed together or fail together, which is not the
/// same as XOR-ing the individual `eps`-mixtures.
pub fn xor_star(functions: &[AnfFunction], eps: &Rational) -> Result<BoxTable> {
    check_unit(eps, "eps")?;
    let first = functions.first().ok_or_else(|| Error::Dimension("XOR* of zero boxes".into()))?;
    let mut acc = make_full_correlation(first)?;
    for f in &functions[1..] {
        if f.n() != first.n() {
            return Err(Error::Dimension(format!("XOR* of functions over {} and {} variables", first.n(), f.n())));
        }
        acc = xor_boxes(&acc, &make_full_correlation(f)?)?;
    }
    mix(&[acc, make_even_parity(first.n())?], &[eps.clone(), Rational::one() - eps])
}

/// Output marginal of a subset of parties, still conditioned on the full input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Marginal {
    n: usize,
    parties: Vec<usize>,
    probs: Vec<Rational>,
}

impl Marginal {
    pub fn parties(&self) -> &[usize] {
        &self.parties
    }

    /// `P(a_S | x)`; bit `j` of `a_sub` is the output of `parties()[j]`.
    pub fn prob(&self, x: u32, a_sub: u32) -> &Rational {
        &self.probs[((x as usize) << self.parties.len()) | a_sub as usize]
    }

    pub fn conditional(&self, x: u32) -> &[Rational] {
        let k = self.parties.len();
        &self.probs[(x as usize) << k..((x as usize) + 1) << k]
    }

    /// True when `P(a_S|x)` depends only on the inputs of the parties in `S`.
    pub fn depends_only_on_own_inputs(&self) -> bool {
        let own = self.parties.iter().fold(0u32, |m, &p| m | 1 << (p - 1));
        (0..1u32 << self.n).all(|x| self.conditional(x) == self.conditional(x & own))
    }
}

pub fn marginal(p: &BoxTable, parties: &[usize]) -> Result<Marginal> {
    if parties.is_empty() {
        return Err(Error::Dimension("marginal over an empty set of parties".into()));
    }
    let mut sorted = parties.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != parties.len() || sorted.iter().any(|&i| i == 0 || i > p.n) {
        return Err(Error::Dimension(format!("invalid party subset {parties:?} for {} parties", p.n)));
    }
    let k = sorted.len();
    let mut probs = vec![Rational::zero(); 1 << (p.n + k)];
    for x in p.inputs() {
        for a in p.inputs() {
            let v = p.prob(x, a);
            if v.is_zero() {
                continue;
            }
            let sub =
                sorted.iter().enumerate().fold(0usize, |acc, (j, &party)| acc | ((a >> (party - 1) & 1) as usize) << j);
            probs[((x as usize) << k) | sub] += v;
        }
    }
    Ok(Marginal { n: p.n, parties: sorted, probs })
}

/// A violation of the single-party non-signaling condition: flipping party
/// `party`'s input changes the joint output marginal of the other parties.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignalingWitness {
    pub party: usize,
    pub x: u32,
    pub x_flipped: u32,
    /// Outputs of the other parties; the bit of `party` is zero.
    pub others: u32,
    pub marginal_at_x: Rational,
    pub marginal_at_flipped: Rational,
}

impl SignalingWitness {
    pub fn describe(&self, n: usize) -> String {
        format!(
            "party {} signals: other outputs {} have probability {} at x={} but {} at x={}",
            self.party,
            bits_to_string(self.others, n),
            self.marginal_at_x,
            bits_to_string(self.x, n),
            self.marginal_at_flipped,
            bits_to_string(self.x_flipped, n),
        )
    }
}

/// Checks `Σ_{a_k} P(a|x) = Σ_{a_k} P(a|x')` for every party `k`, every pair
/// of inputs differing only at `k`, and every output tuple of the others.
#[allow(clippy::result_large_err)] // the witness is the useful payload; failures are rare
pub fn check_non_signaling(p: &BoxTable) -> Result<(), SignalingWitness> {
    for k in 1..=p.n {
        let bit = 1u32 << (k - 1);
        for x in p.inputs().filter(|x| x & bit == 0) {
            let xf = x | bit;
            for others in p.inputs().filter(|a| a & bit == 0) {
                let left = p.prob(x, others) + p.prob(x, others | bit);
                let right = p.prob(xf, others) + p.prob(xf, others | bit);
                if left != right {
                    return Err(SignalingWitness {
                        party: k,
                        x,
                        x_flipped: xf,
                        others,
                        marginal_at_x: left,
                        marginal_at_flipped: right,
                    });
                }
            }
        }
    }
    Ok(())
}

pub fn is_non_signaling(p: &BoxTable) -> bool {
    check_non_signaling(p).is_ok()
}

/// Largest total-variation distance between `P(·|x)` and `Q(·|x)` over inputs.
pub fn tv_distance(p: &BoxTable, q: &BoxTable) -> Result<Rational> {
    if p.n != q.n {
        return Err(Error::Dimension(format!("distance between {}-party and {}-party boxes", p.n, q.n)));
    }
    let half = crate::rational::ratio(1, 2);
    Ok(p.inputs()
        .map(|x| {
            let d: Rational = p.conditional(x).iter().zip(q.conditional(x)).map(|(a, b)| (a - b).abs()).sum();
            d * &half
        })
        .max()
        .unwrap_or_else(Rational::zero))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn two_party_pr_box_at_one_one() {
        let pr = make_npr(2).unwrap();
        let x = 0b11;
        assert_eq!(pr.prob(x, 0b10), &ratio(1, 2));
        assert_eq!(pr.prob(x, 0b01), &ratio(1, 2));
        assert_eq!(pr.prob(x, 0b00), &int(0));
        assert_eq!(pr.prob(x, 0b11), &int(0));
    }

    #[test]
    fn three_party_pr_box_at_zero_is_uniform_even_parity() {
        let pr = make_npr(3).unwrap();
        for a in 0..8 {
            let expected = if parity(a) { int(0) } else { ratio(1, 4) };
            assert_eq!(pr.prob(0, a), &expected);
        }
    }

    #[test]
    fn even_parity_is_input_independent() {
        let c = make_even_parity(2).unwrap();
        for x in 1..4 {
            assert_eq!(c.conditional(x), c.conditional(0));
        }
        assert_eq!(c, make_correlated(2, &int(0)).unwrap());
    }

    #[test]
    fn correlated_endpoints_and_midpoint() {
        for n in 1..=4 {
            assert_eq!(make_correlated(n, &int(1)).unwrap(), make_npr(n).unwrap());
            assert_eq!(make_correlated(n, &int(0)).unwrap(), make_even_parity(n).unwrap());
        }
        // 1/2 * 1/2 + 1/2 * 0
        let half = make_correlated(2, &ratio(1, 2)).unwrap();
        assert_eq!(half.prob(0b11, 0b10), &ratio(1, 4));
        assert_eq!(half.prob(0b11, 0b00), &ratio(1, 4));
        assert!(make_correlated(2, &ratio(3, 2)).is_err());
        assert_ne!(make_correlated(3, &ratio(1, 2)).unwrap(), make_correlated(3, &ratio(1, 3)).unwrap());
    }

    #[test]
    fn party_count_limits() {
        assert!(make_npr(0).is_err());
        assert!(make_npr(9).is_err());
        assert!(make_npr(8).is_ok());
        assert!(make_even_parity(1).is_ok());
    }

    #[test]
    fn full_correlation_special_cases() {
        let and = AnfFunction::parse("x1*x2", 2).unwrap();
        assert_eq!(make_full_correlation(&and).unwrap(), make_npr(2).unwrap());
        let zero = AnfFunction::zero(3).unwrap();
        assert_eq!(make_full_correlation(&zero).unwrap(), make_even_parity(3).unwrap());
        let f = AnfFunction::parse("x1*x2*x3 + x3*x4 + x1", 4).unwrap();
        assert!(is_non_signaling(&make_full_correlation(&f).unwrap()));
    }

    #[test]
    fn mix_checks_arguments() {
        let pr = make_npr(2).unwrap();
        let c = make_even_parity(2).unwrap();
        assert_eq!(mix(std::slice::from_ref(&pr), &[int(1)]).unwrap(), pr);
        assert_eq!(
            mix(&[pr.clone(), c.clone()], &[ratio(1, 2), ratio(1, 2)]).unwrap(),
            make_correlated(2, &ratio(1, 2)).unwrap()
        );
        assert!(matches!(mix(&[pr.clone(), c.clone()], &[ratio(1, 2), ratio(1, 3)]), Err(Error::BadWeights(_))));
        assert!(matches!(mix(&[pr.clone(), c.clone()], &[ratio(3, 2), ratio(-1, 2)]), Err(Error::BadWeights(_))));
        assert!(matches!(
            mix(&[pr.clone(), make_npr(3).unwrap()], &[ratio(1, 2), ratio(1, 2)]),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(mix(&[pr], &[int(1), int(0)]), Err(Error::Dimension(_))));
    }

    #[test]
    fn xor_of_a_box_with_itself_is_even_parity() {
        let f = AnfFunction::parse("x1*x2 + x3", 3).unwrap();
        let p = make_full_correlation(&f).unwrap();
        assert_eq!(xor_boxes(&p, &p).unwrap(), make_even_parity(3).unwrap());
        assert_eq!(xor_boxes(&p, &make_even_parity(3).unwrap()).unwrap(), p);
    }

    #[test]
    fn xor_star_single_function_is_a_correlated_mixture() {
        let f = AnfFunction::product_of_all(3).unwrap();
        assert_eq!(xor_star(&[f], &ratio(1, 3)).unwrap(), make_correlated(3, &ratio(1, 3)).unwrap());
    }

    #[test]
    fn marginals() {
        let pr = make_npr(3).unwrap();
        let full = marginal(&pr, &[1, 2, 3]).unwrap();
        for x in pr.inputs() {
            assert_eq!(full.conditional(x), pr.conditional(x));
        }
        let one = marginal(&pr, &[2]).unwrap();
        for x in pr.inputs() {
            assert_eq!(one.conditional(x), &[ratio(1, 2), ratio(1, 2)]);
        }
        assert!(marginal(&pr, &[]).is_err());
        assert!(marginal(&pr, &[4]).is_err());
        assert!(marginal(&pr, &[1, 1]).is_err());
        let c = make_even_parity(4).unwrap();
        assert!(marginal(&c, &[1, 3]).unwrap().depends_only_on_own_inputs());
    }

    #[test]
    fn signaling_channel_is_detected() {
        // party 2 outputs party 1's input
        let channel = BoxTable::from_fn(2, |x, a| {
            let want = (x & 1) << 1;
            if a == want {
                int(1)
            } else {
                int(0)
            }
        })
        .unwrap();
        let w = check_non_signaling(&channel).unwrap_err();
        assert_eq!(w.party, 1);
        assert_eq!(w.x, 0);
        assert_eq!(w.x_flipped, 1);
        assert_ne!(w.marginal_at_x, w.marginal_at_flipped);
        assert!(w.describe(2).contains("party 1 signals"));
    }

    #[test]
    fn table_validation() {
        let bad = BoxTable::from_fn(1, |x, a| {
            if x == 1 && a == 0 {
                ratio(1, 2)
            } else if a == 0 {
                int(1)
            } else {
                int(0)
            }
        });
        assert_eq!(bad, Err(Error::NotNormalized { x: "1".into(), sum: ratio(1, 2) }));
        let neg = BoxTable::from_fn(1, |_, a| if a == 0 { int(2) } else { int(-1) });
        assert!(matches!(neg, Err(Error::NegativeProbability { .. })));
        assert!(BoxTable::new(1, vec![int(1); 3]).is_err());
    }

    #[test]
    fn embedding_a_pr_box() {
        let pr = make_npr(2).unwrap();
        let e = pr.embed(3, &[1, 3]).unwrap();
        assert_eq!(e.prob(0b111, 0b100), &ratio(1, 2));
        assert_eq!(e.prob(0b111, 0b010), &int(0));
        assert!(is_non_signaling(&e));
    }

    #[test]
    fn bitstrings() {
        assert_eq!(bits_to_string(0b001, 3), "100");
        assert_eq!(parse_bits("100", 3).unwrap(), 1);
        assert!(parse_bits("10", 3).is_err());
        assert!(parse_bits("1a0", 3).is_err());
    }

    #[test]
    fn distance_between_pr_and_even_parity() {
        let d = tv_distance(&make_npr(3).unwrap(), &make_even_parity(3).unwrap()).unwrap();
        assert_eq!(d, int(1));
        let d = tv_distance(&make_npr(3).unwrap(), &make_correlated(3, &ratio(3, 4)).unwrap()).unwrap();
        assert_eq!(d, ratio(1, 4));
    }

    #[test]
    fn chsh_score_of_correlated_boxes() {
        let and = |x: u32| x == 0b11;
        assert_eq!(make_npr(2).unwrap().parity_score(and), int(4));
        assert_eq!(make_correlated(2, &ratio(1, 2)).unwrap().parity_score(and), int(3));
    }
}
