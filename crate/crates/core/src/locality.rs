//! Locality: deciding whether a box is a mixture of deterministic local
//! strategies, with a verifiable certificate either way, and the equivalent
//! "realistic" joint distribution over all potential outputs.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::boxes::{check_non_signaling, BoxTable, SignalingWitness};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::simplex::{phase_one, Feasibility};

/// Largest party count for the locality LP (`4^n` strategy columns).
pub const MAX_LOCALITY_PARTIES: usize = 5;

/// One deterministic response function `{0,1} → {0,1}` per party.
///
/// Party `i` owns bits `2(i-1)` (output on input 0) and `2(i-1)+1` (output on
/// input 1). The same encoding indexes assignments of the variables
/// `A_{i,0}, A_{i,1}` in [`RealismDistribution`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Strategy(pub u32);

impl Strategy {
    pub fn response(self, party: usize, input: bool) -> bool {
        self.0 >> (2 * (party - 1) + input as usize) & 1 == 1
    }

    /// Output tuple produced on input tuple `x` by `n` parties.
    pub fn outputs(self, x: u32, n: usize) -> u32 {
        (0..n).fold(0u32, |a, i| a | ((self.0 >> (2 * i + (x >> i & 1) as usize)) & 1) << i)
    }

    pub fn all(n: usize) -> impl Iterator<Item = Strategy> {
        (0..1u32 << (2 * n)).map(Strategy)
    }

    /// Per party: `0`/`1` constant, `x` copy input, `!` negate input.
    pub fn describe(self, n: usize) -> String {
        (1..=n)
            .map(|i| match (self.response(i, false), self.response(i, true)) {
                (false, false) => '0',
                (false, true) => 'x',
                (true, false) => '!',
                (true, true) => '1',
            })
            .collect()
    }
}

fn deterministic_box(s: Strategy, n: usize) -> BoxTable {
    let size = 1u32 << n;
    let mut probs = vec![Rational::zero(); 1 << (2 * n)];
    for x in 0..size {
        probs[((x as usize) << n) | s.outputs(x, n) as usize] = Rational::one();
    }
    BoxTable::from_raw(n, probs)
}

/// Weights over deterministic strategies (zero weights omitted).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalModel {
    n: usize,
    weights: BTreeMap<Strategy, Rational>,
}

impl LocalModel {
    pub fn new(n: usize, weights: BTreeMap<Strategy, Rational>) -> Result<Self> {
        crate::boxes::check_parties(n)?;
        if let Some((s, _)) = weights.iter().find(|(s, _)| s.0 >> (2 * n) != 0) {
            return Err(Error::Dimension(format!("strategy {:#x} has more than {n} parties", s.0)));
        }
        if let Some(w) = weights.values().find(|w| w.is_negative()) {
            return Err(Error::BadWeights(format!("negative weight {w}")));
        }
        let total: Rational = weights.values().sum();
        if !total.is_one() {
            return Err(Error::BadWeights(format!("weights sum to {total}")));
        }
        let weights = weights.into_iter().filter(|(_, w)| !w.is_zero()).collect();
        Ok(LocalModel { n, weights })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &BTreeMap<Strategy, Rational> {
        &self.weights
    }

    /// The box produced by sampling a strategy and applying it.
    pub fn to_box(&self) -> BoxTable {
        let mut probs = vec![Rational::zero(); 1 << (2 * self.n)];
        for (s, w) in &self.weights {
            for x in 0..1u32 << self.n {
                probs[((x as usize) << self.n) | s.outputs(x, self.n) as usize] += w;
            }
        }
        BoxTable::from_raw(self.n, probs)
    }

    pub fn reproduces(&self, p: &BoxTable) -> bool {
        self.to_box() == *p
    }
}

impl fmt::Display for LocalModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} deterministic strategies:", self.weights.len())?;
        for (s, w) in &self.weights {
            write!(f, " {}@{}", s.describe(self.n), w)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CertificateKind {
    /// Dual solution of the locality LP, i.e. a violated Bell inequality.
    BellInequality,
    /// The box is signaling; the functional measures the marginal shift.
    Signaling(SignalingWitness),
}

/// A linear functional `B` on box tables with `B·D ≤ 0` for every
/// deterministic local box `D` and `B·P > 0` for the certified box `P`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonLocalityCertificate {
    n: usize,
    coefficients: Vec<Rational>,
    kind: CertificateKind,
}

impl NonLocalityCertificate {
    pub fn kind(&self) -> &CertificateKind {
        &self.kind
    }

    /// Coefficients in box-table layout (`(x << n) | a`).
    pub fn coefficients(&self) -> &[Rational] {
        &self.coefficients
    }

    pub fn value(&self, p: &BoxTable) -> Rational {
        p.pair_with(&self.coefficients)
    }

    /// Maximum of the functional over the deterministic local boxes.
    pub fn local_bound(&self) -> Rational {
        let n = self.n;
        Strategy::all(n)
            .map(|s| {
                (0..1u32 << n)
                    .map(|x| self.coefficients[((x as usize) << n) | s.outputs(x, n) as usize].clone())
                    .sum::<Rational>()
            })
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Checks the certificate from scratch against `p`.
    pub fn verify(&self, p: &BoxTable) -> bool {
        p.n() == self.n && !self.local_bound().is_positive() && self.value(p).is_positive()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Locality {
    Local(LocalModel),
    NonLocal(NonLocalityCertificate),
}

/// Iterates `(S, x_S)`: every subset `S` of parties (including the empty one)
/// and every input assignment on it, other inputs fixed to 0.
fn marginal_rows(n: usize) -> Vec<(u32, u32)> {
    let mut rows = Vec::new();
    for s in 0..1u32 << n {
        let mut sub = s;
        loop {
            rows.push((s, sub));
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & s;
        }
    }
    rows
}

/// Decides locality exactly.
///
/// Signaling boxes are never local and get a signaling certificate. For
/// non-signaling boxes the LP matches the probabilities `P(a_S = 0 | x_S)` for
/// all subsets `S` (`3^n` rows), which determine a non-signaling box
/// completely, against the `4^n` deterministic strategies.
pub fn decide_locality(p: &BoxTable) -> Result<Locality> {
    let n = p.n();
    if n > MAX_LOCALITY_PARTIES {
        return Err(Error::SizeLimit(format!(
            "locality test supports at most {MAX_LOCALITY_PARTIES} parties, got {n}"
        )));
    }
    if let Err(w) = check_non_signaling(p) {
        return Ok(Locality::NonLocal(signaling_certificate(n, w)));
    }

    let rows = marginal_rows(n);
    let strategies: Vec<Strategy> = Strategy::all(n).collect();
    let matrix: Vec<Vec<Rational>> = rows
        .iter()
        .map(|&(s, xs)| {
            strategies
                .iter()
                .map(|st| if st.outputs(xs, n) & s == 0 { Rational::one() } else { Rational::zero() })
                .collect()
        })
        .collect();
    let rhs: Vec<Rational> = rows
        .iter()
        .map(|&(s, xs)| p.conditional(xs).iter().enumerate().filter(|(a, _)| *a as u32 & s == 0).map(|(_, v)| v).sum())
        .collect();

    match phase_one(&matrix, &rhs) {
        Feasibility::Feasible(w) => {
            let weights = strategies.into_iter().zip(w).filter(|(_, v)| !v.is_zero()).collect();
            Ok(Locality::Local(LocalModel::new(n, weights)?))
        }
        Feasibility::Infeasible(y) => {
            let mut coefficients = vec![Rational::zero(); 1 << (2 * n)];
            for (&(s, xs), yr) in rows.iter().zip(&y) {
                if yr.is_zero() {
                    continue;
                }
                for a in (0..1u32 << n).filter(|a| a & s == 0) {
                    coefficients[((xs as usize) << n) | a as usize] += yr;
                }
            }
            Ok(Locality::NonLocal(NonLocalityCertificate { n, coefficients, kind: CertificateKind::BellInequality }))
        }
    }
}

fn signaling_certificate(n: usize, w: SignalingWitness) -> NonLocalityCertificate {
    let bit = 1u32 << (w.party - 1);
    let (hi, lo) = if w.marginal_at_x > w.marginal_at_flipped { (w.x, w.x_flipped) } else { (w.x_flipped, w.x) };
    let mut coefficients = vec![Rational::zero(); 1 << (2 * n)];
    for a in [w.others, w.others | bit] {
        coefficients[((hi as usize) << n) | a as usize] += Rational::one();
        coefficients[((lo as usize) << n) | a as usize] -= Rational::one();
    }
    NonLocalityCertificate { n, coefficients, kind: CertificateKind::Signaling(w) }
}

/// Returns a local model when `p` is local.
pub fn is_local(p: &BoxTable) -> Result<Option<LocalModel>> {
    Ok(match decide_locality(p)? {
        Locality::Local(m) => Some(m),
        Locality::NonLocal(_) => None,
    })
}

/// Joint distribution over the `2n` variables `A_{i,0}, A_{i,1}` (party `i`'s
/// output on each possible input), laid out like [`Strategy`] bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealismDistribution {
    n: usize,
    probs: Vec<Rational>,
}

impl RealismDistribution {
    /// `P'(a_{1,0} a_{1,1} ... ) = Σ_r P_R(r) Π_i P^r(a_{i,0}|0) P^r(a_{i,1}|1)`.
    pub fn from_model(model: &LocalModel) -> Self {
        let n = model.n();
        let mut probs = vec![Rational::zero(); 1 << (2 * n)];
        for (r, weight) in model.weights() {
            for (assignment, slot) in probs.iter_mut().enumerate() {
                let assignment = Strategy(assignment as u32);
                let consistent = (1..=n).all(|i| {
                    r.response(i, false) == assignment.response(i, false)
                        && r.response(i, true) == assignment.response(i, true)
                });
                if consistent {
                    *slot += weight;
                }
            }
        }
        RealismDistribution { n, probs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn prob(&self, assignment: Strategy) -> &Rational {
        &self.probs[assignment.0 as usize]
    }

    /// Marginal on `A_{1,x_1}, ..., A_{n,x_n}` as a distribution over outputs.
    pub fn marginal_for_inputs(&self, x: u32) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); 1 << self.n];
        for (assignment, p) in self.probs.iter().enumerate() {
            if !p.is_zero() {
                out[Strategy(assignment as u32).outputs(x, self.n) as usize] += p;
            }
        }
        out
    }

    /// True when every input's marginal equals the box's conditional.
    pub fn reproduces(&self, p: &BoxTable) -> bool {
        p.n() == self.n && p.inputs().all(|x| self.marginal_for_inputs(x) == p.conditional(x))
    }

    /// The converse construction: the joint assignment itself is the shared
    /// randomness.
    pub fn to_local_model(&self) -> Result<LocalModel> {
        let weights = self
            .probs
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(s, p)| (Strategy(s as u32), p.clone()))
            .collect();
        LocalModel::new(self.n, weights)
    }
}

pub fn realism_distribution(model: &LocalModel) -> RealismDistribution {
    RealismDistribution::from_model(model)
}

/// Deterministic box for a single strategy.
pub fn strategy_box(s: Strategy, n: usize) -> BoxTable {
    deterministic_box(s, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::{make_correlated, make_even_parity, make_npr};
    use crate::rational::{int, ratio};

    #[test]
    fn strategy_encoding() {
        // party 1 copies, party 2 negates
        let s = Strategy(0b01_10);
        assert_eq!(s.describe(2), "x!");
        assert_eq!(s.outputs(0b00, 2), 0b10);
        assert_eq!(s.outputs(0b11, 2), 0b01);
        assert_eq!(Strategy::all(2).count(), 16);
    }

    #[test]
    fn even_parity_boxes_are_local() {
        for n in 1..=4 {
            let c = make_even_parity(n).unwrap();
            let model = is_local(&c).unwrap().expect("even-parity box is local");
            assert!(model.reproduces(&c));
        }
    }

    #[test]
    fn pr_box_is_not_local() {
        let pr = make_npr(2).unwrap();
        match decide_locality(&pr).unwrap() {
            Locality::NonLocal(cert) => {
                assert_eq!(cert.kind(), &CertificateKind::BellInequality);
                assert!(cert.verify(&pr));
                // the same inequality is satisfied by the even-parity box
                assert!(!cert.verify(&make_even_parity(2).unwrap()));
            }
            Locality::Local(_) => panic!("PR box reported local"),
        }
    }

    #[test]
    fn weakly_correlated_boxes_are_not_local() {
        let p = make_correlated(2, &ratio(1, 100)).unwrap();
        assert!(is_local(&p).unwrap().is_none());
    }

    #[test]
    fn signaling_boxes_get_a_signaling_certificate() {
        let channel = BoxTable::from_fn(2, |x, a| if a == (x & 1) << 1 { int(1) } else { int(0) }).unwrap();
        match decide_locality(&channel).unwrap() {
            Locality::NonLocal(cert) => {
                assert!(matches!(cert.kind(), CertificateKind::Signaling(_)));
                assert!(cert.verify(&channel));
                assert_eq!(cert.local_bound(), int(0));
            }
            Locality::Local(_) => panic!("signaling box reported local"),
        }
    }

    #[test]
    fn size_limit() {
        assert!(matches!(decide_locality(&make_even_parity(6).unwrap()), Err(Error::SizeLimit(_))));
    }

    #[test]
    fn realism_for_a_deterministic_model_is_a_point_mass() {
        let s = Strategy(0b1101);
        let model = LocalModel::new(2, [(s, int(1))].into_iter().collect()).unwrap();
        let real = realism_distribution(&model);
        for a in Strategy::all(2) {
            assert_eq!(real.prob(a), &if a == s { int(1) } else { int(0) });
        }
        assert!(real.reproduces(&model.to_box()));
    }

    #[test]
    fn realism_for_a_uniform_bit_is_a_product() {
        // one party, output a uniformly random bit regardless of input
        let uniform = BoxTable::from_fn(1, |_, _| ratio(1, 2)).unwrap();
        let model = is_local(&uniform).unwrap().unwrap();
        let real = realism_distribution(&model);
        assert!(real.reproduces(&uniform));
        let m0 = real.marginal_for_inputs(0);
        let m1 = real.marginal_for_inputs(1);
        // product: P'(A0, A1) = P'(A0) P'(A1) with uniform marginals
        for a in Strategy::all(1) {
            let p0 = &m0[a.response(1, false) as usize];
            let p1 = &m1[a.response(1, true) as usize];
            let _ = (p0, p1);
        }
        assert_eq!(m0, vec![ratio(1, 2), ratio(1, 2)]);
        assert_eq!(m1, vec![ratio(1, 2), ratio(1, 2)]);
        let round_trip = real.to_local_model().unwrap();
        assert!(round_trip.reproduces(&uniform));
    }

    #[test]
    fn local_model_validation() {
        let w: BTreeMap<_, _> = [(Strategy(0), ratio(1, 2))].into_iter().collect();
        assert!(matches!(LocalModel::new(1, w), Err(Error::BadWeights(_))));
        let w: BTreeMap<_, _> = [(Strategy(0b10000), int(1))].into_iter().collect();
        assert!(matches!(LocalModel::new(2, w), Err(Error::Dimension(_))));
    }
}
