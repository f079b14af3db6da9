//! Channel counts for simulating full-correlation boxes, from scratch and
//! with the help of weak copies that are distilled first.
//!
//! Terminology used throughout, for a function `f` with non-local support `𝒥`:
//! `U` is the union of the variables of `𝒥`, `I*` the monomial with the most
//! exclusive variables (`m_I`), `E` those exclusive variables, and the
//! outside parties are the ones not in `U`.

mod decompose;
mod graph;
mod pipeline;

use std::collections::BTreeSet;
use std::fmt;

pub use decompose::{decompose, decompose_with_first, Decomposition, Part};
pub use graph::{n_scratch, scratch_graph, verify_path_condition, CommGraph};
pub use pipeline::{
    simulate_local, simulate_with_channels, verify_plan_end_to_end, PipelineReport, MAX_PIPELINE_PARTIES,
};

use crate::boolfn::{mask_vars, AnfFunction, Monomial, NonlocalSupport};
use crate::error::{Error, Result};

/// `n - 1 - max m_I`, or 0 when a single monomial covers all parties.
pub fn n_distill_bound(f: &AnfFunction) -> Result<usize> {
    let s = f.nonlocal_support();
    if s.block_count() != 1 {
        return Err(Error::Precondition(format!("bound needs n_J = 1, found n_J = {}", s.block_count())));
    }
    let (_, max_m) = s.argmax_m().expect("one block means a non-empty support");
    Ok(if max_m == f.n() { 0 } else { f.n() - 1 - max_m })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Obstacle {
    /// No monomial of degree ≥ 2.
    Local,
    /// The support splits into this many blocks.
    Blocks(usize),
    /// `max m_I ≤ n - |U|`.
    FewExclusive { max_m: usize, outside: usize },
}

impl fmt::Display for Obstacle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Obstacle::Local => f.write_str("local function; nothing to simulate"),
            Obstacle::Blocks(k) => write!(f, "n_J = {k}"),
            Obstacle::FewExclusive { max_m, outside } => {
                write!(f, "max m_I = {max_m} does not exceed n - |U| = {outside}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Amplifiability {
    pub obstacles: Vec<Obstacle>,
}

impl Amplifiability {
    pub fn is_amplifiable(&self) -> bool {
        self.obstacles.is_empty()
    }
}

/// A single block and `max m_I > n - |U|`.
pub fn amplifiable(f: &AnfFunction) -> Amplifiability {
    let s = f.nonlocal_support();
    if s.is_empty() {
        return Amplifiability { obstacles: vec![Obstacle::Local] };
    }
    let mut obstacles = Vec::new();
    if s.block_count() != 1 {
        obstacles.push(Obstacle::Blocks(s.block_count()));
    }
    let max_m = s.m_values().values().copied().max().unwrap_or(0);
    let outside = f.n() - s.union_size();
    if max_m <= outside {
        obstacles.push(Obstacle::FewExclusive { max_m, outside });
    }
    Amplifiability { obstacles }
}

/// How to amplify weak copies of `P^f` over a strict subset of the channels
/// that simulating `P^f` from scratch needs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmplificationPlan {
    pub function: AnfFunction,
    /// `I*`.
    pub isolated: Monomial,
    pub max_m: usize,
    /// Party of `I*` that collects everything needed to isolate and recombine.
    pub collector: usize,
    /// Parties of `I*` that negate their input during isolation so that the
    /// monomials of `𝒥` inside `I*` become a single product of literals.
    /// `None` when no such relabeling exists; the weak box restricted to
    /// `I*` is then not a correlated PR box and isolation fails.
    pub input_flips: Option<u32>,
    /// Suffices to simulate `P^f` from shared randomness alone.
    pub scratch: CommGraph,
    /// Suffices together with weak copies; a proper subgraph of `scratch`.
    pub distill: CommGraph,
    pub n_scratch: usize,
    pub n_distill_bound: usize,
    pub decomposition: Decomposition,
}

impl AmplificationPlan {
    /// Channels the plan actually uses with weak copies.
    pub fn n_distill(&self) -> usize {
        self.distill.edge_count()
    }

    pub fn outside_mask(&self) -> u32 {
        ((1u32 << self.function.n()) - 1) & !self.function.nonlocal_support().union_mask()
    }

    /// `Π_{i∈I*} (x_i ⊕ [i flips])`, the function the distilled box computes
    /// in the original inputs.
    pub fn isolated_product(&self) -> Option<AnfFunction> {
        let flips = self.input_flips?;
        let fixed = self.isolated.mask() & !flips;
        let terms = (0..=flips).filter(|t| t & !flips == 0).map(|t| Monomial::from_mask(fixed | t));
        Some(AnfFunction::new(self.function.n(), terms).expect("monomials of a valid plan"))
    }

    /// Parties whose inputs or outputs the collector needs: everyone outside
    /// `E` except the collector itself.
    pub fn forwarding_mask(&self) -> u32 {
        let s = self.function.nonlocal_support();
        let exclusive = s.exclusive_mask(self.isolated);
        ((1u32 << self.function.n()) - 1) & !exclusive & !(1 << (self.collector - 1))
    }
}

/// Builds the plan for an amplifiable `f`.
///
/// With `S = I* \ E` non-empty, the collector `v` is the largest party of
/// `S` and `G` is the chain `(U \ E) \ {v}` descending, then `v`, then `E`
/// descending, plus an edge into `v` from every outside party; `G'` drops
/// the chain edges that enter `E`. With `S` empty, `𝒥 = {I*}`, the collector
/// is the smallest party of `I*` and `G'` is just the outside edges.
pub fn plan(f: &AnfFunction) -> Result<AmplificationPlan> {
    let verdict = amplifiable(f);
    if !verdict.is_amplifiable() {
        let reasons: Vec<String> = verdict.obstacles.iter().map(|o| o.to_string()).collect();
        return Err(Error::Precondition(format!("not amplifiable: {}", reasons.join("; "))));
    }
    let n = f.n();
    let s = f.nonlocal_support();
    let (isolated, max_m) = s.argmax_m().expect("amplifiable functions have a support");
    let exclusive = s.exclusive_mask(isolated);
    let shared = isolated.mask() & !exclusive;
    let non_exclusive = s.union_mask() & !exclusive;
    let outside = ((1u32 << n) - 1) & !s.union_mask();

    let descending = |mask: u32| mask_vars(mask).into_iter().rev().collect::<Vec<_>>();
    let mut scratch = CommGraph::empty(n);
    let mut distill = CommGraph::empty(n);
    let collector = if shared != 0 {
        let v = *mask_vars(shared).last().unwrap();
        let mut chain = descending(non_exclusive & !(1 << (v - 1)));
        chain.push(v);
        let into_exclusive = chain.len();
        chain.extend(descending(exclusive));
        for (i, pair) in chain.windows(2).enumerate() {
            scratch.add_edge(pair[0], pair[1])?;
            if i + 1 < into_exclusive {
                distill.add_edge(pair[0], pair[1])?;
            }
        }
        v
    } else {
        let chain = descending(exclusive);
        for pair in chain.windows(2) {
            scratch.add_edge(pair[0], pair[1])?;
        }
        *chain.last().unwrap()
    };
    for w in mask_vars(outside) {
        scratch.add_edge(w, collector)?;
        distill.add_edge(w, collector)?;
    }

    Ok(AmplificationPlan {
        function: f.clone(),
        isolated,
        max_m,
        collector,
        input_flips: input_flips(&s, isolated),
        scratch,
        distill,
        n_scratch: n_scratch(f),
        n_distill_bound: n_distill_bound(f)?,
        decomposition: decompose_with_first(f, isolated)?,
    })
}

/// The monomials of `𝒥` inside `I*` must be exactly the monomials of
/// `Π_{i∈I*} (x_i ⊕ c_i)`, which are all `T` with `I* \ C ⊆ T ⊆ I*`. The only
/// candidate for `I* \ C` is the intersection of those monomials.
fn input_flips(s: &NonlocalSupport, isolated: Monomial) -> Option<u32> {
    let inside: BTreeSet<u32> = s.j_set().iter().map(|m| m.mask()).filter(|m| m & !isolated.mask() == 0).collect();
    let base = inside.iter().fold(isolated.mask(), |acc, m| acc & m);
    let flips = isolated.mask() & !base;
    let expected: BTreeSet<u32> = (0..=flips).filter(|t| t & !flips == 0).map(|t| base | t).collect();
    // a product with fewer than two fixed variables has affine terms, which
    // would leak into the noise branch
    (base.count_ones() >= 2 && inside == expected).then_some(flips)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, n: usize) -> AnfFunction {
        AnfFunction::parse(text, n).unwrap()
    }

    #[test]
    fn bounds() {
        assert_eq!(n_distill_bound(&parse("x1*x2*x3 + x3*x4 + x1", 4)).unwrap(), 1);
        assert_eq!(n_distill_bound(&AnfFunction::product_of_all(5).unwrap()).unwrap(), 0);
        assert_eq!(n_distill_bound(&parse("x1*x2 + x2*x3", 3)).unwrap(), 1);
        assert!(n_distill_bound(&parse("x1*x2 + x3*x4", 4)).is_err());
    }

    #[test]
    fn amplifiability_verdicts() {
        assert!(amplifiable(&parse("x1*x2*x3 + x3*x4 + x1", 4)).is_amplifiable());
        let b = amplifiable(&parse("x1*x2 + x2*x3 + x4*x5*x6 + x5", 6));
        assert_eq!(b.obstacles, vec![Obstacle::Blocks(2)]);
        assert_eq!(b.obstacles[0].to_string(), "n_J = 2");
        assert_eq!(amplifiable(&parse("x1", 1)).obstacles, vec![Obstacle::Local]);
        let tri = amplifiable(&parse("x1*x2 + x1*x3 + x2*x3", 3));
        assert_eq!(tri.obstacles, vec![Obstacle::FewExclusive { max_m: 0, outside: 0 }]);
    }

    #[test]
    fn plan_for_the_amplifiable_example() {
        let p = plan(&parse("x1*x2*x3 + x3*x4 + x1", 4)).unwrap();
        assert_eq!(p.isolated, Monomial::from_vars([1, 2, 3]));
        assert_eq!(p.collector, 3);
        assert_eq!(p.input_flips, Some(0));
        assert_eq!(p.scratch, CommGraph::new(4, [(4, 3), (3, 2), (2, 1)]).unwrap());
        assert_eq!(p.distill, CommGraph::new(4, [(4, 3)]).unwrap());
        assert_eq!((p.n_scratch, p.n_distill_bound, p.n_distill()), (3, 1, 1));
        assert!(p.distill.is_proper_subgraph_of(&p.scratch));
        assert!(verify_path_condition(&p.scratch, &p.function.nonlocal_support()));
    }

    #[test]
    fn plan_for_a_single_monomial() {
        let p = plan(&AnfFunction::product_of_all(3).unwrap()).unwrap();
        assert_eq!(p.distill.edge_count(), 0);
        assert_eq!(p.scratch.edge_count(), 2);
        assert_eq!(p.collector, 1);
    }

    #[test]
    fn plan_with_outside_parties() {
        // x3 takes no part in the non-local support
        let p = plan(&parse("x1*x2", 3)).unwrap();
        assert_eq!(p.distill, CommGraph::new(3, [(3, 1)]).unwrap());
        assert_eq!(p.scratch, CommGraph::new(3, [(2, 1), (3, 1)]).unwrap());
        assert_eq!(p.n_distill_bound, 0);
        assert_eq!(p.n_distill(), 1);
    }

    #[test]
    fn relabeling_of_nested_monomials() {
        let p = plan(&parse("x1*x2*x3 + x1*x2", 3)).unwrap();
        assert_eq!(p.input_flips, Some(0b100));
        assert_eq!(p.isolated_product().unwrap(), parse("x1*x2*x3 + x1*x2", 3));
        let p = plan(&parse("x1*x2*x3*x4 + x1*x2 + x2*x3", 4)).unwrap();
        assert_eq!(p.input_flips, None);
        let f = parse("x1*x2*x3*x4 + x1*x2*x3 + x1*x2*x4 + x1*x2", 4);
        assert_eq!(input_flips(&f.nonlocal_support(), Monomial::from_vars([1, 2, 3, 4])), Some(0b1100));
    }

    #[test]
    fn plan_for_a_three_party_chain() {
        let p = plan(&parse("x1*x2 + x2*x3", 3)).unwrap();
        assert_eq!(p.isolated, Monomial::from_vars([1, 2]));
        assert!(p.distill.is_proper_subgraph_of(&p.scratch));
        assert_eq!(p.n_distill(), 1);
        assert!(matches!(plan(&parse("x1*x2 + x1*x3 + x2*x3", 3)), Err(Error::Precondition(_))));
    }
}
