use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::{AmplificationPlan, CommGraph};
use crate::boolfn::{mask_vars, AnfFunction};
use crate::boxes::{make_correlated, make_full_correlation, mix, tv_distance, xor_boxes, xor_star, BoxTable};
use crate::distill::iterate;
use crate::error::{Error, Result};
use crate::locality::{LocalModel, Strategy};
use crate::rational::{check_unit, inv_pow2};
use crate::wiring::compose_triangle;
use crate::Rational;

pub const MAX_PIPELINE_PARTIES: usize = 5;

fn parity(bits: u32) -> bool {
    bits.count_ones() % 2 == 1
}

fn even_parity_strings(n: usize) -> impl Iterator<Item = u32> {
    (0..1u32 << n).filter(|&r| !parity(r))
}

/// `P^h` from shared even-parity randomness: everyone outputs their share
/// and `collector` additionally flips by `h(x)`, which needs the inputs of
/// every other variable of `h` to reach it in `g`.
pub fn simulate_with_channels(h: &AnfFunction, g: &CommGraph, collector: usize) -> Result<BoxTable> {
    let n = h.n();
    if g.n() != n || collector == 0 || collector > n {
        return Err(Error::Graph(format!("collector {collector} is not a vertex of an {}-vertex graph", g.n())));
    }
    let needed = h.support_mask() & !(1 << (collector - 1));
    let missing = needed & !g.reaching(collector);
    if missing != 0 {
        return Err(Error::Graph(format!(
            "parties {:?} cannot reach collector {collector} in {g}",
            mask_vars(missing)
        )));
    }
    let weight = inv_pow2(n - 1);
    let mut probs = vec![Rational::zero(); 1 << (2 * n)];
    for x in 0..1u32 << n {
        let flip = (h.evaluate(x) as u32) << (collector - 1);
        for r in even_parity_strings(n) {
            probs[((x as usize) << n) | (r ^ flip) as usize] += &weight;
        }
    }
    BoxTable::new(n, probs)
}

/// `P^f` for an affine `f`, without any communication: each party outputs
/// its share of even-parity randomness, XOR its own linear term; party 1
/// also absorbs the constant.
pub fn simulate_local(f: &AnfFunction) -> Result<LocalModel> {
    if !f.is_local() {
        return Err(Error::Precondition(format!("{f} has a monomial of degree ≥ 2")));
    }
    let n = f.n();
    let linear = |i: usize| f.monomials().any(|m| m.degree() == 1 && m.contains(i));
    let constant = f.monomials().any(|m| m.degree() == 0);
    let weight = inv_pow2(n - 1);
    let mut weights = BTreeMap::new();
    for r in even_parity_strings(n) {
        let mut bits = 0u32;
        for i in 1..=n {
            let share = r >> (i - 1) & 1 == 1;
            let on_zero = share ^ (i == 1 && constant);
            let on_one = on_zero ^ linear(i);
            bits |= (on_zero as u32) << (2 * (i - 1)) | (on_one as u32) << (2 * (i - 1) + 1);
        }
        *weights.entry(Strategy(bits)).or_insert_with(Rational::zero) += &weight;
    }
    LocalModel::new(n, weights)
}

/// Outcome of running a plan on exact boxes, one flag per stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineReport {
    pub eps: Rational,
    pub steps: usize,
    /// Size of the isolated monomial, the number of parties of the distilled box.
    pub isolated_parties: usize,
    /// Parties that negate their input into the distilled box.
    pub input_flips: u32,
    pub eps_final: Rational,
    /// The weak box is `eps·P^f + (1-eps)·P^{f_l}`.
    pub weak_box_matches: bool,
    /// Every party outside the exclusive set reaches the collector in `G'`.
    pub channels_suffice: bool,
    /// Isolation yields the correlated box on the isolated parties.
    pub isolation_matches: bool,
    /// Distillation follows the closed-form map.
    pub distillation_matches: bool,
    /// The result is `eps_final·P^f + (1-eps_final)·P^{f ⊕ q}`.
    pub recombination_matches: bool,
    /// `f ⊕ q`, computed by the result when distillation fails.
    pub failure_function: AnfFunction,
    pub tv_to_target: Rational,
    /// Whether the result is also `eps_final·P^f + (1-eps_final)·P^{f_l}`,
    /// which only holds when `q` is the whole non-local part of `f`.
    pub matches_local_failure_form: bool,
    pub result: BoxTable,
}

impl PipelineReport {
    pub fn succeeded(&self) -> bool {
        self.weak_box_matches
            && self.channels_suffice
            && self.isolation_matches
            && self.distillation_matches
            && self.recombination_matches
            && self.tv_to_target == Rational::one() - &self.eps_final
    }
}

/// Runs `plan` on weak copies `eps·P^f + (1-eps)·P^{f_l}` with `steps`
/// rounds of distillation and checks every stage exactly.
///
/// The distilled box computes `q = Π_{i∈I*} (x_i ⊕ c_i)` on success, so the
/// result is `eps_final·P^f + (1-eps_final)·P^{f ⊕ q}`.
pub fn verify_plan_end_to_end(plan: &AmplificationPlan, eps: &Rational, steps: usize) -> Result<PipelineReport> {
    check_unit(eps, "eps")?;
    let f = &plan.function;
    let n = f.n();
    if n > MAX_PIPELINE_PARTIES {
        return Err(Error::SizeLimit(format!(
            "end-to-end verification supports at most {MAX_PIPELINE_PARTIES} parties, got {n}"
        )));
    }
    let (Some(flips), Some(product)) = (plan.input_flips, plan.isolated_product()) else {
        return Err(Error::Precondition(format!(
            "the monomials of f inside {} are not the expansion of a product of literals, \
             so no local relabeling isolates a correlated PR box",
            plan.isolated.set_string()
        )));
    };
    let local_box = simulate_local(&f.local_part())?.to_box();
    let one_minus = |e: &Rational| Rational::one() - e;

    let parts = plan.decomposition.part_functions()?;
    let weak = xor_boxes(&xor_star(&parts, eps)?, &local_box)?;
    let weak_box_matches =
        weak == mix(&[make_full_correlation(f)?, local_box.clone()], &[eps.clone(), one_minus(eps)])?;

    let v = plan.collector;
    let channels_suffice = plan.distill.reaching(v) & plan.forwarding_mask() == plan.forwarding_mask();

    let isolated = isolate(&xor_boxes(&weak, &local_box)?, plan, flips)?;
    let k = plan.isolated.degree();
    let isolation_matches = isolated == make_correlated(k, eps)?;

    let mut distilled = isolated;
    for _ in 0..steps {
        distilled = compose_triangle(&distilled, &distilled)?;
    }
    let eps_final = iterate(k, eps, steps)?.last().clone();
    let distillation_matches = distilled == make_correlated(k, &eps_final)?;

    // parties in `flips` keep negating their inputs into the distilled box
    let relabeled = distilled.embed(n, &plan.isolated.vars())?;
    let embedded = BoxTable::from_fn(n, |x, a| relabeled.prob(x ^ flips, a).clone())?;
    let rest = f.nonlocal_part().xor(&product)?;
    let result = xor_boxes(&xor_boxes(&embedded, &simulate_with_channels(&rest, &plan.distill, v)?)?, &local_box)?;
    let target = make_full_correlation(f)?;
    let failure_function = f.xor(&product)?;
    let failure = make_full_correlation(&failure_function)?;
    let weights = [eps_final.clone(), one_minus(&eps_final)];
    let recombination_matches = result == mix(&[target.clone(), failure], &weights)?;
    let tv_to_target = tv_distance(&result, &target)?;
    let matches_local_failure_form = result == mix(&[target, local_box], &weights)?;

    Ok(PipelineReport {
        eps: eps.clone(),
        steps,
        isolated_parties: k,
        input_flips: flips,
        eps_final,
        weak_box_matches,
        channels_suffice,
        isolation_matches,
        distillation_matches,
        recombination_matches,
        failure_function,
        tv_to_target,
        matches_local_failure_form,
        result,
    })
}

/// Parties outside `I*` input 0 and forward their outputs to the collector,
/// which flips its own output by their parity; parties in `flips` negate
/// their input. Returns the box seen by the parties of `I*`.
fn isolate(q: &BoxTable, plan: &AmplificationPlan, flips: u32) -> Result<BoxTable> {
    let parties = plan.isolated.vars();
    let k = parties.len();
    let isolated_mask = plan.isolated.mask();
    let v_pos = parties.iter().position(|&p| p == plan.collector).expect("collector lies in I*");
    let spread = |y: u32| parties.iter().enumerate().fold(0u32, |acc, (j, &p)| acc | (y >> j & 1) << (p - 1));
    let gather = |a: u32| parties.iter().enumerate().fold(0u32, |acc, (j, &p)| acc | (a >> (p - 1) & 1) << j);
    let mut probs = vec![Rational::zero(); 1 << (2 * k)];
    for y in 0..1u32 << k {
        let x = spread(y) ^ flips;
        for a in q.inputs() {
            let p = q.prob(x, a);
            if p.is_zero() {
                continue;
            }
            let b = gather(a) ^ (parity(a & !isolated_mask) as u32) << v_pos;
            probs[((y as usize) << k) | b as usize] += p;
        }
    }
    BoxTable::new(k, probs)
}
