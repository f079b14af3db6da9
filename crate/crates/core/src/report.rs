//! Plain-text amplification reports. Output is deterministic: identical
//! inputs give byte-identical text.

use std::fmt;

use crate::boolfn::{mask_vars, AnfFunction, Monomial, NonlocalSupport};
use crate::commcost::{
    amplifiable, n_distill_bound, n_scratch, plan, scratch_graph, Amplifiability, AmplificationPlan, CommGraph,
    PipelineReport,
};
use crate::error::Result;
use crate::rational::{format_rational, to_decimal};

const DECIMAL_DIGITS: usize = 12;

#[derive(Clone, Debug)]
pub struct AnalysisReport {
    pub function: AnfFunction,
    pub support: NonlocalSupport,
    pub n_scratch: usize,
    pub scratch_graph: CommGraph,
    pub amplifiability: Amplifiability,
    pub n_distill_bound: Option<usize>,
    pub plan: Option<AmplificationPlan>,
}

pub fn analyze(f: &AnfFunction) -> Result<AnalysisReport> {
    let amplifiability = amplifiable(f);
    let plan = if amplifiability.is_amplifiable() { Some(plan(f)?) } else { None };
    let support = f.nonlocal_support();
    let n_distill_bound = if support.block_count() == 1 { Some(n_distill_bound(f)?) } else { None };
    Ok(AnalysisReport {
        function: f.clone(),
        n_scratch: n_scratch(f),
        scratch_graph: scratch_graph(f),
        support,
        amplifiability,
        n_distill_bound,
        plan,
    })
}

fn set_list(monomials: &[Monomial]) -> String {
    monomials.iter().map(|m| m.set_string()).collect::<Vec<_>>().join(" ")
}

fn mask_set(mask: u32) -> String {
    let vars: Vec<String> = mask_vars(mask).iter().map(|v| v.to_string()).collect();
    format!("{{{}}}", vars.join(","))
}

impl fmt::Display for AnalysisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.support;
        writeln!(f, "function: {}", self.function)?;
        writeln!(f, "parties: {}", self.function.n())?;
        if s.is_empty() {
            writeln!(f, "verdict: local function; nothing to simulate")?;
            return Ok(());
        }
        writeln!(f, "support J: {}", set_list(s.j_set()))?;
        writeln!(f, "n_J: {}", s.block_count())?;
        for (i, block) in s.blocks().iter().enumerate() {
            writeln!(f, "  block {}: {} over parties {}", i + 1, set_list(block), mask_set(s.block_union_mask(i)))?;
        }
        writeln!(f, "m_I:")?;
        for (m, value) in s.m_values() {
            writeln!(f, "  {}: {value}", m.set_string())?;
        }
        writeln!(f, "n_scratch: {}", self.n_scratch)?;
        writeln!(f, "G_scratch: {}", self.scratch_graph)?;
        match self.n_distill_bound {
            Some(b) => writeln!(f, "n_distill bound: {b}")?,
            None => writeln!(f, "n_distill bound: undefined for n_J = {}", s.block_count())?,
        }
        match &self.plan {
            Some(p) => {
                writeln!(f, "verdict: amplifiable")?;
                writeln!(f, "isolated monomial: {}", p.isolated.set_string())?;
                match p.input_flips {
                    Some(0) => {}
                    Some(c) => writeln!(f, "isolation relabeling: parties {} negate their inputs", mask_set(c))?,
                    None => writeln!(f, "isolation relabeling: none exists; end-to-end verification unavailable")?,
                }
                writeln!(f, "max m_I: {}", p.max_m)?;
                writeln!(f, "collector: {}", p.collector)?;
                writeln!(f, "n_distill: {}", p.n_distill())?;
                writeln!(f, "G: {}", p.scratch)?;
                writeln!(f, "G': {}", p.distill)?;
                let parts: Vec<String> = p
                    .decomposition
                    .parts()
                    .iter()
                    .map(|part| {
                        if part.constant_parties == 0 {
                            part.monomial.to_string()
                        } else {
                            format!("{} (constant inputs at {})", part.monomial, mask_set(part.constant_parties))
                        }
                    })
                    .collect();
                writeln!(f, "decomposition: {} | local {}", parts.join(" ; "), p.decomposition.residual())?;
            }
            None => {
                let reasons: Vec<String> = self.amplifiability.obstacles.iter().map(|o| o.to_string()).collect();
                writeln!(f, "verdict: not amplifiable: {}", reasons.join("; "))?;
            }
        }
        Ok(())
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "MATCH"
    } else {
        "MISMATCH"
    }
}

impl fmt::Display for PipelineReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verification: eps = {}, steps = {}", format_rational(&self.eps), self.steps)?;
        writeln!(f, "  weak box: {}", verdict(self.weak_box_matches))?;
        writeln!(f, "  channels of G' reach the collector: {}", if self.channels_suffice { "yes" } else { "no" })?;
        if self.input_flips != 0 {
            writeln!(f, "  relabeled inputs: {}", mask_set(self.input_flips))?;
        }
        writeln!(f, "  isolated {}-party box: {}", self.isolated_parties, verdict(self.isolation_matches))?;
        writeln!(f, "  distilled box: {}", verdict(self.distillation_matches))?;
        writeln!(
            f,
            "  eps after distillation: {} ({})",
            format_rational(&self.eps_final),
            to_decimal(&self.eps_final, DECIMAL_DIGITS)
        )?;
        writeln!(f, "  recombined box: {}", verdict(self.recombination_matches))?;
        writeln!(
            f,
            "  distance to P^f: {} ({})",
            format_rational(&self.tv_to_target),
            to_decimal(&self.tv_to_target, DECIMAL_DIGITS)
        )?;
        if self.matches_local_failure_form {
            writeln!(f, "  failure branch is P^(f_l): yes")?;
        } else {
            writeln!(f, "  failure branch is P^(f_l): no, it is P^({})", self.failure_function)?;
        }
        writeln!(f, "  overall: {}", if self.succeeded() { "PASS" } else { "FAIL" })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(text: &str, n: usize) -> String {
        analyze(&AnfFunction::parse(text, n).unwrap()).unwrap().to_string()
    }

    #[test]
    fn amplifiable_report() {
        let r = report("x1*x2*x3 + x3*x4 + x1", 4);
        assert!(r.contains("n_scratch: 3\n"));
        assert!(r.contains("n_distill bound: 1\n"));
        assert!(r.contains("n_distill: 1\n"));
        assert!(r.contains("G: {(4,3), (3,2), (2,1)}\n"));
        assert!(r.contains("G': {(4,3)}\n"));
        assert!(r.contains("verdict: amplifiable\n"));
    }

    #[test]
    fn two_block_report() {
        let r = report("x1*x2 + x2*x3 + x4*x5*x6 + x5", 6);
        assert!(r.contains("verdict: not amplifiable: n_J = 2\n"));
        assert!(r.contains("n_scratch: 4\n"));
    }

    #[test]
    fn local_report() {
        assert!(report("x1", 1).contains("local function; nothing to simulate"));
    }

    #[test]
    fn reports_are_deterministic() {
        assert_eq!(report("x1*x2 + x2*x3 + x1*x3", 3), report("x1*x2 + x2*x3 + x1*x3", 3));
    }
}
