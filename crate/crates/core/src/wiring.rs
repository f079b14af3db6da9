//! Adaptive protocols over shared boxes.
//!
//! Boxes are used in one global order. At step `j` every party feeds box `j`
//! an input computed from its own input bit, the shared random value and its
//! own earlier outputs; the final output bit is computed the same way from
//! any of its outputs. All rules are lookup tables.

use std::path::Path;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boxes::{check_parties, BoxTable, MAX_PARTIES};
use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, Rational};

pub const MAX_BOXES: usize = 16;

/// A bit-valued function of `(x_i, r, outputs of the boxes in reads)`.
///
/// `table[x_i + 2 * (r + R * k)]` is the value, where `R` is the number of
/// random values and bit `t` of `k` is this party's output from `reads[t]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    reads: Vec<usize>,
    table: Vec<bool>,
}

impl Rule {
    /// `reads` holds 0-based box indices.
    pub fn new(reads: Vec<usize>, table: Vec<bool>) -> Self {
        Rule { reads, table }
    }

    /// Tabulates `f(x_i, r, read outputs)` for `randomness` random values.
    pub fn from_fn(reads: Vec<usize>, randomness: usize, f: impl Fn(bool, usize, &[bool]) -> bool) -> Self {
        let size = (2 * randomness) << reads.len();
        let table = (0..size)
            .map(|idx| {
                let x = idx & 1 == 1;
                let r = (idx >> 1) % randomness;
                let k = (idx >> 1) / randomness;
                let bits: Vec<bool> = (0..reads.len()).map(|t| k >> t & 1 == 1).collect();
                f(x, r, &bits)
            })
            .collect();
        Rule { reads, table }
    }

    /// Ignores everything but `x_i`.
    pub fn copy_input() -> Self {
        Rule { reads: Vec::new(), table: vec![false, true] }
    }

    pub fn reads(&self) -> &[usize] {
        &self.reads
    }

    pub fn table(&self) -> &[bool] {
        &self.table
    }

    fn apply(&self, x: bool, r: usize, randomness: usize, outputs: u32) -> bool {
        let k = self.reads.iter().enumerate().fold(0usize, |acc, (t, &j)| acc | ((outputs >> j & 1) as usize) << t);
        self.table[x as usize + 2 * (r + randomness * k)]
    }
}

/// One party's rules: an input rule per box and the output rule.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartyProtocol {
    pub inputs: Vec<Rule>,
    pub output: Rule,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Wiring {
    n: usize,
    boxes: usize,
    randomness: Vec<Rational>,
    parties: Vec<PartyProtocol>,
}

impl Wiring {
    pub fn new(boxes: usize, randomness: Vec<Rational>, parties: Vec<PartyProtocol>) -> Result<Self> {
        let n = parties.len();
        check_parties(n)?;
        if boxes == 0 || boxes > MAX_BOXES {
            return Err(Error::Wiring(format!("box count {boxes} outside 1..={MAX_BOXES}")));
        }
        if randomness.is_empty() {
            return Err(Error::BadWeights("no random values".into()));
        }
        if let Some(w) = randomness.iter().find(|w| w.is_negative()) {
            return Err(Error::BadWeights(format!("negative randomness weight {w}")));
        }
        let total: Rational = randomness.iter().sum();
        if !total.is_one() {
            return Err(Error::BadWeights(format!("randomness weights sum to {total}")));
        }
        let r_count = randomness.len();
        for (i, party) in parties.iter().enumerate() {
            if party.inputs.len() != boxes {
                return Err(Error::Wiring(format!(
                    "party {} has {} input rules for {boxes} boxes",
                    i + 1,
                    party.inputs.len()
                )));
            }
            for (j, rule) in party.inputs.iter().enumerate() {
                if let Some(&b) = rule.reads.iter().find(|&&b| b >= j) {
                    return Err(Error::Causality { party: i + 1, step: j + 1, reads: b + 1 });
                }
                check_table(rule, r_count, i + 1)?;
            }
            if let Some(&b) = party.output.reads.iter().find(|&&b| b >= boxes) {
                return Err(Error::Wiring(format!("party {} output reads missing box {}", i + 1, b + 1)));
            }
            check_table(&party.output, r_count, i + 1)?;
        }
        Ok(Wiring { n, boxes, randomness, parties })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_count(&self) -> usize {
        self.boxes
    }

    pub fn randomness(&self) -> &[Rational] {
        &self.randomness
    }

    pub fn parties(&self) -> &[PartyProtocol] {
        &self.parties
    }

    /// No input depends on an earlier output.
    pub fn is_non_adaptive(&self) -> bool {
        self.parties.iter().all(|p| p.inputs.iter().all(|r| r.reads.is_empty()))
    }
}

fn check_table(rule: &Rule, r_count: usize, party: usize) -> Result<()> {
    let want = (2 * r_count) << rule.reads.len();
    if rule.table.len() != want {
        return Err(Error::Wiring(format!(
            "party {party}: rule table has {} entries, expected {want}",
            rule.table.len()
        )));
    }
    let mut sorted = rule.reads.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != rule.reads.len() {
        return Err(Error::Wiring(format!("party {party}: rule reads a box twice")));
    }
    Ok(())
}

struct Evaluation<'a> {
    boxes: &'a [BoxTable],
    w: &'a Wiring,
    x: u32,
    r: usize,
    out: Vec<Rational>,
}

impl Evaluation<'_> {
    /// `outputs[i]` has bit `j` set when party `i + 1` got 1 from box `j`.
    fn run(&mut self, step: usize, outputs: [u32; MAX_PARTIES], weight: &Rational) {
        let n = self.w.n;
        let r_count = self.w.randomness.len();
        if step == self.w.boxes {
            let c = (0..n).fold(0u32, |acc, i| {
                let bit = self.w.parties[i].output.apply(self.x >> i & 1 == 1, self.r, r_count, outputs[i]);
                acc | (bit as u32) << i
            });
            self.out[c as usize] += weight;
            return;
        }
        let y = (0..n).fold(0u32, |acc, i| {
            let bit = self.w.parties[i].inputs[step].apply(self.x >> i & 1 == 1, self.r, r_count, outputs[i]);
            acc | (bit as u32) << i
        });
        let boxes = self.boxes;
        for (b, p) in boxes[step].conditional(y).iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let mut next = outputs;
            for (i, o) in next.iter_mut().enumerate().take(n) {
                *o |= ((b >> i & 1) as u32) << step;
            }
            self.run(step + 1, next, &(weight * p));
        }
    }
}

/// Exact output box of `w` applied to `boxes` (box `j` used at step `j`).
pub fn evaluate_wiring(boxes: &[BoxTable], w: &Wiring) -> Result<BoxTable> {
    if boxes.len() != w.boxes {
        return Err(Error::Dimension(format!("wiring uses {} boxes, got {}", w.boxes, boxes.len())));
    }
    if let Some(b) = boxes.iter().find(|b| b.n() != w.n) {
        return Err(Error::Dimension(format!("{}-party wiring applied to a {}-party box", w.n, b.n())));
    }
    let n = w.n;
    let rows: Vec<Vec<Rational>> = (0..1u32 << n)
        .into_par_iter()
        .map(|x| {
            let mut ev = Evaluation { boxes, w, x, r: 0, out: vec![Rational::zero(); 1 << n] };
            for (r, weight) in w.randomness.iter().enumerate() {
                if !weight.is_zero() {
                    ev.r = r;
                    ev.run(0, [0; MAX_PARTIES], weight);
                }
            }
            ev.out
        })
        .collect();
    Ok(BoxTable::from_raw(n, rows.into_iter().flatten().collect()))
}

/// One box, used directly.
pub fn identity_wiring(n: usize) -> Result<Wiring> {
    let party = PartyProtocol { inputs: vec![Rule::copy_input()], output: Rule::from_fn(vec![0], 1, |_, _, b| b[0]) };
    Wiring::new(1, vec![Rational::one()], vec![party; n])
}

/// Two boxes with the same input; each party outputs the XOR of its outputs.
pub fn xor_wiring(n: usize) -> Result<Wiring> {
    let party = PartyProtocol {
        inputs: vec![Rule::copy_input(), Rule::copy_input()],
        output: Rule::from_fn(vec![0, 1], 1, |_, _, b| b[0] ^ b[1]),
    };
    Wiring::new(2, vec![Rational::one()], vec![party; n])
}

/// The distillation step: input `x_i` to the first box, `x_i·(1 ⊕ a_i)` to
/// the second, output `a_i ⊕ b_i`.
pub fn bs_wiring(n: usize) -> Result<Wiring> {
    if n < 2 {
        return Err(Error::PartyCount { n, min: 2, max: MAX_PARTIES });
    }
    let party = PartyProtocol {
        inputs: vec![Rule::copy_input(), Rule::from_fn(vec![0], 1, |x, _, a| x && !a[0])],
        output: Rule::from_fn(vec![0, 1], 1, |_, _, b| b[0] ^ b[1]),
    };
    Wiring::new(2, vec![Rational::one()], vec![party; n])
}

/// `a ▷ b`: [`bs_wiring`] applied to `[a, b]`.
pub fn compose_triangle(a: &BoxTable, b: &BoxTable) -> Result<BoxTable> {
    if a.n() != b.n() {
        return Err(Error::Dimension(format!("composing {}-party and {}-party boxes", a.n(), b.n())));
    }
    evaluate_wiring(&[a.clone(), b.clone()], &bs_wiring(a.n())?)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleDoc {
    /// 1-based box indices.
    reads: Vec<usize>,
    table: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartyDoc {
    inputs: Vec<RuleDoc>,
    output: RuleDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WiringDoc {
    n: usize,
    boxes: usize,
    randomness: Vec<String>,
    parties: Vec<PartyDoc>,
}

fn rule_to_doc(rule: &Rule) -> RuleDoc {
    RuleDoc {
        reads: rule.reads.iter().map(|b| b + 1).collect(),
        table: rule.table.iter().map(|&b| if b { '1' } else { '0' }).collect(),
    }
}

fn rule_from_doc(doc: &RuleDoc) -> Result<Rule> {
    if doc.reads.contains(&0) {
        return Err(Error::Format("box indices in reads start at 1".into()));
    }
    let table = doc
        .table
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::Format(format!("rule table contains {c:?}"))),
        })
        .collect::<Result<_>>()?;
    Ok(Rule::new(doc.reads.iter().map(|b| b - 1).collect(), table))
}

pub fn wiring_to_json(w: &Wiring) -> String {
    let doc = WiringDoc {
        n: w.n,
        boxes: w.boxes,
        randomness: w.randomness.iter().map(format_rational).collect(),
        parties: w
            .parties
            .iter()
            .map(|p| PartyDoc { inputs: p.inputs.iter().map(rule_to_doc).collect(), output: rule_to_doc(&p.output) })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("wiring documents always serialize")
}

pub fn wiring_from_json(text: &str) -> Result<Wiring> {
    let doc: WiringDoc = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    if doc.parties.len() != doc.n {
        return Err(Error::Format(format!("n = {} but {} parties listed", doc.n, doc.parties.len())));
    }
    let randomness = doc.randomness.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?;
    let parties = doc
        .parties
        .iter()
        .map(|p| {
            Ok(PartyProtocol {
                inputs: p.inputs.iter().map(rule_from_doc).collect::<Result<_>>()?,
                output: rule_from_doc(&p.output)?,
            })
        })
        .collect::<Result<_>>()?;
    Wiring::new(doc.boxes, randomness, parties)
}

pub fn load_wiring(path: &Path) -> Result<Wiring> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
    wiring_from_json(&text)
}

/// Resolves `identity`, `xor` or `bs`.
pub fn builtin_wiring(name: &str, n: usize) -> Result<Option<Wiring>> {
    Ok(match name {
        "identity" => Some(identity_wiring(n)?),
        "xor" => Some(xor_wiring(n)?),
        "bs" => Some(bs_wiring(n)?),
        _ => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::{make_correlated, make_even_parity, make_npr, mix, xor_boxes};
    use crate::rational::{int, inv_pow2, ratio};

    #[test]
    fn identity_returns_the_box() {
        let p = make_correlated(3, &ratio(2, 5)).unwrap();
        assert_eq!(evaluate_wiring(std::slice::from_ref(&p), &identity_wiring(3).unwrap()).unwrap(), p);
    }

    #[test]
    fn triangle_relations() {
        for n in 2..=4 {
            let pr = make_npr(n).unwrap();
            let c = make_even_parity(n).unwrap();
            assert_eq!(compose_triangle(&pr, &c).unwrap(), pr);
            assert_eq!(compose_triangle(&pr, &pr).unwrap(), pr);
            assert_eq!(compose_triangle(&c, &c).unwrap(), c);
            let w = inv_pow2(n - 1);
            let expected = mix(&[pr.clone(), c.clone()], &[w.clone(), int(1) - w]).unwrap();
            assert_eq!(compose_triangle(&c, &pr).unwrap(), expected);
        }
    }

    #[test]
    fn distillation_step_matches_the_closed_form() {
        let e = ratio(1, 3);
        let p = make_correlated(3, &e).unwrap();
        // T_3(1/3) = (1/3)/4 * (5 - 1/3) = 7/18
        assert_eq!(compose_triangle(&p, &p).unwrap(), make_correlated(3, &ratio(7, 18)).unwrap());
    }

    #[test]
    fn xor_wiring_is_box_xor() {
        let p = make_correlated(2, &ratio(1, 3)).unwrap();
        let q = make_npr(2).unwrap();
        assert_eq!(
            evaluate_wiring(&[p.clone(), q.clone()], &xor_wiring(2).unwrap()).unwrap(),
            xor_boxes(&p, &q).unwrap()
        );
        assert!(xor_wiring(2).unwrap().is_non_adaptive());
        assert!(!bs_wiring(2).unwrap().is_non_adaptive());
    }

    #[test]
    fn causality_is_enforced() {
        let bad = PartyProtocol {
            inputs: vec![Rule::from_fn(vec![1], 1, |x, _, _| x), Rule::copy_input()],
            output: Rule::from_fn(vec![0], 1, |_, _, b| b[0]),
        };
        let ok = PartyProtocol { inputs: vec![Rule::copy_input(), Rule::copy_input()], output: bad.output.clone() };
        let err = Wiring::new(2, vec![int(1)], vec![ok, bad]).unwrap_err();
        assert_eq!(err, Error::Causality { party: 2, step: 1, reads: 2 });
        // reading one's own current box is also a violation
        let selfread = PartyProtocol {
            inputs: vec![Rule::from_fn(vec![0], 1, |x, _, _| x)],
            output: Rule::from_fn(vec![0], 1, |_, _, b| b[0]),
        };
        assert!(matches!(Wiring::new(1, vec![int(1)], vec![selfread]), Err(Error::Causality { step: 1, .. })));
    }

    #[test]
    fn shared_randomness_is_summed() {
        // both parties output the shared random bit
        let party = PartyProtocol {
            inputs: vec![Rule::from_fn(vec![], 2, |x, _, _| x)],
            output: Rule::from_fn(vec![], 2, |_, r, _| r == 1),
        };
        let w = Wiring::new(1, vec![ratio(1, 4), ratio(3, 4)], vec![party; 2]).unwrap();
        let out = evaluate_wiring(&[make_npr(2).unwrap()], &w).unwrap();
        for x in 0..4 {
            assert_eq!(out.prob(x, 0b00), &ratio(1, 4));
            assert_eq!(out.prob(x, 0b11), &ratio(3, 4));
        }
    }

    #[test]
    fn validation() {
        assert!(matches!(bs_wiring(1), Err(Error::PartyCount { .. })));
        let party = PartyProtocol { inputs: vec![Rule::copy_input()], output: Rule::new(vec![0], vec![false; 3]) };
        assert!(matches!(Wiring::new(1, vec![int(1)], vec![party.clone()]), Err(Error::Wiring(_))));
        let good = identity_wiring(1).unwrap().parties()[0].clone();
        assert!(matches!(Wiring::new(1, vec![ratio(1, 2)], vec![good.clone()]), Err(Error::BadWeights(_))));
        assert!(matches!(Wiring::new(2, vec![int(1)], vec![good]), Err(Error::Wiring(_))));
        let w = identity_wiring(2).unwrap();
        assert!(matches!(evaluate_wiring(&[make_npr(3).unwrap()], &w), Err(Error::Dimension(_))));
        assert!(matches!(evaluate_wiring(&[], &w), Err(Error::Dimension(_))));
    }

    #[test]
    fn json_round_trip() {
        for w in [identity_wiring(2).unwrap(), bs_wiring(3).unwrap(), xor_wiring(1).unwrap()] {
            assert_eq!(wiring_from_json(&wiring_to_json(&w)).unwrap(), w);
        }
        let text = wiring_to_json(&bs_wiring(2).unwrap());
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["parties"][0]["inputs"][1]["reads"], serde_json::json!([1]));
        assert_eq!(doc["parties"][0]["inputs"][1]["table"], "0100");
        assert!(matches!(wiring_from_json("[]"), Err(Error::Format(_))));
    }
}
