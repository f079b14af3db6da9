use crate::boolfn::{mask_vars, AnfFunction, Monomial};
use crate::boxes::{make_full_correlation, xor_boxes, BoxTable};
use crate::error::{Error, Result};

/// A generalized PR box: the parties of `monomial` feed their inputs, the
/// parties in `constant_parties` feed a constant 1 and only contribute
/// outputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Part {
    pub monomial: Monomial,
    pub constant_parties: u32,
}

impl Part {
    /// Parties holding an end of this box, increasing.
    pub fn parties(&self) -> Vec<usize> {
        mask_vars(self.monomial.mask() | self.constant_parties)
    }

    pub fn function(&self, n: usize) -> Result<AnfFunction> {
        AnfFunction::new(n, [self.monomial])
    }

    /// The part as an `n`-party box; parties outside it output 0.
    pub fn to_box(&self, n: usize) -> Result<BoxTable> {
        let parties = self.parties();
        let wired = parties.iter().enumerate().filter(|(_, &p)| self.monomial.contains(p)).map(|(pos, _)| pos + 1);
        let local = AnfFunction::new(parties.len(), [Monomial::from_vars(wired)])?;
        make_full_correlation(&local)?.embed(n, &parties)
    }
}

/// `f` as the XOR of generalized PR boxes and a local residual.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    n: usize,
    parts: Vec<Part>,
    residual: AnfFunction,
}

impl Decomposition {
    pub fn n(&self) -> usize {
        self.n
    }

    /// In replacement order.
    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn residual(&self) -> &AnfFunction {
        &self.residual
    }

    pub fn part_functions(&self) -> Result<Vec<AnfFunction>> {
        self.parts.iter().map(|p| p.function(self.n)).collect()
    }

    /// XOR of the part functions and the residual.
    pub fn function(&self) -> Result<AnfFunction> {
        AnfFunction::new(self.n, self.parts.iter().map(|p| p.monomial).chain(self.residual.monomials()))
    }

    pub fn constant_part_count(&self) -> usize {
        self.parts.iter().filter(|p| p.constant_parties != 0).count()
    }

    /// XOR of all part boxes with the residual's full-correlation box.
    pub fn to_box(&self) -> Result<BoxTable> {
        let mut acc = make_full_correlation(&self.residual)?;
        for part in &self.parts {
            acc = xor_boxes(&acc, &part.to_box(self.n)?)?;
        }
        Ok(acc)
    }
}

/// Starts from the monomial of highest degree.
pub fn decompose(f: &AnfFunction) -> Result<Decomposition> {
    let s = f.nonlocal_support();
    let first = s
        .j_set()
        .iter()
        .copied()
        .min_by(|a, b| b.degree().cmp(&a.degree()).then(a.cmp(b)))
        .ok_or_else(|| Error::Precondition("local function has nothing to decompose".into()))?;
    decompose_with_first(f, first)
}

/// Replaces monomials one at a time, always taking next the unprocessed
/// monomial of highest degree (then smallest) that overlaps what has been
/// processed. Parties outside every monomial join the last part as
/// constant-input parties.
pub fn decompose_with_first(f: &AnfFunction, first: Monomial) -> Result<Decomposition> {
    let s = f.nonlocal_support();
    if s.block_count() != 1 {
        return Err(Error::Precondition(format!(
            "decomposition needs a single block, found n_J = {}",
            s.block_count()
        )));
    }
    if !s.j_set().contains(&first) {
        return Err(Error::Precondition(format!("{first} is not a monomial of degree ≥ 2 in f")));
    }
    let mut order = vec![first];
    let mut covered = first.mask();
    let mut rest: Vec<Monomial> = s.j_set().iter().copied().filter(|&m| m != first).collect();
    while !rest.is_empty() {
        let pick = rest
            .iter()
            .enumerate()
            .filter(|(_, m)| m.mask() & covered != 0)
            .min_by(|(_, a), (_, b)| b.degree().cmp(&a.degree()).then(a.cmp(b)))
            .map(|(i, _)| i)
            .expect("a single block is connected");
        let m = rest.remove(pick);
        covered |= m.mask();
        order.push(m);
    }
    let outside = ((1u32 << f.n()) - 1) & !covered;
    let last = order.len() - 1;
    let parts = order
        .into_iter()
        .enumerate()
        .map(|(i, monomial)| Part { monomial, constant_parties: if i == last { outside } else { 0 } })
        .collect();
    Ok(Decomposition { n: f.n(), parts, residual: f.local_part() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(vars: &[usize]) -> Monomial {
        Monomial::from_vars(vars.iter().copied())
    }

    #[test]
    fn amplifiable_example() {
        let f = AnfFunction::parse("x1*x2*x3 + x3*x4 + x1", 4).unwrap();
        let d = decompose(&f).unwrap();
        assert_eq!(
            d.parts(),
            &[
                Part { monomial: m(&[1, 2, 3]), constant_parties: 0 },
                Part { monomial: m(&[3, 4]), constant_parties: 0 }
            ]
        );
        assert_eq!(d.residual(), &AnfFunction::parse("x1", 4).unwrap());
        assert_eq!(d.function().unwrap(), f);
        assert_eq!(d.to_box().unwrap(), make_full_correlation(&f).unwrap());
    }

    #[test]
    fn single_monomial() {
        let f = AnfFunction::parse("x1*x2", 2).unwrap();
        let d = decompose(&f).unwrap();
        assert_eq!(d.parts().len(), 1);
        assert!(d.residual().is_zero());
        assert_eq!(d.constant_part_count(), 0);
    }

    #[test]
    fn outside_parties_become_constants() {
        let f = AnfFunction::parse("x1*x2 + x2*x3", 4).unwrap();
        let d = decompose(&f).unwrap();
        assert_eq!(d.parts().len(), 2);
        assert_eq!(d.parts()[1].constant_parties, 0b1000);
        assert_eq!(d.constant_part_count(), 1);
        for x in 0..16 {
            assert_eq!(d.function().unwrap().evaluate(x), f.evaluate(x));
        }
        assert_eq!(d.to_box().unwrap(), make_full_correlation(&f).unwrap());
    }

    #[test]
    fn several_blocks_are_rejected() {
        let f = AnfFunction::parse("x1*x2 + x2*x3 + x4*x5*x6 + x5", 6).unwrap();
        assert!(matches!(decompose(&f), Err(Error::Precondition(_))));
        assert!(matches!(decompose(&AnfFunction::parse("x1", 2).unwrap()), Err(Error::Precondition(_))));
    }
}
