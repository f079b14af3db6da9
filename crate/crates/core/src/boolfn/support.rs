use std::collections::BTreeMap;

use super::{AnfFunction, Monomial};

/// The monomials of degree ≥ 2 of a function, grouped into the finest
/// partition whose blocks have pairwise disjoint variable sets.
///
/// That partition is the set of connected components of the intersection
/// graph (monomials adjacent iff they share a variable): any two monomials in
/// one component are linked by overlapping pairs and so cannot be separated,
/// and distinct components never share a variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonlocalSupport {
    n: usize,
    j_set: Vec<Monomial>,
    blocks: Vec<Vec<Monomial>>,
    m_values: BTreeMap<Monomial, usize>,
}

impl NonlocalSupport {
    pub fn of(f: &AnfFunction) -> Self {
        let j_set: Vec<Monomial> = f.monomials().filter(|m| m.degree() >= 2).collect();
        let mut dsu = DisjointSets::new(j_set.len());
        for i in 0..j_set.len() {
            for k in i + 1..j_set.len() {
                if j_set[i].intersects(j_set[k]) {
                    dsu.union(i, k);
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<Monomial>> = BTreeMap::new();
        for (i, &m) in j_set.iter().enumerate() {
            groups.entry(dsu.find(i)).or_default().push(m);
        }
        let mut blocks: Vec<Vec<Monomial>> = groups.into_values().collect();
        for block in &mut blocks {
            block.sort();
        }
        blocks.sort_by(|a, b| a[0].cmp(&b[0]));

        let m_values = j_set
            .iter()
            .map(|&m| {
                let others = j_set.iter().filter(|&&o| o != m).fold(0u32, |acc, o| acc | o.mask());
                (m, (m.mask() & !others).count_ones() as usize)
            })
            .collect();

        NonlocalSupport { n: f.n(), j_set, blocks, m_values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `𝒥` in increasing monomial order.
    pub fn j_set(&self) -> &[Monomial] {
        &self.j_set
    }

    pub fn is_empty(&self) -> bool {
        self.j_set.is_empty()
    }

    pub fn blocks(&self) -> &[Vec<Monomial>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Number of variables of `m` that occur in no other monomial of `𝒥`.
    pub fn m_value(&self, m: Monomial) -> Option<usize> {
        self.m_values.get(&m).copied()
    }

    pub fn m_values(&self) -> &BTreeMap<Monomial, usize> {
        &self.m_values
    }

    /// Variables of `m` exclusive to it within `𝒥`.
    pub fn exclusive_mask(&self, m: Monomial) -> u32 {
        let others = self.j_set.iter().filter(|&&o| o != m).fold(0u32, |acc, o| acc | o.mask());
        m.mask() & !others
    }

    /// `∪_{I∈𝒥} I` as a variable mask.
    pub fn union_mask(&self) -> u32 {
        self.j_set.iter().fold(0, |acc, m| acc | m.mask())
    }

    pub fn union_size(&self) -> usize {
        self.union_mask().count_ones() as usize
    }

    pub fn block_union_mask(&self, block: usize) -> u32 {
        self.blocks[block].iter().fold(0, |acc, m| acc | m.mask())
    }

    /// Largest `m_I`; ties go to the lexicographically smallest monomial.
    pub fn argmax_m(&self) -> Option<(Monomial, usize)> {
        // j_set is sorted, so the first maximum is the smallest monomial
        self.j_set.iter().map(|&m| (m, self.m_values[&m])).fold(None, |best: Option<(Monomial, usize)>, cur| match best
        {
            Some(b) if b.1 >= cur.1 => Some(b),
            _ => Some(cur),
        })
    }
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n).collect() }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}
