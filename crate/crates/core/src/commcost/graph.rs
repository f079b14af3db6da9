use std::collections::BTreeSet;
use std::fmt;

use crate::boolfn::{mask_vars, AnfFunction, NonlocalSupport};
use crate::error::{Error, Result};

/// Directed one-way channels between parties `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CommGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl CommGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = CommGraph::empty(n);
        for (from, to) in edges {
            g.add_edge(from, to)?;
        }
        Ok(g)
    }

    pub fn empty(n: usize) -> Self {
        CommGraph { n, edges: BTreeSet::new() }
    }

    pub fn add_edge(&mut self, from: usize, to: usize) -> Result<()> {
        if from == to {
            return Err(Error::Graph(format!("self-loop on vertex {from}")));
        }
        if from == 0 || to == 0 || from > self.n || to > self.n {
            return Err(Error::Graph(format!("edge ({from},{to}) outside vertices 1..={}", self.n)));
        }
        self.edges.insert((from, to));
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains_edge(&self, from: usize, to: usize) -> bool {
        self.edges.contains(&(from, to))
    }

    pub fn without_edge(&self, from: usize, to: usize) -> CommGraph {
        let mut g = self.clone();
        g.edges.remove(&(from, to));
        g
    }

    pub fn is_subgraph_of(&self, other: &CommGraph) -> bool {
        self.n == other.n && self.edges.is_subset(&other.edges)
    }

    pub fn is_proper_subgraph_of(&self, other: &CommGraph) -> bool {
        self.is_subgraph_of(other) && self.edges.len() < other.edges.len()
    }

    /// Vertices with a directed path to `target`, as a bitmask (bit `v - 1`),
    /// including `target` itself.
    pub fn reaching(&self, target: usize) -> u32 {
        let mut mask = 1u32 << (target - 1);
        loop {
            let before = mask;
            for &(from, to) in &self.edges {
                if mask >> (to - 1) & 1 == 1 {
                    mask |= 1 << (from - 1);
                }
            }
            if mask == before {
                return mask;
            }
        }
    }

    pub fn reaches(&self, from: usize, to: usize) -> bool {
        self.reaching(to) >> (from - 1) & 1 == 1
    }
}

impl fmt::Display for CommGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // listed from the highest source down, the order chains are built in
        let edges: Vec<String> = self.edges.iter().rev().map(|(a, b)| format!("({a},{b})")).collect();
        write!(f, "{{{}}}", edges.join(", "))
    }
}

/// Every block has a vertex in its variable union that all other vertices of
/// the union can reach.
pub fn verify_path_condition(g: &CommGraph, support: &NonlocalSupport) -> bool {
    (0..support.block_count()).all(|b| {
        let union = support.block_union_mask(b);
        mask_vars(union).into_iter().any(|v| v <= g.n() && g.reaching(v) & union == union)
    })
}

/// `|∪𝒥| - n_𝒥`: one channel fewer than the variables of each block.
pub fn n_scratch(f: &AnfFunction) -> usize {
    let s = f.nonlocal_support();
    s.union_size() - s.block_count()
}

/// A descending chain through each block's variables, ending at its
/// smallest variable.
pub fn scratch_graph(f: &AnfFunction) -> CommGraph {
    let s = f.nonlocal_support();
    let mut g = CommGraph::empty(f.n());
    for b in 0..s.block_count() {
        let vars = mask_vars(s.block_union_mask(b));
        for pair in vars.windows(2) {
            g.add_edge(pair[1], pair[0]).expect("chain vertices are distinct parties");
        }
    }
    g
}
