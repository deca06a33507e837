use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::bnlearn::{DagStructure, Discretization, StateMatrix};
use crate::error::{Error, Result};
use crate::varengine::BinnedPdf;

/// Largest joint table built by [`joint`].
pub const MAX_JOINT_CONFIGURATIONS: usize = 1_000_000;

const COLUMN_TOLERANCE: f64 = 1e-12;

/// `P(X = x | Pa = pa)` with parents in ascending node order; the parent
/// configuration index is mixed-radix with the lowest parent most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    parents: Vec<usize>,
    n_states: usize,
    /// `[config * n_states + x]`.
    table: Vec<f64>,
}

impl Cpt {
    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    pub fn n_configs(&self) -> usize {
        self.table.len() / self.n_states
    }

    /// Distribution of the node for one parent configuration.
    pub fn column(&self, config: usize) -> &[f64] {
        &self.table[config * self.n_states..(config + 1) * self.n_states]
    }

    pub fn prob(&self, config: usize, state: usize) -> f64 {
        self.table[config * self.n_states + state]
    }

    /// Configuration index of the parents' states in a full assignment.
    pub fn config_of(&self, assignment: &[u8]) -> usize {
        self.parents
            .iter()
            .fold(0, |acc, p| acc * self.n_states + usize::from(assignment[*p]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBayesNet {
    structure: DagStructure,
    n_states: usize,
    cpts: Vec<Cpt>,
}

impl DiscreteBayesNet {
    /// Assembles a network from per-node tables laid out as in [`Cpt`].
    ///
    /// Every column must be strictly positive and sum to one within 1e-12.
    pub fn from_tables(structure: DagStructure, n_states: usize, tables: Vec<Vec<f64>>) -> Result<Self> {
        let n = structure.n_nodes();
        if tables.len() != n {
            return Err(Error::InvalidInput(format!("{} tables for {n} nodes", tables.len())));
        }
        if !structure.is_acyclic() {
            return Err(Error::Cyclic);
        }
        let mut cpts = Vec::with_capacity(n);
        for (node, table) in tables.into_iter().enumerate() {
            let parents: Vec<usize> = structure.parents(node).collect();
            let expected = n_states.pow(parents.len() as u32) * n_states;
            if table.len() != expected {
                return Err(Error::InvalidInput(format!(
                    "node {node}: table has {} entries, expected {expected}",
                    table.len()
                )));
            }
            for (config, col) in table.chunks_exact(n_states).enumerate() {
                let sum: f64 = col.iter().sum();
                if col.iter().any(|p| !(*p > 0.0)) || libm::fabs(sum - 1.0) > COLUMN_TOLERANCE {
                    return Err(Error::InvalidInput(format!(
                        "node {node}, parent configuration {config}: column is not a positive distribution"
                    )));
                }
            }
            cpts.push(Cpt { parents, n_states, table });
        }
        Ok(Self { structure, n_states, cpts })
    }

    pub fn structure(&self) -> &DagStructure {
        &self.structure
    }

    pub fn n_nodes(&self) -> usize {
        self.cpts.len()
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn cpt(&self, node: usize) -> &Cpt {
        &self.cpts[node]
    }

    /// Probability of one full assignment (0-based states).
    pub fn probability(&self, assignment: &[u8]) -> f64 {
        self.cpts
            .iter()
            .enumerate()
            .map(|(i, cpt)| cpt.prob(cpt.config_of(assignment), usize::from(assignment[i])))
            .product()
    }
}

/// Add-one smoothed conditional frequencies:
/// `(count(x, pa) + 1) / (count(pa) + n_states)`.
pub fn learn_cpts(structure: &DagStructure, states: &StateMatrix) -> Result<DiscreteBayesNet> {
    if structure.n_nodes() != states.n_nodes() {
        return Err(Error::InvalidInput(format!(
            "structure has {} nodes, data {}",
            structure.n_nodes(),
            states.n_nodes()
        )));
    }
    if !structure.is_acyclic() {
        return Err(Error::Cyclic);
    }
    let n = states.n_states();
    let tables = (0..structure.n_nodes())
        .map(|node| {
            let parents: Vec<usize> = structure.parents(node).collect();
            let n_configs = n.pow(parents.len() as u32);
            let mut counts = vec![0u32; n_configs * n];
            for rec in states.records() {
                let config = parents.iter().fold(0, |acc, p| acc * n + usize::from(rec[*p]));
                counts[config * n + usize::from(rec[node])] += 1;
            }
            counts
                .chunks_exact(n)
                .flat_map(|col| {
                    let denom = f64::from(col.iter().sum::<u32>()) + n as f64;
                    col.iter().map(move |c| (f64::from(*c) + 1.0) / denom)
                })
                .collect()
        })
        .collect();
    DiscreteBayesNet::from_tables(structure.clone(), n, tables)
}

/// Exhaustive joint table; node 0 is the most significant digit of the index.
#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    n_nodes: usize,
    n_states: usize,
    probs: Vec<f64>,
}

impl Joint {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn index_of(&self, assignment: &[u8]) -> usize {
        assignment.iter().fold(0, |acc, s| acc * self.n_states + usize::from(*s))
    }

    pub fn get(&self, assignment: &[u8]) -> f64 {
        self.probs[self.index_of(assignment)]
    }

    /// Sums out every node except `node`.
    pub fn marginal(&self, node: usize) -> Vec<f64> {
        let stride = self.n_states.pow((self.n_nodes - 1 - node) as u32);
        let mut out = vec![0.0; self.n_states];
        for (idx, p) in self.probs.iter().enumerate() {
            out[(idx / stride) % self.n_states] += p;
        }
        out
    }
}

pub fn joint(net: &DiscreteBayesNet) -> Result<Joint> {
    let (n_nodes, n_states) = (net.n_nodes(), net.n_states());
    let configurations = (n_states as u128).pow(n_nodes as u32);
    if configurations > MAX_JOINT_CONFIGURATIONS as u128 {
        return Err(Error::StateSpaceTooLarge { configurations });
    }
    let mut probs = Vec::with_capacity(configurations as usize);
    let mut assignment = vec![0u8; n_nodes];
    for _ in 0..configurations {
        probs.push(net.probability(&assignment));
        // Odometer increment, last node fastest.
        for digit in assignment.iter_mut().rev() {
            *digit += 1;
            if usize::from(*digit) < n_states {
                break;
            }
            *digit = 0;
        }
    }
    Ok(Joint { n_nodes, n_states, probs })
}

/// Marginal loss distribution of one process as an order-1 [`BinnedPdf`]
/// with that process's bin width.
pub fn marginal(net: &DiscreteBayesNet, process: usize, disc: &Discretization) -> Result<BinnedPdf> {
    if process >= net.n_nodes() || disc.n_processes() != net.n_nodes() || disc.n_states() != net.n_states() {
        return Err(Error::InvalidInput(format!(
            "process {process} does not match a {}-node network and {}-process discretization",
            net.n_nodes(),
            disc.n_processes()
        )));
    }
    let mass = joint(net)?.marginal(process);
    BinnedPdf::new(mass, disc.bin_width(process), 1)
}
