use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::bnlearn::{family_score, DagStructure, StateMatrix};
use crate::error::{Error, Result};

pub const EXHAUSTIVE_MAX_NODES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Best-improvement hill climbing over single-edge add/remove/reverse
    /// moves, starting from the empty graph.
    Greedy,
    /// Every labelled DAG; only for up to [`EXHAUSTIVE_MAX_NODES`] nodes.
    Exhaustive,
}

/// Scores closer than this (relative) are treated as ties.
const TIE_TOLERANCE: f64 = 1e-9;

fn ties(a: f64, b: f64) -> bool {
    libm::fabs(a - b) <= TIE_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

struct FamilyCache<'a> {
    states: &'a StateMatrix,
    scores: BTreeMap<(usize, u64), f64>,
}

impl<'a> FamilyCache<'a> {
    fn new(states: &'a StateMatrix) -> Self {
        Self { states, scores: BTreeMap::new() }
    }

    fn get(&mut self, node: usize, mask: u64) -> f64 {
        let states = self.states;
        *self.scores.entry((node, mask)).or_insert_with(|| family_score(node, mask, states))
    }

    fn total(&mut self, dag: &DagStructure) -> f64 {
        (0..dag.n_nodes()).map(|i| self.get(i, dag.parent_mask(i))).sum()
    }
}

pub fn learn_structure(states: &StateMatrix, mode: SearchMode) -> Result<DagStructure> {
    if states.n_records() < 2 {
        return Err(Error::InvalidInput("structure learning needs at least two records".into()));
    }
    match mode {
        SearchMode::Greedy => Ok(hill_climb(states)),
        SearchMode::Exhaustive => exhaustive(states),
    }
}

#[derive(Clone, Copy)]
enum Move {
    Add(usize, usize),
    Remove(usize, usize),
    Reverse(usize, usize),
}

fn hill_climb(states: &StateMatrix) -> DagStructure {
    let n = states.n_nodes();
    let mut cache = FamilyCache::new(states);
    let mut dag = DagStructure::empty(n);
    loop {
        let mut best: Option<(f64, Move)> = None;
        let mut consider = |delta: f64, mv: Move| {
            if delta > 0.0 && !ties(delta, 0.0) && best.is_none_or(|(d, _)| delta > d && !ties(delta, d)) {
                best = Some((delta, mv));
            }
        };
        for p in 0..n {
            for c in 0..n {
                if p == c {
                    continue;
                }
                let (pm, cm) = (dag.parent_mask(p), dag.parent_mask(c));
                if dag.has_edge(p, c) {
                    let without = cm & !(1 << p);
                    let removed = cache.get(c, without) - cache.get(c, cm);
                    consider(removed, Move::Remove(p, c));
                    let mut reversed = dag.clone();
                    if reversed.reverse_edge(p, c).is_ok() {
                        let gain = removed + cache.get(p, pm | 1 << c) - cache.get(p, pm);
                        consider(gain, Move::Reverse(p, c));
                    }
                } else if !dag.has_edge(c, p) && !dag.reaches(c, p) {
                    let gain = cache.get(c, cm | 1 << p) - cache.get(c, cm);
                    consider(gain, Move::Add(p, c));
                }
            }
        }
        let Some((_, mv)) = best else {
            return dag;
        };
        let applied = match mv {
            Move::Add(p, c) => dag.add_edge(p, c),
            Move::Remove(p, c) => dag.remove_edge(p, c),
            Move::Reverse(p, c) => dag.reverse_edge(p, c),
        };
        debug_assert!(applied.is_ok());
    }
}

fn exhaustive(states: &StateMatrix) -> Result<DagStructure> {
    let n = states.n_nodes();
    if n > EXHAUSTIVE_MAX_NODES {
        return Err(Error::ExhaustiveTooLarge { nodes: n });
    }
    let mut cache = FamilyCache::new(states);
    let mut best: Option<(f64, DagStructure)> = None;
    for dag in all_dags(n) {
        let s = cache.total(&dag);
        let better = match &best {
            None => true,
            Some((bs, bd)) if ties(s, *bs) => {
                (dag.n_edges(), dag.edges()) < (bd.n_edges(), bd.edges())
            }
            Some((bs, _)) => s > *bs,
        };
        if better {
            best = Some((s, dag));
        }
    }
    Ok(best.map(|(_, d)| d).expect("the empty graph is always enumerated"))
}

/// All labelled DAGs on `n` nodes (25 for three nodes, 543 for four).
pub(crate) fn all_dags(n: usize) -> Vec<DagStructure> {
    let per_node = 1u64 << (n - 1);
    let total = per_node.pow(n as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut rest = code;
        let masks = (0..n)
            .map(|node| {
                let bits = rest % per_node;
                rest /= per_node;
                // Spread n-1 bits over the other nodes' positions.
                let low = bits & ((1 << node) - 1);
                let high = (bits >> node) << (node + 1);
                low | high
            })
            .collect();
        if let Ok(dag) = DagStructure::from_parent_masks(masks) {
            out.push(dag);
        }
    }
    out
}
