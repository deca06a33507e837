use crate::bnlearn::{DagStructure, StateMatrix};

/// BIC contribution of one node given a parent mask: maximized
/// log-likelihood under MLE frequencies minus `ln(R)/2` per free parameter.
pub fn family_score(node: usize, parent_mask: u64, states: &StateMatrix) -> f64 {
    let n = states.n_states();
    let parents: alloc::vec::Vec<usize> = (0..64).filter(|b| parent_mask >> b & 1 == 1).collect();
    let n_configs = n.pow(parents.len() as u32);
    let mut counts = alloc::vec![0u32; n_configs * n];
    for rec in states.records() {
        let config = parents.iter().fold(0, |acc, p| acc * n + usize::from(rec[*p]));
        counts[config * n + usize::from(rec[node])] += 1;
    }
    let mut loglik = 0.0;
    for row in counts.chunks_exact(n) {
        let total: u32 = row.iter().sum();
        if total == 0 {
            continue;
        }
        let total = f64::from(total);
        for &c in row.iter().filter(|c| **c > 0) {
            let c = f64::from(c);
            loglik += c * libm::log(c / total);
        }
    }
    let free = ((n - 1) * n_configs) as f64;
    loglik - 0.5 * libm::log(states.n_records() as f64) * free
}

/// Decomposable BIC score of a structure.
pub fn score(structure: &DagStructure, states: &StateMatrix) -> f64 {
    (0..structure.n_nodes())
        .map(|i| family_score(i, structure.parent_mask(i), states))
        .sum()
}
