use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Directed acyclic graph on up to 64 nodes; parent sets are bit masks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DagStructure {
    parents: Vec<u64>,
}

impl DagStructure {
    pub fn empty(n_nodes: usize) -> Self {
        assert!(n_nodes <= 64, "at most 64 nodes");
        Self { parents: vec![0; n_nodes] }
    }

    pub fn from_edges(n_nodes: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n_nodes == 0 || n_nodes > 64 {
            return Err(Error::InvalidInput(format!("{n_nodes} nodes; supported range is 1..=64")));
        }
        let mut dag = Self::empty(n_nodes);
        for &(p, c) in edges {
            dag.add_edge(p, c)?;
        }
        Ok(dag)
    }

    /// Every node's parent mask; fails if the masks describe a cycle.
    pub fn from_parent_masks(parents: Vec<u64>) -> Result<Self> {
        let dag = Self { parents };
        if dag.topological_order().is_none() {
            return Err(Error::Cyclic);
        }
        Ok(dag)
    }

    pub fn n_nodes(&self) -> usize {
        self.parents.len()
    }

    pub fn parent_mask(&self, node: usize) -> u64 {
        self.parents[node]
    }

    /// Parents in ascending order.
    pub fn parents(&self, node: usize) -> impl Iterator<Item = usize> {
        let mask = self.parents[node];
        (0..64).filter(move |b| mask >> b & 1 == 1)
    }

    pub fn has_edge(&self, parent: usize, child: usize) -> bool {
        self.parents[child] >> parent & 1 == 1
    }

    pub fn n_edges(&self) -> usize {
        self.parents.iter().map(|m| m.count_ones() as usize).sum()
    }

    /// Edges sorted by `(parent, child)`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n_nodes();
        let mut out = Vec::new();
        for p in 0..n {
            for c in 0..n {
                if self.has_edge(p, c) {
                    out.push((p, c));
                }
            }
        }
        out
    }

    fn check_nodes(&self, a: usize, b: usize) -> Result<()> {
        let n = self.n_nodes();
        if a >= n || b >= n || a == b {
            return Err(Error::InvalidInput(format!("invalid edge ({a}, {b}) for {n} nodes")));
        }
        Ok(())
    }

    /// Whether `to` is reachable from `from` along directed edges.
    pub fn reaches(&self, from: usize, to: usize) -> bool {
        let n = self.n_nodes();
        let mut seen = vec![false; n];
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            if core::mem::replace(&mut seen[v], true) {
                continue;
            }
            stack.extend((0..n).filter(|c| self.has_edge(v, *c) && !seen[*c]));
        }
        false
    }

    pub fn add_edge(&mut self, parent: usize, child: usize) -> Result<()> {
        self.check_nodes(parent, child)?;
        if self.reaches(child, parent) {
            return Err(Error::Cyclic);
        }
        self.parents[child] |= 1 << parent;
        Ok(())
    }

    pub fn remove_edge(&mut self, parent: usize, child: usize) -> Result<()> {
        self.check_nodes(parent, child)?;
        if !self.has_edge(parent, child) {
            return Err(Error::InvalidInput(format!("no edge {parent} -> {child}")));
        }
        self.parents[child] &= !(1 << parent);
        Ok(())
    }

    /// Replaces `parent -> child` by `child -> parent`, rolling back on a cycle.
    pub fn reverse_edge(&mut self, parent: usize, child: usize) -> Result<()> {
        self.remove_edge(parent, child)?;
        if let Err(e) = self.add_edge(child, parent) {
            self.parents[child] |= 1 << parent;
            return Err(e);
        }
        Ok(())
    }

    /// Kahn's algorithm; `None` if a cycle exists.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.n_nodes();
        let mut remaining: Vec<u64> = self.parents.clone();
        let mut placed = 0u64;
        let mut order = Vec::with_capacity(n);
        while order.len() < n {
            let next = (0..n).find(|v| placed >> v & 1 == 0 && remaining[*v] == 0)?;
            order.push(next);
            placed |= 1 << next;
            for m in remaining.iter_mut() {
                *m &= !(1 << next);
            }
        }
        Some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }
}
