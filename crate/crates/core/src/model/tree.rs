use std::collections::BTreeSet;

use super::dump::{ModelDump, SplitRecord};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeKind {
    /// Counts of target value 0 and 1 among rows reaching the leaf.
    Leaf { counts: [u32; 2] },
    /// `children[b]` handles rows where `var` has value `b`.
    Split { var: usize, children: [usize; 2] },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    pub kind: NodeKind,
    pub parent: Option<usize>,
    pub depth: usize,
}

/// Conditional distribution of one target variable; node 0 is the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecisionTree {
    target: usize,
    nodes: Vec<TreeNode>,
}

impl DecisionTree {
    pub fn new(target: usize) -> Self {
        Self {
            target,
            nodes: vec![TreeNode {
                kind: NodeKind::Leaf { counts: [0, 0] },
                parent: None,
                depth: 0,
            }],
        }
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| matches!(n.kind, NodeKind::Leaf { .. }))
            .map(|(i, _)| i)
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().count()
    }

    pub fn split_count(&self) -> usize {
        self.nodes.len() - self.leaf_count()
    }

    pub fn is_leaf(&self, id: usize) -> bool {
        matches!(self.nodes[id].kind, NodeKind::Leaf { .. })
    }

    pub fn counts(&self, leaf: usize) -> [u32; 2] {
        match self.nodes[leaf].kind {
            NodeKind::Leaf { counts } => counts,
            NodeKind::Split { .. } => panic!("node {leaf} is not a leaf"),
        }
    }

    pub(crate) fn counts_mut(&mut self, leaf: usize) -> &mut [u32; 2] {
        match &mut self.nodes[leaf].kind {
            NodeKind::Leaf { counts } => counts,
            NodeKind::Split { .. } => panic!("node {leaf} is not a leaf"),
        }
    }

    /// Split variables on the path from the root to `id`, root first.
    pub fn path_vars(&self, id: usize) -> Vec<usize> {
        let mut vars = Vec::new();
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            if let NodeKind::Split { var, .. } = self.nodes[p].kind {
                vars.push(var);
            }
            cur = p;
        }
        vars.reverse();
        vars
    }

    /// Distinct split variables; the parents of the target in the network.
    pub fn split_vars(&self) -> BTreeSet<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n.kind {
                NodeKind::Split { var, .. } => Some(var),
                NodeKind::Leaf { .. } => None,
            })
            .collect()
    }

    /// Leaf reached by an assignment. Only the split variables are read.
    pub fn route(&self, bits: &[u8]) -> usize {
        let mut cur = 0;
        while let NodeKind::Split { var, children } = self.nodes[cur].kind {
            cur = children[bits[var] as usize];
        }
        cur
    }

    /// Replaces a leaf by a split with two empty leaves; returns their ids.
    pub fn split_leaf(&mut self, leaf: usize, var: usize) -> Result<[usize; 2]> {
        if !self.is_leaf(leaf) {
            return Err(Error::invalid(format!("node {leaf} is not a leaf")));
        }
        if var == self.target {
            return Err(Error::invalid("a tree cannot split on its own target"));
        }
        if self.path_vars(leaf).contains(&var) {
            return Err(Error::invalid(format!("variable {var} already on the path")));
        }
        let depth = self.nodes[leaf].depth + 1;
        let first = self.nodes.len();
        for _ in 0..2 {
            self.nodes.push(TreeNode {
                kind: NodeKind::Leaf { counts: [0, 0] },
                parent: Some(leaf),
                depth,
            });
        }
        self.nodes[leaf].kind = NodeKind::Split {
            var,
            children: [first, first + 1],
        };
        Ok([first, first + 1])
    }

    pub(crate) fn clear_counts(&mut self) {
        for node in &mut self.nodes {
            if let NodeKind::Leaf { counts } = &mut node.kind {
                *counts = [0, 0];
            }
        }
    }

    /// Smoothed probability that the target is 1 at `leaf`.
    pub fn leaf_p1(&self, leaf: usize) -> f64 {
        let [m0, m1] = self.counts(leaf);
        (m1 as f64 + 1.0) / (m0 as f64 + m1 as f64 + 2.0)
    }
}

/// A network of decision trees, one per variable, plus the order in which
/// splits were made.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BayesNet {
    trees: Vec<DecisionTree>,
    history: Vec<SplitRecord>,
}

impl BayesNet {
    pub fn empty(n: usize) -> Self {
        Self {
            trees: (0..n).map(DecisionTree::new).collect(),
            history: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.trees.len()
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn tree(&self, j: usize) -> &DecisionTree {
        &self.trees[j]
    }

    pub(crate) fn tree_mut(&mut self, j: usize) -> &mut DecisionTree {
        &mut self.trees[j]
    }

    pub fn history(&self) -> &[SplitRecord] {
        &self.history
    }

    pub fn split_count(&self) -> usize {
        self.history.len()
    }

    /// Splits leaf `leaf` of tree `j` on `var`, refusing splits that would
    /// make the parent graph cyclic.
    pub fn split(&mut self, j: usize, leaf: usize, var: usize) -> Result<[usize; 2]> {
        if var >= self.n() {
            return Err(Error::invalid(format!("variable {var} out of range")));
        }
        if !self.trees[j].split_vars().contains(&var) && self.reaches(j, var) {
            return Err(Error::invalid(format!("edge {var} -> {j} would close a cycle")));
        }
        let depth = self.trees[j].node(leaf).depth;
        let kids = self.trees[j].split_leaf(leaf, var)?;
        self.history.push(SplitRecord {
            target: j,
            var,
            depth,
        });
        Ok(kids)
    }

    pub(crate) fn record(&mut self, rec: SplitRecord) {
        self.history.push(rec);
    }

    /// Parents of each variable: the variables its tree splits on.
    pub fn parents(&self) -> Vec<BTreeSet<usize>> {
        self.trees.iter().map(|t| t.split_vars()).collect()
    }

    /// Whether a directed path `from -> ... -> to` exists in the parent graph.
    pub fn reaches(&self, from: usize, to: usize) -> bool {
        let parents = self.parents();
        let mut children = vec![Vec::new(); self.n()];
        for (j, ps) in parents.iter().enumerate() {
            for &p in ps {
                children[p].push(j);
            }
        }
        let mut seen = vec![false; self.n()];
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            for &c in &children[v] {
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        false
    }

    /// Topological order of the parent graph, or `None` if it has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let parents = self.parents();
        let n = self.n();
        let mut indeg: Vec<usize> = parents.iter().map(|p| p.len()).collect();
        let mut children = vec![Vec::new(); n];
        for (j, ps) in parents.iter().enumerate() {
            for &p in ps {
                children[p].push(j);
            }
        }
        let mut ready: Vec<usize> = (0..n).rev().filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop() {
            order.push(v);
            for &c in children[v].iter().rev() {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.push(c);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    pub fn dump(&self) -> ModelDump {
        ModelDump {
            n: self.n(),
            splits: self.history.clone(),
        }
    }

    /// Probability of a full assignment under the factorized distribution.
    pub fn probability(&self, bits: &[u8]) -> f64 {
        self.trees
            .iter()
            .map(|t| {
                let p1 = t.leaf_p1(t.route(bits));
                if bits[t.target()] == 1 {
                    p1
                } else {
                    1.0 - p1
                }
            })
            .product()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_bookkeeping() {
        let mut t = DecisionTree::new(0);
        let [a, b] = t.split_leaf(0, 2).unwrap();
        assert_eq!(t.path_vars(a), vec![2]);
        let [c, _] = t.split_leaf(b, 1).unwrap();
        assert_eq!(t.path_vars(c), vec![2, 1]);
        assert_eq!(t.node(c).depth, 2);
        assert!(t.split_leaf(c, 2).is_err());
        assert!(t.split_leaf(c, 0).is_err());
        assert!(t.split_leaf(0, 3).is_err());
        assert_eq!(t.leaf_count(), 3);
        assert_eq!(t.split_count(), 2);
        assert_eq!(t.route(&[0, 0, 1, 0]), c);
        assert_eq!(t.route(&[0, 0, 0, 0]), a);
    }

    #[test]
    fn cycles_are_refused() {
        let mut net = BayesNet::empty(3);
        net.split(1, 0, 0).unwrap(); // 0 -> 1
        net.split(2, 0, 1).unwrap(); // 1 -> 2
        assert!(net.split(0, 0, 2).is_err()); // 2 -> 0 closes the cycle
        assert!(net.is_acyclic());
        assert_eq!(net.topological_order().unwrap(), vec![0, 1, 2]);
        assert_eq!(net.history().len(), 2);
    }
}
