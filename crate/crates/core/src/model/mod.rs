//! Bayesian networks over binary variables with one decision tree per
//! variable as its conditional distribution.

mod dump;
mod learn;
mod sample;
mod score;
mod tree;

pub use dump::{load_model_dumps, parse_model_dumps, render_model_dumps, save_model_dumps, ModelDump, SplitRecord};
pub use learn::{learn_network, Learner, SplitChoice, SplitRejected};
pub use sample::{refit_parameters, sample_network};
pub use score::{bde_leaf_logscore, ln_factorial, ScoreParams};
pub use tree::{BayesNet, DecisionTree, NodeKind, TreeNode};

use std::collections::BTreeMap;

use crate::DistanceMatrix;

/// Split counts `s(d, j)`: splits in tree `j` on a variable at distance `d`
/// from `j`. Zero cells are not stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SplitHistogram {
    pub n: usize,
    pub cells: BTreeMap<(u16, usize), u32>,
}

impl SplitHistogram {
    pub fn get(&self, d: u16, j: usize) -> u32 {
        self.cells.get(&(d, j)).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u32 {
        self.cells.values().sum()
    }
}

/// Histogram of split distances by walking every tree's internal nodes.
pub fn model_split_histogram(net: &BayesNet, dmat: &DistanceMatrix) -> SplitHistogram {
    assert_eq!(net.n(), dmat.n(), "network and distance matrix differ in n");
    let mut cells = BTreeMap::new();
    for tree in net.trees() {
        let j = tree.target();
        for node in tree.nodes() {
            if let NodeKind::Split { var, .. } = node.kind {
                *cells.entry((dmat.get(var, j), j)).or_insert(0) += 1;
            }
        }
    }
    SplitHistogram { n: net.n(), cells }
}
