use super::dump::SplitRecord;
use super::score::{bde_leaf_logscore, ScoreParams};
use super::tree::BayesNet;
use crate::bias::BiasContext;
use crate::Solution;

/// Why a candidate split cannot be scored.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitRejected {
    NotALeaf,
    OwnTarget,
    OnPath,
    Cycle,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitChoice {
    pub target: usize,
    pub leaf: usize,
    pub var: usize,
    pub gain: f64,
}

impl SplitChoice {
    // greedy preference: larger gain, then lowest (target, var, leaf)
    fn beats(&self, other: &SplitChoice) -> bool {
        self.gain > other.gain
            || (self.gain == other.gain
                && (self.target, self.var, self.leaf) < (other.target, other.var, other.leaf))
    }
}

struct LeafState {
    rows: Vec<u32>,
    // BDe log-score change of splitting on each variable; -inf if illegal
    raw_gain: Vec<f64>,
}

/// Greedy decision-tree network learner.
///
/// Every leaf caches the BDe change of splitting on each variable, computed
/// once from the rows that reach it. Penalty and distance-bias terms only
/// depend on the tree being split, so a candidate's full gain is assembled in
/// constant time when the best split is chosen. Reachability in the parent
/// graph is maintained incrementally as bitsets.
pub struct Learner<'a> {
    rows: Vec<&'a [u8]>,
    params: ScoreParams,
    bias: Option<BiasContext<'a>>,
    net: BayesNet,
    leaves: Vec<Vec<Option<LeafState>>>,
    // reach[a] has bit b set iff a directed path a -> ... -> b exists
    reach: Vec<Vec<u64>>,
    // splits in tree j on variables at distance d: dist_splits[j][d]
    dist_splits: Vec<Vec<u32>>,
    tree_best: Vec<Option<SplitChoice>>,
}

fn has(bits: &[u64], i: usize) -> bool {
    bits[i / 64] >> (i % 64) & 1 == 1
}

fn set(bits: &mut [u64], i: usize) {
    bits[i / 64] |= 1 << (i % 64);
}

impl<'a> Learner<'a> {
    pub fn new(selected: &'a [Solution], params: ScoreParams, bias: Option<BiasContext<'a>>) -> Self {
        assert!(!selected.is_empty(), "cannot learn a model from no data");
        let n = selected[0].len();
        let rows: Vec<&[u8]> = selected.iter().map(|s| s.bits()).collect();
        assert!(rows.iter().all(|r| r.len() == n), "rows differ in length");
        let bias = bias.filter(|b| b.kappa != 0.0);
        if let Some(b) = &bias {
            assert_eq!(b.distances.n(), n, "distance matrix does not match data");
        }
        let words = n.div_ceil(64);
        let mut learner = Self {
            rows,
            params,
            bias,
            net: BayesNet::empty(n),
            leaves: (0..n).map(|_| Vec::new()).collect(),
            reach: vec![vec![0; words]; n],
            dist_splits: vec![vec![0; n + 1]; n],
            tree_best: vec![None; n],
        };
        let all: Vec<u32> = (0..learner.rows.len() as u32).collect();
        for j in 0..n {
            let state = learner.leaf_state(j, 0, all.clone());
            learner.leaves[j].push(Some(state));
            learner.refresh_tree(j);
        }
        learner
    }

    pub fn n(&self) -> usize {
        self.net.n()
    }

    pub fn network(&self) -> &BayesNet {
        &self.net
    }

    pub fn into_network(self) -> BayesNet {
        self.net
    }

    fn leaf_state(&mut self, j: usize, leaf: usize, rows: Vec<u32>) -> LeafState {
        let n = self.n();
        let mut counts = vec![[0u32; 4]; n];
        let mut target = [0u32; 2];
        for &r in &rows {
            let row = self.rows[r as usize];
            let bj = row[j] as usize;
            target[bj] += 1;
            for (c, &b) in counts.iter_mut().zip(row) {
                c[2 * b as usize + bj] += 1;
            }
        }
        *self.net.tree_mut(j).counts_mut(leaf) = target;
        let base = bde_leaf_logscore(target[0], target[1]);
        let path = self.net.tree(j).path_vars(leaf);
        let raw_gain = counts
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if i == j || path.contains(&i) {
                    f64::NEG_INFINITY
                } else {
                    bde_leaf_logscore(c[0], c[1]) + bde_leaf_logscore(c[2], c[3]) - base
                }
            })
            .collect();
        LeafState { rows, raw_gain }
    }

    fn prior_term(&self, j: usize, i: usize) -> f64 {
        let mut term = -self.params.penalty;
        if let Some(b) = &self.bias {
            let d = b.distances.get(i, j);
            term += b.term(j, d, self.dist_splits[j][d as usize]);
        }
        term
    }

    fn legal(&self, j: usize, i: usize) -> bool {
        // adding i -> j is safe unless j already reaches i
        !has(&self.reach[j], i)
    }

    /// Full gain of splitting `leaf` of tree `j` on variable `i`: BDe change
    /// minus the complexity penalty plus the κ-scaled log prior of the bias.
    pub fn split_gain(&self, j: usize, leaf: usize, i: usize) -> Result<f64, SplitRejected> {
        let state = self
            .leaves
            .get(j)
            .and_then(|t| t.get(leaf))
            .and_then(|s| s.as_ref())
            .ok_or(SplitRejected::NotALeaf)?;
        if i == j {
            return Err(SplitRejected::OwnTarget);
        }
        if state.raw_gain[i] == f64::NEG_INFINITY {
            return Err(SplitRejected::OnPath);
        }
        if !self.legal(j, i) {
            return Err(SplitRejected::Cycle);
        }
        Ok(state.raw_gain[i] + self.prior_term(j, i))
    }

    fn refresh_tree(&mut self, j: usize) {
        let n = self.n();
        let prior: Vec<f64> = (0..n).map(|i| self.prior_term(j, i)).collect();
        let mut best: Option<SplitChoice> = None;
        for (leaf, state) in self.leaves[j].iter().enumerate() {
            let Some(state) = state else { continue };
            for i in 0..n {
                let raw = state.raw_gain[i];
                if raw == f64::NEG_INFINITY || !self.legal(j, i) {
                    continue;
                }
                let cand = SplitChoice {
                    target: j,
                    leaf,
                    var: i,
                    gain: raw + prior[i],
                };
                if best.as_ref().is_none_or(|b| cand.beats(b)) {
                    best = Some(cand);
                }
            }
        }
        self.tree_best[j] = best;
    }

    /// Best legal split over all trees, if its gain is positive.
    pub fn best_split(&self) -> Option<SplitChoice> {
        let mut best: Option<SplitChoice> = None;
        for cand in self.tree_best.iter().flatten() {
            if best.as_ref().is_none_or(|b| cand.beats(b)) {
                best = Some(*cand);
            }
        }
        best.filter(|b| b.gain > 0.0)
    }

    /// Executes a split. Panics if it is not legal.
    pub fn apply(&mut self, choice: SplitChoice) {
        let SplitChoice { target: j, leaf, var: i, .. } = choice;
        assert!(self.split_gain(j, leaf, i).is_ok(), "illegal split {choice:?}");
        let state = self.leaves[j][leaf].take().unwrap();
        let new_parent = !self.net.tree(j).split_vars().contains(&i);
        let depth = self.net.tree(j).node(leaf).depth;
        let kids = self.net.tree_mut(j).split_leaf(leaf, i).unwrap();
        self.net.record(SplitRecord { target: j, var: i, depth });
        let (zero, one): (Vec<u32>, Vec<u32>) = state
            .rows
            .iter()
            .partition(|&&r| self.rows[r as usize][i] == 0);
        self.leaves[j].resize_with(kids[1] + 1, || None);
        let s0 = self.leaf_state(j, kids[0], zero);
        let s1 = self.leaf_state(j, kids[1], one);
        self.leaves[j][kids[0]] = Some(s0);
        self.leaves[j][kids[1]] = Some(s1);

        if let Some(b) = &self.bias {
            self.dist_splits[j][b.distances.get(i, j) as usize] += 1;
        }
        if new_parent {
            let mut add = self.reach[j].clone();
            set(&mut add, j);
            for a in 0..self.n() {
                if a == i || has(&self.reach[a], i) {
                    for (w, x) in self.reach[a].iter_mut().zip(&add) {
                        *w |= x;
                    }
                }
            }
            // cached bests that just became cycle-forming need a rescan
            for t in 0..self.n() {
                if t != j && self.tree_best[t].is_some_and(|b| !self.legal(t, b.var)) {
                    self.refresh_tree(t);
                }
            }
        }
        self.refresh_tree(j);
    }

    /// Runs greedy splitting until no positive-gain split remains.
    pub fn run(mut self) -> BayesNet {
        while let Some(choice) = self.best_split() {
            self.apply(choice);
        }
        self.net
    }
}

/// Greedy model building: start from single-leaf trees and keep executing
/// the best positive-gain split.
pub fn learn_network(
    selected: &[Solution],
    params: ScoreParams,
    bias: Option<BiasContext<'_>>,
) -> BayesNet {
    Learner::new(selected, params, bias).run()
}
