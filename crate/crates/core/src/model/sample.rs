use rand::Rng;

use super::tree::BayesNet;
use crate::{RngStream, Solution};

/// Ancestral sampling in topological order of the parent graph.
pub fn sample_network(net: &BayesNet, count: usize, rng: &mut RngStream) -> Vec<Solution> {
    let order = net
        .topological_order()
        .expect("sampling requires an acyclic network");
    (0..count)
        .map(|_| {
            let mut bits = vec![0u8; net.n()];
            for &v in &order {
                let tree = net.tree(v);
                let p1 = tree.leaf_p1(tree.route(&bits));
                bits[v] = (rng.gen::<f64>() < p1) as u8;
            }
            Solution::new(bits)
        })
        .collect()
}

/// Keeps every tree's structure and recounts its leaves on `selected`.
pub fn refit_parameters(net: &BayesNet, selected: &[Solution]) -> BayesNet {
    let mut out = net.clone();
    for j in 0..out.n() {
        let tree = out.tree_mut(j);
        tree.clear_counts();
        for s in selected {
            let leaf = tree.route(s.bits());
            tree.counts_mut(leaf)[s.bits()[j] as usize] += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{learn_network, NodeKind, ScoreParams};

    #[test]
    fn empty_network_samples_uniform_bits() {
        let net = BayesNet::empty(6);
        let mut rng = RngStream::new(1);
        let samples = sample_network(&net, 100_000, &mut rng);
        for v in 0..6 {
            let ones = samples.iter().filter(|s| s.get(v)).count() as f64 / 1e5;
            assert!((ones - 0.5).abs() < 0.02, "position {v}: {ones}");
        }
    }

    #[test]
    fn copy_dependency_is_reproduced() {
        let mut rng = RngStream::new(2);
        let data: Vec<Solution> = (0..400)
            .map(|_| {
                let b = rng.gen_range(0..2);
                Solution::new(vec![b, b])
            })
            .collect();
        let mut net = BayesNet::empty(2);
        net.split(1, 0, 0).unwrap();
        let net = refit_parameters(&net, &data);
        let tree = net.tree(1);
        for leaf in tree.leaves() {
            assert!(tree.counts(leaf).iter().sum::<u32>() >= 100);
        }
        let samples = sample_network(&net, 50_000, &mut rng);
        let agree = samples.iter().filter(|s| s.get(0) == s.get(1)).count() as f64 / 5e4;
        assert!(agree >= 0.97, "agreement {agree}");
    }

    #[test]
    fn three_variable_joint_matches_factorization() {
        // 0 -> 1, (0, 1) -> 2, with hand-set leaf counts
        let mut net = BayesNet::empty(3);
        net.split(1, 0, 0).unwrap();
        let [a, b] = net.split(2, 0, 0).unwrap();
        net.split(2, b, 1).unwrap();
        let _ = a;
        let fill = |tree: &mut crate::model::DecisionTree, counts: &[[u32; 2]]| {
            let leaves: Vec<usize> = tree.leaves().collect();
            for (leaf, c) in leaves.into_iter().zip(counts) {
                *tree.counts_mut(leaf) = *c;
            }
        };
        fill(net.tree_mut(0), &[[30, 10]]);
        fill(net.tree_mut(1), &[[5, 15], [12, 3]]);
        fill(net.tree_mut(2), &[[1, 9], [7, 7], [2, 20]]);
        let mut rng = RngStream::new(3);
        let total = 200_000;
        let mut hist = [0usize; 8];
        for s in sample_network(&net, total, &mut rng) {
            let idx = (0..3).fold(0, |acc, v| acc | (s.bits()[v] as usize) << v);
            hist[idx] += 1;
        }
        let mut tv = 0.0;
        let mut mass = 0.0;
        for (idx, &h) in hist.iter().enumerate() {
            let bits: Vec<u8> = (0..3).map(|v| (idx >> v & 1) as u8).collect();
            // closed form: product of smoothed leaf probabilities
            let p0 = if bits[0] == 1 { 11.0 / 42.0 } else { 31.0 / 42.0 };
            let p1_one = if bits[0] == 0 { 16.0 / 22.0 } else { 4.0 / 17.0 };
            let p1 = if bits[1] == 1 { p1_one } else { 1.0 - p1_one };
            let p2_one = match (bits[0], bits[1]) {
                (0, _) => 10.0 / 12.0,
                (1, 0) => 8.0 / 16.0,
                _ => 21.0 / 24.0,
            };
            let p2 = if bits[2] == 1 { p2_one } else { 1.0 - p2_one };
            let exact = p0 * p1 * p2;
            assert!((exact - net.probability(&bits)).abs() < 1e-12);
            mass += exact;
            tv += (h as f64 / total as f64 - exact).abs();
        }
        assert!((mass - 1.0).abs() < 1e-12);
        assert!(tv / 2.0 < 0.01, "total variation {}", tv / 2.0);
    }

    fn random_rows(rng: &mut RngStream, n: usize, count: usize) -> Vec<Solution> {
        (0..count)
            .map(|_| {
                let mut v: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
                v[1] = v[0] ^ rng.gen_bool(0.05) as u8;
                v[3] = v[2] & v[1];
                Solution::new(v)
            })
            .collect()
    }

    #[test]
    fn refit_on_training_set_is_identity() {
        let mut rng = RngStream::new(4);
        let data = random_rows(&mut rng, 6, 300);
        let net = learn_network(&data, ScoreParams::for_training_size(300), None);
        assert_eq!(refit_parameters(&net, &data), net);
    }

    #[test]
    fn refit_on_zeros() {
        let mut rng = RngStream::new(5);
        let data = random_rows(&mut rng, 6, 300);
        let net = learn_network(&data, ScoreParams::for_training_size(300), None);
        let zeros = vec![Solution::zeros(6); 50];
        let refit = refit_parameters(&net, &zeros);
        for t in refit.trees() {
            for leaf in t.leaves() {
                assert_eq!(t.counts(leaf)[1], 0);
            }
        }
    }

    #[test]
    fn refit_matches_row_routing_oracle() {
        let mut rng = RngStream::new(6);
        let data = random_rows(&mut rng, 6, 300);
        let net = learn_network(&data, ScoreParams::for_training_size(300), None);
        let fresh = random_rows(&mut rng, 6, 177);
        let refit = refit_parameters(&net, &fresh);
        for t in refit.trees() {
            for leaf in t.leaves() {
                // oracle: a row reaches the leaf iff it matches every split on the path
                let mut constraints = Vec::new();
                let mut cur = leaf;
                while let Some(p) = t.node(cur).parent {
                    if let NodeKind::Split { var, children } = t.node(p).kind {
                        constraints.push((var, if children[0] == cur { 0 } else { 1 }));
                    }
                    cur = p;
                }
                let mut expect = [0u32; 2];
                for s in &fresh {
                    if constraints.iter().all(|&(v, b)| s.bits()[v] == b) {
                        expect[s.bits()[t.target()] as usize] += 1;
                    }
                }
                assert_eq!(t.counts(leaf), expect);
            }
        }
    }

    #[test]
    fn sample_then_refit_recovers_probabilities() {
        let mut rng = RngStream::new(7);
        let data = random_rows(&mut rng, 5, 400);
        let net = learn_network(&data, ScoreParams::for_training_size(400), None);
        let samples = sample_network(&net, 100_000, &mut rng);
        let refit = refit_parameters(&net, &samples);
        for (t, r) in net.trees().iter().zip(refit.trees()) {
            for leaf in t.leaves() {
                if r.counts(leaf).iter().sum::<u32>() < 2000 {
                    continue;
                }
                assert!((t.leaf_p1(leaf) - r.leaf_p1(leaf)).abs() < 0.02);
            }
        }
    }
}
