//! Variable distances derived from the structure of an ADF.
//!
//! Two variables are adjacent when some subfunction reads both of them. The
//! distance between variables is the shortest-path edge count in that graph,
//! or `n` when no path exists.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::AdfSpec;

/// Undirected interaction graph of an ADF; neighbor lists are sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InteractionGraph {
    adjacency: Vec<Vec<usize>>,
}

impl InteractionGraph {
    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Edges `(a, b)` with `a < b`, ascending.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, nb)| nb.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
            .collect()
    }
}

pub fn build_interaction_graph(adf: &AdfSpec) -> InteractionGraph {
    let mut adjacency = vec![Vec::new(); adf.n()];
    for vars in adf.subsets() {
        for (k, &a) in vars.iter().enumerate() {
            for &b in &vars[k + 1..] {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
    }
    for nb in &mut adjacency {
        nb.sort_unstable();
        nb.dedup();
    }
    InteractionGraph { adjacency }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<u16>,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u16 {
        self.d[i * self.n + j]
    }

    /// The value used for unconnected pairs.
    pub fn disconnected(&self) -> u16 {
        self.n as u16
    }

    pub fn row(&self, i: usize) -> &[u16] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    /// Lower-triangular dump: line `i` lists `d[i][0..i]`.
    pub fn to_triangular_text(&self) -> String {
        let mut out = format!("distances {}\n", self.n);
        for i in 1..self.n {
            let row: Vec<String> = self.row(i)[..i].iter().map(|d| d.to_string()).collect();
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
        out
    }
}

pub fn compute_distance_matrix(adf: &AdfSpec) -> DistanceMatrix {
    distances(&build_interaction_graph(adf))
}

/// All-pairs distances by one breadth-first search per variable.
pub fn distances(graph: &InteractionGraph) -> DistanceMatrix {
    let n = graph.n();
    assert!(n <= u16::MAX as usize, "distance matrix limited to 65535 variables");
    let unreached = n as u16;
    let mut d = vec![unreached; n * n];
    let mut queue = VecDeque::new();
    for src in 0..n {
        let row = &mut d[src * n..(src + 1) * n];
        row[src] = 0;
        queue.clear();
        queue.push_back(src);
        while let Some(v) = queue.pop_front() {
            let next = row[v] + 1;
            for &u in graph.neighbors(v) {
                if row[u] == unreached && u != src {
                    row[u] = next;
                    queue.push_back(u);
                }
            }
        }
    }
    DistanceMatrix { n, d }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{RngStream, Subfunction};
    use proptest::prelude::*;
    use rand::Rng;

    fn adf(n: usize, subsets: &[&[usize]]) -> AdfSpec {
        let terms = subsets
            .iter()
            .map(|s| Subfunction::new(s.to_vec(), vec![0.0; 1 << s.len()]).unwrap())
            .collect();
        AdfSpec::new(n, terms).unwrap()
    }

    #[test]
    fn triangle_from_one_subset() {
        let g = build_interaction_graph(&adf(3, &[&[0, 1, 2]]));
        assert_eq!(g.edges(), vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn path_from_pairs() {
        let g = build_interaction_graph(&adf(3, &[&[0, 1], &[1, 2]]));
        assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn random_subsets_match_pair_enumeration() {
        let mut rng = RngStream::new(7);
        for _ in 0..30 {
            let n = rng.gen_range(2..12);
            let subsets: Vec<Vec<usize>> = (0..rng.gen_range(1..8))
                .map(|_| {
                    let k = rng.gen_range(1..=n.min(4));
                    rand::seq::index::sample(&mut rng, n, k).into_vec()
                })
                .collect();
            let refs: Vec<&[usize]> = subsets.iter().map(|s| s.as_slice()).collect();
            let g = build_interaction_graph(&adf(n, &refs));
            for a in 0..n {
                for b in 0..n {
                    let expect = a != b && subsets.iter().any(|s| s.contains(&a) && s.contains(&b));
                    assert_eq!(g.has_edge(a, b), expect);
                }
            }
        }
    }

    #[test]
    fn chain_distance() {
        let dm = compute_distance_matrix(&adf(4, &[&[0, 1], &[1, 2], &[2, 3]]));
        assert_eq!(dm.get(0, 3), 3);
        assert_eq!(dm.get(3, 0), 3);
    }

    #[test]
    fn disconnected_is_n() {
        let dm = compute_distance_matrix(&adf(4, &[&[0, 1]]));
        assert_eq!(dm.get(0, 2), 4);
        assert_eq!(dm.get(2, 3), 4);
        assert_eq!(dm.get(0, 1), 1);
    }

    #[test]
    fn triangular_dump() {
        let dm = compute_distance_matrix(&adf(3, &[&[0, 1], &[1, 2]]));
        assert_eq!(dm.to_triangular_text(), "distances 3\n1\n2 1\n");
    }

    fn arb_subsets() -> impl Strategy<Value = (usize, Vec<Vec<usize>>)> {
        (2usize..10).prop_flat_map(|n| {
            let subset = proptest::collection::btree_set(0..n, 1..=3)
                .prop_map(|s| s.into_iter().collect::<Vec<_>>());
            (Just(n), proptest::collection::vec(subset, 1..8))
        })
    }

    proptest! {
        #[test]
        fn metric_properties((n, subsets) in arb_subsets()) {
            let refs: Vec<&[usize]> = subsets.iter().map(|s| s.as_slice()).collect();
            let dm = compute_distance_matrix(&adf(n, &refs));
            for i in 0..n {
                prop_assert_eq!(dm.get(i, i), 0);
                for j in 0..n {
                    prop_assert_eq!(dm.get(i, j), dm.get(j, i));
                    if i != j {
                        prop_assert!(dm.get(i, j) >= 1);
                    }
                    for k in 0..n {
                        let (a, b, c) = (dm.get(i, j), dm.get(j, k), dm.get(i, k));
                        if a < n as u16 && b < n as u16 {
                            prop_assert!(c <= a + b);
                        }
                    }
                }
            }
            for s in &subsets {
                for &a in s {
                    for &b in s {
                        if a != b {
                            prop_assert_eq!(dm.get(a, b), 1);
                        }
                    }
                }
            }
        }

        #[test]
        fn adding_a_subset_never_increases_distance(
            (n, subsets) in arb_subsets(),
            extra in proptest::collection::btree_set(0usize..10, 1..=3),
        ) {
            let extra: Vec<usize> = extra.into_iter().filter(|&v| v < n).collect();
            prop_assume!(!extra.is_empty());
            let refs: Vec<&[usize]> = subsets.iter().map(|s| s.as_slice()).collect();
            let before = compute_distance_matrix(&adf(n, &refs));
            let mut more = refs.clone();
            more.push(&extra);
            let after = compute_distance_matrix(&adf(n, &more));
            for i in 0..n {
                for j in 0..n {
                    prop_assert!(after.get(i, j) <= before.get(i, j));
                }
            }
        }
    }
}
