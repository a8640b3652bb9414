use rand::seq::SliceRandom;
use rand::Rng;

use crate::{AdfSpec, Error, Result, RngStream, Solution, Subfunction};

/// Undirected simple graph for minimum vertex cover. Edges are stored as
/// sorted `(u, v)` pairs with `u < v`, in ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexCoverInstance {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl VertexCoverInstance {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("graph with no vertices"));
        }
        let mut list = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!("edge ({u}, {v}) outside 0..{n}")));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at {u}")));
            }
            list.push((u.min(v), u.max(v)));
        }
        list.sort_unstable();
        let before = list.len();
        list.dedup();
        if list.len() != before {
            return Err(Error::invalid("duplicate edge"));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &list {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        Ok(Self {
            n,
            edges: list,
            adjacency,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    /// Edges-to-vertices ratio.
    pub fn ratio(&self) -> f64 {
        self.edges.len() as f64 / self.n as f64
    }

    pub fn is_cover(&self, bits: &[u8]) -> bool {
        self.edges.iter().all(|&(u, v)| bits[u] == 1 || bits[v] == 1)
    }

    /// True when no vertex can be dropped without uncovering an edge.
    pub fn is_minimal_cover(&self, bits: &[u8]) -> bool {
        self.is_cover(bits)
            && (0..self.n).all(|v| {
                bits[v] == 0 || self.adjacency[v].iter().any(|&u| bits[u] == 0)
            })
    }

    /// ADF view: `-x_v` per vertex plus a penalty of `-(n + 1)` per
    /// uncovered edge. On feasible covers this is `-(cover size)`.
    pub fn to_adf(&self) -> AdfSpec {
        let penalty = -(self.n as f64 + 1.0);
        let mut terms: Vec<Subfunction> = (0..self.n)
            .map(|v| Subfunction::new(vec![v], vec![0.0, -1.0]).unwrap())
            .collect();
        terms.extend(
            self.edges
                .iter()
                .map(|&(u, v)| Subfunction::new(vec![u, v], vec![penalty, 0.0, 0.0, 0.0]).unwrap()),
        );
        AdfSpec::new(self.n, terms).unwrap()
    }
}

/// Random graph with `round(c * n)` distinct edges drawn uniformly without
/// replacement from all vertex pairs.
pub fn gen_mvc(n: usize, c: f64, rng: &mut RngStream) -> Result<VertexCoverInstance> {
    if n == 0 || !c.is_finite() || c < 0.0 {
        return Err(Error::invalid(format!("bad graph parameters n={n}, c={c}")));
    }
    let m = (c * n as f64).round() as usize;
    let pairs = n * (n - 1) / 2;
    if m > pairs {
        return Err(Error::invalid(format!(
            "{m} edges requested but only {pairs} vertex pairs exist"
        )));
    }
    let edges = rand::seq::index::sample(rng, pairs, m)
        .into_iter()
        .map(|p| pair_from_index(n, p));
    VertexCoverInstance::new(n, edges)
}

// Row-major enumeration of pairs (u, v), u < v.
fn pair_from_index(n: usize, mut p: usize) -> (usize, usize) {
    let mut u = 0;
    loop {
        let row = n - 1 - u;
        if p < row {
            return (u, u + 1 + p);
        }
        p -= row;
        u += 1;
    }
}

/// Turns any bit string into a feasible, inclusion-minimal cover.
///
/// Uncovered edges are repaired in random order by adding a random endpoint;
/// then vertices are visited in random order and dropped when all their
/// neighbors are in the cover. The result carries fitness `-(cover size)`.
pub fn repair_cover(
    inst: &VertexCoverInstance,
    s: &Solution,
    rng: &mut RngStream,
) -> Result<Solution> {
    if s.len() != inst.n {
        return Err(Error::invalid(format!(
            "solution of length {} for graph on {} vertices",
            s.len(),
            inst.n
        )));
    }
    let mut bits = s.bits().to_vec();
    let mut uncovered: Vec<(usize, usize)> = inst
        .edges
        .iter()
        .copied()
        .filter(|&(u, v)| bits[u] == 0 && bits[v] == 0)
        .collect();
    while !uncovered.is_empty() {
        let k = rng.gen_range(0..uncovered.len());
        let (u, v) = uncovered.swap_remove(k);
        if bits[u] == 1 || bits[v] == 1 {
            continue;
        }
        let pick = if rng.gen::<bool>() { u } else { v };
        bits[pick] = 1;
    }
    let mut order: Vec<usize> = (0..inst.n).collect();
    order.shuffle(rng);
    for v in order {
        if bits[v] == 1 && inst.adjacency[v].iter().all(|&u| bits[u] == 1) {
            bits[v] = 0;
        }
    }
    let size = bits.iter().filter(|&&b| b == 1).count();
    Ok(Solution::with_fitness(bits, -(size as f64)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert, proptest};

    #[test]
    fn edge_count_and_distinctness() {
        let mut rng = RngStream::new(3);
        let g = gen_mvc(10, 2.0, &mut rng).unwrap();
        assert_eq!(g.edges().len(), 20);
        let mut e = g.edges().to_vec();
        e.dedup();
        assert_eq!(e.len(), 20);
    }

    #[test]
    fn saturated_k4() {
        let mut rng = RngStream::new(3);
        let g = gen_mvc(4, 1.5, &mut rng).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn infeasible_edge_count() {
        let mut rng = RngStream::new(3);
        assert!(matches!(gen_mvc(4, 2.0, &mut rng), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn pair_index_covers_all_pairs() {
        let n = 7;
        let pairs: Vec<_> = (0..n * (n - 1) / 2).map(|p| pair_from_index(n, p)).collect();
        let mut expected = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                expected.push((u, v));
            }
        }
        assert_eq!(pairs, expected);
    }

    #[test]
    fn triangle_repairs_to_two() {
        let g = VertexCoverInstance::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        for seed in 0..20 {
            let mut rng = RngStream::new(seed);
            let r = repair_cover(&g, &Solution::zeros(3), &mut rng).unwrap();
            assert!(g.is_cover(r.bits()));
            assert_eq!(r.count_ones(), 2);
            assert_eq!(r.fit(), -2.0);
        }
    }

    #[test]
    fn edgeless_graph_clears_everything() {
        let g = VertexCoverInstance::new(3, []).unwrap();
        let mut rng = RngStream::new(0);
        let r = repair_cover(&g, &Solution::from_str01("111"), &mut rng).unwrap();
        assert_eq!(r.to_str01(), "000");
        assert_eq!(r.fit(), 0.0);
    }

    #[test]
    fn adf_agrees_with_cover_size() {
        let mut rng = RngStream::new(8);
        let g = gen_mvc(15, 2.0, &mut rng).unwrap();
        let adf = g.to_adf();
        let r = repair_cover(&g, &Solution::zeros(15), &mut rng).unwrap();
        assert_eq!(adf.value(r.bits()), r.fit());
    }

    proptest! {
        #[test]
        fn repair_is_feasible_and_minimal(seed in any::<u64>(), n in 2usize..30, c in 0.5f64..3.0) {
            let mut rng = RngStream::new(seed);
            let pairs = n * (n - 1) / 2;
            let c = c.min(pairs as f64 / n as f64);
            let g = gen_mvc(n, c, &mut rng).unwrap();
            let start = Solution::new((0..n).map(|_| rng.gen_range(0..2)).collect());
            let r = repair_cover(&g, &start, &mut rng).unwrap();
            prop_assert!(g.is_minimal_cover(r.bits()));
            let all = repair_cover(&g, &Solution::new(vec![1; n]), &mut rng).unwrap();
            prop_assert!(g.is_minimal_cover(all.bits()));
        }
    }
}
