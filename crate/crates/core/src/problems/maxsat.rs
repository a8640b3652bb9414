use std::collections::BTreeSet;

use rand::Rng;

use crate::{AdfSpec, Error, Result, RngStream, Subfunction};

/// Colors used by the graph-coloring encoding.
pub const COLORS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Self { var, positive: true }
    }

    pub fn neg(var: usize) -> Self {
        Self { var, positive: false }
    }

    pub fn holds(&self, bit: u8) -> bool {
        (bit == 1) == self.positive
    }

    /// 1-based signed DIMACS form.
    pub fn to_dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.positive {
            v
        } else {
            -v
        }
    }
}

/// Coloring graph a CNF instance was generated from.
#[derive(Clone, Debug, PartialEq)]
pub struct MorphOrigin {
    pub p: f64,
    pub colors: usize,
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
}

/// Unweighted MAXSAT instance; fitness is the number of satisfied clauses.
#[derive(Clone, Debug, PartialEq)]
pub struct MaxSatInstance {
    nv: usize,
    clauses: Vec<Vec<Literal>>,
    origin: Option<MorphOrigin>,
    colorable: Option<bool>,
}

impl MaxSatInstance {
    pub fn new(nv: usize, clauses: Vec<Vec<Literal>>) -> Result<Self> {
        Self::build(nv, clauses, None)
    }

    fn build(nv: usize, clauses: Vec<Vec<Literal>>, origin: Option<MorphOrigin>) -> Result<Self> {
        if nv == 0 {
            return Err(Error::invalid("MAXSAT instance with no variables"));
        }
        if clauses.is_empty() {
            return Err(Error::invalid("MAXSAT instance with no clauses"));
        }
        for (c, clause) in clauses.iter().enumerate() {
            if clause.is_empty() {
                return Err(Error::invalid(format!("clause {c} is empty")));
            }
            if let Some(l) = clause.iter().find(|l| l.var >= nv) {
                return Err(Error::invalid(format!(
                    "clause {c} references variable {} >= {nv}",
                    l.var
                )));
            }
        }
        let colorable = origin
            .as_ref()
            .and_then(|o| is_k_colorable(o.nodes, &o.edges, o.colors, COLOR_SEARCH_BUDGET));
        Ok(Self {
            nv,
            clauses,
            origin,
            colorable,
        })
    }

    pub(crate) fn with_origin(self, origin: MorphOrigin) -> Result<Self> {
        Self::build(self.nv, self.clauses, Some(origin))
    }

    pub fn nv(&self) -> usize {
        self.nv
    }

    pub fn clauses(&self) -> &[Vec<Literal>] {
        &self.clauses
    }

    pub fn origin(&self) -> Option<&MorphOrigin> {
        self.origin.as_ref()
    }

    /// True when the source graph was proven colorable, so every clause can
    /// be satisfied at once.
    pub fn satisfiable(&self) -> bool {
        self.colorable == Some(true)
    }

    pub fn satisfied(&self, bits: &[u8]) -> usize {
        self.clauses
            .iter()
            .filter(|c| c.iter().any(|l| l.holds(bits[l.var])))
            .count()
    }

    /// One 0/1 subfunction per clause over its distinct variables.
    pub fn to_adf(&self) -> AdfSpec {
        let terms = self
            .clauses
            .iter()
            .map(|clause| {
                let vars: Vec<usize> = clause
                    .iter()
                    .map(|l| l.var)
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect();
                Subfunction::from_fn(vars.clone(), |a| {
                    let sat = clause.iter().any(|l| {
                        let k = vars.iter().position(|&v| v == l.var).unwrap();
                        a[k] == l.positive
                    });
                    sat as u8 as f64
                })
                .unwrap()
            })
            .collect();
        AdfSpec::new(self.nv, terms).unwrap()
    }
}

const COLOR_SEARCH_BUDGET: u64 = 5_000_000;

/// Proposition index for "node `u` has color `c`".
pub fn color_var(u: usize, c: usize) -> usize {
    u * COLORS + c
}

/// Graph-coloring MAXSAT from a morphed ring lattice.
///
/// The graph on `nv / 3` nodes starts as a ring lattice linking each node to
/// the nodes at offsets ±1 and ±2. Each lattice edge is independently
/// replaced, with probability `p`, by a uniformly random non-edge. The CNF has
/// one at-least-one-color clause per node and, for every edge and color, a
/// clause forbidding both endpoints from taking that color.
pub fn gen_maxsat_morph(nv: usize, p: f64, rng: &mut RngStream) -> Result<MaxSatInstance> {
    if !nv.is_multiple_of(COLORS) {
        return Err(Error::invalid(format!(
            "{nv} propositions is not a multiple of {COLORS} colors"
        )));
    }
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::invalid(format!("morphing parameter p = {p} outside [0, 1/2]")));
    }
    let nodes = nv / COLORS;
    if nodes < 5 {
        return Err(Error::invalid(format!(
            "{nodes} nodes is too few for a degree-4 ring lattice"
        )));
    }
    let key = |u: usize, v: usize| (u.min(v), u.max(v));
    let lattice: Vec<(usize, usize)> = (0..nodes)
        .flat_map(|u| [1, 2].map(|off| key(u, (u + off) % nodes)))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut edges: BTreeSet<(usize, usize)> = lattice.iter().copied().collect();
    let total_pairs = nodes * (nodes - 1) / 2;
    for &e in &lattice {
        if !rng.gen_bool(p) || edges.len() >= total_pairs {
            continue;
        }
        let replacement = loop {
            let u = rng.gen_range(0..nodes);
            let v = rng.gen_range(0..nodes);
            if u != v && !edges.contains(&key(u, v)) {
                break key(u, v);
            }
        };
        edges.remove(&e);
        edges.insert(replacement);
    }
    let edges: Vec<_> = edges.into_iter().collect();
    let mut clauses: Vec<Vec<Literal>> = (0..nodes)
        .map(|u| (0..COLORS).map(|c| Literal::pos(color_var(u, c))).collect())
        .collect();
    for &(u, v) in &edges {
        for c in 0..COLORS {
            clauses.push(vec![Literal::neg(color_var(u, c)), Literal::neg(color_var(v, c))]);
        }
    }
    let origin = MorphOrigin {
        p,
        colors: COLORS,
        nodes,
        edges,
    };
    MaxSatInstance::build(nv, clauses, Some(origin))
}

/// Exact k-colorability by backtracking with a most-constrained-first order.
/// Returns `None` when the search budget runs out.
pub fn is_k_colorable(nodes: usize, edges: &[(usize, usize)], k: usize, budget: u64) -> Option<bool> {
    let mut adj = vec![Vec::new(); nodes];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut colors = vec![usize::MAX; nodes];
    let mut steps = 0u64;
    fn pick(adj: &[Vec<usize>], colors: &[usize], k: usize) -> Option<usize> {
        // uncolored node with the fewest legal colors, then highest degree
        (0..adj.len())
            .filter(|&u| colors[u] == usize::MAX)
            .min_by_key(|&u| {
                let used: BTreeSet<usize> = adj[u]
                    .iter()
                    .map(|&v| colors[v])
                    .filter(|&c| c != usize::MAX)
                    .collect();
                (k - used.len().min(k), usize::MAX - adj[u].len())
            })
    }
    fn go(
        adj: &[Vec<usize>],
        colors: &mut Vec<usize>,
        k: usize,
        steps: &mut u64,
        budget: u64,
    ) -> Option<bool> {
        *steps += 1;
        if *steps > budget {
            return None;
        }
        let Some(u) = pick(adj, colors, k) else {
            return Some(true);
        };
        for c in 0..k {
            if adj[u].iter().any(|&v| colors[v] == c) {
                continue;
            }
            colors[u] = c;
            match go(adj, colors, k, steps, budget) {
                Some(false) => {}
                other => return other,
            }
            colors[u] = usize::MAX;
        }
        Some(false)
    }
    go(&adj, &mut colors, k, &mut steps, budget)
}
