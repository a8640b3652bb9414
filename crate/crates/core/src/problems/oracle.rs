//! Exact optima for desk-scale instances.

use super::{Instance, Problem};
use crate::{AdfSpec, Error, Result};

/// Largest bit count the exhaustive enumerator accepts.
pub const EXHAUSTIVE_MAX_BITS: usize = 30;
/// Largest graph the vertex-cover branch and bound accepts.
pub const BRANCH_AND_BOUND_MAX_VERTICES: usize = 64;

/// Exact optimum of a problem: exhaustive enumeration for up to 30 bits,
/// branch and bound for vertex cover up to 64 vertices.
pub fn brute_force_optimum(problem: &Problem) -> Result<f64> {
    match problem.instance() {
        Instance::VertexCover(g) => {
            if g.n() > BRANCH_AND_BOUND_MAX_VERTICES {
                return Err(Error::OracleRefused(format!(
                    "vertex cover on {} > {BRANCH_AND_BOUND_MAX_VERTICES} vertices",
                    g.n()
                )));
            }
            let adj: Vec<u64> = (0..g.n())
                .map(|v| g.neighbors(v).iter().fold(0u64, |m, &u| m | 1 << u))
                .collect();
            Ok(-(min_vertex_cover(&adj) as f64))
        }
        Instance::SpinGlass(sg) => {
            check_exhaustive(sg.n())?;
            Ok(spin_glass_max(sg))
        }
        _ => {
            check_exhaustive(problem.n())?;
            Ok(exhaustive_max(problem.adf(), false))
        }
    }
}

fn check_exhaustive(n: usize) -> Result<()> {
    if n > EXHAUSTIVE_MAX_BITS {
        return Err(Error::OracleRefused(format!(
            "exhaustive search over {n} > {EXHAUSTIVE_MAX_BITS} bits"
        )));
    }
    Ok(())
}

/// Maximum of an ADF by Gray-code enumeration. With `flip_symmetric` the
/// last bit is pinned to 0, which is exact when the objective is invariant
/// under complementing every bit.
pub fn exhaustive_max(adf: &AdfSpec, flip_symmetric: bool) -> f64 {
    let n = adf.n();
    let free = if flip_symmetric { n.saturating_sub(1) } else { n };
    let mut bits = vec![0u8; n];
    let mut value = adf.value(&bits);
    let mut best = value;
    for k in 1u64..(1u64 << free) {
        let v = k.trailing_zeros() as usize;
        let (d, _) = adf.flip_delta(&bits, v);
        bits[v] ^= 1;
        value += d;
        if value > best {
            best = value;
        }
    }
    best
}

// Specialized enumeration: integer local fields over the six bonds per site.
fn spin_glass_max(sg: &super::SpinGlass3D) -> f64 {
    let n = sg.n();
    let mut nbr = vec![[(0usize, 0i32); 6]; n];
    let mut fill = vec![0usize; n];
    for (i, j, c) in sg.edges() {
        nbr[i][fill[i]] = (j, c as i32);
        fill[i] += 1;
        nbr[j][fill[j]] = (i, c as i32);
        fill[j] += 1;
    }
    let mut spin = vec![-1i32; n];
    let mut value: i64 = sg.edges().map(|(_, _, c)| c as i64).sum();
    let mut best = value;
    // global spin flip leaves the energy unchanged: pin the last spin
    for k in 1u64..(1u64 << (n - 1)) {
        let v = k.trailing_zeros() as usize;
        let field: i32 = nbr[v].iter().map(|&(u, c)| c * spin[u]).sum();
        value -= 2 * (spin[v] * field) as i64;
        spin[v] = -spin[v];
        if value > best {
            best = value;
        }
    }
    best as f64
}

/// Minimum vertex cover size by branch and bound on adjacency bitmasks.
pub fn min_vertex_cover(adj: &[u64]) -> usize {
    assert!(adj.len() <= 64);
    let alive = if adj.len() == 64 {
        u64::MAX
    } else {
        (1u64 << adj.len()) - 1
    };
    let mut best = greedy_cover(adj, alive);
    branch(adj, alive, 0, &mut best);
    best
}

fn greedy_cover(adj: &[u64], mut alive: u64) -> usize {
    let mut size = 0;
    loop {
        let mut pick = None;
        let mut deg = 0;
        let mut rest = alive;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let d = (adj[v] & alive).count_ones();
            if d > deg {
                deg = d;
                pick = Some(v);
            }
        }
        match pick {
            Some(v) => {
                alive &= !(1 << v);
                size += 1;
            }
            None => return size,
        }
    }
}

// Size of a greedy maximal matching: a lower bound on any cover.
fn matching_bound(adj: &[u64], mut alive: u64) -> usize {
    let mut size = 0;
    while alive != 0 {
        let v = alive.trailing_zeros() as usize;
        alive &= !(1 << v);
        let nb = adj[v] & alive;
        if nb != 0 {
            let u = nb.trailing_zeros() as usize;
            alive &= !(1 << u);
            size += 1;
        }
    }
    size
}

fn branch(adj: &[u64], mut alive: u64, mut taken: usize, best: &mut usize) {
    // degree-1 reduction: take the lone neighbor
    loop {
        let mut reduced = false;
        let mut rest = alive;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let nb = adj[v] & alive;
            match nb.count_ones() {
                0 => alive &= !(1 << v),
                1 => {
                    alive &= !(nb | 1 << v);
                    taken += 1;
                    reduced = true;
                }
                _ => {}
            }
            rest &= alive;
        }
        if !reduced {
            break;
        }
    }
    if taken + matching_bound(adj, alive) >= *best {
        return;
    }
    let mut pick = None;
    let mut deg = 0;
    let mut rest = alive;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let d = (adj[v] & alive).count_ones();
        if d > deg {
            deg = d;
            pick = Some(v);
        }
    }
    let Some(v) = pick else {
        *best = (*best).min(taken);
        return;
    };
    branch(adj, alive & !(1 << v), taken + 1, best);
    let nb = adj[v] & alive;
    branch(adj, alive & !(nb | 1 << v), taken + nb.count_ones() as usize, best);
}
