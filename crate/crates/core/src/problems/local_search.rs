use super::Problem;
use crate::Solution;

#[derive(Clone, Debug)]
pub struct HillClimbOutcome {
    pub solution: Solution,
    /// Work spent, in full-evaluation units (subfunctions touched / m).
    pub evaluations: f64,
    pub flips: usize,
}

const MIN_GAIN: f64 = 1e-12;

/// Best-improvement bit-flip hill climbing to a 1-flip local optimum.
///
/// Flip gains are kept incrementally: after a flip only the variables that
/// share a subfunction with the flipped one are re-scored. Ties go to the
/// lowest index.
pub fn hill_climb(problem: &Problem, mut s: Solution) -> HillClimbOutcome {
    let adf = problem.adf();
    let graph = problem.interaction_graph();
    let m = adf.m() as f64;
    let mut fitness = match s.fitness() {
        Some(f) => f,
        None => adf.value(s.bits()),
    };
    let mut bits = s.bits().to_vec();
    let mut touched = 0usize;
    let mut gains: Vec<f64> = (0..adf.n())
        .map(|v| {
            let (d, t) = adf.flip_delta(&bits, v);
            touched += t;
            d
        })
        .collect();
    let mut flips = 0;
    loop {
        let mut best = None;
        let mut best_gain = MIN_GAIN;
        for (v, &g) in gains.iter().enumerate() {
            if g > best_gain {
                best_gain = g;
                best = Some(v);
            }
        }
        let Some(v) = best else { break };
        bits[v] ^= 1;
        fitness += gains[v];
        flips += 1;
        let (d, t) = adf.flip_delta(&bits, v);
        gains[v] = d;
        touched += t;
        for &u in graph.neighbors(v) {
            let (d, t) = adf.flip_delta(&bits, u);
            gains[u] = d;
            touched += t;
        }
    }
    if flips > 0 {
        // re-anchor to avoid drift from accumulated deltas
        fitness = adf.value(&bits);
        s = Solution::new(bits);
    }
    s.set_fitness(fitness);
    HillClimbOutcome {
        solution: s,
        evaluations: touched as f64 / m,
        flips,
    }
}
