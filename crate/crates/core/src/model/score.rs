use std::sync::OnceLock;

/// Scoring constants for one round of model building.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoreParams {
    pub training_size: usize,
    /// Complexity penalty per leaf, in nats.
    pub penalty: f64,
}

impl ScoreParams {
    /// Description-length penalty of `0.5 log2(N)` bits per leaf parameter.
    pub fn for_training_size(training_size: usize) -> Self {
        assert!(training_size >= 1);
        let bits = 0.5 * (training_size as f64).log2();
        Self {
            training_size,
            penalty: bits * std::f64::consts::LN_2,
        }
    }

    pub fn with_penalty(mut self, penalty: f64) -> Self {
        assert!(penalty >= 0.0);
        self.penalty = penalty;
        self
    }
}

const TABLE_SIZE: usize = 1 << 16;

fn table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(TABLE_SIZE);
        t.push(0.0);
        let mut acc = 0.0;
        for k in 1..TABLE_SIZE {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// `ln(k!)`: exact cumulative sum below 65536, Stirling series above.
pub fn ln_factorial(k: u64) -> f64 {
    if (k as usize) < TABLE_SIZE {
        return table()[k as usize];
    }
    let x = k as f64 + 1.0;
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x.powi(3))
}

/// Log marginal likelihood of a binary leaf with Dirichlet(1, 1) prior:
/// `ln[Γ(2)/Γ(2+m0+m1) · Γ(1+m0) · Γ(1+m1)] = ln[m0! m1! / (m0+m1+1)!]`.
pub fn bde_leaf_logscore(m0: u32, m1: u32) -> f64 {
    let (m0, m1) = (m0 as u64, m1 as u64);
    ln_factorial(m0) + ln_factorial(m1) - ln_factorial(m0 + m1 + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Sequential predictive probabilities (m_x + 1) / (t + 2): the exact
    // Dirichlet-multinomial marginal of one particular ordering.
    fn marginal_by_sequence(m0: u32, m1: u32) -> f64 {
        let mut seen = [0u32; 2];
        let mut p = 1.0;
        for x in std::iter::repeat_n(0usize, m0 as usize).chain(std::iter::repeat_n(1, m1 as usize)) {
            let t = seen[0] + seen[1];
            p *= (seen[x] + 1) as f64 / (t + 2) as f64;
            seen[x] += 1;
        }
        p
    }

    #[test]
    fn empty_leaf_scores_zero() {
        assert_eq!(bde_leaf_logscore(0, 0), 0.0);
    }

    #[test]
    fn single_observation() {
        assert!((bde_leaf_logscore(1, 0) - 0.5f64.ln()).abs() < 1e-15);
        assert!((bde_leaf_logscore(0, 1) - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn two_two_matches_direct_marginal() {
        // 2! 2! / 5! = 1/30
        assert!((bde_leaf_logscore(2, 2) - (1.0f64 / 30.0).ln()).abs() < 1e-14);
        for m0 in 0..12 {
            for m1 in 0..12 {
                let direct = marginal_by_sequence(m0, m1).ln();
                assert!((bde_leaf_logscore(m0, m1) - direct).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn stirling_tail_is_continuous() {
        let k = TABLE_SIZE as u64;
        let below = ln_factorial(k - 1) + (k as f64).ln();
        assert!((ln_factorial(k) - below).abs() / below < 1e-12);
    }

    #[test]
    fn penalty_in_nats() {
        let p = ScoreParams::for_training_size(64);
        assert!((p.penalty - 3.0 * std::f64::consts::LN_2).abs() < 1e-12);
    }
}
