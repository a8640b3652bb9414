//! Distance-based structural bias harvested from prior models.
//!
//! For each model `m`, `s(m, d, j)` counts the splits in tree `j` on
//! variables at distance `d` from `j`. The probability of a `k`-th such split
//! given `k - 1` already happened is the survival ratio
//!
//! ```text
//! P_k(d, j) = |{m : s(m,d,j) >= k}| / |{m : s(m,d,j) >= k - 1}|
//! ```
//!
//! and a network's log prior is `κ Σ_d Σ_j Σ_{k <= n_s(d,j)} ln P_k(d, j)`.
//! During greedy learning each split adds exactly one of these terms.
//! Undefined or zero ratios, and `k` past the observed range, are floored at
//! `ε` so that no split is ever ruled out entirely.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::model::{ModelDump, SplitHistogram};
use crate::{DistanceMatrix, Error, Result};

pub const DEFAULT_EPSILON: f64 = 1e-4;
const HEADER: &str = "hboa-bias v1";

/// Per-model split histograms from one corpus of prior runs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SplitStats {
    pub models: Vec<SplitHistogram>,
}

impl SplitStats {
    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    /// Largest variable count among the models.
    pub fn source_n(&self) -> usize {
        self.models.iter().map(|m| m.n).max().unwrap_or(0)
    }

    pub fn extend(&mut self, other: SplitStats) {
        self.models.extend(other.models);
    }
}

/// Split-distance histogram of a dumped model, using the distances of the
/// instance it was learned on.
pub fn dump_histogram(dump: &ModelDump, dmat: &DistanceMatrix) -> Result<SplitHistogram> {
    if dump.n != dmat.n() {
        return Err(Error::invalid(format!(
            "model over {} variables with a {}-variable distance matrix",
            dump.n,
            dmat.n()
        )));
    }
    let mut cells = BTreeMap::new();
    for s in &dump.splits {
        *cells.entry((dmat.get(s.var, s.target), s.target)).or_insert(0) += 1;
    }
    Ok(SplitHistogram { n: dump.n, cells })
}

/// Histograms for a set of model dumps. Dumps of different sizes are only
/// accepted with `allow_mixed`, for pooled tables.
pub fn accumulate_stats(
    dumps: &[(&ModelDump, &DistanceMatrix)],
    allow_mixed: bool,
) -> Result<SplitStats> {
    if !allow_mixed {
        if let Some((first, _)) = dumps.first() {
            if let Some((bad, _)) = dumps.iter().find(|(d, _)| d.n != first.n) {
                return Err(Error::invalid(format!(
                    "models over {} and {} variables in one per-target corpus",
                    first.n, bad.n
                )));
            }
        }
    }
    let models = dumps
        .iter()
        .map(|(d, dm)| dump_histogram(d, dm))
        .collect::<Result<_>>()?;
    Ok(SplitStats { models })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BiasMode {
    /// `P_k(d, j)`, only valid for targets of the same size.
    PerTarget,
    /// `P_k(d)` pooled over all targets; usable across sizes.
    Pooled,
}

impl BiasMode {
    fn name(self) -> &'static str {
        match self {
            BiasMode::PerTarget => "per-target",
            BiasMode::Pooled => "pooled",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BiasTable {
    mode: BiasMode,
    n: usize,
    epsilon: f64,
    // (d, j) -> [P_1, P_2, ...]; j is 0 in pooled mode
    cells: BTreeMap<(u16, usize), Vec<f64>>,
}

impl BiasTable {
    pub fn new(mode: BiasMode, n: usize, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::invalid(format!("epsilon {epsilon} outside (0, 1]")));
        }
        Ok(Self {
            mode,
            n,
            epsilon,
            cells: BTreeMap::new(),
        })
    }

    /// Table answering 1 to every query: a no-op bias.
    pub fn all_ones_per_target(n: usize) -> Self {
        Self::new(BiasMode::PerTarget, n, 1.0).unwrap()
    }

    /// Pooled table answering `p` to every query.
    pub fn constant_pooled(n: usize, p: f64) -> Self {
        Self::new(BiasMode::Pooled, n, p).unwrap()
    }

    pub fn mode(&self) -> BiasMode {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn cells(&self) -> &BTreeMap<(u16, usize), Vec<f64>> {
        &self.cells
    }

    fn insert(&mut self, d: u16, j: usize, ps: Vec<f64>) {
        debug_assert!(ps.iter().all(|&p| p >= self.epsilon && p <= 1.0));
        self.cells.insert((d, j), ps);
    }

    /// `P_k` for the `k`-th split, `k >= 1`.
    pub fn probability(&self, j: usize, d: u16, k: usize) -> f64 {
        assert!(k >= 1);
        let key = match self.mode {
            BiasMode::PerTarget => (d, j),
            BiasMode::Pooled => (d.min(self.n as u16), 0),
        };
        self.cells
            .get(&key)
            .and_then(|ps| ps.get(k - 1))
            .copied()
            .unwrap_or(self.epsilon)
            .max(self.epsilon)
    }

    /// Log prior contribution of one more split in tree `j` at distance `d`
    /// when `prior_splits` such splits already exist.
    pub fn log_prior_delta(&self, j: usize, d: u16, prior_splits: u32) -> f64 {
        self.probability(j, d, prior_splits as usize + 1).ln()
    }

    /// Checks that the table can bias a problem with `n` variables.
    pub fn check_compatible(&self, n: usize) -> Result<()> {
        if self.mode == BiasMode::PerTarget && self.n != n {
            return Err(Error::Config(format!(
                "per-target bias table built for n = {} applied to n = {n}",
                self.n
            )));
        }
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut out = format!("{HEADER}\nmode {}\nn {}\nepsilon {}\n", self.mode.name(), self.n, self.epsilon);
        let rows: usize = self.cells.values().map(Vec::len).sum();
        writeln!(out, "rows {rows}").unwrap();
        for (&(d, j), ps) in &self.cells {
            for (k, p) in ps.iter().enumerate() {
                match self.mode {
                    BiasMode::PerTarget => writeln!(out, "{d} {j} {} {p}", k + 1),
                    BiasMode::Pooled => writeln!(out, "{d} {} {p}", k + 1),
                }
                .unwrap();
            }
        }
        out
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| Error::parse(path, 0, format!("missing {what}")))
        };
        let (ln, header) = next("header")?;
        if header != HEADER {
            if header.starts_with("hboa-bias") {
                return Err(Error::Version {
                    found: header.to_string(),
                    expected: HEADER.to_string(),
                });
            }
            return Err(Error::parse(path, ln, "not a bias table"));
        }
        let mut field = |key: &str| -> Result<(usize, String)> {
            let (ln, line) = next(key)?;
            match line.split_once(' ') {
                Some((k, v)) if k == key => Ok((ln, v.trim().to_string())),
                _ => Err(Error::parse(path, ln, format!("expected `{key} ...`"))),
            }
        };
        let (ml, mode) = field("mode")?;
        let mode = match mode.as_str() {
            "per-target" => BiasMode::PerTarget,
            "pooled" => BiasMode::Pooled,
            other => return Err(Error::parse(path, ml, format!("unknown mode `{other}`"))),
        };
        let (nl, n) = field("n")?;
        let n: usize = n.parse().map_err(|_| Error::parse(path, nl, "bad n"))?;
        let (el, eps) = field("epsilon")?;
        let eps: f64 = eps.parse().map_err(|_| Error::parse(path, el, "bad epsilon"))?;
        let (rl, rows) = field("rows")?;
        let rows: usize = rows.parse().map_err(|_| Error::parse(path, rl, "bad row count"))?;
        let mut table = Self::new(mode, n, eps).map_err(|e| Error::parse(path, el, e.to_string()))?;
        let mut seen = 0;
        let mut last = rl;
        for (ln, line) in lines {
            last = ln;
            let f: Vec<&str> = line.split_whitespace().collect();
            let (d, j, k, p) = match (mode, &f[..]) {
                (BiasMode::PerTarget, [d, j, k, p]) => (*d, *j, *k, *p),
                (BiasMode::Pooled, [d, k, p]) => (*d, "0", *k, *p),
                _ => return Err(Error::parse(path, ln, "wrong number of fields")),
            };
            let bad = || Error::parse(path, ln, "bad number");
            let d: u16 = d.parse().map_err(|_| bad())?;
            let j: usize = j.parse().map_err(|_| bad())?;
            let k: usize = k.parse().map_err(|_| bad())?;
            let p: f64 = p.parse().map_err(|_| bad())?;
            if !(p >= eps && p <= 1.0) {
                return Err(Error::parse(path, ln, format!("probability {p} outside [ε, 1]")));
            }
            let ps = table.cells.entry((d, j)).or_default();
            if k != ps.len() + 1 {
                return Err(Error::parse(path, ln, "rows of a cell must list k = 1, 2, ... in order"));
            }
            ps.push(p);
            seen += 1;
        }
        if seen != rows {
            return Err(Error::parse(path, last, format!("expected {rows} rows, found {seen}")));
        }
        Ok(table)
    }
}

pub fn save_bias(table: &BiasTable, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, table.render())?;
    Ok(())
}

pub fn load_bias(path: impl AsRef<Path>) -> Result<BiasTable> {
    let path = path.as_ref();
    BiasTable::parse(path, &fs::read_to_string(path)?)
}

// Survival ratios for a list of per-unit split counts (one entry per unit,
// zeros included): P_k = #{s >= k} / #{s >= k-1}, for k = 1..=max+1.
fn survival_ratios(counts: &[u32], epsilon: f64) -> Vec<f64> {
    let max = counts.iter().copied().max().unwrap_or(0);
    (1..=max + 1)
        .map(|k| {
            let num = counts.iter().filter(|&&s| s >= k).count();
            let den = counts.iter().filter(|&&s| s + 1 >= k).count();
            if den == 0 {
                epsilon
            } else {
                (num as f64 / den as f64).max(epsilon)
            }
        })
        .collect()
}

/// Per-target table `P_k(d, j)` from a same-size corpus.
pub fn compute_pk(stats: &SplitStats, epsilon: f64) -> Result<BiasTable> {
    if stats.is_empty() {
        return Err(Error::invalid("no models to compute split probabilities from"));
    }
    let n = stats.models[0].n;
    if stats.models.iter().any(|m| m.n != n) {
        return Err(Error::invalid("per-target statistics need models of one size"));
    }
    let mut table = BiasTable::new(BiasMode::PerTarget, n, epsilon)?;
    let keys: std::collections::BTreeSet<(u16, usize)> = stats
        .models
        .iter()
        .flat_map(|m| m.cells.keys().copied())
        .collect();
    for (d, j) in keys {
        let counts: Vec<u32> = stats.models.iter().map(|m| m.get(d, j)).collect();
        table.insert(d, j, survival_ratios(&counts, epsilon));
    }
    Ok(table)
}

/// Pooled table `P_k(d)` with every (model, target) pair as one unit.
pub fn pool_across_sizes(stats: &SplitStats, epsilon: f64) -> Result<BiasTable> {
    if stats.is_empty() {
        return Err(Error::invalid("no models to pool"));
    }
    let n = stats.source_n();
    let mut table = BiasTable::new(BiasMode::Pooled, n, epsilon)?;
    let distances: std::collections::BTreeSet<u16> = stats
        .models
        .iter()
        .flat_map(|m| m.cells.keys().map(|&(d, _)| d))
        .collect();
    for d in distances {
        let counts: Vec<u32> = stats
            .models
            .iter()
            .flat_map(|m| (0..m.n).map(move |j| m.get(d, j)))
            .collect();
        table.insert(d, 0, survival_ratios(&counts, epsilon));
    }
    Ok(table)
}

/// Everything the learner needs to add the bias term to a split gain.
#[derive(Clone, Copy, Debug)]
pub struct BiasContext<'a> {
    pub table: &'a BiasTable,
    pub kappa: f64,
    pub distances: &'a DistanceMatrix,
}

impl BiasContext<'_> {
    #[inline]
    pub fn term(&self, j: usize, d: u16, prior_splits: u32) -> f64 {
        self.kappa * self.table.log_prior_delta(j, d, prior_splits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hist(n: usize, cells: &[((u16, usize), u32)]) -> SplitHistogram {
        SplitHistogram {
            n,
            cells: cells.iter().copied().collect(),
        }
    }

    #[test]
    fn empty_corpus() {
        let stats = accumulate_stats(&[], false).unwrap();
        assert!(stats.is_empty());
        assert!(compute_pk(&stats, DEFAULT_EPSILON).is_err());
    }

    #[test]
    fn single_split_single_model() {
        let stats = SplitStats { models: vec![hist(5, &[((1, 2), 1)])] };
        let t = compute_pk(&stats, DEFAULT_EPSILON).unwrap();
        assert_eq!(t.probability(2, 1, 1), 1.0);
        assert_eq!(t.probability(2, 1, 2), DEFAULT_EPSILON);
        assert_eq!(t.probability(2, 1, 7), DEFAULT_EPSILON);
        // never split anywhere in the corpus
        assert_eq!(t.probability(0, 3, 1), DEFAULT_EPSILON);
    }

    #[test]
    fn two_models() {
        let stats = SplitStats {
            models: vec![hist(5, &[((2, 0), 2)]), hist(5, &[])],
        };
        let t = compute_pk(&stats, DEFAULT_EPSILON).unwrap();
        assert_eq!(t.probability(0, 2, 1), 0.5);
        assert_eq!(t.probability(0, 2, 2), 1.0);
        assert_eq!(t.probability(0, 2, 3), DEFAULT_EPSILON);
    }

    #[test]
    fn pooled_ratio() {
        let stats = SplitStats { models: vec![hist(10, &[((3, 4), 1)])] };
        let t = pool_across_sizes(&stats, DEFAULT_EPSILON).unwrap();
        assert!((t.probability(0, 3, 1) - 0.1).abs() < 1e-15);
        assert_eq!(t.probability(9, 3, 1), t.probability(0, 3, 1));
        assert_eq!(t.probability(0, 3, 2), DEFAULT_EPSILON);
        // distances past the source size clamp to it
        let stats = SplitStats { models: vec![hist(4, &[((4, 0), 1), ((4, 1), 1), ((4, 2), 1), ((4, 3), 1)])] };
        let t = pool_across_sizes(&stats, DEFAULT_EPSILON).unwrap();
        assert_eq!(t.probability(0, 9, 1), 1.0);
    }

    #[test]
    fn pooled_all_share_one_split() {
        let stats = SplitStats {
            models: vec![hist(3, &[((1, 0), 1), ((1, 1), 1), ((1, 2), 1)])],
        };
        let t = pool_across_sizes(&stats, DEFAULT_EPSILON).unwrap();
        assert_eq!(t.probability(0, 1, 1), 1.0);
        assert_eq!(t.probability(0, 1, 2), DEFAULT_EPSILON);
    }

    #[test]
    fn log_prior_lookups() {
        let ones = BiasTable::all_ones_per_target(6);
        for j in 0..6 {
            for d in 1..=6 {
                for k in 0..5 {
                    assert_eq!(ones.log_prior_delta(j, d, k), 0.0);
                }
            }
        }
        let stats = SplitStats {
            models: vec![hist(5, &[((1, 0), 1)]), hist(5, &[])],
        };
        let t = compute_pk(&stats, DEFAULT_EPSILON).unwrap();
        assert_eq!(t.log_prior_delta(0, 1, 0), 0.5f64.ln());
    }

    #[test]
    fn mixed_sizes_need_pooling_intent() {
        let a = ModelDump { n: 3, splits: vec![] };
        let b = ModelDump { n: 4, splits: vec![] };
        use crate::{AdfSpec, Subfunction};
        let dm = |n| {
            crate::distance::compute_distance_matrix(
                &AdfSpec::new(n, vec![Subfunction::new(vec![0, 1], vec![0.0; 4]).unwrap()]).unwrap(),
            )
        };
        let (da, db) = (dm(3), dm(4));
        assert!(accumulate_stats(&[(&a, &da), (&b, &db)], false).is_err());
        let stats = accumulate_stats(&[(&a, &da), (&b, &db)], true).unwrap();
        assert_eq!(stats.source_n(), 4);
        assert!(compute_pk(&stats, DEFAULT_EPSILON).is_err());
        assert!(pool_across_sizes(&stats, DEFAULT_EPSILON).is_ok());
    }

    #[test]
    fn compatibility() {
        let t = BiasTable::all_ones_per_target(5);
        assert!(t.check_compatible(5).is_ok());
        assert!(matches!(t.check_compatible(6), Err(Error::Config(_))));
        assert!(BiasTable::constant_pooled(5, 0.5).check_compatible(60).is_ok());
    }

    #[test]
    fn file_errors() {
        let p = Path::new("b");
        assert!(matches!(
            BiasTable::parse(p, "hboa-bias v0\nmode pooled\n"),
            Err(Error::Version { .. })
        ));
        let t = BiasTable::constant_pooled(3, 0.25);
        let text = t.render();
        assert!(text.contains("mode pooled"));
        assert_eq!(BiasTable::parse(p, &text).unwrap(), t);
        let broken = "hboa-bias v1\nmode pooled\nn 3\nepsilon 0.001\nrows 2\n1 1 0.5\n";
        assert!(matches!(BiasTable::parse(p, broken), Err(Error::Parse { .. })));
    }

    fn arb_stats() -> impl Strategy<Value = SplitStats> {
        (2usize..6, 1usize..8).prop_flat_map(|(n, m)| {
            let cell = ((1u16..=n as u16, 0..n), 1u32..4);
            proptest::collection::vec(proptest::collection::btree_map(cell.0, cell.1, 0..6), m)
                .prop_map(move |ms| SplitStats {
                    models: ms.into_iter().map(|cells| SplitHistogram { n, cells }).collect(),
                })
        })
    }

    proptest! {
        #[test]
        fn probabilities_in_range_and_lossless_file(stats in arb_stats(), pooled in any::<bool>()) {
            let t = if pooled {
                pool_across_sizes(&stats, DEFAULT_EPSILON).unwrap()
            } else {
                compute_pk(&stats, DEFAULT_EPSILON).unwrap()
            };
            for ps in t.cells().values() {
                for &p in ps {
                    prop_assert!((DEFAULT_EPSILON..=1.0).contains(&p));
                }
            }
            let back = BiasTable::parse(Path::new("t"), &t.render()).unwrap();
            prop_assert_eq!(back, t);
        }

        #[test]
        fn identical_models_give_one_then_floor(n in 2usize..6, s in 1u32..5, d in 1u16..5, copies in 1usize..6) {
            let j = 0;
            let stats = SplitStats { models: vec![hist(n, &[((d, j), s)]); copies] };
            let t = compute_pk(&stats, DEFAULT_EPSILON).unwrap();
            for k in 1..=s as usize {
                prop_assert_eq!(t.probability(j, d, k), 1.0);
            }
            prop_assert_eq!(t.probability(j, d, s as usize + 1), DEFAULT_EPSILON);
        }
    }
}
