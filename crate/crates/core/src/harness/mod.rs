//! Experiment harness: population sizing by bisection, crossvalidated and
//! cross-size bias experiments, and speedup reports.

mod bisect;
mod experiment;
mod report;

pub use bisect::{bisect_population, bisect_with, BisectionResult};
pub use experiment::{
    assign_folds, cross_size_transfer, cross_size_transfer_with_base, crossvalidate,
    crossvalidate_with_base, crossvalidate_with_table, harvest_stats, measure_base,
    measure_treatment, transfer_table, InstanceOutcome, NamedProblem, Treatment,
};
pub use report::{
    measure_speedup, parse_report_csv, render_csv, render_summary_csv, summarize,
    ExperimentReport, ReportRow, Speedup, Summary, CLOCK_FLOOR_MS, REPORT_COLUMNS,
    SUMMARY_COLUMNS,
};

use crate::engine::{self, Harvest, HboaConfig};
use crate::problems::{
    brute_force_optimum, gen_maxsat_morph, gen_mvc, gen_spin_glass, hill_climb, Instance,
};
use crate::rng::derive_seed;
use crate::{Error, Problem, Result, RngStream, Solution};

/// A parametric instance family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    SpinGlass { side: usize },
    VertexCover { n: usize, c: f64 },
    MaxSat { nv: usize, p: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::SpinGlass { .. } => "sg",
            Family::VertexCover { .. } => "mvc",
            Family::MaxSat { .. } => "maxsat",
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            Family::SpinGlass { side } => side * side * side,
            Family::VertexCover { n, .. } => n,
            Family::MaxSat { nv, .. } => nv,
        }
    }

    pub fn generate(&self, rng: &mut RngStream) -> Result<Problem> {
        Ok(match *self {
            Family::SpinGlass { side } => Problem::spin_glass(gen_spin_glass(side, rng)?),
            Family::VertexCover { n, c } => Problem::vertex_cover(gen_mvc(n, c, rng)?),
            Family::MaxSat { nv, p } => Problem::maxsat(gen_maxsat_morph(nv, p, rng)?),
        })
    }
}

/// Identifier of the `index`-th generated instance of a family.
pub fn instance_id(family: &Family, index: usize) -> String {
    format!("{}{}_{index:03}", family.name(), family.n())
}

/// `count` instances drawn from one stream seeded by `seed`, without success
/// targets.
pub fn generate_suite(family: &Family, count: usize, seed: u64) -> Result<Vec<NamedProblem>> {
    let mut rng = RngStream::new(derive_seed(seed, &[0x0047_454e]));
    (0..count)
        .map(|i| Ok(NamedProblem::new(instance_id(family, i), family.generate(&mut rng)?)))
        .collect()
}

/// Fills in a success target for every instance.
pub fn ensure_suite_targets(suite: &mut [NamedProblem], seed: u64) -> Result<()> {
    for (i, named) in suite.iter_mut().enumerate() {
        ensure_success_target(&mut named.problem, derive_seed(seed, &[i as u64]))?;
    }
    Ok(())
}

/// How run times are recorded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Timer {
    /// Times are not recorded; reports stay byte-reproducible.
    #[default]
    Off,
    Wall,
}

#[derive(Clone, Debug)]
pub struct ExperimentOptions {
    /// Independent runs that must all succeed at a population size.
    pub runs: usize,
    pub start_population: usize,
    pub max_population: usize,
    /// Bisection stops once high / low is at most this ratio.
    pub tolerance: f64,
    pub timer: Timer,
    pub epsilon: f64,
    /// Which models of the base runs enter the bias corpus.
    pub harvest: Harvest,
    pub parallel: bool,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            runs: 10,
            start_population: 32,
            max_population: 1 << 20,
            tolerance: 1.05,
            timer: Timer::Off,
            epsilon: crate::bias::DEFAULT_EPSILON,
            harvest: Harvest::AllRebuilds,
            parallel: true,
        }
    }
}

/// Makes sure a problem has a success criterion.
///
/// Exact oracles are used where they apply. Otherwise the best fitness from a
/// pre-pass of random-restart hill climbing and a few large-population runs
/// becomes the target.
pub fn ensure_success_target(problem: &mut Problem, seed: u64) -> Result<f64> {
    if let Some(opt) = problem.known_optimum() {
        return Ok(opt);
    }
    match brute_force_optimum(problem) {
        Ok(opt) => {
            problem.set_known_optimum(Some(opt));
            return Ok(opt);
        }
        Err(Error::OracleRefused(_)) => {}
        Err(e) => return Err(e),
    }
    let best = best_known_prepass(problem, seed)?;
    problem.set_known_optimum(Some(best));
    Ok(best)
}

pub fn best_known_prepass(problem: &Problem, seed: u64) -> Result<f64> {
    let n = problem.n();
    let mut rng = RngStream::new(derive_seed(seed, &[0x5052_4550]));
    let mut best = f64::NEG_INFINITY;
    for _ in 0..200 {
        let mut s = Solution::new((0..n).map(|_| rand::Rng::gen_range(&mut rng, 0..2u8)).collect());
        match problem.instance() {
            Instance::VertexCover(_) => {
                problem.improve(&mut s, &mut rng)?;
            }
            _ => {
                problem.adf().evaluate(&mut s)?;
                s = hill_climb(problem, s).solution;
            }
        }
        best = best.max(s.fit());
    }
    let cfg = HboaConfig {
        population_size: (16 * n).max(64),
        max_iterations: Some(2 * n),
        ..Default::default()
    };
    let mut open = problem.clone();
    open.set_known_optimum(None);
    for r in 0..3 {
        let mut run_rng = rng.derive(&[r]);
        best = best.max(engine::run(&open, &cfg, &mut run_rng)?.best_fitness());
    }
    Ok(best)
}
