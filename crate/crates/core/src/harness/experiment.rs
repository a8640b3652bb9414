use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::bisect::bisect_population;
use super::report::{ExperimentReport, ReportRow, Speedup};
use super::{ExperimentOptions, Timer};
use crate::bias::{accumulate_stats, compute_pk, pool_across_sizes, BiasMode, SplitStats};
use crate::distance::compute_distance_matrix;
use crate::engine::{run, Harvest, HboaConfig};
use crate::rng::derive_seed;
use crate::{BiasTable, Error, ModelDump, Problem, Result, RngStream};

const FOLD_LABEL: u64 = 0x464f_4c44;

/// A problem instance with a stable identifier for reports.
#[derive(Clone, Debug)]
pub struct NamedProblem {
    pub id: String,
    pub problem: Problem,
}

impl NamedProblem {
    pub fn new(id: impl Into<String>, problem: Problem) -> Self {
        Self {
            id: id.into(),
            problem,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Treatment {
    pub kappa: f64,
    pub sporadic: bool,
}

/// Result of bisecting one instance under one configuration.
#[derive(Clone, Debug)]
pub struct InstanceOutcome {
    pub population: usize,
    pub mean_evaluations: f64,
    pub mean_time_ms: f64,
    /// Models harvested from the successful runs at `population`.
    pub models: Vec<ModelDump>,
}

fn instance_seed(master: u64, index: usize) -> u64 {
    derive_seed(master, &[index as u64])
}

fn collect<T: Send, F>(count: usize, parallel: bool, job: F) -> Result<Vec<T>>
where
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    if parallel {
        (0..count).into_par_iter().map(job).collect()
    } else {
        (0..count).map(job).collect()
    }
}

fn outcome(
    problem: &Problem,
    cfg: &HboaConfig,
    opts: &ExperimentOptions,
    seed: u64,
) -> Result<InstanceOutcome> {
    let b = bisect_population(problem, cfg, opts, seed)?;
    Ok(InstanceOutcome {
        population: b.population,
        mean_evaluations: b.mean_evaluations(),
        mean_time_ms: b.mean_time_ms(),
        models: b.runs.into_iter().flat_map(|r| r.models).collect(),
    })
}

/// Unbiased bisection on every instance, harvesting models per
/// `opts.harvest`. Results keep the instance order.
pub fn measure_base(
    instances: &[NamedProblem],
    template: &HboaConfig,
    opts: &ExperimentOptions,
    seed: u64,
) -> Result<Vec<InstanceOutcome>> {
    let mut cfg = template.clone().with_bias(None, 0.0);
    cfg.sporadic = false;
    cfg.harvest = opts.harvest;
    collect(instances.len(), opts.parallel, |i| {
        outcome(&instances[i].problem, &cfg, opts, instance_seed(seed, i))
    })
}

/// Mean wall time of the base configuration at its bisected population,
/// re-run with the bisection seeds.
fn retime_base(
    problem: &Problem,
    template: &HboaConfig,
    base: &InstanceOutcome,
    opts: &ExperimentOptions,
    seed: u64,
) -> Result<f64> {
    let mut cfg = template.clone().with_bias(None, 0.0).with_population(base.population);
    cfg.sporadic = false;
    cfg.harvest = Harvest::None;
    let mut total = 0.0;
    for r in 0..opts.runs {
        let mut rng = RngStream::new(derive_seed(seed, &[base.population as u64, r as u64]));
        total += run(problem, &cfg, &mut rng)?.elapsed_ms;
    }
    Ok(total / opts.runs as f64)
}

/// Bisects one instance under a treatment. Under the wall timer the base
/// runs are re-timed in the same job so both times share a context.
#[allow(clippy::too_many_arguments)]
pub fn measure_treatment(
    named: &NamedProblem,
    index: usize,
    base: &InstanceOutcome,
    table: Option<Arc<BiasTable>>,
    treatment: Treatment,
    fold: Option<usize>,
    template: &HboaConfig,
    opts: &ExperimentOptions,
    seed: u64,
) -> Result<ReportRow> {
    let iseed = instance_seed(seed, index);
    let base_time = match opts.timer {
        Timer::Off => None,
        Timer::Wall => Some(retime_base(&named.problem, template, base, opts, iseed)?),
    };
    let mut cfg = template.clone().with_bias(table, treatment.kappa);
    cfg.sporadic = treatment.sporadic;
    cfg.harvest = Harvest::None;
    let treated = outcome(&named.problem, &cfg, opts, iseed)?;
    let biased_time = base_time.map(|_| treated.mean_time_ms);
    let speedup = Speedup::from_measurements(
        base.mean_evaluations,
        treated.mean_evaluations,
        base_time,
        biased_time,
    );
    Ok(ReportRow {
        instance_id: named.id.clone(),
        problem: named.problem.instance().family().to_string(),
        n: named.problem.n(),
        kappa: treatment.kappa,
        fold,
        base_evals: base.mean_evaluations,
        biased_evals: treated.mean_evaluations,
        base_time_ms: base_time,
        biased_time_ms: biased_time,
        speedup_evals: speedup.evaluations,
        speedup_time: speedup.time,
        time_floored: speedup.time_floored,
        improved: treated.mean_evaluations < base.mean_evaluations,
        sporadic: treatment.sporadic,
        base_population: base.population,
        biased_population: treated.population,
    })
}

/// Random, nearly equal split of `count` instances into `folds` folds.
pub fn assign_folds(count: usize, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds == 0 || folds > count {
        return Err(Error::invalid(format!(
            "{folds} folds over {count} instances leaves a fold empty"
        )));
    }
    let mut order: Vec<usize> = (0..count).collect();
    order.shuffle(&mut RngStream::new(derive_seed(seed, &[FOLD_LABEL])));
    let mut fold_of = vec![0; count];
    for (pos, &i) in order.iter().enumerate() {
        fold_of[i] = pos % folds;
    }
    Ok(fold_of)
}

/// Split histograms of the harvested models of the chosen instances.
pub fn harvest_stats(
    instances: &[NamedProblem],
    base: &[InstanceOutcome],
    chosen: impl IntoIterator<Item = usize>,
    allow_mixed: bool,
) -> Result<SplitStats> {
    let mut pairs = Vec::new();
    let chosen: Vec<usize> = chosen.into_iter().collect();
    let dmats: Vec<_> = chosen
        .iter()
        .map(|&i| compute_distance_matrix(instances[i].problem.adf()))
        .collect();
    for (&i, dm) in chosen.iter().zip(&dmats) {
        for m in &base[i].models {
            pairs.push((m, dm));
        }
    }
    if pairs.is_empty() {
        return Err(Error::invalid("no harvested models; enable harvesting on the base runs"));
    }
    accumulate_stats(&pairs, allow_mixed)
}

/// Crossvalidated bias experiment: every fold is biased by a per-target table
/// computed from the models of the other folds only.
pub fn crossvalidate(
    instances: &[NamedProblem],
    folds: usize,
    kappas: &[f64],
    sporadic: bool,
    template: &HboaConfig,
    opts: &ExperimentOptions,
    seed: u64,
) -> Result<ExperimentReport> {
    let base = measure_base(instances, template, opts, seed)?;
    crossvalidate_with_base(instances, &base, folds, kappas, sporadic, template, opts, seed)
}

/// As [`crossvalidate`], reusing base outcomes from [`measure_base`] with the
/// same instances, options and seed.
#[allow(clippy::too_many_arguments)]
pub fn crossvalidate_with_base(
    instances: &[NamedProblem],
    base: &[InstanceOutcome],
    folds: usize,
    kappas: &[f64],
    sporadic: bool,
    template: &HboaConfig,
    opts: &ExperimentOptions,
    seed: u64,
) -> Result<ExperimentReport> {
    crossvalidate_impl(instances, base, folds, kappas, sporadic, template, opts, seed, None)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn crossvalidate_impl(
    instances: &[NamedProblem],
    base: &[InstanceOutcome],
    folds: usize,
    kappas: &[f64],
    sporadic: bool,
    template: &HboaConfig,
    opts: &ExperimentOptions,
    seed: u64,
    table_override: Option<Arc<BiasTable>>,
) -> Result<ExperimentReport> {
    if base.len() != instances.len() {
        return Err(Error::invalid("base outcomes do not match the instances"));
    }
    let fold_of = assign_folds(instances.len(), folds, seed)?;
    let mut sources = Vec::with_capacity(folds);
    let mut tables = Vec::with_capacity(folds);
    for f in 0..folds {
        let others: Vec<usize> = (0..instances.len()).filter(|&i| fold_of[i] != f).collect();
        let held: BTreeSet<&str> = (0..instances.len())
            .filter(|&i| fold_of[i] == f)
            .map(|i| instances[i].id.as_str())
            .collect();
        if let Some(i) = others.iter().find(|&&i| held.contains(instances[i].id.as_str())) {
            return Err(Error::InvalidState(format!(
                "instance id {} appears on both sides of fold {f}",
                instances[*i].id
            )));
        }
        let table = match &table_override {
            Some(t) => t.clone(),
            None => Arc::new(compute_pk(
                &harvest_stats(instances, base, others.iter().copied(), false)?,
                opts.epsilon,
            )?),
        };
        sources.push(others.iter().map(|&i| instances[i].id.clone()).collect());
        tables.push(table);
    }
    let jobs: Vec<(f64, usize)> = kappas
        .iter()
        .flat_map(|&k| (0..instances.len()).map(move |i| (k, i)))
        .collect();
    let rows = collect(jobs.len(), opts.parallel, |job| {
        let (kappa, i) = jobs[job];
        let f = fold_of[i];
        measure_treatment(
            &instances[i],
            i,
            &base[i],
            Some(tables[f].clone()),
            Treatment { kappa, sporadic },
            Some(f),
            template,
            opts,
            seed,
        )
    })?;
    Ok(ExperimentReport {
        rows,
        sporadic,
        fold_of,
        bias_sources: sources,
    })
}

/// Injects a fixed table into every fold; used to check that a neutral table
/// leaves results unchanged.
#[doc(hidden)]
#[allow(clippy::too_many_arguments)]
pub fn crossvalidate_with_table(
    instances: &[NamedProblem],
    base: &[InstanceOutcome],
    folds: usize,
    kappas: &[f64],
    table: Arc<BiasTable>,
    template: &HboaConfig,
    opts: &ExperimentOptions,
    seed: u64,
) -> Result<ExperimentReport> {
    crossvalidate_impl(instances, base, folds, kappas, false, template, opts, seed, Some(table))
}

/// Bias harvested from one instance set applied to another, typically larger,
/// one. Per-target tables only work when both sides have the same size.
#[allow(clippy::too_many_arguments)]
pub fn cross_size_transfer(
    sources: &[NamedProblem],
    targets: &[NamedProblem],
    kappas: &[f64],
    mode: BiasMode,
    template: &HboaConfig,
    opts: &ExperimentOptions,
    source_seed: u64,
    target_seed: u64,
) -> Result<ExperimentReport> {
    let source_base = measure_base(sources, template, opts, source_seed)?;
    let table = transfer_table(sources, &source_base, targets, mode, opts)?;
    let target_base = measure_base(targets, template, opts, target_seed)?;
    cross_size_transfer_with_base(targets, &target_base, table, kappas, template, opts, target_seed)
}

/// The bias table a transfer experiment applies, checked against every target.
pub fn transfer_table(
    sources: &[NamedProblem],
    source_base: &[InstanceOutcome],
    targets: &[NamedProblem],
    mode: BiasMode,
    opts: &ExperimentOptions,
) -> Result<Arc<BiasTable>> {
    let pooled = mode == BiasMode::Pooled;
    let stats = harvest_stats(sources, source_base, 0..sources.len(), pooled)?;
    let table = match mode {
        BiasMode::Pooled => pool_across_sizes(&stats, opts.epsilon)?,
        BiasMode::PerTarget => compute_pk(&stats, opts.epsilon)?,
    };
    for t in targets {
        table.check_compatible(t.problem.n())?;
    }
    Ok(Arc::new(table))
}

pub fn cross_size_transfer_with_base(
    targets: &[NamedProblem],
    target_base: &[InstanceOutcome],
    table: Arc<BiasTable>,
    kappas: &[f64],
    template: &HboaConfig,
    opts: &ExperimentOptions,
    target_seed: u64,
) -> Result<ExperimentReport> {
    for t in targets {
        table.check_compatible(t.problem.n())?;
    }
    let jobs: Vec<(f64, usize)> = kappas
        .iter()
        .flat_map(|&k| (0..targets.len()).map(move |i| (k, i)))
        .collect();
    let rows = collect(jobs.len(), opts.parallel, |job| {
        let (kappa, i) = jobs[job];
        measure_treatment(
            &targets[i],
            i,
            &target_base[i],
            Some(table.clone()),
            Treatment {
                kappa,
                sporadic: false,
            },
            None,
            template,
            opts,
            target_seed,
        )
    })?;
    Ok(ExperimentReport {
        rows,
        sporadic: false,
        fold_of: Vec::new(),
        bias_sources: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_are_nearly_equal() {
        let f = assign_folds(23, 10, 5).unwrap();
        let mut sizes = [0; 10];
        for &x in &f {
            sizes[x] += 1;
        }
        assert!(sizes.iter().all(|&s| s == 2 || s == 3));
        assert_eq!(f, assign_folds(23, 10, 5).unwrap());
    }

    #[test]
    fn empty_fold_rejected() {
        assert!(matches!(assign_folds(5, 10, 1), Err(Error::InvalidInput(_))));
        assert!(matches!(assign_folds(5, 0, 1), Err(Error::InvalidInput(_))));
    }
}
