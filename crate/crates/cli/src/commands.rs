use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use hboa::bias::{accumulate_stats, compute_pk, load_bias, pool_across_sizes, save_bias, BiasMode};
use hboa::distance::compute_distance_matrix;
use hboa::engine::{self, Harvest};
use hboa::harness::{
    bisect_population, crossvalidate, cross_size_transfer, ensure_success_target,
    ensure_suite_targets, generate_suite, parse_report_csv, render_summary_csv,
    ExperimentOptions, ExperimentReport, Family, NamedProblem, Timer,
};
use hboa::model::{load_model_dumps, save_model_dumps};
use hboa::problems::{brute_force_optimum, load_instance, save_instance, InstanceFormat};
use hboa::rng::derive_seed;
use hboa::{HboaConfig, Problem, RngStream};

use crate::{
    AlgoArgs, BisectArgs, CliError, ExperimentArgs, FamilyArg, FamilyParams, GenArgs, HarvestArg,
    HarvestArgs, ModeArg, ReportArgs, RunArgs, TimerArg, TransferArgs, XvalArgs,
};

type Result<T = ()> = std::result::Result<T, CliError>;

const EXPERIMENT_LABEL: u64 = 0x4558_5045;
const TARGET_LABEL: u64 = 0x5441_5247;

fn family(kind: FamilyArg, n: Option<usize>, c: f64, p: f64) -> Result<Family> {
    let n = n.unwrap_or(match kind {
        FamilyArg::Sg => 27,
        FamilyArg::Mvc => 40,
        FamilyArg::Maxsat => 30,
    });
    Ok(match kind {
        FamilyArg::Sg => {
            let side = (n as f64).cbrt().round() as usize;
            if side * side * side != n {
                return Err(CliError::Usage(format!("spin glass size {n} is not a cube")));
            }
            Family::SpinGlass { side }
        }
        FamilyArg::Mvc => Family::VertexCover { n, c },
        FamilyArg::Maxsat => Family::MaxSat { nv: n, p },
    })
}

fn family_from(kind: FamilyArg, params: &FamilyParams) -> Result<Family> {
    family(kind, params.n, params.c, params.p)
}

fn config_from(algo: &AlgoArgs) -> HboaConfig {
    HboaConfig {
        max_iterations: algo.max_iterations,
        rts_window: algo.rts_window,
        offspring_fraction: algo.offspring_fraction,
        sporadic: algo.sporadic,
        ..HboaConfig::default()
    }
}

fn harvest_of(h: HarvestArg) -> Harvest {
    match h {
        HarvestArg::Final => Harvest::Final,
        HarvestArg::All => Harvest::AllRebuilds,
    }
}

fn options_from(exp: &ExperimentArgs) -> Result<ExperimentOptions> {
    if exp.runs == 0 || exp.start_population < 2 || exp.tolerance <= 1.0 {
        return Err(CliError::Core(hboa::Error::Config(
            "need runs >= 1, start population >= 2 and tolerance > 1".into(),
        )));
    }
    Ok(ExperimentOptions {
        runs: exp.runs,
        start_population: exp.start_population,
        max_population: exp.max_population,
        tolerance: exp.tolerance,
        timer: match exp.timer {
            TimerArg::Off => Timer::Off,
            TimerArg::Wall => Timer::Wall,
        },
        epsilon: exp.epsilon,
        harvest: harvest_of(exp.harvest),
        parallel: true,
    })
}

fn load_bias_arg(path: &Option<PathBuf>) -> Result<Option<Arc<hboa::BiasTable>>> {
    Ok(match path {
        Some(p) => Some(Arc::new(load_bias(p)?)),
        None => None,
    })
}

fn apply_optimum(problem: &mut Problem, policy: &str, seed: u64) -> Result {
    match policy {
        "auto" => {
            ensure_success_target(problem, seed)?;
        }
        "oracle" => {
            if problem.known_optimum().is_none() {
                let opt = brute_force_optimum(problem)?;
                problem.set_known_optimum(Some(opt));
            }
        }
        "none" => problem.set_known_optimum(None),
        value => {
            let v: f64 = value
                .parse()
                .map_err(|_| CliError::Usage(format!("bad --optimum '{value}'")))?;
            problem.set_known_optimum(Some(v));
        }
    }
    Ok(())
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

pub fn gen(a: GenArgs) -> Result {
    let fam = family_from(a.family, &a.params)?;
    std::fs::create_dir_all(&a.out)?;
    let suite = generate_suite(&fam, a.count, a.seed)?;
    for named in &suite {
        let inst = named.problem.instance();
        let ext = InstanceFormat::of(inst).expect("generated instances have a file format").extension();
        save_instance(inst, a.out.join(format!("{}.{ext}", named.id)))?;
    }
    println!("wrote {} instances to {}", suite.len(), a.out.display());
    Ok(())
}

pub fn run(a: RunArgs) -> Result {
    let mut problem = load_instance(&a.instance, None)?;
    apply_optimum(&mut problem, &a.optimum, a.seed)?;
    let mut cfg = config_from(&a.algo)
        .with_population(a.population)
        .with_bias(load_bias_arg(&a.bias)?, a.kappa);
    if a.models.is_some() {
        cfg.harvest = harvest_of(a.harvest);
    }
    let mut rng = RngStream::new(a.seed);
    let result = engine::run(&problem, &cfg, &mut rng)?;
    if let Some(p) = &a.trace {
        std::fs::write(p, result.render_trace())?;
    }
    if let Some(p) = &a.models {
        save_model_dumps(&result.models, p)?;
    }
    println!(
        "success={} iterations={} evaluations={} best={}",
        u8::from(result.success),
        result.iterations,
        result.evaluations,
        result.best_fitness()
    );
    Ok(())
}

pub fn bisect(a: BisectArgs) -> Result {
    let mut problem = load_instance(&a.instance, None)?;
    apply_optimum(&mut problem, &a.optimum, a.seed)?;
    let mut cfg = config_from(&a.algo).with_bias(load_bias_arg(&a.bias)?, a.kappa);
    let opts = options_from(&a.exp)?;
    if a.models.is_some() {
        cfg.harvest = opts.harvest;
    }
    let b = bisect_population(&problem, &cfg, &opts, a.seed)?;
    if let Some(p) = &a.models {
        let dumps: Vec<_> = b.runs.iter().flat_map(|r| r.models.iter().cloned()).collect();
        save_model_dumps(&dumps, p)?;
    }
    let mut text = String::from("hboa-bisect v1\n");
    let _ = writeln!(text, "population {}", b.population);
    let _ = writeln!(
        text,
        "last_fail {}",
        b.last_fail.map_or_else(|| "NA".to_string(), |n| n.to_string())
    );
    let tried: Vec<String> = b.tried.iter().map(|n| n.to_string()).collect();
    let _ = writeln!(text, "tried {}", tried.join(","));
    let _ = writeln!(text, "mean_evaluations {}", b.mean_evaluations());
    write_or_print(&a.out, &text)
}

pub fn harvest(a: HarvestArgs) -> Result {
    if a.models.len() != a.instances.len() {
        return Err(CliError::Usage(format!(
            "{} model files but {} instances",
            a.models.len(),
            a.instances.len()
        )));
    }
    let mut dumps = Vec::new();
    let mut dmats = Vec::new();
    for (m, i) in a.models.iter().zip(&a.instances) {
        dumps.push(load_model_dumps(m)?);
        dmats.push(compute_distance_matrix(load_instance(i, None)?.adf()));
    }
    let pairs: Vec<_> = dumps
        .iter()
        .zip(&dmats)
        .flat_map(|(ds, dm)| ds.iter().map(move |d| (d, dm)))
        .collect();
    let pooled = matches!(a.mode, ModeArg::Pooled);
    let stats = accumulate_stats(&pairs, pooled)?;
    let table = if pooled {
        pool_across_sizes(&stats, a.epsilon)?
    } else {
        compute_pk(&stats, a.epsilon)?
    };
    save_bias(&table, &a.out)?;
    println!("{} models -> {}", stats.len(), a.out.display());
    Ok(())
}

fn load_dir(dir: &Path) -> Result<Vec<NamedProblem>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| ["sg3", "graph", "cnf"].contains(&e))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Usage(format!("no instance files in {}", dir.display())));
    }
    files
        .iter()
        .map(|f| {
            let id = f.file_stem().and_then(|s| s.to_str()).unwrap_or("instance").to_string();
            Ok(NamedProblem::new(id, load_instance(f, None)?))
        })
        .collect()
}

fn suite_for(
    dir: &Option<PathBuf>,
    fam: impl FnOnce() -> Result<Family>,
    count: usize,
    seed: u64,
) -> Result<Vec<NamedProblem>> {
    let mut suite = match dir {
        Some(d) => load_dir(d)?,
        None => generate_suite(&fam()?, count, seed)?,
    };
    ensure_suite_targets(&mut suite, seed)?;
    Ok(suite)
}

fn finish_report(report: &ExperimentReport, out: &Path) -> Result {
    report.save_csv(out)?;
    for k in report.kappas() {
        let s = report.summary(k);
        println!(
            "kappa={k} instances={} median_speedup_evals={:.4} improved={:.2}",
            s.count, s.median_speedup_evals, s.improved_fraction
        );
    }
    Ok(())
}

pub fn xval(a: XvalArgs) -> Result {
    let suite = suite_for(&a.instances, || family_from(a.problem, &a.params), a.count, a.seed)?;
    let opts = options_from(&a.exp)?;
    let mut cfg = config_from(&a.algo);
    let sporadic = cfg.sporadic;
    cfg.sporadic = false;
    let seed = derive_seed(a.seed, &[EXPERIMENT_LABEL]);
    let report = crossvalidate(&suite, a.folds, &a.kappa, sporadic, &cfg, &opts, seed)?;
    finish_report(&report, &a.out)
}

pub fn transfer(a: TransferArgs) -> Result {
    let sources = suite_for(
        &a.source,
        || family(a.problem, a.source_n, a.c, a.p),
        a.count,
        a.seed,
    )?;
    let target_seed = derive_seed(a.seed, &[TARGET_LABEL]);
    let targets = suite_for(
        &a.target,
        || family(a.problem, a.target_n, a.c, a.p),
        a.count,
        target_seed,
    )?;
    let opts = options_from(&a.exp)?;
    let mode = match a.mode {
        ModeArg::Pooled => BiasMode::Pooled,
        ModeArg::PerTarget => BiasMode::PerTarget,
    };
    let report = cross_size_transfer(
        &sources,
        &targets,
        &a.kappa,
        mode,
        &config_from(&a.algo),
        &opts,
        derive_seed(a.seed, &[EXPERIMENT_LABEL]),
        derive_seed(target_seed, &[EXPERIMENT_LABEL]),
    )?;
    finish_report(&report, &a.out)
}

pub fn report(a: ReportArgs) -> Result {
    let mut rows = Vec::new();
    for p in &a.input {
        let text = std::fs::read_to_string(p)?;
        rows.extend(parse_report_csv(p, &text)?);
    }
    let summary = render_summary_csv(&rows);
    match &a.out {
        Some(p) => std::fs::write(p, &summary)?,
        None => print!("{summary}"),
    }
    Ok(())
}
